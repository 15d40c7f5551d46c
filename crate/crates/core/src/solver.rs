//! Cautious inverse-BFGS minimization of the eliminated residual `φ(Φ)` over
//! the free analog phases, with a safeguarded descent direction and a
//! doubling/halving backtracking line search.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::calculus::{self, DEFAULT_HESSIAN_CAP};
use crate::error::{Error, Result};
use crate::factorization::{
    digital_from_analog, digital_regularized, objective_qr, phases_to_analog, relative_phases,
    FactorizationProblem, HybridPrecoder, PhaseMatrix,
};
use crate::linalg;
use crate::scalar::{CMat, Real, RMat, RVec};

/// How the initial inverse-Hessian approximation is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum B0Mode {
    /// Eigenvalue-floored inverse of the exact Hessian at the start point.
    ExactHessian,
    Identity,
}

/// Tuning constants of the cautious BFGS iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Curvature threshold of the cautious update.
    pub eta_bfgs: f64,
    /// Threshold on `gᵀBg` below which the steepest-descent fallback is used.
    pub delta_bfgs: f64,
    /// Armijo slope fraction.
    pub beta_bfgs: f64,
    /// Stopping tolerance.
    pub epsilon: f64,
    /// Eigenvalue floor for the initial inverse Hessian.
    pub delta_min: f64,
    /// First trial step.
    pub rho0: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub max_doublings: usize,
    pub b0_mode: B0Mode,
    /// Largest `N_t·N_rf` for which the exact Hessian is formed.
    pub hessian_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta_bfgs: 1e-6,
            delta_bfgs: 1e-6,
            beta_bfgs: 0.5,
            epsilon: 1e-4,
            delta_min: 1e-4,
            rho0: 1.0,
            max_iter: 1000,
            max_halvings: 60,
            max_doublings: 60,
            b0_mode: B0Mode::ExactHessian,
            hessian_cap: DEFAULT_HESSIAN_CAP,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta_bfgs", self.eta_bfgs),
            ("delta_bfgs", self.delta_bfgs),
            ("epsilon", self.epsilon),
            ("delta_min", self.delta_min),
            ("rho0", self.rho0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beta_bfgs > 0.0 && self.beta_bfgs <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "beta_bfgs must lie in (0, 0.5], got {}",
                self.beta_bfgs
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIter,
    LineSearchStall,
}

/// Iteration record of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `φ` at the start point followed by one value per accepted step.
    pub objective_trace: Vec<f64>,
    pub grad_norm_final: f64,
    pub stop_reason: StopReason,
    /// Seconds.
    pub wall_time: f64,
    /// Final analog precoder too ill-conditioned for an exact least-squares
    /// digital part; the returned `F_BB` is ridge regularized.
    pub ill_conditioned: bool,
    /// `‖F_RF F_BB‖²_F` of the returned precoder.
    pub transmit_power: f64,
    /// `‖F_opt‖²_F`.
    pub target_power: f64,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the start point")
    }

    /// Equality of everything except the wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            wall_time: 0.0,
            ..self.clone()
        } == Self {
            wall_time: 0.0,
            ..other.clone()
        }
    }
}

/// `Φ₀ = [∠U_F]_{2:N_t} − 1·[∠U_F]_1`; zero entries have phase 0.
pub fn init_phase<T: Real>(u_f: &CMat<T>) -> PhaseMatrix<T> {
    relative_phases(u_f)
}

/// First `N_rf` left singular vectors of `F_opt`, extended by the next
/// singular vectors of the full basis when `rank(F_opt) < N_rf`.
pub fn default_analog_basis<T: Real>(f_opt: &CMat<T>, n_rf: usize) -> CMat<T> {
    let (_, u) = linalg::full_left_svd(f_opt);
    u.columns(0, n_rf.min(u.ncols())).into_owned()
}

/// `U diag(1 / max(|λᵢ|, δ_min)) Uᵀ` from the eigen-decomposition of a
/// symmetric matrix.
pub fn inverse_hessian_from<T: Real>(hess: &RMat<T>, delta_min: T) -> RMat<T> {
    let sym = (hess + hess.transpose()) * T::lit(0.5);
    let (vals, u) = linalg::symmetric_eigen(&sym);
    let inv = RVec::from_iterator(vals.len(), vals.iter().map(|l| T::one() / l.abs().max(delta_min)));
    let scaled = RMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * inv[j]);
    let b = &scaled * u.transpose();
    (&b + b.transpose()) * T::lit(0.5)
}

/// Initial inverse-Hessian approximation. Falls back to the identity (with a
/// warning) when the exact Hessian cannot be formed.
pub fn init_inverse_hessian<T: Real>(
    phi0: &PhaseMatrix<T>,
    f_opt: &CMat<T>,
    config: &SolverConfig,
) -> RMat<T> {
    let n = phi0.as_matrix().len();
    if config.b0_mode == B0Mode::Identity {
        return RMat::identity(n, n);
    }
    match calculus::hess_phi(phi0, f_opt, config.hessian_cap) {
        Ok(h) if h.iter().all(|x| x.is_finite()) => inverse_hessian_from(&h, T::lit(config.delta_min)),
        Ok(_) => {
            log::warn!("non-finite Hessian at start point, using identity B0");
            RMat::identity(n, n)
        }
        Err(e) => {
            log::warn!("exact initial Hessian unavailable ({e}), using identity B0");
            RMat::identity(n, n)
        }
    }
}

/// `−B g` when `gᵀBg > δ`, otherwise `−g`.
pub fn descent_direction<T: Real>(b: &RMat<T>, grad: &RVec<T>, delta: T) -> RVec<T> {
    let bg = b * grad;
    if grad.dot(&bg) > delta {
        -bg
    } else {
        -grad.clone()
    }
}

/// Accepted step of the line search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchStep<T> {
    pub rho: T,
    /// Objective at the accepted point.
    pub value: T,
}

/// Doubling/halving backtracking search on a one-dimensional slice.
///
/// `eval(ρ)` returns the objective at `Φ + ρS` (or `None` if it cannot be
/// evaluated, which counts as a rejection). A step is acceptable when
/// `eval(ρ) ≤ f0 + ρβ·slope`. If `rho_prev` is acceptable it is doubled while
/// the doubled step stays acceptable (at most `max_doublings` times);
/// otherwise it is halved until acceptable, failing after `max_halvings`.
pub fn line_search_with<T: Real>(
    mut eval: impl FnMut(T) -> Option<T>,
    f0: T,
    slope: T,
    rho_prev: T,
    beta: T,
    max_doublings: usize,
    max_halvings: usize,
) -> Result<LineSearchStep<T>> {
    let mut accept = |rho: T| -> Option<T> {
        let v = eval(rho)?;
        (v.is_finite() && v <= f0 + rho * beta * slope).then_some(v)
    };
    let two = T::lit(2.0);
    if let Some(v) = accept(rho_prev) {
        let mut best = LineSearchStep { rho: rho_prev, value: v };
        for _ in 0..max_doublings {
            let trial = best.rho * two;
            match accept(trial) {
                Some(v) => best = LineSearchStep { rho: trial, value: v },
                None => break,
            }
        }
        return Ok(best);
    }
    let mut rho = rho_prev;
    for _ in 0..max_halvings {
        rho /= two;
        if let Some(v) = accept(rho) {
            return Ok(LineSearchStep { rho, value: v });
        }
    }
    Err(Error::LineSearchStall {
        halvings: max_halvings,
    })
}

/// Line search on `φ` along `S` from `Φ`.
pub fn line_search<T: Real>(
    phi: &PhaseMatrix<T>,
    direction: &RVec<T>,
    rho_prev: T,
    problem: &FactorizationProblem<T>,
    config: &SolverConfig,
) -> Result<LineSearchStep<T>> {
    let x = linalg::vec_r(phi.as_matrix());
    let f0 = objective_qr(phi, problem)?;
    let grad = linalg::vec_r(&calculus::grad_phi(phi, problem.f_opt())?);
    let (rows, cols) = phi.as_matrix().shape();
    line_search_with(
        |rho| {
            let trial = PhaseMatrix::new(linalg::unvec_r(&(&x + direction * rho), rows, cols)).ok()?;
            objective_qr(&trial, problem).ok()
        },
        f0,
        grad.dot(direction),
        rho_prev,
        T::lit(config.beta_bfgs),
        config.max_doublings,
        config.max_halvings,
    )
}

/// Inverse BFGS update `(I − ρsyᵀ)B(I − ρysᵀ) + ρssᵀ`, `ρ = 1/yᵀs`, applied
/// only when `yᵀs / (‖s‖²‖g‖) > η`.
pub fn cautious_update<T: Real>(b: &RMat<T>, s: &RVec<T>, y: &RVec<T>, grad_norm: T, eta: T) -> RMat<T> {
    let ys = y.dot(s);
    let ss = s.dot(s);
    let denom = ss * grad_norm;
    if !(ys > T::zero()) || !(denom > T::zero()) || !(ys / denom > eta) {
        return b.clone();
    }
    let r = T::one() / ys;
    let by = b * y;
    let yby = y.dot(&by);
    // (I − r s yᵀ) B (I − r y sᵀ) + r s sᵀ as three rank-one updates
    let mut out = b.clone();
    out.ger(-r, &by, s, T::one());
    out.ger(-r, s, &by, T::one());
    out.ger(r * r * yby + r, s, s, T::one());
    out
}

/// Runs the solver from the default start derived from `U_F` (the leading
/// left singular vectors of `F_opt` when `u_f` is `None`).
pub fn solve<T: Real>(
    problem: &FactorizationProblem<T>,
    config: &SolverConfig,
    u_f: Option<&CMat<T>>,
) -> Result<(HybridPrecoder<T>, SolveReport)> {
    let phi0 = match u_f {
        Some(u) => {
            if u.shape() != (problem.n_t(), problem.n_rf()) {
                return Err(Error::dim(format!(
                    "U_F is {}x{}, expected {}x{}",
                    u.nrows(),
                    u.ncols(),
                    problem.n_t(),
                    problem.n_rf()
                )));
            }
            init_phase(u)
        }
        None => init_phase(&default_analog_basis(problem.f_opt(), problem.n_rf())),
    };
    solve_from(problem, config, phi0)
}

/// Runs the solver from an explicit start point.
pub fn solve_from<T: Real>(
    problem: &FactorizationProblem<T>,
    config: &SolverConfig,
    phi0: PhaseMatrix<T>,
) -> Result<(HybridPrecoder<T>, SolveReport)> {
    config.validate()?;
    let start = Instant::now();
    if phi0.n_t() != problem.n_t() || phi0.n_rf() != problem.n_rf() {
        return Err(Error::dim("start phases do not match the problem dimensions"));
    }
    let (rows, cols) = phi0.as_matrix().shape();
    let f_opt = problem.f_opt();
    let eps = config.epsilon;
    let beta = T::lit(config.beta_bfgs);

    let mut phi = phi0;
    let mut x = linalg::vec_r(phi.as_matrix());
    let mut f = objective_qr(&phi, problem)?;
    let mut g = linalg::vec_r(&calculus::grad_phi(&phi, f_opt)?);
    let mut trace = vec![f.as_f64()];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIter;

    if g.norm().as_f64() < eps {
        stop = StopReason::Tolerance;
    } else {
        let mut b = init_inverse_hessian(&phi, f_opt, config);
        let mut rho_prev = T::lit(config.rho0);
        let delta = T::lit(config.delta_bfgs);
        let eta = T::lit(config.eta_bfgs);
        for _ in 0..config.max_iter {
            let dir = descent_direction(&b, &g, delta);
            let slope = g.dot(&dir);
            let step = line_search_with(
                |rho| {
                    let trial = PhaseMatrix::new(linalg::unvec_r(&(&x + &dir * rho), rows, cols)).ok()?;
                    objective_qr(&trial, problem).ok()
                },
                f,
                slope,
                rho_prev,
                beta,
                config.max_doublings,
                config.max_halvings,
            );
            let step = match step {
                Ok(s) => s,
                Err(_) => {
                    stop = StopReason::LineSearchStall;
                    break;
                }
            };
            let s = &dir * step.rho;
            let x_new = &x + &s;
            let phi_new = PhaseMatrix::new(linalg::unvec_r(&x_new, rows, cols))?;
            let g_new = match calculus::grad_phi(&phi_new, f_opt) {
                Ok(gm) => linalg::vec_r(&gm),
                Err(_) => {
                    stop = StopReason::LineSearchStall;
                    break;
                }
            };
            let y = &g_new - &g;
            b = cautious_update(&b, &s, &y, g.norm(), eta);

            let f_new = step.value;
            let rel = ((f_new - f) / f_new.max(T::lit(1e-300))).abs();
            iterations += 1;
            trace.push(f_new.as_f64());
            x = x_new;
            phi = phi_new;
            f = f_new;
            g = g_new;
            rho_prev = step.rho;
            if rel.min(g.norm()).as_f64() < eps {
                stop = StopReason::Tolerance;
                break;
            }
        }
    }

    let f_rf = phases_to_analog(&phi, problem.n_t())?;
    let (f_bb, ill_conditioned) = match digital_from_analog(&f_rf, f_opt) {
        Ok(bb) => (bb, false),
        Err(Error::IllConditionedAnalog { .. }) => (digital_regularized(&f_rf, f_opt), true),
        Err(e) => return Err(e),
    };
    let precoder = HybridPrecoder { f_rf, f_bb };
    let report = SolveReport {
        iterations,
        objective_trace: trace,
        grad_norm_final: g.norm().as_f64(),
        stop_reason: stop,
        wall_time: start.elapsed().as_secs_f64(),
        ill_conditioned,
        transmit_power: precoder.transmit_power().as_f64(),
        target_power: problem.power().as_f64(),
    };
    Ok((precoder, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use crate::testutil::{random_cmat, random_phases};
    use proptest::prelude::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        for beta in [0.0, -0.1, 0.6] {
            let c = SolverConfig {
                beta_bfgs: beta,
                ..Default::default()
            };
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        }
        let c = SolverConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn init_phase_cases() {
        let u = CMat::<f64>::from_element(4, 2, C::new(0.3, 0.0));
        assert_eq!(init_phase(&u).as_matrix(), &RMat::zeros(3, 2));
        let u = random_cmat(6, 3, 11);
        let f_rf = phases_to_analog(&init_phase(&u), 6).unwrap();
        for j in 0..3 {
            assert!((f_rf[(0, j)] - C::new(1.0 / 6f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        // column phase rotations leave the residual unchanged
        let phi = random_phases(6, 3, 12);
        let f_rf = phases_to_analog(&phi, 6).unwrap();
        let rotated = CMat::from_fn(6, 3, |i, j| f_rf[(i, j)] * C::from_polar(1.0, j as f64 + 0.4));
        let f_opt = random_cmat(6, 2, 13);
        let p = FactorizationProblem::new(f_opt.clone(), 3).unwrap();
        let a = objective_qr(&init_phase(&rotated), &p).unwrap();
        let b = crate::factorization::residual_direct(&rotated, &f_opt).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn inverse_hessian_flooring() {
        let h = RMat::from_diagonal(&RVec::from_vec(vec![2.0, -3.0, 1e-9]));
        let b = inverse_hessian_from(&h, 1e-4);
        let expect = RMat::from_diagonal(&RVec::from_vec(vec![0.5, 1.0 / 3.0, 1e4]));
        assert!((b - expect).amax() < 1e-9);
    }

    #[test]
    fn init_inverse_hessian_modes() {
        let phi = random_phases(6, 3, 1);
        let f_opt = random_cmat(6, 2, 2);
        let id = init_inverse_hessian(
            &phi,
            &f_opt,
            &SolverConfig {
                b0_mode: B0Mode::Identity,
                ..Default::default()
            },
        );
        assert_eq!(id, RMat::identity(15, 15));
        let b = init_inverse_hessian(&phi, &f_opt, &SolverConfig::default());
        assert!((&b - b.transpose()).amax() < 1e-12);
        let (vals, _) = linalg::symmetric_eigen(&b);
        assert!(*vals.last().unwrap() > 0.0);
        let capped = init_inverse_hessian(
            &phi,
            &f_opt,
            &SolverConfig {
                hessian_cap: 4,
                ..Default::default()
            },
        );
        assert_eq!(capped, RMat::identity(15, 15));
    }

    #[test]
    fn descent_direction_branches() {
        let g = RVec::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(descent_direction(&RMat::identity(3, 3), &g, 1e-6), -g.clone());
        assert_eq!(descent_direction(&RMat::zeros(3, 3), &g, 1e-6), -g.clone());
        let a = RMat::from_fn(3, 3, |i, j| ((i * 3 + j) as f64).sin());
        let spd = &a * a.transpose() + RMat::identity(3, 3) * 0.1;
        assert!(g.dot(&descent_direction(&spd, &g, 1e-6)) < 0.0);
    }

    #[test]
    fn line_search_quadratic_accepts_unit_step() {
        let step = line_search_with(|t: f64| Some((t - 1.0).powi(2)), 1.0, -2.0, 1.0, 0.5, 60, 60).unwrap();
        assert_eq!(step.rho, 1.0);
        assert_eq!(step.value, 0.0);
    }

    #[test]
    fn line_search_linear_slice_hits_doubling_cap() {
        let step = line_search_with(|t: f64| Some(-t), 0.0, -1.0, 1.0, 0.5, 7, 60).unwrap();
        assert_eq!(step.rho, 128.0);
    }

    #[test]
    fn line_search_halves_to_first_satisfier() {
        // f(t) = (t − 1)² from t = 0 with ρ_prev = 8: halving to 1 is the first member
        let step = line_search_with(|t: f64| Some((t - 1.0).powi(2)), 1.0, -2.0, 8.0, 0.5, 60, 60).unwrap();
        assert_eq!(step.rho, 1.0);
        let step = line_search_with(|t: f64| Some((t - 0.1).powi(2)), 0.01, -0.2, 1.0, 0.5, 60, 60).unwrap();
        // member iff t ≤ 0.1
        assert_eq!(step.rho, 0.0625);
        let err = line_search_with(|_t: f64| Some(1.0), 0.0, -1.0, 1.0, 0.5, 60, 5).unwrap_err();
        assert!(matches!(err, Error::LineSearchStall { halvings: 5 }));
        let step = line_search_with(|t: f64| (t < 0.3).then_some(-t), 0.0, -1.0, 1.0, 0.5, 60, 60).unwrap();
        assert_eq!(step.rho, 0.25);
    }

    #[test]
    fn cautious_update_cases() {
        let b = RMat::<f64>::identity(3, 3);
        let s = RVec::from_vec(vec![1.0, 0.0, 0.0]);
        let y = RVec::from_vec(vec![-1.0, 0.0, 0.0]);
        assert_eq!(cautious_update(&b, &s, &y, 1.0, 1e-6), b);
        let s = RVec::from_vec(vec![0.3, -0.2, 0.9]);
        assert!((cautious_update(&b, &s, &s, 1.0, 1e-6) - &b).amax() < 1e-14);
    }

    proptest! {
        #[test]
        fn cautious_update_secant_and_spd(seed in 0u64..10_000) {
            let a = random_cmat(5, 5, seed).map(|z| z.re);
            let b = &a * a.transpose() + RMat::identity(5, 5) * 0.5;
            let s = random_cmat(5, 1, seed + 1).map(|z| z.re).column(0).into_owned();
            let m = random_cmat(5, 5, seed + 2).map(|z| z.re);
            let hm = &m * m.transpose() + RMat::identity(5, 5);
            let y = &hm * &s;
            let nb = cautious_update(&b, &s, &y, 1.0, 1e-6);
            prop_assert!((&nb * &y - &s).amax() < 1e-8 * (1.0 + s.amax()));
            let (vals, _) = linalg::symmetric_eigen(&nb);
            prop_assert!(*vals.last().unwrap() > 0.0);
        }
    }

    #[test]
    fn square_analog_stops_immediately() {
        let p = FactorizationProblem::new(random_cmat(4, 2, 1), 4).unwrap();
        let (prec, rep) = solve(&p, &SolverConfig::default(), None).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.stop_reason, StopReason::Tolerance);
        assert!(rep.final_objective() < 1e-12);
        assert!(prec.residual(p.f_opt()) < 1e-12);
    }

    #[test]
    fn planted_instance_from_true_phases() {
        let phi = random_phases(8, 3, 21);
        let f_rf = phases_to_analog(&phi, 8).unwrap();
        let f_opt = &f_rf * random_cmat(3, 2, 22);
        let p = FactorizationProblem::new(f_opt, 3).unwrap();
        let (prec, rep) = solve(&p, &SolverConfig::default(), Some(&f_rf)).unwrap();
        assert!(rep.final_objective() < 1e-10);
        assert!(prec.residual(p.f_opt()) < 1e-10);
    }

    #[test]
    fn random_instances_converge() {
        let mut ok = 0;
        for seed in 0..100 {
            let p = FactorizationProblem::new(random_cmat(8, 2, 7000 + seed), 3).unwrap();
            let (prec, rep) = solve(&p, &SolverConfig::default(), None).unwrap();
            let tr = &rep.objective_trace;
            assert!(tr.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
            assert!(prec.modulus_deviation() < 1e-12);
            assert!(rep.transmit_power <= rep.target_power * (1.0 + 1e-10));
            assert!(rep.final_objective() <= tr[0]);
            assert_eq!(rep.stop_reason, StopReason::Tolerance, "seed {seed}");
            if rep.grad_norm_final < 1e-2 {
                ok += 1;
            }
        }
        // the remainder stop on relative change while the redundant third
        // analog column drifts towards rank deficiency
        assert!(ok >= 85, "{ok}/100 near-stationary");
    }

    #[test]
    fn deterministic_reports() {
        let p = FactorizationProblem::new(random_cmat(10, 3, 5), 4).unwrap();
        let (a, ra) = solve(&p, &SolverConfig::default(), None).unwrap();
        let (b, rb) = solve(&p, &SolverConfig::default(), None).unwrap();
        assert!(ra.same_outcome(&rb));
        assert_eq!(a.f_rf, b.f_rf);
        assert_eq!(a.f_bb, b.f_bb);
    }

    #[test]
    fn identity_mode_also_decreases() {
        let p = FactorizationProblem::new(random_cmat(12, 2, 9), 3).unwrap();
        let cfg = SolverConfig {
            b0_mode: B0Mode::Identity,
            ..Default::default()
        };
        let (_, rep) = solve(&p, &cfg, None).unwrap();
        assert!(rep.final_objective() < rep.objective_trace[0]);
    }

    #[test]
    fn rejects_mismatched_start() {
        let p = FactorizationProblem::new(random_cmat(6, 2, 1), 3).unwrap();
        assert!(solve(&p, &SolverConfig::default(), Some(&random_cmat(5, 3, 1))).is_err());
        assert!(solve_from(&p, &SolverConfig::default(), random_phases(6, 2, 1)).is_err());
    }

    #[test]
    fn f32_solve_runs() {
        let f_opt = random_cmat(6, 2, 3).map(|z| C::new(z.re as f32, z.im as f32));
        let p = FactorizationProblem::new(f_opt, 3).unwrap();
        let (_, rep) = solve(&p, &SolverConfig::default(), None).unwrap();
        assert!(rep.final_objective() <= rep.objective_trace[0]);
    }
}
