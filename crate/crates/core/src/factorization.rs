//! The factorization problem, the phase parametrization of the analog
//! precoder, and objective evaluation.
//!
//! For a fixed analog precoder the best digital precoder is the least-squares
//! solution `F_BB = F_RF⁺ F_opt`, so the joint problem reduces to minimizing
//! `‖F_opt − F_RF F_RF⁺ F_opt‖²_F` over the analog phases. Pinning the first
//! analog row to zero phase removes the per-column phase ambiguity.

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::linalg::{self, frob2};
use crate::scalar::{polar, CMat, Real, RMat, C};

/// Target precoder plus the number of RF chains available to realize it.
#[derive(Clone, Debug)]
pub struct FactorizationProblem<T: Real> {
    f_opt: CMat<T>,
    n_rf: usize,
}

impl<T: Real> FactorizationProblem<T> {
    /// Requires `N_s ≤ N_rf ≤ N_t` and finite entries.
    pub fn new(f_opt: CMat<T>, n_rf: usize) -> Result<Self> {
        let (n_t, n_s) = f_opt.shape();
        if n_t == 0 || n_s == 0 {
            return Err(Error::dim("target precoder must be non-empty"));
        }
        if !(n_s <= n_rf && n_rf <= n_t) {
            return Err(Error::dim(format!(
                "need N_s <= N_rf <= N_t, got N_s={n_s}, N_rf={n_rf}, N_t={n_t}"
            )));
        }
        if f_opt.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InconsistentInput(
                "target precoder has non-finite entries".into(),
            ));
        }
        Ok(Self { f_opt, n_rf })
    }

    pub fn f_opt(&self) -> &CMat<T> {
        &self.f_opt
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn n_t(&self) -> usize {
        self.f_opt.nrows()
    }

    pub fn n_s(&self) -> usize {
        self.f_opt.ncols()
    }

    /// Implied power budget `P = ‖F_opt‖²_F`.
    pub fn power(&self) -> T {
        frob2(&self.f_opt)
    }
}

/// Free analog phases: `(N_t − 1) × N_rf`; the full phase matrix is `[0; Φ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatrix<T: Real>(RMat<T>);

impl<T: Real> PhaseMatrix<T> {
    pub fn new(phi: RMat<T>) -> Result<Self> {
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InconsistentInput("phase matrix has non-finite entries".into()));
        }
        Ok(Self(phi))
    }

    pub fn zeros(n_t: usize, n_rf: usize) -> Self {
        Self(RMat::zeros(n_t.saturating_sub(1), n_rf))
    }

    pub fn as_matrix(&self) -> &RMat<T> {
        &self.0
    }

    pub fn into_inner(self) -> RMat<T> {
        self.0
    }

    pub fn n_t(&self) -> usize {
        self.0.nrows() + 1
    }

    pub fn n_rf(&self) -> usize {
        self.0.ncols()
    }

    /// Full analog phase matrix `[0; Φ]`, `N_t × N_rf`.
    pub fn full(&self) -> RMat<T> {
        let mut full = RMat::zeros(self.n_t(), self.n_rf());
        full.rows_mut(1, self.0.nrows()).copy_from(&self.0);
        full
    }
}

/// Analog/digital precoder pair.
#[derive(Clone, Debug)]
pub struct HybridPrecoder<T: Real> {
    pub f_rf: CMat<T>,
    pub f_bb: CMat<T>,
}

impl<T: Real> HybridPrecoder<T> {
    /// Overall precoder `F_RF F_BB`.
    pub fn product(&self) -> CMat<T> {
        &self.f_rf * &self.f_bb
    }

    /// `tr(F_BBᴴ F_RFᴴ F_RF F_BB)`.
    pub fn transmit_power(&self) -> T {
        frob2(&self.product())
    }

    /// `‖F_opt − F_RF F_BB‖²_F`.
    pub fn residual(&self, f_opt: &CMat<T>) -> T {
        frob2(&(f_opt - self.product()))
    }

    /// Largest deviation of an analog entry modulus from `1/√N_t`.
    pub fn modulus_deviation(&self) -> T {
        let target = T::one() / T::from_count(self.f_rf.nrows()).sqrt();
        self.f_rf
            .iter()
            .fold(T::zero(), |a, z| a.max((z.modulus() - target).abs()))
    }

    /// Rescales the digital part so that `‖F_RF F_BB‖²_F = power`.
    pub fn normalized_to(&self, power: T) -> Self {
        let current = self.transmit_power();
        if current <= T::zero() {
            return self.clone();
        }
        let s = (power / current).sqrt();
        Self {
            f_rf: self.f_rf.clone(),
            f_bb: self.f_bb.map(|z| z * s),
        }
    }
}

/// `F_RF = (1/√N_t)·exp(j[0; Φ])`.
pub fn phases_to_analog<T: Real>(phi: &PhaseMatrix<T>, n_t: usize) -> Result<CMat<T>> {
    if phi.n_t() != n_t {
        return Err(Error::dim(format!(
            "phase matrix has {} rows, expected N_t - 1 = {}",
            phi.as_matrix().nrows(),
            n_t.saturating_sub(1)
        )));
    }
    Ok(analog_from_full_phases(&phi.full()))
}

/// `(1/√N_t)·exp(jΦ_RF)` for an unrestricted `N_t × N_rf` phase matrix.
pub fn analog_from_full_phases<T: Real>(phi_rf: &RMat<T>) -> CMat<T> {
    let amp = T::one() / T::from_count(phi_rf.nrows()).sqrt();
    phi_rf.map(|p| polar(amp, p))
}

/// Phases of rows `2..N_t` of `m` relative to its first row.
///
/// Zero entries have phase 0 by convention.
pub fn relative_phases<T: Real>(m: &CMat<T>) -> PhaseMatrix<T> {
    let (n_t, n_rf) = m.shape();
    let mut phi = RMat::zeros(n_t.saturating_sub(1), n_rf);
    for j in 0..n_rf {
        let base = linalg::phase(m[(0, j)]);
        for i in 1..n_t {
            phi[(i - 1, j)] = linalg::phase(m[(i, j)]) - base;
        }
    }
    PhaseMatrix(phi)
}

/// `F_BB = F_RF⁺ F_opt`, via the thin QR of `F_RF`.
pub fn digital_from_analog<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<CMat<T>> {
    check_rows(f_rf, f_opt)?;
    let (q, r) = linalg::guarded_qr(f_rf)?;
    let mut rhs = q.adjoint() * f_opt;
    if !r.solve_upper_triangular_mut(&mut rhs) {
        return Err(Error::IllConditionedAnalog {
            cond: f64::INFINITY,
            limit: linalg::COND_LIMIT,
        });
    }
    Ok(rhs)
}

/// Ridge-regularized least squares, used only when the analog precoder is
/// numerically rank deficient.
pub fn digital_regularized<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> CMat<T> {
    let gram = f_rf.adjoint() * f_rf;
    let n = gram.nrows();
    let scale = gram.trace().re / T::from_count(n.max(1));
    let lambda = T::lit(1e-10) * scale.max(T::lit(f64::MIN_POSITIVE));
    let reg = gram + CMat::identity(n, n) * C::new(lambda, T::zero());
    let rhs = f_rf.adjoint() * f_opt;
    match reg.cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => CMat::zeros(n, f_opt.ncols()),
    }
}

/// `φ(Φ) = ‖F_opt‖² − ‖Q_RFᴴ F_opt‖²`, clamped at zero.
pub fn objective_qr<T: Real>(phi: &PhaseMatrix<T>, problem: &FactorizationProblem<T>) -> Result<T> {
    let f_rf = phases_to_analog(phi, problem.n_t())?;
    if f_rf.ncols() != problem.n_rf() {
        return Err(Error::dim(format!(
            "phase matrix has {} columns, problem has N_rf = {}",
            f_rf.ncols(),
            problem.n_rf()
        )));
    }
    analog_objective_qr(&f_rf, problem.f_opt())
}

/// QR-based residual for an explicit analog precoder.
pub fn analog_objective_qr<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<T> {
    check_rows(f_rf, f_opt)?;
    let (q, _) = linalg::guarded_qr(f_rf)?;
    let proj = q.adjoint() * f_opt;
    Ok((frob2(f_opt) - frob2(&proj)).max(T::zero()))
}

/// Reference evaluation `‖F_opt − F_RF F_RF⁺ F_opt‖²_F` with
/// `F_RF⁺ = (F_RFᴴ F_RF)⁻¹ F_RFᴴ` formed through the Gram matrix.
pub fn residual_direct<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<T> {
    check_rows(f_rf, f_opt)?;
    let pinv = pinv_gram(f_rf)?;
    let resid = f_opt - f_rf * (pinv * f_opt);
    Ok(frob2(&resid).max(T::zero()))
}

/// `(F_RFᴴ F_RF)⁻¹ F_RFᴴ` through a Cholesky solve on the Gram matrix.
pub fn pinv_gram<T: Real>(f_rf: &CMat<T>) -> Result<CMat<T>> {
    linalg::guarded_qr(f_rf)?;
    let gram = f_rf.adjoint() * f_rf;
    let ch = gram.cholesky().ok_or(Error::IllConditionedAnalog {
        cond: f64::INFINITY,
        limit: linalg::COND_LIMIT,
    })?;
    Ok(ch.solve(&f_rf.adjoint()))
}

fn check_rows<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<()> {
    if f_rf.nrows() != f_opt.nrows() {
        return Err(Error::dim(format!(
            "analog precoder has {} rows, target has {}",
            f_rf.nrows(),
            f_opt.nrows()
        )));
    }
    Ok(())
}
