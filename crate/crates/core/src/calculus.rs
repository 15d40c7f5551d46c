//! Closed-form Wirtinger gradient and Hessian of the eliminated objective,
//! their chain-rule images in phase coordinates, and finite-difference
//! oracles used to check them.
//!
//! Notation: `F` is the analog precoder, `F⁺ = (FᴴF)⁻¹Fᴴ`,
//! `Z₁ = I − F F⁺`, `Z₂ = F⁺ F_opt`, and `f(F) = ‖F_opt − F F⁺ F_opt‖²_F`.
//! The complex gradient is `∂f/∂F* = −Z₁ F_opt Z₂ᴴ`. In phase coordinates
//! `ψ(Φ_RF) = f((1/√N_t) e^{jΦ_RF})` and `φ(Φ) = ψ([0; Φ])`.

use crate::error::{Error, Result};
use crate::factorization::{analog_from_full_phases, pinv_gram, PhaseMatrix};
use crate::linalg::{self, conj};
use crate::scalar::{CMat, Real, RMat, C};

/// Default cap on `N_t · N_rf` for dense Hessian materialization.
pub const DEFAULT_HESSIAN_CAP: usize = 4096;

/// Commutation matrix `K_{m,n}` with `K vec(A) = vec(Aᵀ)` for `A ∈ ℂ^{m×n}`.
pub fn commutation_matrix<T: Real>(m: usize, n: usize) -> RMat<T> {
    let mut k = RMat::zeros(m * n, m * n);
    for j in 0..n {
        for i in 0..m {
            k[(j + i * n, i + j * m)] = T::one();
        }
    }
    k
}

/// `X · K_{m,n}` without forming `K`: column `i + j·m` of the result is column
/// `j + i·n` of `X`.
fn right_commute<T: Real>(x: &CMat<T>, m: usize, n: usize) -> CMat<T> {
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for j in 0..n {
        for i in 0..m {
            out.set_column(i + j * m, &x.column(j + i * n));
        }
    }
    out
}

/// Shared intermediate quantities for one analog precoder.
struct Intermediates<T: Real> {
    f_rf: CMat<T>,
    pinv: CMat<T>,
    gram_inv: CMat<T>,
    z1: CMat<T>,
    z2: CMat<T>,
    /// `Z₁ F_opt Z₂ᴴ`, the negated complex gradient.
    a: CMat<T>,
    /// `Z₁ F_opt`.
    z1_fopt: CMat<T>,
}

impl<T: Real> Intermediates<T> {
    fn new(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<Self> {
        if f_rf.nrows() != f_opt.nrows() {
            return Err(Error::dim(format!(
                "analog precoder has {} rows, target has {}",
                f_rf.nrows(),
                f_opt.nrows()
            )));
        }
        let pinv = pinv_gram(f_rf)?;
        let gram_inv = &pinv * pinv.adjoint();
        let n_t = f_rf.nrows();
        let z1 = CMat::identity(n_t, n_t) - f_rf * &pinv;
        let z2 = &pinv * f_opt;
        let z1_fopt = &z1 * f_opt;
        let a = &z1_fopt * z2.adjoint();
        Ok(Self {
            f_rf: f_rf.clone(),
            pinv,
            gram_inv,
            z1,
            z2,
            a,
            z1_fopt,
        })
    }
}

/// Complex gradient `∂f/∂F* = −Z₁ F_opt Z₂ᴴ`.
pub fn grad_f<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<CMat<T>> {
    Ok(-Intermediates::new(f_rf, f_opt)?.a)
}

/// The two independent blocks of the complex Hessian of `f`.
///
/// `vec(d ∂f/∂F*) = H_{F,F*} vec(dF) + H_{F*,F*} vec(dF*)`; the remaining
/// blocks are their conjugates.
#[derive(Clone, Debug)]
pub struct ComplexHessianBlocks<T: Real> {
    pub h_f_fstar: CMat<T>,
    pub h_fstar_fstar: CMat<T>,
}

impl<T: Real> ComplexHessianBlocks<T> {
    /// Full `2×2` block complex Hessian
    /// `[[H_{F,F*}, H_{F*,F*}], [H*_{F*,F*}, H*_{F,F*}]]`.
    pub fn full(&self) -> CMat<T> {
        let n = self.h_f_fstar.nrows();
        let mut out = CMat::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&self.h_f_fstar);
        out.view_mut((0, n), (n, n)).copy_from(&self.h_fstar_fstar);
        out.view_mut((n, 0), (n, n)).copy_from(&conj(&self.h_fstar_fstar));
        out.view_mut((n, n), (n, n)).copy_from(&conj(&self.h_f_fstar));
        out
    }
}

fn check_cap(n_t: usize, n_rf: usize, cap: usize) -> Result<()> {
    let dim = n_t * n_rf;
    if dim > cap {
        return Err(Error::HessianCapExceeded { dim, cap });
    }
    Ok(())
}

/// Closed-form Hessian blocks of `f`. `H_{F*,F*}` uses the form obtained by
/// vectorizing the two `dFᴴ` terms separately:
/// `[(Z₁F_optZ₂ᴴ)ᵀ ⊗ (F⁺)ᴴ] K + [(F⁺)* ⊗ Z₁F_optZ₂ᴴ] K`.
pub fn hessian_blocks_f<T: Real>(
    f_rf: &CMat<T>,
    f_opt: &CMat<T>,
    cap: usize,
) -> Result<ComplexHessianBlocks<T>> {
    let (n_t, n_rf) = f_rf.shape();
    check_cap(n_t, n_rf, cap)?;
    let im = Intermediates::new(f_rf, f_opt)?;
    Ok(blocks_from(&im))
}

fn blocks_from<T: Real>(im: &Intermediates<T>) -> ComplexHessianBlocks<T> {
    let (n_t, n_rf) = im.f_rf.shape();
    let z2z2h = &im.z2 * im.z2.adjoint();
    let outer = &im.z1_fopt * im.z1_fopt.adjoint();
    let h_f_fstar = z2z2h.transpose().kronecker(&im.z1) - im.gram_inv.transpose().kronecker(&outer);

    let pinv_h = im.pinv.adjoint();
    let first = im.a.transpose().kronecker(&pinv_h);
    let second = conj(&im.pinv).kronecker(&im.a);
    let h_fstar_fstar = right_commute(&(first + second), n_t, n_rf);
    ComplexHessianBlocks {
        h_f_fstar,
        h_fstar_fstar,
    }
}

/// `H_{F*,F*}` in its symmetrized form
/// `[(Z₁F_optZ₂ᴴ)ᵀ ⊗ (F⁺)ᴴ] K + Kᵀ [(Z₁F_optZ₂ᴴ)ᵀ ⊗ (F⁺)ᴴ]ᵀ`.
/// Algebraically equal to the block returned by [`hessian_blocks_f`].
pub fn hessian_fstar_fstar_symmetrized<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<CMat<T>> {
    let (n_t, n_rf) = f_rf.shape();
    let im = Intermediates::new(f_rf, f_opt)?;
    let k = linalg::complexify(&commutation_matrix::<T>(n_t, n_rf));
    let x = im.a.transpose().kronecker(&im.pinv.adjoint());
    Ok(&x * &k + k.transpose() * x.transpose())
}

/// `G = ∂f/∂F* ∘ F*` for the analog precoder built from `phi_rf`.
fn hadamard_g<T: Real>(grad: &CMat<T>, f_rf: &CMat<T>) -> CMat<T> {
    grad.zip_map(f_rf, |g, f| g * f.conj())
}

/// `∇ψ(Φ_RF) = 2 Im[∂f/∂F* ∘ F*]` through the Gram-matrix pseudoinverse.
pub fn grad_psi<T: Real>(phi_rf: &RMat<T>, f_opt: &CMat<T>) -> Result<RMat<T>> {
    let f_rf = analog_from_full_phases(phi_rf);
    let grad = grad_f(&f_rf, f_opt)?;
    let two = T::lit(2.0);
    Ok(hadamard_g(&grad, &f_rf).map(|z| two * z.im))
}

/// `∇ψ(Φ_RF) = 2 Im[(Q Z − F_opt) Zᴴ R⁻ᴴ ∘ F*]` with `F = Q R`, `Z = Qᴴ F_opt`.
pub fn grad_psi_qr<T: Real>(phi_rf: &RMat<T>, f_opt: &CMat<T>) -> Result<RMat<T>> {
    let f_rf = analog_from_full_phases(phi_rf);
    grad_psi_qr_analog(&f_rf, f_opt)
}

pub(crate) fn grad_psi_qr_analog<T: Real>(f_rf: &CMat<T>, f_opt: &CMat<T>) -> Result<RMat<T>> {
    if f_rf.nrows() != f_opt.nrows() {
        return Err(Error::dim("analog precoder and target row counts differ"));
    }
    let (q, r) = linalg::guarded_qr(f_rf)?;
    let z = q.adjoint() * f_opt;
    let r_inv = linalg::upper_triangular_inverse(&r);
    let grad = (&q * &z - f_opt) * z.adjoint() * r_inv.adjoint();
    let two = T::lit(2.0);
    Ok(hadamard_g(&grad, f_rf).map(|z| two * z.im))
}

/// `∇²ψ(Φ_RF) = 2 Re[M] − 2 diag(vec Re[G])` with
/// `M = H_{F,F*} ∘ vec(F*)vec(F)ᵀ − H_{F*,F*} ∘ vec(F*)vec(F)ᴴ`.
pub fn hess_psi<T: Real>(phi_rf: &RMat<T>, f_opt: &CMat<T>, cap: usize) -> Result<RMat<T>> {
    let (n_t, n_rf) = phi_rf.shape();
    check_cap(n_t, n_rf, cap)?;
    let f_rf = analog_from_full_phases(phi_rf);
    let im = Intermediates::new(&f_rf, f_opt)?;
    let blocks = blocks_from(&im);
    let grad = -im.a.clone();
    let g = hadamard_g(&grad, &f_rf);
    let fv = linalg::vec_c(&f_rf);
    let n = fv.len();
    let two = T::lit(2.0);
    let mut h = RMat::zeros(n, n);
    for b in 0..n {
        let fb = fv[b];
        for a in 0..n {
            let fa_c = fv[a].conj();
            let m = blocks.h_f_fstar[(a, b)] * fa_c * fb
                - blocks.h_fstar_fstar[(a, b)] * fa_c * fb.conj();
            h[(a, b)] = two * m.re;
        }
    }
    let gv = linalg::vec_c(&g);
    for a in 0..n {
        h[(a, a)] -= two * gv[a].re;
    }
    Ok(h)
}

/// Gradient of `φ`: drops the first row of `∇ψ`.
pub fn reduce_gradient<T: Real>(grad_psi: &RMat<T>) -> Result<RMat<T>> {
    if grad_psi.nrows() < 1 {
        return Err(Error::dim("gradient needs at least one row"));
    }
    Ok(grad_psi.rows(1, grad_psi.nrows() - 1).into_owned())
}

/// Hessian of `φ`: drops rows and columns `N_t·ℓ` (0-based), `ℓ = 0..N_rf`.
pub fn reduce_hessian<T: Real>(hess_psi: &RMat<T>, n_t: usize, n_rf: usize) -> Result<RMat<T>> {
    let n = n_t * n_rf;
    if hess_psi.shape() != (n, n) || n_t == 0 {
        return Err(Error::dim(format!(
            "Hessian is {}x{}, expected {n}x{n} for N_t={n_t}, N_rf={n_rf}",
            hess_psi.nrows(),
            hess_psi.ncols()
        )));
    }
    let keep: Vec<usize> = (0..n).filter(|i| i % n_t != 0).collect();
    Ok(RMat::from_fn(keep.len(), keep.len(), |i, j| {
        hess_psi[(keep[i], keep[j])]
    }))
}

/// `∇φ(Φ)` through the QR path.
pub fn grad_phi<T: Real>(phi: &PhaseMatrix<T>, f_opt: &CMat<T>) -> Result<RMat<T>> {
    if phi.n_t() != f_opt.nrows() {
        return Err(Error::dim("phase matrix rows do not match N_t - 1"));
    }
    reduce_gradient(&grad_psi_qr(&phi.full(), f_opt)?)
}

/// `∇²φ(Φ)` from the closed-form Hessian of `ψ`.
pub fn hess_phi<T: Real>(phi: &PhaseMatrix<T>, f_opt: &CMat<T>, cap: usize) -> Result<RMat<T>> {
    if phi.n_t() != f_opt.nrows() {
        return Err(Error::dim("phase matrix rows do not match N_t - 1"));
    }
    reduce_hessian(&hess_psi(&phi.full(), f_opt, cap)?, phi.n_t(), phi.n_rf())
}

/// Central finite differences.
pub mod fd {
    use super::*;

    /// Default step.
    pub const STEP: f64 = 1e-5;

    /// Gradient of a real function of a real matrix.
    pub fn gradient<T: Real>(f: impl Fn(&RMat<T>) -> T, x: &RMat<T>, h: T) -> RMat<T> {
        let two_h = h + h;
        let mut out = RMat::zeros(x.nrows(), x.ncols());
        let mut xp = x.clone();
        for k in 0..x.len() {
            let orig = xp[k];
            xp[k] = orig + h;
            let fp = f(&xp);
            xp[k] = orig - h;
            let fm = f(&xp);
            xp[k] = orig;
            out[k] = (fp - fm) / two_h;
        }
        out
    }

    /// Jacobian of a matrix-valued gradient; column `k` is `∂vec(g)/∂vec(x)_k`.
    pub fn jacobian<T: Real>(g: impl Fn(&RMat<T>) -> RMat<T>, x: &RMat<T>, h: T) -> RMat<T> {
        let two_h = h + h;
        let n = x.len();
        let mut out = RMat::zeros(0, 0);
        let mut xp = x.clone();
        for k in 0..n {
            let orig = xp[k];
            xp[k] = orig + h;
            let gp = g(&xp);
            xp[k] = orig - h;
            let gm = g(&xp);
            xp[k] = orig;
            if k == 0 {
                out = RMat::zeros(gp.len(), n);
            }
            let col = (gp - gm) / two_h;
            out.set_column(k, &linalg::vec_r(&col));
        }
        out
    }

    /// Complex gradient `∂f/∂X* = ½(∂f/∂Re X + j ∂f/∂Im X)` of a real function.
    pub fn complex_gradient<T: Real>(f: impl Fn(&CMat<T>) -> T, x: &CMat<T>, h: T) -> CMat<T> {
        let two_h = h + h;
        let half = T::lit(0.5);
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        let mut xp = x.clone();
        for k in 0..x.len() {
            let orig = xp[k];
            xp[k] = orig + C::new(h, T::zero());
            let fp = f(&xp);
            xp[k] = orig - C::new(h, T::zero());
            let fm = f(&xp);
            xp[k] = orig + C::new(T::zero(), h);
            let gp = f(&xp);
            xp[k] = orig - C::new(T::zero(), h);
            let gm = f(&xp);
            xp[k] = orig;
            let d_re = (fp - fm) / two_h;
            let d_im = (gp - gm) / two_h;
            out[k] = C::new(half * d_re, half * d_im);
        }
        out
    }

    /// Wirtinger Hessian blocks of a complex-gradient map `g(X) = ∂f/∂X*`:
    /// column `k` of `H_{X,X*}` is `½(∂g/∂Re x_k − j ∂g/∂Im x_k)` and of
    /// `H_{X*,X*}` is `½(∂g/∂Re x_k + j ∂g/∂Im x_k)`.
    pub fn wirtinger_blocks<T: Real>(
        g: impl Fn(&CMat<T>) -> CMat<T>,
        x: &CMat<T>,
        h: T,
    ) -> (CMat<T>, CMat<T>) {
        let two_h = h + h;
        let half = C::new(T::lit(0.5), T::zero());
        let j = C::new(T::zero(), T::one());
        let n = x.len();
        let mut h1 = CMat::zeros(n, n);
        let mut h2 = CMat::zeros(n, n);
        let mut xp = x.clone();
        for k in 0..n {
            let orig = xp[k];
            xp[k] = orig + C::new(h, T::zero());
            let gp = linalg::vec_c(&g(&xp));
            xp[k] = orig - C::new(h, T::zero());
            let gm = linalg::vec_c(&g(&xp));
            xp[k] = orig + C::new(T::zero(), h);
            let ip = linalg::vec_c(&g(&xp));
            xp[k] = orig - C::new(T::zero(), h);
            let imn = linalg::vec_c(&g(&xp));
            xp[k] = orig;
            let inv = C::new(T::one() / two_h, T::zero());
            let d_re = (gp - gm) * inv;
            let d_im = (ip - imn) * inv;
            h1.set_column(k, &((&d_re - &d_im * j) * half));
            h2.set_column(k, &((&d_re + &d_im * j) * half));
        }
        (h1, h2)
    }
}

/// Finite-difference agreement for one random instance.
#[derive(Clone, Debug)]
pub struct GradCheck {
    pub n_t: usize,
    pub n_rf: usize,
    pub n_s: usize,
    pub seed: u64,
    /// Frobenius norm of the closed-form `∇φ`.
    pub grad_norm: f64,
    /// Max abs deviation of `∇φ` from central differences of `φ`.
    pub grad_err: f64,
    /// Max abs deviation of `∇²φ` from central differences of `∇φ`, if computed.
    pub hess_err: Option<f64>,
}

/// Checks `∇φ` (and `∇²φ` when `with_hessian`) against central differences
/// of the direct residual at a random phase point and random target.
pub fn grad_check_instance(
    n_t: usize,
    n_rf: usize,
    n_s: usize,
    seed: u64,
    with_hessian: bool,
) -> Result<GradCheck> {
    use crate::factorization::residual_direct;
    use crate::random;
    let phi = random::seeded_phases::<f64>(n_t, n_rf, seed);
    let f_opt = random::seeded_complex_gaussian::<f64>(n_t, n_s, seed.wrapping_add(1 << 32));
    let objective = |p: &RMat<f64>| {
        let full = PhaseMatrix::new(p.clone()).expect("finite").full();
        residual_direct(&analog_from_full_phases(&full), &f_opt).unwrap_or(f64::NAN)
    };
    let grad = grad_phi(&phi, &f_opt)?;
    let fd_grad = fd::gradient(objective, phi.as_matrix(), fd::STEP);
    let grad_err = linalg::max_abs_r(&(&grad - fd_grad));
    let hess_err = if with_hessian {
        let hess = hess_phi(&phi, &f_opt, DEFAULT_HESSIAN_CAP)?;
        let gfun = |p: &RMat<f64>| {
            let pm = PhaseMatrix::new(p.clone()).expect("finite");
            grad_phi(&pm, &f_opt).unwrap_or_else(|_| RMat::from_element(p.nrows(), p.ncols(), f64::NAN))
        };
        let fd_hess = fd::jacobian(gfun, phi.as_matrix(), fd::STEP);
        Some(linalg::max_abs_r(&(&hess - fd_hess)))
    } else {
        None
    };
    Ok(GradCheck {
        n_t,
        n_rf,
        n_s,
        seed,
        grad_norm: grad.norm(),
        grad_err,
        hess_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{phases_to_analog, residual_direct};
    use crate::testutil::{random_cmat, random_phases};

    fn max_abs(m: &CMat<f64>) -> f64 {
        linalg::max_abs_c(m)
    }

    #[test]
    fn commutation_small_cases() {
        assert_eq!(commutation_matrix::<f64>(1, 1), RMat::from_element(1, 1, 1.0));
        let k = commutation_matrix::<f64>(2, 2);
        let expect = RMat::from_row_slice(
            4,
            4,
            &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
        );
        assert_eq!(k, expect);
    }

    #[test]
    fn commutation_transposes_vec() {
        let k = linalg::complexify(&commutation_matrix::<f64>(3, 2));
        for seed in 0..10 {
            let a = random_cmat(3, 2, seed);
            let lhs = &k * linalg::vec_c(&a);
            let rhs = linalg::vec_c(&a.transpose());
            assert!((lhs - rhs).norm() == 0.0);
        }
        let kt = commutation_matrix::<f64>(3, 2).transpose();
        assert_eq!(kt, commutation_matrix::<f64>(2, 3));
    }

    #[test]
    fn right_commute_matches_dense_product() {
        let x = random_cmat(6, 6, 3);
        let k = linalg::complexify(&commutation_matrix::<f64>(3, 2));
        assert!((right_commute(&x, 3, 2) - &x * k).norm() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_in_range() {
        let f_rf = phases_to_analog(&random_phases(6, 3, 1), 6).unwrap();
        let f_opt = &f_rf * random_cmat(3, 2, 2);
        assert!(max_abs(&grad_f(&f_rf, &f_opt).unwrap()) < 1e-12);
        let square = phases_to_analog(&random_phases(4, 4, 3), 4).unwrap();
        assert!(max_abs(&grad_f(&square, &random_cmat(4, 2, 4)).unwrap()) < 1e-12);
    }

    #[test]
    fn complex_gradient_matches_fd() {
        for seed in 0..20 {
            let f_rf = phases_to_analog(&random_phases(6, 3, seed), 6).unwrap();
            let f_opt = random_cmat(6, 2, 500 + seed);
            let g = grad_f(&f_rf, &f_opt).unwrap();
            let fd = fd::complex_gradient(|x| residual_direct(x, &f_opt).unwrap(), &f_rf, 1e-5);
            let gnorm = g.norm();
            assert!(max_abs(&(&g - fd)) < 1e-6 * (1.0 + gnorm), "seed {seed}");
        }
    }

    #[test]
    fn hessian_blocks_vanish_in_trivial_cases() {
        let f_rf = phases_to_analog(&random_phases(5, 2, 7), 5).unwrap();
        let b = hessian_blocks_f(&f_rf, &CMat::zeros(5, 2), DEFAULT_HESSIAN_CAP).unwrap();
        assert!(max_abs(&b.h_f_fstar) < 1e-14 && max_abs(&b.h_fstar_fstar) < 1e-14);
        let square = phases_to_analog(&random_phases(3, 3, 8), 3).unwrap();
        let b = hessian_blocks_f(&square, &random_cmat(3, 2, 9), DEFAULT_HESSIAN_CAP).unwrap();
        assert!(max_abs(&b.h_f_fstar) < 1e-12 && max_abs(&b.h_fstar_fstar) < 1e-12);
    }

    #[test]
    fn hessian_blocks_match_fd() {
        for seed in 0..5 {
            let f_rf = phases_to_analog(&random_phases(4, 2, seed), 4).unwrap();
            let f_opt = random_cmat(4, 2, 40 + seed);
            let b = hessian_blocks_f(&f_rf, &f_opt, DEFAULT_HESSIAN_CAP).unwrap();
            let (h1, h2) = fd::wirtinger_blocks(|x| grad_f(x, &f_opt).unwrap(), &f_rf, 1e-5);
            assert!(max_abs(&(&b.h_f_fstar - h1)) < 1e-4, "seed {seed}");
            assert!(max_abs(&(&b.h_fstar_fstar - h2)) < 1e-4, "seed {seed}");
        }
    }

    #[test]
    fn h_f_fstar_is_hermitian() {
        let f_rf = phases_to_analog(&random_phases(5, 3, 2), 5).unwrap();
        let b = hessian_blocks_f(&f_rf, &random_cmat(5, 2, 3), DEFAULT_HESSIAN_CAP).unwrap();
        assert!(max_abs(&(&b.h_f_fstar - b.h_f_fstar.adjoint())) < 1e-9);
        let full = b.full();
        assert_eq!(full.shape(), (30, 30));
        assert!(max_abs(&(&full - full.adjoint())) < 1e-9);
    }

    #[test]
    fn two_forms_of_fstar_block_agree() {
        for seed in 0..5 {
            let f_rf = phases_to_analog(&random_phases(5, 2, seed), 5).unwrap();
            let f_opt = random_cmat(5, 2, 70 + seed);
            let b = hessian_blocks_f(&f_rf, &f_opt, DEFAULT_HESSIAN_CAP).unwrap();
            let alt = hessian_fstar_fstar_symmetrized(&f_rf, &f_opt).unwrap();
            assert!(max_abs(&(&b.h_fstar_fstar - alt)) < 1e-10);
        }
    }

    #[test]
    fn hessian_cap_enforced() {
        let f_rf = phases_to_analog(&random_phases(5, 2, 1), 5).unwrap();
        let err = hessian_blocks_f(&f_rf, &random_cmat(5, 1, 1), 8).unwrap_err();
        assert!(matches!(err, Error::HessianCapExceeded { dim: 10, cap: 8 }));
        assert!(hess_psi(&random_phases(5, 2, 1).full(), &random_cmat(5, 1, 1), 8).is_err());
    }

    #[test]
    fn psi_gradient_columns_sum_to_zero() {
        for seed in 0..20 {
            let phi_rf = random_phases(7, 3, seed).full().map(|x| x + 0.3);
            let g = grad_psi(&phi_rf, &random_cmat(7, 2, 900 + seed)).unwrap();
            for col in g.column_iter() {
                assert!(col.sum().abs() < 1e-9);
            }
            let gq = grad_psi_qr(&phi_rf, &random_cmat(7, 2, 900 + seed)).unwrap();
            for col in gq.column_iter() {
                assert!(col.sum().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn psi_gradient_matches_fd() {
        for seed in 0..10 {
            let mut phi_rf = random_phases(6, 3, seed).full();
            phi_rf.row_mut(0).fill(0.7);
            let f_opt = random_cmat(6, 2, 300 + seed);
            let g = grad_psi(&phi_rf, &f_opt).unwrap();
            let fd = fd::gradient(
                |p| residual_direct(&analog_from_full_phases(p), &f_opt).unwrap(),
                &phi_rf,
                1e-5,
            );
            assert!(linalg::max_abs_r(&(&g - fd)) < 1e-6 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn fast_and_slow_gradients_agree() {
        for seed in 0..20 {
            let phi_rf = random_phases(8, 4, seed).full();
            let f_opt = random_cmat(8, 2, 77 + seed);
            let slow = grad_psi(&phi_rf, &f_opt).unwrap();
            let fast = grad_psi_qr(&phi_rf, &f_opt).unwrap();
            assert!(linalg::max_abs_r(&(slow - fast)) < 1e-9);
        }
    }

    #[test]
    fn gradient_zero_at_exact_factorization() {
        let phi = random_phases(6, 3, 5);
        let f_rf = phases_to_analog(&phi, 6).unwrap();
        let f_opt = &f_rf * random_cmat(3, 2, 6);
        let g = grad_psi_qr(&phi.full(), &f_opt).unwrap();
        assert!(linalg::max_abs_r(&g) < 1e-10);
        assert!(linalg::max_abs_r(&grad_psi(&phi.full(), &f_opt).unwrap()) < 1e-10);
    }

    #[test]
    fn psi_hessian_symmetric_and_annihilates_column_shifts() {
        for seed in 0..5 {
            let phi_rf = random_phases(5, 3, seed).full();
            let f_opt = random_cmat(5, 2, 10 + seed);
            let h = hess_psi(&phi_rf, &f_opt, DEFAULT_HESSIAN_CAP).unwrap();
            assert!(linalg::max_abs_r(&(&h - h.transpose())) < 1e-9);
            let r = crate::random::seeded_phases::<f64>(2, 3, 100 + seed);
            let shift = RMat::from_fn(5, 3, |_, j| r.as_matrix()[(0, j)]);
            let hv = &h * linalg::vec_r(&shift);
            assert!(hv.amax() < 1e-8);
        }
    }

    #[test]
    fn psi_hessian_matches_fd() {
        for seed in 0..5 {
            let phi_rf = random_phases(4, 2, seed).full();
            let f_opt = random_cmat(4, 2, 20 + seed);
            let h = hess_psi(&phi_rf, &f_opt, DEFAULT_HESSIAN_CAP).unwrap();
            let fd = fd::jacobian(|p| grad_psi(p, &f_opt).unwrap(), &phi_rf, 1e-5);
            assert!(linalg::max_abs_r(&(h - fd)) < 1e-4);
        }
    }

    #[test]
    fn phi_reductions() {
        let phi = random_phases(5, 3, 4);
        let f_opt = random_cmat(5, 2, 8);
        let g = grad_phi(&phi, &f_opt).unwrap();
        assert_eq!(g.shape(), (4, 3));
        let fd = fd::gradient(
            |p| {
                let pm = PhaseMatrix::new(p.clone()).unwrap();
                residual_direct(&phases_to_analog(&pm, 5).unwrap(), &f_opt).unwrap()
            },
            phi.as_matrix(),
            1e-5,
        );
        assert!(linalg::max_abs_r(&(&g - fd)) < 1e-6 * (1.0 + g.norm()));
        let h = hess_phi(&phi, &f_opt, DEFAULT_HESSIAN_CAP).unwrap();
        assert_eq!(h.shape(), (12, 12));
        assert!(linalg::max_abs_r(&(&h - h.transpose())) < 1e-9);
        assert!(reduce_hessian(&RMat::<f64>::zeros(10, 10), 5, 3).is_err());
    }

    #[test]
    fn reduce_hessian_drops_pinned_indices() {
        let h = RMat::<f64>::from_fn(6, 6, |i, j| (10 * i + j) as f64);
        let r = reduce_hessian(&h, 3, 2).unwrap();
        // kept indices 1, 2, 4, 5
        assert_eq!(r[(0, 0)], 11.0);
        assert_eq!(r[(1, 2)], 24.0);
        assert_eq!(r[(3, 3)], 55.0);
    }

    #[test]
    fn grad_check_instance_reports_small_errors() {
        let r = grad_check_instance(6, 3, 2, 42, true).unwrap();
        assert!(r.grad_err < 1e-6 * (1.0 + r.grad_norm));
        assert!(r.hess_err.unwrap() < 1e-4);
    }
}
