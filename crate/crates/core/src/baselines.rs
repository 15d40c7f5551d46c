//! Gaussian-input benchmarks: waterfilling precoder and log-det mutual
//! information.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMat, Real, C};

/// Waterfilling precoder and its power allocation.
#[derive(Clone, Debug)]
pub struct WaterfillingSolution<T: Real> {
    /// `V_H[:, :N_s] · diag(√p)`.
    pub f_opt: CMat<T>,
    pub powers: Vec<T>,
    /// Water level.
    pub mu: T,
    /// Leading `N_s` singular values of `H` (zero-padded beyond its rank).
    pub singular_values: Vec<T>,
}

/// Power allocation `pᵢ = (μ − σ²/λᵢ²)₊` with `Σpᵢ = P` over the given
/// singular values (sorted descending). Zero modes receive no power.
pub fn waterfill_powers<T: Real>(singular_values: &[T], power: T, sigma2: T) -> (Vec<T>, T) {
    let floors: Vec<Option<T>> = singular_values
        .iter()
        .map(|&l| (l > T::zero()).then(|| sigma2 / (l * l)))
        .collect();
    let mut live: Vec<(usize, T)> = floors
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.map(|f| (i, f)))
        .collect();
    live.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut mu = T::zero();
    let mut active = 0;
    let mut acc = T::zero();
    for (k, &(_, floor)) in live.iter().enumerate() {
        acc += floor;
        let cand = (power + acc) / T::from_count(k + 1);
        if cand > floor {
            mu = cand;
            active = k + 1;
        } else {
            break;
        }
    }
    let mut powers = vec![T::zero(); singular_values.len()];
    for &(i, floor) in live.iter().take(active) {
        powers[i] = (mu - floor).max(T::zero());
    }
    (powers, mu)
}

/// Waterfilling over the `N_s` strongest eigenmodes of `H`.
pub fn waterfilling<T: Real>(h: &CMat<T>, power: T, sigma2: T, n_s: usize) -> Result<WaterfillingSolution<T>> {
    let n_t = h.ncols();
    if n_s == 0 || n_s > n_t {
        return Err(Error::dim(format!("need 1 <= N_s <= N_t = {n_t}, got N_s = {n_s}")));
    }
    if !(power > T::zero()) || !(sigma2 > T::zero()) {
        return Err(Error::InvalidConfig("power and noise variance must be positive".into()));
    }
    if linalg::max_abs_c(h) == T::zero() {
        return Err(Error::Degenerate("channel matrix is zero".into()));
    }
    let (s, v) = linalg::full_right_svd(h);
    let lambdas: Vec<T> = s.iter().take(n_s).copied().collect();
    let (powers, mu) = waterfill_powers(&lambdas, power, sigma2);
    let mut f_opt = v.columns(0, n_s).into_owned();
    for (j, p) in powers.iter().enumerate() {
        let a = C::new(p.sqrt(), T::zero());
        f_opt.column_mut(j).iter_mut().for_each(|z| *z *= a);
    }
    Ok(WaterfillingSolution {
        f_opt,
        powers,
        mu,
        singular_values: lambdas,
    })
}

/// `log₂ det(I + σ⁻² H Q Hᴴ)` for a PSD transmit covariance `Q`.
pub fn gaussian_mi<T: Real>(h: &CMat<T>, q: &CMat<T>, sigma2: T) -> Result<T> {
    let n_t = h.ncols();
    if q.shape() != (n_t, n_t) {
        return Err(Error::dim(format!(
            "covariance is {}x{}, expected {n_t}x{n_t}",
            q.nrows(),
            q.ncols()
        )));
    }
    if !(sigma2 > T::zero()) {
        return Err(Error::InvalidConfig("noise variance must be positive".into()));
    }
    let herm = (q + q.adjoint()) * C::new(T::lit(0.5), T::zero());
    if linalg::max_abs_c(&(q - &herm)) > T::lit(1e-9) {
        return Err(Error::InvalidCovariance { min_eig: f64::NAN });
    }
    if n_t > 0 {
        let (vals, _) = linalg::hermitian_eigen(&herm);
        let min = *vals.last().expect("nonempty");
        if min < T::lit(-1e-9) {
            return Err(Error::InvalidCovariance { min_eig: min.as_f64() });
        }
    }
    let n_r = h.nrows();
    let inv = C::new(T::one() / sigma2, T::zero());
    let m = CMat::identity(n_r, n_r) + h * herm * h.adjoint() * inv;
    let m = (&m + m.adjoint()) * C::new(T::lit(0.5), T::zero());
    let v = linalg::log2_det_hpd(&m).ok_or(Error::InvalidCovariance { min_eig: f64::NAN })?;
    Ok(v.max(T::zero()))
}

/// [`gaussian_mi`] with `Q = F Fᴴ`.
pub fn gaussian_mi_precoder<T: Real>(h: &CMat<T>, f: &CMat<T>, sigma2: T) -> Result<T> {
    gaussian_mi(h, &(f * f.adjoint()), sigma2)
}

/// First `N_rf` columns of the (phase-normalized) right singular basis of `H`.
pub fn right_singular_basis<T: Real>(h: &CMat<T>, n_rf: usize) -> Result<CMat<T>> {
    if n_rf > h.ncols() {
        return Err(Error::dim(format!("N_rf = {n_rf} exceeds N_t = {}", h.ncols())));
    }
    let (_, v) = linalg::full_right_svd(h);
    Ok(v.columns(0, n_rf).into_owned())
}
