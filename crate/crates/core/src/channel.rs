//! Narrowband multipath channel with half-wavelength uniform linear arrays.
//!
//! `H = A_r diag(α) A_tᴴ`, with the `√(N_r N_t / L)` normalization folded
//! into `α` so the decomposition holds exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{polar, CMat, CVec, Real, C};

/// One multipath channel realization together with its algebraic structure.
#[derive(Clone, Debug)]
pub struct ChannelRealization<T: Real> {
    /// `N_r × N_t` channel matrix.
    pub h: CMat<T>,
    /// Receive steering matrix, `N_r × L`.
    pub a_r: CMat<T>,
    /// Transmit steering matrix, `N_t × L`.
    pub a_t: CMat<T>,
    /// Path gains including the array-size normalization.
    pub alpha: CVec<T>,
    /// Angles of arrival in `[0, 2π)`.
    pub theta_r: Vec<T>,
    /// Angles of departure in `[0, 2π)`.
    pub theta_t: Vec<T>,
    /// Seed the realization was drawn with, if any.
    pub seed: Option<u64>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_paths(&self) -> usize {
        self.alpha.len()
    }

    /// Rebuilds a realization from its angles and (already scaled) gains.
    pub fn from_paths(
        n_r: usize,
        n_t: usize,
        theta_r: Vec<T>,
        theta_t: Vec<T>,
        alpha: CVec<T>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let l = alpha.len();
        if l == 0 || theta_r.len() != l || theta_t.len() != l {
            return Err(Error::dim(format!(
                "path count mismatch: {} gains, {} AoA, {} AoD",
                l,
                theta_r.len(),
                theta_t.len()
            )));
        }
        let a_r = steering_matrix(&theta_r, n_r)?;
        let a_t = steering_matrix(&theta_t, n_t)?;
        let h = &a_r * CMat::from_diagonal(&alpha) * a_t.adjoint();
        Ok(Self {
            h,
            a_r,
            a_t,
            alpha,
            theta_r,
            theta_t,
            seed,
        })
    }

    /// Relative Frobenius error of `H` against `A_r diag(α) A_tᴴ`.
    pub fn reconstruction_error(&self) -> T {
        let recon = &self.a_r * CMat::from_diagonal(&self.alpha) * self.a_t.adjoint();
        let num = linalg::frob2(&(&self.h - recon)).sqrt();
        let den = linalg::frob2(&self.h).sqrt();
        if den > T::zero() {
            num / den
        } else {
            num
        }
    }
}

/// ULA response `(1/√N)·[1, e^{-jπ sin θ}, …, e^{-jπ(N-1) sin θ}]ᵀ`.
pub fn steering_vector<T: Real>(theta: T, n: usize) -> Result<CVec<T>> {
    if n == 0 {
        return Err(Error::dim("steering vector needs at least one antenna"));
    }
    let amp = T::one() / T::from_count(n).sqrt();
    let step = -T::pi() * theta.sin();
    Ok(CVec::from_iterator(
        n,
        (0..n).map(|k| polar(amp, step * T::from_count(k))),
    ))
}

/// Columns `a(θ_1), …, a(θ_L)`.
pub fn steering_matrix<T: Real>(thetas: &[T], n: usize) -> Result<CMat<T>> {
    if n == 0 {
        return Err(Error::dim("steering matrix needs at least one antenna"));
    }
    let mut m = CMat::zeros(n, thetas.len());
    for (j, &th) in thetas.iter().enumerate() {
        m.set_column(j, &steering_vector(th, n)?);
    }
    Ok(m)
}

/// Draws a channel with ChaCha20 seeded by `seed`.
///
/// Draw order is fixed: `L` AoAs, then `L` AoDs (uniform on `[0, 2π)`),
/// then `L` gains, each as a real part followed by an imaginary part from a
/// standard normal scaled by `1/√2`.
pub fn sample_channel<T: Real>(
    n_r: usize,
    n_t: usize,
    n_paths: usize,
    seed: u64,
) -> Result<ChannelRealization<T>> {
    if n_r == 0 || n_t == 0 || n_paths == 0 {
        return Err(Error::dim(format!(
            "channel dimensions must be positive (N_r={n_r}, N_t={n_t}, L={n_paths})"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let angle = |rng: &mut ChaCha20Rng| {
        let a: f64 = rng.random::<f64>() * two_pi;
        if a >= two_pi {
            0.0
        } else {
            a
        }
    };
    let theta_r: Vec<f64> = (0..n_paths).map(|_| angle(&mut rng)).collect();
    let theta_t: Vec<f64> = (0..n_paths).map(|_| angle(&mut rng)).collect();
    let scale = ((n_r * n_t) as f64 / n_paths as f64).sqrt();
    let gains: Vec<C<T>> = (0..n_paths)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let s = scale / std::f64::consts::SQRT_2;
            C::new(T::lit(re * s), T::lit(im * s))
        })
        .collect();
    ChannelRealization::from_paths(
        n_r,
        n_t,
        theta_r.into_iter().map(T::lit).collect(),
        theta_t.into_iter().map(T::lit).collect(),
        CVec::from_vec(gains),
        Some(seed),
    )
}

/// Count of singular values above `tol · σ_max`.
pub fn numerical_rank<T: Real>(m: &CMat<T>, tol: T) -> usize {
    linalg::numerical_rank(m, tol)
}
