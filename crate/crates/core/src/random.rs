//! Seeded random generators shared by the experiment harness and tests.
//!
//! Everything is drawn as `f64` from ChaCha20 and then converted, so a seed
//! yields the same values regardless of the working scalar type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::factorization::PhaseMatrix;
use crate::scalar::{CMat, Real, RMat, C};

/// Generator for an independent substream of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Matrix with i.i.d. zero-mean unit-variance circular complex Gaussian entries,
/// filled column-major (real part, then imaginary part).
pub fn complex_gaussian<T: Real, R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(rows, cols);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = C::new(T::lit(re * s), T::lit(im * s));
    }
    m
}

/// Free phase matrix `(N_t − 1) × N_rf` with entries uniform on `[−π, π)`.
pub fn uniform_phases<T: Real, R: Rng>(n_t: usize, n_rf: usize, rng: &mut R) -> PhaseMatrix<T> {
    let pi = std::f64::consts::PI;
    let m = RMat::from_fn(n_t.saturating_sub(1), n_rf, |_, _| {
        T::lit(rng.random::<f64>() * 2.0 * pi - pi)
    });
    PhaseMatrix::new(m).expect("finite phases")
}

/// Seeded convenience wrapper around [`complex_gaussian`].
pub fn seeded_complex_gaussian<T: Real>(rows: usize, cols: usize, seed: u64) -> CMat<T> {
    complex_gaussian(rows, cols, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Seeded convenience wrapper around [`uniform_phases`].
pub fn seeded_phases<T: Real>(n_t: usize, n_rf: usize, seed: u64) -> PhaseMatrix<T> {
    uniform_phases(n_t, n_rf, &mut ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_9a5e))
}
