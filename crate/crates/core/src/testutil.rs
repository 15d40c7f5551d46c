use crate::factorization::PhaseMatrix;
use crate::random;
use crate::scalar::CMat;

pub fn random_cmat(rows: usize, cols: usize, seed: u64) -> CMat<f64> {
    random::seeded_complex_gaussian(rows, cols, seed)
}

pub fn random_phases(n_t: usize, n_rf: usize, seed: u64) -> PhaseMatrix<f64> {
    random::seeded_phases(n_t, n_rf, seed)
}
