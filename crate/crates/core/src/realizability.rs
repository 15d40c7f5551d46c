//! When can a target precoder be factored exactly into a constant-modulus
//! analog part and a digital part?
//!
//! A sufficient condition is a sparse channel (`L ≤ min{N_r, N_t, N_rf}`),
//! in which case the transmit steering vectors themselves form the analog
//! precoder. A necessary condition is a rank bound on
//! `K_F = [diag(u₁*)U_F, …, diag(u_{N_rf}*)U_F]`.

use serde::{Deserialize, Serialize};

use crate::baselines::right_singular_basis;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::factorization::{digital_from_analog, HybridPrecoder};
use crate::linalg::{self, RANK_TOL};
use crate::scalar::{CMat, Real, C};

/// Outcome of the realizability tests for one channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizabilityVerdict {
    pub sufficient_holds: bool,
    pub necessary_holds: bool,
    pub rank_kf: usize,
    /// `N_rf² − N_rf + 1`.
    pub bound: usize,
    /// Smallest `N_rf` whose bound reaches `N_t`.
    pub min_rf_for_full_rank_kf: usize,
}

/// `K_F = [diag(u₁*)U_F, …, diag(u_{N_rf}*)U_F]`, `N_t × N_rf²`, where `uᵢ`
/// is column `i` of `U_F`.
pub fn build_kf<T: Real>(u_f: &CMat<T>) -> CMat<T> {
    let (n_t, n_rf) = u_f.shape();
    let gram = u_f.adjoint() * u_f;
    if linalg::max_abs_c(&(gram - CMat::identity(n_rf, n_rf))) > T::lit(1e-8) {
        log::warn!("U_F is not semi-unitary within 1e-8");
    }
    let mut kf = CMat::zeros(n_t, n_rf * n_rf);
    for i in 0..n_rf {
        for j in 0..n_rf {
            for k in 0..n_t {
                kf[(k, i * n_rf + j)] = u_f[(k, i)].conj() * u_f[(k, j)];
            }
        }
    }
    kf
}

/// `N_rf² − N_rf + 1`.
pub fn rank_bound(n_rf: usize) -> usize {
    n_rf * n_rf - n_rf + 1
}

/// Rank of `K_F` (relative tolerance 1e-10) and whether it respects the bound.
pub fn necessary_condition<T: Real>(u_f: &CMat<T>) -> (bool, usize) {
    let rank = linalg::numerical_rank(&build_kf(u_f), T::lit(RANK_TOL));
    (rank <= rank_bound(u_f.ncols()), rank)
}

/// Smallest `N_rf` with `N_rf² − N_rf + 1 ≥ N_t`.
pub fn min_rf_chains(n_t: usize) -> usize {
    if n_t <= 1 {
        return 1;
    }
    let guess = (((n_t as f64) - 0.75).sqrt() + 0.5).ceil() as usize;
    let mut n = guess.saturating_sub(2).max(1);
    while rank_bound(n) < n_t {
        n += 1;
    }
    n
}

/// `L ≤ min{N_r, N_t, N_rf}`.
pub fn sufficient_condition(n_paths: usize, n_r: usize, n_t: usize, n_rf: usize) -> bool {
    n_paths <= n_r.min(n_t).min(n_rf)
}

/// Runs both tests with `U_F` the leading `N_rf` right singular vectors of `H`.
pub fn assess<T: Real>(channel: &ChannelRealization<T>, n_rf: usize) -> Result<RealizabilityVerdict> {
    if n_rf == 0 {
        return Err(Error::dim("N_rf must be positive"));
    }
    let u_f = right_singular_basis(&channel.h, n_rf)?;
    let (necessary_holds, rank_kf) = necessary_condition(&u_f);
    Ok(RealizabilityVerdict {
        sufficient_holds: sufficient_condition(channel.n_paths(), channel.n_r(), channel.n_t(), n_rf),
        necessary_holds,
        rank_kf,
        bound: rank_bound(n_rf),
        min_rf_for_full_rank_kf: min_rf_chains(channel.n_t()),
    })
}

/// Exact factorization for a sparse channel: `F_RF = [A_t, c, …, c]` with the
/// constant column `c = (1/√N_t)·1`, and `F_BB = [A_t⁺ F_opt; 0]`.
pub fn exact_factorization<T: Real>(
    channel: &ChannelRealization<T>,
    f_opt: &CMat<T>,
    n_rf: usize,
) -> Result<HybridPrecoder<T>> {
    let (n_r, n_t, l) = (channel.n_r(), channel.n_t(), channel.n_paths());
    if !sufficient_condition(l, n_r, n_t, n_rf) {
        return Err(Error::NotApplicable(format!(
            "L = {l} exceeds min(N_r, N_t, N_rf) = {}",
            n_r.min(n_t).min(n_rf)
        )));
    }
    if f_opt.nrows() != n_t {
        return Err(Error::dim(format!("F_opt has {} rows, N_t = {n_t}", f_opt.nrows())));
    }
    let a_t = &channel.a_t;
    let coeff = digital_from_analog(a_t, f_opt)?;
    let norm = linalg::frob2(f_opt).sqrt();
    let miss = linalg::frob2(&(f_opt - a_t * &coeff)).sqrt();
    if miss > T::lit(1e-8) * norm {
        return Err(Error::InconsistentInput(format!(
            "F_opt leaves span(A_t) by relative {:.3e}",
            (miss / norm).as_f64()
        )));
    }
    let c = C::new(T::one() / T::from_count(n_t).sqrt(), T::zero());
    let mut f_rf = CMat::from_element(n_t, n_rf, c);
    f_rf.columns_mut(0, l).copy_from(a_t);
    let mut f_bb = CMat::zeros(n_rf, f_opt.ncols());
    f_bb.rows_mut(0, l).copy_from(&coeff);
    Ok(HybridPrecoder { f_rf, f_bb })
}
