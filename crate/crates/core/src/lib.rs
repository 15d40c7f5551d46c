//! Hybrid analog/digital precoder design by constant-modulus matrix
//! factorization.
//!
//! A target precoder `F_opt` (`N_t × N_s`) is approximated by `F_RF F_BB`
//! where every entry of the analog factor `F_RF` (`N_t × N_rf`) has modulus
//! `1/√N_t`. The digital factor is eliminated in closed form, the analog
//! factor is parametrized by its phases, and a cautious BFGS method with a
//! modified backtracking line search minimizes the remaining residual.
//!
//! The numerical core is generic over the real scalar type ([`Real`], i.e.
//! `f32` or `f64`); the `*64` aliases below fix it to `f64`.

pub mod baselines;
pub mod bench;
pub mod calculus;
pub mod channel;
pub mod error;
pub mod factorization;
pub mod io;
pub mod linalg;
pub mod mi_finite;
pub mod random;
pub mod realizability;
pub mod scalar;
pub mod solver;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use scalar::{CMat, CVec, Real, RMat, RVec, C};

pub use channel::{sample_channel, steering_vector, ChannelRealization};
pub use factorization::{FactorizationProblem, HybridPrecoder, PhaseMatrix};
pub use solver::{solve, SolveReport, SolverConfig, StopReason};

pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type FactorizationProblem64 = factorization::FactorizationProblem<f64>;
pub type PhaseMatrix64 = factorization::PhaseMatrix<f64>;
pub type HybridPrecoder64 = factorization::HybridPrecoder<f64>;
pub type WaterfillingSolution64 = baselines::WaterfillingSolution<f64>;
pub type Constellation64 = mi_finite::Constellation<f64>;
pub type ComplexHessianBlocks64 = calculus::ComplexHessianBlocks<f64>;
