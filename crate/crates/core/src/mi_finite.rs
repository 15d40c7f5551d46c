//! Monte-Carlo estimate of the mutual information between a uniformly
//! distributed finite-alphabet input vector and the output of a Gaussian
//! channel `y = H_eff x + n`, `n ~ CN(0, σ² I)`:
//!
//! `I = N_s log₂M − (1/M^{N_s}) Σ_m E_n[log₂ Σ_k exp(−d_mk)]`,
//! `d_mk = σ⁻²(‖H_eff(x_m − x_k) + n‖² − ‖n‖²)`.
//!
//! Messages are enumerated exhaustively; only the noise is sampled, from a
//! per-message substream so the result does not depend on thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::substream;
use crate::scalar::{CMat, CVec, Real, C};

/// Default number of noise draws per message.
pub const DEFAULT_N_NOISE: usize = 200;
/// Default limit on `M^{N_s}`.
pub const DEFAULT_ENUMERATION_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Psk,
    Qam,
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psk" => Ok(Modulation::Psk),
            "qam" => Ok(Modulation::Qam),
            other => Err(Error::UnsupportedConstellation(format!("unknown modulation '{other}'"))),
        }
    }
}

/// Unit average energy symbol alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation<T: Real> {
    pub points: Vec<C<T>>,
    pub label: Modulation,
}

impl<T: Real> Constellation<T> {
    pub fn order(&self) -> usize {
        self.points.len()
    }
}

/// PSK points `exp(jπ(2m+1)/M)` (BPSK is `{+1, −1}`); square QAM grids for
/// `M` a power of four, scaled to unit average energy.
pub fn make_constellation<T: Real>(label: Modulation, m: usize) -> Result<Constellation<T>> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::UnsupportedConstellation(format!(
            "order {m} is not a power of two >= 2"
        )));
    }
    let points = match label {
        Modulation::Psk if m == 2 => vec![C::new(T::one(), T::zero()), C::new(-T::one(), T::zero())],
        Modulation::Psk => (0..m)
            .map(|k| {
                let a = std::f64::consts::PI * (2 * k + 1) as f64 / m as f64;
                C::new(T::lit(a.cos()), T::lit(a.sin()))
            })
            .collect(),
        Modulation::Qam => {
            let side = (m as f64).sqrt().round() as usize;
            if side * side != m {
                return Err(Error::UnsupportedConstellation(format!(
                    "QAM order {m} is not a square grid"
                )));
            }
            let scale = 1.0 / (2.0 * (m as f64 - 1.0) / 3.0).sqrt();
            let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) * scale;
            let mut pts = Vec::with_capacity(m);
            for i in 0..side {
                for q in 0..side {
                    pts.push(C::new(T::lit(level(i)), T::lit(level(q))));
                }
            }
            pts
        }
    };
    Ok(Constellation { points, label })
}

/// All `M^{N_s}` input vectors, last coordinate varying fastest, as the
/// columns of an `N_s × M^{N_s}` matrix.
pub fn enumerate_inputs<T: Real>(constellation: &Constellation<T>, n_s: usize, cap: usize) -> Result<CMat<T>> {
    let m = constellation.order();
    let count = (m as u128).checked_pow(n_s as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    let count = count as usize;
    let mut out = CMat::zeros(n_s, count);
    for idx in 0..count {
        let mut rem = idx;
        for row in (0..n_s).rev() {
            out[(row, idx)] = constellation.points[rem % m];
            rem /= m;
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub bits: f64,
    pub std_error: f64,
    pub n_noise: usize,
}

/// Mutual information of `y = H_eff x + n` for uniform `x` over the
/// constellation, with [`DEFAULT_ENUMERATION_CAP`].
pub fn mi_finite_alphabet<T: Real>(
    heff: &CMat<T>,
    sigma2: T,
    constellation: &Constellation<T>,
    n_noise: usize,
    seed: u64,
) -> Result<MiEstimate> {
    mi_finite_alphabet_capped(heff, sigma2, constellation, n_noise, seed, DEFAULT_ENUMERATION_CAP)
}

pub fn mi_finite_alphabet_capped<T: Real>(
    heff: &CMat<T>,
    sigma2: T,
    constellation: &Constellation<T>,
    n_noise: usize,
    seed: u64,
    cap: usize,
) -> Result<MiEstimate> {
    if n_noise == 0 {
        return Err(Error::InvalidConfig("n_noise must be at least 1".into()));
    }
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(Error::InvalidConfig("noise variance must be positive and finite".into()));
    }
    let n_s = heff.ncols();
    let n_r = heff.nrows();
    let inputs = enumerate_inputs(constellation, n_s, cap)?;
    let count = inputs.ncols();
    let images = heff * &inputs;
    let ln2 = std::f64::consts::LN_2;
    let inv_s2 = T::one() / sigma2;
    let noise_sd = (sigma2 * T::lit(0.5)).sqrt();

    // per message: mean and unbiased variance of log₂ Σ_k exp(−d_mk)
    let stats: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|m| {
            let mut rng = substream(seed, m as u64);
            let ym = images.column(m);
            let mut d = vec![T::zero(); count];
            let mut samples = Vec::with_capacity(n_noise);
            let mut noise = CVec::<T>::zeros(n_r);
            for _ in 0..n_noise {
                for z in noise.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = C::new(T::lit(re) * noise_sd, T::lit(im) * noise_sd);
                }
                let nn = noise.norm_squared();
                let mut dmin = T::zero();
                for (k, dk) in d.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for r in 0..n_r {
                        acc += (ym[r] - images[(r, k)] + noise[r]).norm_sqr();
                    }
                    *dk = (acc - nn) * inv_s2;
                    if *dk < dmin {
                        dmin = *dk;
                    }
                }
                let sum: f64 = d.iter().map(|&dk| (-(dk - dmin)).as_f64().exp()).sum();
                samples.push(sum.log2() - dmin.as_f64() / ln2);
            }
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = if samples.len() > 1 {
                samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            (mean, var)
        })
        .collect();

    let total: f64 = stats.iter().map(|s| s.0).sum();
    let var_sum: f64 = stats.iter().map(|s| s.1).sum();
    let bits = n_s as f64 * (constellation.order() as f64).log2() - total / count as f64;
    Ok(MiEstimate {
        bits,
        std_error: (var_sum / n_noise as f64).sqrt() / count as f64,
        n_noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::gaussian_mi;
    use crate::testutil::random_cmat;

    /// BPSK over a unit scalar channel by trapezoidal quadrature over the
    /// real noise component `u ~ N(0, σ²/2)`.
    pub(crate) fn bpsk_quadrature(sigma2: f64) -> f64 {
        let sd = (sigma2 / 2.0).sqrt();
        let n = 20_000;
        let lim = 12.0 * sd;
        let h = 2.0 * lim / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let u = -lim + i as f64 * h;
            let pdf = (-(u * u) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            let x = -(4.0 + 4.0 * u) / sigma2;
            let l = if x > 30.0 { x / std::f64::consts::LN_2 } else { x.exp().ln_1p() / std::f64::consts::LN_2 };
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * pdf * l;
        }
        1.0 - acc * h
    }

    #[test]
    fn constellations() {
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        let s = 0.5f64.sqrt();
        let expect = [(s, s), (-s, s), (-s, -s), (s, -s)];
        for (p, e) in q.points.iter().zip(expect) {
            assert!((p.re - e.0).abs() < 1e-15 && (p.im - e.1).abs() < 1e-15);
        }
        let b: Constellation<f64> = make_constellation(Modulation::Psk, 2).unwrap();
        assert_eq!(b.points, vec![C::new(1.0, 0.0), C::new(-1.0, 0.0)]);
        let qam: Constellation<f64> = make_constellation(Modulation::Qam, 16).unwrap();
        assert_eq!(qam.order(), 16);
        assert!((qam.points[0].re + 3.0 / 10f64.sqrt()).abs() < 1e-15);
        for m in [2, 4, 8, 16, 64] {
            for label in [Modulation::Psk, Modulation::Qam] {
                let Ok(c) = make_constellation::<f64>(label, m) else {
                    assert!(label == Modulation::Qam && (m == 2 || m == 8));
                    continue;
                };
                let e: f64 = c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
                assert!((e - 1.0).abs() < 1e-12);
                for i in 0..m {
                    for j in 0..i {
                        assert!((c.points[i] - c.points[j]).norm() > 1e-6);
                    }
                }
            }
        }
        assert!(make_constellation::<f64>(Modulation::Psk, 3).is_err());
        assert!(make_constellation::<f64>(Modulation::Qam, 32).is_err());
        assert!("QAM".parse::<Modulation>().is_ok() && "ask".parse::<Modulation>().is_err());
    }

    #[test]
    fn enumeration_order_and_cap() {
        let b: Constellation<f64> = make_constellation(Modulation::Psk, 2).unwrap();
        let x = enumerate_inputs(&b, 2, 4096).unwrap();
        let signs: Vec<(f64, f64)> = x.column_iter().map(|c| (c[0].re, c[1].re)).collect();
        assert_eq!(signs, vec![(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]);
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        assert_eq!(enumerate_inputs(&q, 3, 4096).unwrap().ncols(), 64);
        let err = enumerate_inputs(&q, 7, 4096).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { count: 16384, cap: 4096 }));
        for m in 0..64 {
            for k in 0..64 {
                let x = enumerate_inputs(&q, 3, 4096).unwrap();
                let a = x.column(m) - x.column(k);
                let b = x.column(k) - x.column(m);
                assert_eq!(a, -b);
            }
        }
    }

    #[test]
    fn zero_channel_gives_exactly_zero() {
        let q: Constellation<f64> = make_constellation(Modulation::Qam, 16).unwrap();
        for seed in 0..5 {
            let est = mi_finite_alphabet(&CMat::zeros(3, 2), 0.7, &q, 50, seed).unwrap();
            assert_eq!(est.bits, 0.0);
        }
    }

    #[test]
    fn noiseless_qpsk_reaches_two_bits() {
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        let est = mi_finite_alphabet(&CMat::identity(1, 1), 1e-6, &q, 100, 1).unwrap();
        assert!((est.bits - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bpsk_matches_quadrature() {
        let b: Constellation<f64> = make_constellation(Modulation::Psk, 2).unwrap();
        for (i, sigma2) in [0.25, 0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
            let est = mi_finite_alphabet(&CMat::identity(1, 1), sigma2, &b, 4000, 10 + i as u64).unwrap();
            let oracle = bpsk_quadrature(sigma2);
            assert!((est.bits - oracle).abs() <= 3.0 * est.std_error, "σ²={sigma2}: {est:?} vs {oracle}");
        }
    }

    #[test]
    fn estimate_is_deterministic_and_thread_independent() {
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        let h = random_cmat(3, 2, 4);
        let a = mi_finite_alphabet(&h, 0.5, &q, 64, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mi_finite_alphabet(&h, 0.5, &q, 64, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn bounds_and_gaussian_ceiling() {
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        for seed in 0..6 {
            let h = random_cmat(4, 2, 30 + seed);
            let mut prev = f64::NEG_INFINITY;
            let mut prev_se = 0.0;
            for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
                let sigma2 = 10f64.powf(-snr_db / 10.0);
                let est = mi_finite_alphabet(&h, sigma2, &q, 200, seed).unwrap();
                let tol = 3.0 * est.std_error;
                assert!(est.bits >= -tol && est.bits <= 4.0 + tol);
                let g = gaussian_mi(&h, &CMat::identity(2, 2), sigma2).unwrap();
                assert!(est.bits <= g + tol, "{} > {g}", est.bits);
                assert!(est.bits >= prev - tol - 3.0 * prev_se);
                prev = est.bits;
                prev_se = est.std_error;
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let q: Constellation<f64> = make_constellation(Modulation::Psk, 4).unwrap();
        let h = CMat::identity(1, 1);
        assert!(mi_finite_alphabet(&h, 1.0, &q, 0, 0).is_err());
        assert!(mi_finite_alphabet(&h, 0.0, &q, 10, 0).is_err());
    }
}
