//! Seeded experiment harness. Every runner is a deterministic parallel map
//! over independently seeded items followed by an ordered reduction, so the
//! output does not depend on the thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{gaussian_mi_precoder, right_singular_basis, waterfilling};
use crate::calculus::grad_check_instance;
use crate::channel::sample_channel;
use crate::error::{Error, Result};
use crate::factorization::{
    digital_from_analog, phases_to_analog, relative_phases, FactorizationProblem, HybridPrecoder,
};
use crate::linalg;
use crate::mi_finite::{make_constellation, mi_finite_alphabet, Modulation, DEFAULT_N_NOISE};
use crate::random::{self, substream};
use crate::realizability::{assess, exact_factorization, sufficient_condition};
use crate::scalar::CMat;
use crate::solver::{init_phase, solve, solve_from, SolveReport, SolverConfig};

/// Version of the CSV layout, recorded in every provenance line.
pub const CSV_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    RandomFactorization,
    GaussianMi,
    FiniteMi,
    RealizabilityScan,
    GradCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::RandomFactorization,
        Experiment::GaussianMi,
        Experiment::FiniteMi,
        Experiment::RealizabilityScan,
        Experiment::GradCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::RandomFactorization => "random-factorization",
            Experiment::GaussianMi => "gaussian-mi",
            Experiment::FiniteMi => "finite-mi",
            Experiment::RealizabilityScan => "realizability-scan",
            Experiment::GradCheck => "grad-check",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment '{s}'")))
    }
}

/// Start point of the solver in the finite-alphabet experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Phases of the leading right singular vectors of `H`.
    SingularBasis,
    /// Phases of the sparse-channel exact factorization when it applies,
    /// otherwise the singular basis.
    Exact,
}

/// Full description of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_r: usize,
    pub n_t: usize,
    pub n_rf: usize,
    pub n_s: usize,
    /// Number of propagation paths `L`.
    pub n_paths: usize,
    /// `N_t` values swept by `random-factorization`.
    pub n_t_sweep: Vec<usize>,
    /// `L` values swept by `realizability-scan`.
    pub n_paths_sweep: Vec<usize>,
    /// `N_rf` values swept by `realizability-scan`.
    pub n_rf_sweep: Vec<usize>,
    /// `(N_t, N_rf, N_s)` triples checked by `grad-check`.
    pub grad_dims: Vec<[usize; 3]>,
    pub snr_grid_db: Vec<f64>,
    /// Total transmit power `P`; `SNR = P/σ²`.
    pub power: f64,
    pub n_channels: usize,
    pub n_targets: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub modulation: Modulation,
    pub constellation_order: usize,
    pub n_noise: usize,
    pub init: InitMode,
    /// Rescale the hybrid precoder to `‖F_RF F_BB‖² = P` before evaluating
    /// the Gaussian-input mutual information.
    pub normalize_hybrid: bool,
    /// Report wall-clock columns; off by default so reruns are byte-identical.
    pub timing: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Experiment::GaussianMi)
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn preset(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            n_r: 4,
            n_t: 72,
            n_rf: 4,
            n_s: 4,
            n_paths: 8,
            n_t_sweep: vec![32, 48, 64],
            n_paths_sweep: vec![1, 2, 4, 8],
            n_rf_sweep: vec![1, 2, 4, 8],
            grad_dims: vec![[4, 2, 1], [6, 3, 2], [8, 4, 2]],
            snr_grid_db: vec![-35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0],
            power: 1.0,
            n_channels: 1000,
            n_targets: 500,
            seed: 2024,
            solver: SolverConfig::default(),
            modulation: Modulation::Psk,
            constellation_order: 4,
            n_noise: DEFAULT_N_NOISE,
            init: InitMode::SingularBasis,
            normalize_hybrid: true,
            timing: false,
            output: None,
        };
        match experiment {
            Experiment::RandomFactorization | Experiment::GaussianMi => base,
            Experiment::FiniteMi => Self {
                n_r: 16,
                n_t: 16,
                n_rf: 2,
                n_s: 2,
                n_paths: 2,
                snr_grid_db: vec![-20.0, -15.0, -10.0, -5.0, 0.0],
                n_channels: 20,
                ..base
            },
            Experiment::RealizabilityScan => Self {
                n_r: 8,
                n_t: 64,
                n_channels: 100,
                ..base
            },
            Experiment::GradCheck => Self { n_targets: 10, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be finite".into());
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return bad("power must be positive".into());
        }
        let dims_ok = |n_t: usize, n_rf: usize, n_s: usize| n_s >= 1 && n_s <= n_rf && n_rf <= n_t;
        match self.experiment {
            Experiment::RandomFactorization => {
                if self.n_t_sweep.is_empty() || self.n_targets == 0 {
                    return bad("random-factorization needs a nonempty N_t sweep and n_targets >= 1".into());
                }
                if let Some(&n_t) = self.n_t_sweep.iter().find(|&&n| !dims_ok(n, self.n_rf, self.n_s)) {
                    return bad(format!("need N_s <= N_rf <= N_t, got N_t={n_t}, N_rf={}, N_s={}", self.n_rf, self.n_s));
                }
            }
            Experiment::GaussianMi | Experiment::FiniteMi => {
                if !dims_ok(self.n_t, self.n_rf, self.n_s) || self.n_r == 0 || self.n_paths == 0 {
                    return bad(format!(
                        "inconsistent dims N_r={}, N_t={}, N_rf={}, N_s={}, L={}",
                        self.n_r, self.n_t, self.n_rf, self.n_s, self.n_paths
                    ));
                }
                if self.snr_grid_db.is_empty() || self.n_channels == 0 {
                    return bad("need a nonempty SNR grid and n_channels >= 1".into());
                }
                if self.experiment == Experiment::FiniteMi && self.n_noise == 0 {
                    return bad("n_noise must be positive".into());
                }
            }
            Experiment::RealizabilityScan => {
                if self.n_r == 0 || self.n_t == 0 || self.n_channels == 0 {
                    return bad("realizability-scan needs positive N_r, N_t and n_channels".into());
                }
                if self.n_paths_sweep.contains(&0) || self.n_rf_sweep.iter().any(|&r| r == 0 || r > self.n_t) {
                    return bad("sweeps need 1 <= L and 1 <= N_rf <= N_t".into());
                }
            }
            Experiment::GradCheck => {
                if self.grad_dims.iter().any(|d| !dims_ok(d[0], d[1], d[2])) || self.n_targets == 0 {
                    return bad("grad-check dims need N_s <= N_rf <= N_t".into());
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the serialized config, ignoring the output path.
    pub fn hash(&self) -> String {
        let keyed = Self { output: None, ..self.clone() };
        let json = serde_json::to_string(&keyed).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Seed of item `index` in group `group`, drawn from its own substream.
pub fn item_seed(seed: u64, group: u64, index: u64) -> u64 {
    substream(seed, (group << 32) | index).next_u64()
}

fn sigma2_for(power: f64, snr_db: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

/// Monotonicity and power-bound violations over a set of solver runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunChecks {
    pub runs: usize,
    pub monotone_violations: usize,
    pub power_violations: usize,
    /// Largest `‖F_RF F_BB‖² − ‖F_opt‖²` observed.
    pub max_power_excess: f64,
}

impl RunChecks {
    pub fn record(&mut self, report: &SolveReport) {
        self.runs += 1;
        if report.objective_trace.windows(2).any(|w| w[1] > w[0]) {
            self.monotone_violations += 1;
        }
        let excess = report.transmit_power - report.target_power;
        if excess > 1e-8 {
            self.power_violations += 1;
        }
        if self.runs == 1 || excess > self.max_power_excess {
            self.max_power_excess = excess;
        }
    }

    pub fn merge(&mut self, other: &RunChecks) {
        if other.runs == 0 {
            return;
        }
        self.max_power_excess = if self.runs == 0 {
            other.max_power_excess
        } else {
            self.max_power_excess.max(other.max_power_excess)
        };
        self.runs += other.runs;
        self.monotone_violations += other.monotone_violations;
        self.power_violations += other.power_violations;
    }
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.9e}"),
            Cell::Missing => "NA".into(),
        }
    }
}

fn timing_cell(enabled: bool, seconds: f64) -> Cell {
    if enabled {
        Cell::Float(seconds)
    } else {
        Cell::Missing
    }
}

/// Result table of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// CSV text with a leading provenance comment.
    pub fn to_csv(&self, config: &ExperimentConfig) -> String {
        let mut out = format!(
            "# hyprec {} experiment={} seed={} config_sha256={} csv_format={}\n",
            env!("CARGO_PKG_VERSION"),
            config.experiment.name(),
            config.seed,
            config.hash(),
            CSV_FORMAT_VERSION
        );
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomFactorizationRow {
    pub n_t: usize,
    pub avg_error: f64,
    pub avg_baseline_error: f64,
    /// Fraction of targets where the solver error is strictly below the
    /// one-shot baseline.
    pub win_fraction: f64,
    pub avg_runtime_s: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomFactorizationResult {
    pub rows: Vec<RandomFactorizationRow>,
    pub checks: RunChecks,
}

/// One-shot hybrid precoder: phases of the dominant left singular basis of
/// `F_opt`, digital part by least squares.
pub fn one_shot_baseline(f_opt: &CMat<f64>, n_rf: usize) -> Result<HybridPrecoder<f64>> {
    let u = crate::solver::default_analog_basis(f_opt, n_rf);
    let f_rf = phases_to_analog(&init_phase(&u), f_opt.nrows())?;
    let f_bb = digital_from_analog(&f_rf, f_opt)?;
    Ok(HybridPrecoder { f_rf, f_bb })
}

/// Random Gaussian targets normalized to `‖F_opt‖² = N_s`, factorized at each
/// `N_t` of the sweep; reports the average Euclidean error.
pub fn run_random_factorization(cfg: &ExperimentConfig) -> Result<RandomFactorizationResult> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut checks = RunChecks::default();
    for (g, &n_t) in cfg.n_t_sweep.iter().enumerate() {
        let items: Vec<Result<(f64, f64, f64, SolveReport)>> = (0..cfg.n_targets)
            .into_par_iter()
            .map(|i| {
                let seed = item_seed(cfg.seed, g as u64, i as u64);
                let raw = random::seeded_complex_gaussian::<f64>(n_t, cfg.n_s, seed);
                let scale = (cfg.n_s as f64 / linalg::frob2(&raw)).sqrt();
                let f_opt = raw.map(|z| z * scale);
                let problem = FactorizationProblem::new(f_opt.clone(), cfg.n_rf)?;
                let start = Instant::now();
                let (prec, report) = solve(&problem, &cfg.solver, None)?;
                let elapsed = start.elapsed().as_secs_f64();
                let base = one_shot_baseline(&f_opt, cfg.n_rf)?;
                Ok((prec.residual(&f_opt), base.residual(&f_opt), elapsed, report))
            })
            .collect();
        let (mut err, mut base, mut time, mut wins) = (0.0, 0.0, 0.0, 0usize);
        for item in items {
            let (e, b, t, report) = item?;
            err += e;
            base += b;
            time += t;
            if e < b {
                wins += 1;
            }
            checks.record(&report);
        }
        let n = cfg.n_targets as f64;
        rows.push(RandomFactorizationRow {
            n_t,
            avg_error: err / n,
            avg_baseline_error: base / n,
            win_fraction: wins as f64 / n,
            avg_runtime_s: time / n,
            n: cfg.n_targets,
        });
    }
    Ok(RandomFactorizationResult { rows, checks })
}

impl RandomFactorizationResult {
    pub fn table(&self, timing: bool) -> Table {
        Table {
            header: vec!["n_t", "avg_error", "avg_runtime_s", "n", "avg_baseline_error", "win_fraction"],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.n_t as u64),
                        Cell::Float(r.avg_error),
                        timing_cell(timing, r.avg_runtime_s),
                        Cell::Int(r.n as u64),
                        Cell::Float(r.avg_baseline_error),
                        Cell::Float(r.win_fraction),
                    ]
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMiRow {
    pub snr_db: f64,
    pub wf_mi: f64,
    pub hybrid_mi: f64,
    pub avg_runtime_s: f64,
    pub n_channels: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMiResult {
    pub rows: Vec<GaussianMiRow>,
    pub checks: RunChecks,
}

/// Average Gaussian-input mutual information of the waterfilling precoder
/// and of its hybrid factorization, per SNR point. The hybrid precoder is
/// rescaled to the full power budget unless `normalize_hybrid` is off.
pub fn run_gaussian_mi(cfg: &ExperimentConfig) -> Result<GaussianMiResult> {
    cfg.validate()?;
    let per_channel: Vec<Result<(Vec<(f64, f64, f64)>, RunChecks)>> = (0..cfg.n_channels)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channel::<f64>(cfg.n_r, cfg.n_t, cfg.n_paths, item_seed(cfg.seed, 0, i as u64))?;
            let u_f = right_singular_basis(&ch.h, cfg.n_rf)?;
            let mut checks = RunChecks::default();
            let mut out = Vec::with_capacity(cfg.snr_grid_db.len());
            for &snr in &cfg.snr_grid_db {
                let sigma2 = sigma2_for(cfg.power, snr);
                let wf = waterfilling(&ch.h, cfg.power, sigma2, cfg.n_s)?;
                let problem = FactorizationProblem::new(wf.f_opt.clone(), cfg.n_rf)?;
                let start = Instant::now();
                let (prec, report) = solve(&problem, &cfg.solver, Some(&u_f))?;
                let elapsed = start.elapsed().as_secs_f64();
                checks.record(&report);
                let wf_mi = gaussian_mi_precoder(&ch.h, &wf.f_opt, sigma2)?;
                let hybrid = if cfg.normalize_hybrid {
                    prec.normalized_to(cfg.power)
                } else {
                    prec
                };
                let hy_mi = gaussian_mi_precoder(&ch.h, &hybrid.product(), sigma2)?;
                out.push((wf_mi, hy_mi, elapsed));
            }
            Ok((out, checks))
        })
        .collect();
    let k = cfg.snr_grid_db.len();
    let mut sums = vec![(0.0, 0.0, 0.0); k];
    let mut checks = RunChecks::default();
    for item in per_channel {
        let (vals, c) = item?;
        checks.merge(&c);
        for (acc, v) in sums.iter_mut().zip(vals) {
            acc.0 += v.0;
            acc.1 += v.1;
            acc.2 += v.2;
        }
    }
    let n = cfg.n_channels as f64;
    let rows = cfg
        .snr_grid_db
        .iter()
        .zip(sums)
        .map(|(&snr_db, s)| GaussianMiRow {
            snr_db,
            wf_mi: s.0 / n,
            hybrid_mi: s.1 / n,
            avg_runtime_s: s.2 / n,
            n_channels: cfg.n_channels,
        })
        .collect();
    Ok(GaussianMiResult { rows, checks })
}

impl GaussianMiResult {
    pub fn table(&self, timing: bool) -> Table {
        Table {
            header: vec!["snr_db", "wf_mi", "hybrid_mi", "hybrid_over_wf", "avg_runtime_s", "n_channels"],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.snr_db),
                        Cell::Float(r.wf_mi),
                        Cell::Float(r.hybrid_mi),
                        Cell::Float(r.hybrid_mi / r.wf_mi),
                        timing_cell(timing, r.avg_runtime_s),
                        Cell::Int(r.n_channels as u64),
                    ]
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMiRow {
    pub snr_db: f64,
    pub mi_fopt: f64,
    pub mi_hybrid: f64,
    /// Standard error of the channel-averaged estimates.
    pub std_error_fopt: f64,
    pub std_error_hybrid: f64,
    /// Largest relative factorization residual `‖F_opt − F_RF F_BB‖/‖F_opt‖`.
    pub max_rel_residual: f64,
    pub n_channels: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMiResult {
    pub rows: Vec<FiniteMiRow>,
    pub checks: RunChecks,
}

/// Finite-alphabet mutual information of the waterfilling precoder and of
/// its hybrid factorization, with common noise draws per channel.
pub fn run_finite_mi(cfg: &ExperimentConfig) -> Result<FiniteMiResult> {
    cfg.validate()?;
    let constellation = make_constellation::<f64>(cfg.modulation, cfg.constellation_order)?;
    type Point = (f64, f64, f64, f64, f64);
    let per_channel: Vec<Result<(Vec<Point>, RunChecks)>> = (0..cfg.n_channels)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channel::<f64>(cfg.n_r, cfg.n_t, cfg.n_paths, item_seed(cfg.seed, 0, i as u64))?;
            let u_f = right_singular_basis(&ch.h, cfg.n_rf)?;
            let exact_ok = sufficient_condition(cfg.n_paths, cfg.n_r, cfg.n_t, cfg.n_rf);
            let mut checks = RunChecks::default();
            let mut out = Vec::with_capacity(cfg.snr_grid_db.len());
            for (j, &snr) in cfg.snr_grid_db.iter().enumerate() {
                let sigma2 = sigma2_for(cfg.power, snr);
                let wf = waterfilling(&ch.h, cfg.power, sigma2, cfg.n_s)?;
                let problem = FactorizationProblem::new(wf.f_opt.clone(), cfg.n_rf)?;
                let (prec, report) = match cfg.init {
                    InitMode::Exact if exact_ok => {
                        let hp = exact_factorization(&ch, &wf.f_opt, cfg.n_rf)?;
                        solve_from(&problem, &cfg.solver, relative_phases(&hp.f_rf))?
                    }
                    _ => solve(&problem, &cfg.solver, Some(&u_f))?,
                };
                checks.record(&report);
                let rel = (prec.residual(&wf.f_opt) / linalg::frob2(&wf.f_opt)).sqrt();
                let noise_seed = item_seed(cfg.seed, 1 + j as u64, i as u64);
                let a = mi_finite_alphabet(&(&ch.h * &wf.f_opt), sigma2, &constellation, cfg.n_noise, noise_seed)?;
                let b = mi_finite_alphabet(&(&ch.h * prec.product()), sigma2, &constellation, cfg.n_noise, noise_seed)?;
                out.push((a.bits, b.bits, a.std_error, b.std_error, rel));
            }
            Ok((out, checks))
        })
        .collect();
    let k = cfg.snr_grid_db.len();
    let mut sums = vec![(0.0, 0.0, 0.0, 0.0, 0.0f64); k];
    let mut checks = RunChecks::default();
    for item in per_channel {
        let (vals, c) = item?;
        checks.merge(&c);
        for (acc, v) in sums.iter_mut().zip(vals) {
            acc.0 += v.0;
            acc.1 += v.1;
            acc.2 += v.2 * v.2;
            acc.3 += v.3 * v.3;
            acc.4 = acc.4.max(v.4);
        }
    }
    let n = cfg.n_channels as f64;
    let rows = cfg
        .snr_grid_db
        .iter()
        .zip(sums)
        .map(|(&snr_db, s)| FiniteMiRow {
            snr_db,
            mi_fopt: s.0 / n,
            mi_hybrid: s.1 / n,
            std_error_fopt: s.2.sqrt() / n,
            std_error_hybrid: s.3.sqrt() / n,
            max_rel_residual: s.4,
            n_channels: cfg.n_channels,
        })
        .collect();
    Ok(FiniteMiResult { rows, checks })
}

impl FiniteMiResult {
    pub fn table(&self) -> Table {
        Table {
            header: vec![
                "snr_db",
                "mi_of_fopt_input",
                "mi_of_hybrid",
                "std_error_fopt",
                "std_error_hybrid",
                "max_rel_residual",
                "n_channels",
            ],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.snr_db),
                        Cell::Float(r.mi_fopt),
                        Cell::Float(r.mi_hybrid),
                        Cell::Float(r.std_error_fopt),
                        Cell::Float(r.std_error_hybrid),
                        Cell::Float(r.max_rel_residual),
                        Cell::Int(r.n_channels as u64),
                    ]
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizabilityRow {
    pub n_paths: usize,
    pub n_rf: usize,
    pub fraction_sufficient: f64,
    pub fraction_necessary: f64,
    pub avg_rank_kf: f64,
}

/// Both realizability tests over sampled channels for each `(L, N_rf)`.
pub fn run_realizability_scan(cfg: &ExperimentConfig) -> Result<Vec<RealizabilityRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (g, &l) in cfg.n_paths_sweep.iter().enumerate() {
        let verdicts: Vec<Result<Vec<crate::realizability::RealizabilityVerdict>>> = (0..cfg.n_channels)
            .into_par_iter()
            .map(|i| {
                let ch = sample_channel::<f64>(cfg.n_r, cfg.n_t, l, item_seed(cfg.seed, g as u64, i as u64))?;
                cfg.n_rf_sweep.iter().map(|&r| assess(&ch, r)).collect()
            })
            .collect();
        let mut acc = vec![(0usize, 0usize, 0usize); cfg.n_rf_sweep.len()];
        for v in verdicts {
            for (a, verdict) in acc.iter_mut().zip(v?) {
                a.0 += verdict.sufficient_holds as usize;
                a.1 += verdict.necessary_holds as usize;
                a.2 += verdict.rank_kf;
            }
        }
        let n = cfg.n_channels as f64;
        for (&n_rf, a) in cfg.n_rf_sweep.iter().zip(acc) {
            rows.push(RealizabilityRow {
                n_paths: l,
                n_rf,
                fraction_sufficient: a.0 as f64 / n,
                fraction_necessary: a.1 as f64 / n,
                avg_rank_kf: a.2 as f64 / n,
            });
        }
    }
    Ok(rows)
}

pub fn realizability_table(rows: &[RealizabilityRow]) -> Table {
    Table {
        header: vec!["l", "n_rf", "fraction_sufficient", "fraction_necessary", "avg_rank_kf"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n_paths as u64),
                    Cell::Int(r.n_rf as u64),
                    Cell::Float(r.fraction_sufficient),
                    Cell::Float(r.fraction_necessary),
                    Cell::Float(r.avg_rank_kf),
                ]
            })
            .collect(),
    }
}

/// Finite-difference check of the closed-form gradient and Hessian for
/// `n_targets` random instances per dimension triple.
pub fn run_grad_check(cfg: &ExperimentConfig) -> Result<Vec<crate::calculus::GradCheck>> {
    cfg.validate()?;
    let jobs: Vec<([usize; 3], u64)> = cfg
        .grad_dims
        .iter()
        .enumerate()
        .flat_map(|(g, &d)| (0..cfg.n_targets).map(move |i| (d, item_seed(cfg.seed, g as u64, i as u64))))
        .collect();
    jobs.into_par_iter()
        .map(|(d, seed)| grad_check_instance(d[0], d[1], d[2], seed, d[0] * d[1] <= 64))
        .collect()
}

pub fn grad_check_table(rows: &[crate::calculus::GradCheck]) -> Table {
    Table {
        header: vec!["n_t", "n_rf", "n_s", "seed", "grad_norm", "grad_err", "hess_err"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n_t as u64),
                    Cell::Int(r.n_rf as u64),
                    Cell::Int(r.n_s as u64),
                    Cell::Int(r.seed),
                    Cell::Float(r.grad_norm),
                    Cell::Float(r.grad_err),
                    r.hess_err.map_or(Cell::Missing, Cell::Float),
                ]
            })
            .collect(),
    }
}

/// Outcome of [`run`]: the table plus solver checks where applicable.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub checks: Option<RunChecks>,
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    Ok(match cfg.experiment {
        Experiment::RandomFactorization => {
            let r = run_random_factorization(cfg)?;
            RunOutput {
                table: r.table(cfg.timing),
                checks: Some(r.checks),
            }
        }
        Experiment::GaussianMi => {
            let r = run_gaussian_mi(cfg)?;
            RunOutput {
                table: r.table(cfg.timing),
                checks: Some(r.checks),
            }
        }
        Experiment::FiniteMi => {
            let r = run_finite_mi(cfg)?;
            RunOutput {
                table: r.table(),
                checks: Some(r.checks),
            }
        }
        Experiment::RealizabilityScan => RunOutput {
            table: realizability_table(&run_realizability_scan(cfg)?),
            checks: None,
        },
        Experiment::GradCheck => RunOutput {
            table: grad_check_table(&run_grad_check(cfg)?),
            checks: None,
        },
    })
}
