use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hyprec::baselines::{gaussian_mi_precoder, waterfilling};
use hyprec::bench::{self, Experiment, ExperimentConfig, InitMode};
use hyprec::calculus::grad_check_instance;
use hyprec::io::{read_channel, read_matrix, write_channel, write_matrix};
use hyprec::mi_finite::{make_constellation, mi_finite_alphabet, Modulation};
use hyprec::realizability::assess;
use hyprec::solver::{solve, B0Mode, SolverConfig};
use hyprec::{random, sample_channel, ChannelRealization64, Error, FactorizationProblem, Result};

#[derive(Parser)]
#[command(name = "hyprec", version, about = "Hybrid analog/digital precoder design by constant-modulus factorization")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a multipath channel and write it as a matrix file.
    Channel {
        #[command(flatten)]
        dims: ChannelDims,
        #[arg(long)]
        out: PathBuf,
    },
    /// Waterfilling precoder of a channel.
    Wf {
        #[command(flatten)]
        source: ChannelSource,
        #[arg(long, default_value_t = 4)]
        ns: usize,
        #[command(flatten)]
        snr: SnrArgs,
        /// Where to write F_opt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factorize a target precoder; prints the solve report as JSON.
    Solve(SolveArgs),
    /// Finite-alphabet mutual information of H·F.
    Mi(MiArgs),
    /// Sufficient and necessary realizability tests for a channel.
    Realizability {
        #[command(flatten)]
        source: ChannelSource,
        #[arg(long, default_value_t = 4)]
        nrf: usize,
    },
    /// Run an experiment and write its CSV.
    Bench(BenchArgs),
    /// Compare the closed-form gradient and Hessian with finite differences.
    CheckGrad {
        #[arg(long, default_value_t = 6)]
        nt: usize,
        #[arg(long, default_value_t = 3)]
        nrf: usize,
        #[arg(long, default_value_t = 2)]
        ns: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ChannelDims {
    #[arg(long, default_value_t = 4)]
    nr: usize,
    #[arg(long, default_value_t = 72)]
    nt: usize,
    /// Number of propagation paths L.
    #[arg(long, default_value_t = 8)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ChannelSource {
    /// Channel file; when absent a channel is drawn from the dimension flags.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[command(flatten)]
    dims: ChannelDims,
}

impl ChannelSource {
    fn load(&self) -> Result<ChannelRealization64> {
        match &self.channel {
            Some(p) => read_channel(p),
            None => sample_channel(self.dims.nr, self.dims.nt, self.dims.paths, self.dims.seed),
        }
    }
}

#[derive(Args)]
struct SnrArgs {
    /// SNR = P/σ² in dB.
    #[arg(long, default_value_t = 0.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
}

impl SnrArgs {
    fn sigma2(&self) -> f64 {
        self.power / 10f64.powf(self.snr_db / 10.0)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum B0 {
    ExactHessian,
    Identity,
}

#[derive(Args)]
struct SolverOverrides {
    /// JSON file with solver settings.
    #[arg(long)]
    solver_config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    b0: Option<B0>,
}

impl SolverOverrides {
    fn build(&self, base: SolverConfig) -> Result<SolverConfig> {
        let mut cfg = match &self.solver_config {
            Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| config_error(p, e))?,
            None => base,
        };
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(b) = self.b0 {
            cfg.b0_mode = match b {
                B0::ExactHessian => B0Mode::ExactHessian,
                B0::Identity => B0Mode::Identity,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Target precoder file; when absent a random normalized target is drawn.
    #[arg(long)]
    fopt: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    nt: usize,
    #[arg(long, default_value_t = 4)]
    ns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    nrf: usize,
    /// Optional N_t × N_rf matrix whose phases give the start point.
    #[arg(long)]
    init: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverOverrides,
    #[arg(long)]
    out_rf: Option<PathBuf>,
    #[arg(long)]
    out_bb: Option<PathBuf>,
}

#[derive(Args)]
struct MiArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// Precoder F (or F_RF when --precoder-bb is given).
    #[arg(long)]
    precoder: PathBuf,
    #[arg(long)]
    precoder_bb: Option<PathBuf>,
    #[command(flatten)]
    snr: SnrArgs,
    #[arg(long, default_value = "psk")]
    modulation: String,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = hyprec::mi_finite::DEFAULT_N_NOISE)]
    n_noise: usize,
    /// Seed of the noise draws.
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// random-factorization, gaussian-mi, finite-mi, realizability-scan or grad-check.
    experiment: String,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_channels: Option<usize>,
    #[arg(long)]
    n_targets: Option<usize>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    /// Start the finite-mi solver from the exact sparse-channel factorization.
    #[arg(long)]
    exact_init: bool,
    /// Record wall-clock runtimes (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Io {
        path: p.to_path_buf(),
        source: e,
    })
}

fn config_error(p: &Path, e: serde_json::Error) -> Error {
    Error::InvalidConfig(format!("{}: {e}", p.display()))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Channel { dims, out } => {
            let ch = sample_channel(dims.nr, dims.nt, dims.paths, dims.seed)?;
            write_channel(&out, &ch)?;
            print_json(&json!({ "channel": out, "n_r": dims.nr, "n_t": dims.nt, "paths": dims.paths, "seed": dims.seed }));
        }
        Command::Wf { source, ns, snr, out } => {
            let ch = source.load()?;
            let sigma2 = snr.sigma2();
            let wf = waterfilling(&ch.h, snr.power, sigma2, ns)?;
            if let Some(p) = &out {
                write_matrix(p, &wf.f_opt, json!({ "kind": "waterfilling", "sigma2": sigma2, "power": snr.power }))?;
            }
            let mi = gaussian_mi_precoder(&ch.h, &wf.f_opt, sigma2)?;
            print_json(&json!({
                "powers": wf.powers,
                "mu": wf.mu,
                "singular_values": wf.singular_values,
                "sigma2": sigma2,
                "gaussian_mi_bits": mi,
            }));
        }
        Command::Solve(args) => {
            let f_opt = match &args.fopt {
                Some(p) => read_matrix(p)?,
                None => {
                    let raw = random::seeded_complex_gaussian::<f64>(args.nt, args.ns, args.seed);
                    let s = (args.ns as f64 / hyprec::linalg::frob2(&raw)).sqrt();
                    raw.map(|z| z * s)
                }
            };
            let cfg = args.solver.build(SolverConfig::default())?;
            let problem = FactorizationProblem::new(f_opt, args.nrf)?;
            let init = args.init.as_deref().map(read_matrix).transpose()?;
            let (prec, report) = solve(&problem, &cfg, init.as_ref())?;
            if let Some(p) = &args.out_rf {
                write_matrix(p, &prec.f_rf, json!({ "kind": "analog" }))?;
            }
            if let Some(p) = &args.out_bb {
                write_matrix(p, &prec.f_bb, json!({ "kind": "digital" }))?;
            }
            print_json(&serde_json::to_value(&report).expect("report serializes"));
        }
        Command::Mi(args) => {
            let ch = args.source.load()?;
            let mut f = read_matrix(&args.precoder)?;
            if let Some(bb) = &args.precoder_bb {
                f = f * read_matrix(bb)?;
            }
            if f.nrows() != ch.n_t() {
                return Err(Error::InvalidDimension(format!(
                    "precoder has {} rows, channel has N_t = {}",
                    f.nrows(),
                    ch.n_t()
                )));
            }
            let modulation: Modulation = args.modulation.parse()?;
            let c = make_constellation(modulation, args.order)?;
            let est = mi_finite_alphabet(&(&ch.h * f), args.snr.sigma2(), &c, args.n_noise, args.noise_seed)?;
            print_json(&serde_json::to_value(est).expect("estimate serializes"));
        }
        Command::Realizability { source, nrf } => {
            let ch = source.load()?;
            print_json(&serde_json::to_value(assess(&ch, nrf)?).expect("verdict serializes"));
        }
        Command::Bench(args) => {
            let experiment: Experiment = args.experiment.parse()?;
            let mut cfg = match &args.config {
                Some(p) => {
                    let c: ExperimentConfig = serde_json::from_str(&read_text(p)?).map_err(|e| config_error(p, e))?;
                    if c.experiment != experiment {
                        return Err(Error::InvalidConfig(format!(
                            "config is for {}, command asks for {}",
                            c.experiment.name(),
                            experiment.name()
                        )));
                    }
                    c
                }
                None => ExperimentConfig::preset(experiment),
            };
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(n) = args.n_channels {
                cfg.n_channels = n;
            }
            if let Some(n) = args.n_targets {
                cfg.n_targets = n;
            }
            if let Some(g) = args.snr_db {
                cfg.snr_grid_db = g;
            }
            if args.exact_init {
                cfg.init = InitMode::Exact;
            }
            if args.timing {
                cfg.timing = true;
            }
            if let Some(o) = args.out {
                cfg.output = Some(o);
            }
            let out = bench::run(&cfg)?;
            let csv = out.table.to_csv(&cfg);
            match &cfg.output {
                Some(p) => fs::write(p, &csv).map_err(|e| Error::Io {
                    path: p.clone(),
                    source: e,
                })?,
                None => print!("{csv}"),
            }
            if let Some(c) = out.checks {
                eprintln!(
                    "solver runs: {}, monotonicity violations: {}, power-bound violations: {}",
                    c.runs, c.monotone_violations, c.power_violations
                );
            }
        }
        Command::CheckGrad { nt, nrf, ns, instances, seed } => {
            let mut worst = 0.0f64;
            let mut rows = Vec::new();
            for i in 0..instances {
                let r = grad_check_instance(nt, nrf, ns, seed + i as u64, nt * nrf <= 256)?;
                worst = worst.max(r.grad_err / (1.0 + r.grad_norm));
                rows.push(json!({
                    "seed": r.seed,
                    "grad_norm": r.grad_norm,
                    "grad_err": r.grad_err,
                    "hess_err": r.hess_err,
                }));
            }
            print_json(&json!({ "n_t": nt, "n_rf": nrf, "n_s": ns, "instances": rows, "worst_scaled_grad_err": worst }));
            if worst > 1e-6 {
                return Err(Error::Degenerate(format!(
                    "gradient deviates from finite differences by {worst:.3e}"
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
