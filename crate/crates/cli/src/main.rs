//! `jumppat`: jump-channel statistics, trajectories, patterns and
//! clustering from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric or degeneracy
//! error, 4 enumeration cap exceeded.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{Backend, Chain, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] jumppat::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(jumppat::Error::CapExceeded { .. }) => 4,
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "jumppat", version, about = "Jump-channel statistics of monitored open quantum systems")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (falls back to JUMPPAT_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, global = true, value_enum)]
    chain: Option<Chain>,
    /// Chain length.
    #[arg(long = "L", global = true)]
    length: Option<usize>,
    /// Boundary rate; integers, decimals and `p/q` are read exactly.
    #[arg(long, global = true)]
    gamma: Option<String>,
    #[arg(long, global = true)]
    kappa: Option<String>,
    #[arg(long, global = true)]
    hopping: Option<String>,
    /// Model JSON file instead of a builtin chain.
    #[arg(long = "model", global = true)]
    file: Option<PathBuf>,
    /// Monitored channel labels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    monitored: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-outcome, joint, two-point and mutual-information tables.
    Stats {
        /// Largest order of the full joint distribution.
        #[arg(long)]
        order: Option<usize>,
        /// Largest separation N for I(k₁:k_N).
        #[arg(long)]
        mi_max: Option<usize>,
        /// Largest separation N in the two-point comparison.
        #[arg(long)]
        two_point_max: Option<usize>,
    },
    /// Seeded jump trajectories.
    Simulate {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        trajectories: Option<usize>,
        /// Initial occupation string such as `110`; default is the jump steady state.
        #[arg(long)]
        initial: Option<String>,
        /// Also dump every post-jump state.
        #[arg(long)]
        keep_states: bool,
    },
    /// Exact pattern detection and recurrence classification.
    Patterns {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        max_states: Option<usize>,
        /// Also label states approximately at this trace distance.
        #[arg(long)]
        tol_match: Option<f64>,
        #[arg(long)]
        bit_cap: Option<u64>,
    },
    /// Cluster sampled states by their future symbol distributions.
    Cluster {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Cluster counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        nc: Option<Vec<usize>>,
        #[arg(long)]
        weight_min: Option<f64>,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        /// Write the full sample distance matrix.
        #[arg(long)]
        dump_distances: bool,
    },
    /// Log-likelihood of a symbol string under candidate models.
    Likelihood {
        string: Option<String>,
        /// Candidate chain lengths; other parameters come from the model.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<usize>>,
    },
}

fn merge(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let m = &cli.model;
    let string = |s: &Option<String>| s.as_ref().map(|v| Value::String(v.clone()));
    if m.chain.is_some() || m.length.is_some() {
        // A builtin chain on the command line replaces a configured file.
        if m.file.is_none() {
            cfg.model.file = None;
        }
    }
    cfg.model.chain = m.chain.or(cfg.model.chain);
    cfg.model.length = m.length.or(cfg.model.length);
    cfg.model.gamma = string(&m.gamma).or(cfg.model.gamma.take());
    cfg.model.kappa = string(&m.kappa).or(cfg.model.kappa.take());
    cfg.model.hopping = string(&m.hopping).or(cfg.model.hopping.take());
    cfg.model.file = m.file.clone().or(cfg.model.file.take());
    cfg.monitored = m.monitored.clone().or(cfg.monitored.take());
    cfg.mode = cli.mode.or(cfg.mode);
    cfg.seed = cli.seed.or(cfg.seed);
    cfg.out = cli.out.clone().or(cfg.out.take());
    cfg.threads = cli.threads.or(cfg.threads);
    match &cli.command {
        Command::Stats { order, mi_max, two_point_max } => {
            let s = &mut cfg.stats;
            s.order = order.or(s.order);
            s.mi_max = mi_max.or(s.mi_max);
            s.two_point_max = two_point_max.or(s.two_point_max);
        }
        Command::Simulate { steps, burn_in, trajectories, initial, keep_states } => {
            let s = &mut cfg.simulate;
            s.steps = steps.or(s.steps);
            s.burn_in = burn_in.or(s.burn_in);
            s.trajectories = trajectories.or(s.trajectories);
            s.initial = initial.clone().or(s.initial.take());
            if *keep_states {
                s.keep_states = Some(true);
            }
        }
        Command::Patterns { trials, steps, max_states, tol_match, bit_cap } => {
            let s = &mut cfg.patterns;
            s.trials = trials.or(s.trials);
            s.steps = steps.or(s.steps);
            s.max_states = max_states.or(s.max_states);
            s.tol_match = tol_match.or(s.tol_match);
            s.bit_cap = bit_cap.or(s.bit_cap);
        }
        Command::Cluster { samples, burn_in, horizon, nc, weight_min, backend, dump_distances } => {
            let s = &mut cfg.cluster;
            s.samples = samples.or(s.samples);
            s.burn_in = burn_in.or(s.burn_in);
            s.horizon = horizon.or(s.horizon);
            s.nc = nc.clone().or(s.nc.take());
            s.weight_min = weight_min.or(s.weight_min);
            s.backend = backend.or(s.backend);
            if *dump_distances {
                s.dump_distances = Some(true);
            }
        }
        Command::Likelihood { string, lengths } => {
            let s = &mut cfg.likelihood;
            s.string = string.clone().or(s.string.take());
            if let Some(lengths) = lengths {
                s.candidates = Some(
                    lengths.iter().map(|&l| config::ModelSection { length: Some(l), ..Default::default() }).collect(),
                );
            }
        }
    }
    Ok(cfg)
}

fn configure_threads(cfg: &RunConfig) -> Result<(), CliError> {
    let threads = match cfg.threads {
        Some(n) => Some(n),
        None => match std::env::var("JUMPPAT_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Config(format!("JUMPPAT_THREADS=`{v}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = merge(cli)?;
    configure_threads(&cfg)?;
    match cli.command {
        Command::Stats { .. } => commands::stats(&cfg),
        Command::Simulate { .. } => commands::simulate(&cfg),
        Command::Patterns { .. } => commands::patterns(&cfg),
        Command::Cluster { .. } => commands::cluster(&cfg),
        Command::Likelihood { .. } => commands::likelihood(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
