//! Batch driver: parse experiment configurations, orchestrate runs, emit
//! machine-readable results.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 unachievable empirical target.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

use config::ExperimentConfig;
use output::OutputSink;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Unachievable { plateau: f64, n_max: u64 },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Unachievable { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Unachievable { plateau, n_max } => write!(
                f,
                "target unachievable: success probability plateaued at {plateau:.4} up to n_max {n_max}"
            ),
        }
    }
}

/// Shared flags: config file, seed/thread/output overrides.
#[derive(Debug, Args, Clone)]
struct CommonArgs {
    /// Path to the experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override (mandatory here or in the config for randomized
    /// commands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for JSONL/CSV files (default: env QEMBOUND_OUT_DIR,
    /// else stdout only).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "qembound",
    version,
    about = "Sampling lower bounds for quantum error mitigation, with Monte Carlo validation"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every randomized verification suite.
    Verify {
        /// Instances per inequality suite.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Evaluate one bound formula.
    Bound {
        /// Formula id (thm1_fid, thm1_rel, prop2, thm3, thm4, thm5, appE1..appE4,
        /// thm6_prob, thm6_moment).
        #[arg(long)]
        formula: Option<String>,
        #[arg(long = "M")]
        qubits: Option<usize>,
        #[arg(long = "L")]
        layers: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long = "sigma-max")]
        sigma_max: Option<f64>,
        #[arg(long = "b-max")]
        b_max: Option<f64>,
        #[arg(long = "d-o")]
        d_o: Option<f64>,
        /// Direct divergence input for the per-copy scalar forms.
        #[arg(long)]
        fidelity: Option<f64>,
        #[arg(long = "rel-entropy")]
        rel_entropy: Option<f64>,
        /// Evolution time for the thermal bound.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Estimate the generalized contraction coefficient of a channel set.
    Contraction {
        #[arg(long)]
        restarts: Option<u64>,
        #[arg(long = "refine-steps")]
        refine_steps: Option<u64>,
    },
    /// Bounds plus certified empirical sample requirements over a depth range.
    LayeredScan {
        #[arg(long = "M")]
        qubits: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "l-min")]
        layers_min: Option<usize>,
        #[arg(long = "l-max")]
        layers_max: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Estimator statistics (and optional requirement search) for one
    /// configuration.
    Mitigate {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Thermal-noise sampling bounds along a semigroup trajectory.
    Thermal {
        #[arg(long = "alpha-samples")]
        alpha_samples: Option<u64>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<(ExperimentConfig, serde_json::Value), CliError> {
    match path {
        None => Ok((ExperimentConfig::default(), serde_json::json!({}))),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {p:?}: {e}")))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
            let cfg: ExperimentConfig = serde_json::from_value(value.clone())
                .map_err(|e| CliError::Config(format!("config schema error: {e}")))?;
            Ok((cfg, value))
        }
    }
}

/// Randomized commands refuse to run without an explicit master seed; there
/// is no wall-clock fallback.
fn require_seed(flag: Option<u64>, cfg: Option<u64>) -> Result<u64, CliError> {
    flag.or(cfg).ok_or_else(|| {
        CliError::Config("a master seed is required (--seed or \"seed\" in the config)".into())
    })
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let (mut cfg, mut echo) = load_config(&cli.common.config)?;

    if let Some(threads) = cli.common.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let out_dir = cli
        .common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| PathBuf::from(&o.path)))
        .or_else(|| std::env::var("QEMBOUND_OUT_DIR").ok().map(PathBuf::from));
    let format = cfg.out.as_ref().map(|o| o.format.clone()).unwrap_or_else(|| "json+csv".into());

    if let Some(seed) = cli.common.seed {
        echo["seed"] = serde_json::json!(seed);
    }

    let started = Instant::now();
    let (name, code) = match &cli.command {
        Command::Verify { samples } => {
            let mut vcfg = cfg.verify.take().unwrap_or_default();
            if let Some(s) = samples {
                vcfg.samples = *s;
            }
            let seed = require_seed(cli.common.seed, cfg.seed)?;
            let mut sink = OutputSink::new("verify", echo.clone(), seed, out_dir, &format);
            let code = commands::run_verify(&vcfg, seed, &mut sink)?;
            sink.finish()?;
            ("verify", code)
        }
        Command::Bound {
            formula,
            qubits,
            layers,
            gamma,
            delta,
            epsilon,
            eta,
            xi,
            sigma_max,
            b_max,
            d_o,
            fidelity,
            rel_entropy,
            t,
        } => {
            let mut bcfg = cfg.bound.take().unwrap_or_default();
            merge(&mut bcfg.formula, formula.clone());
            merge(&mut bcfg.qubits, *qubits);
            merge(&mut bcfg.layers, *layers);
            merge(&mut bcfg.gamma, *gamma);
            merge(&mut bcfg.delta, *delta);
            merge(&mut bcfg.epsilon, *epsilon);
            merge(&mut bcfg.eta, *eta);
            merge(&mut bcfg.xi, *xi);
            merge(&mut bcfg.sigma_max, *sigma_max);
            merge(&mut bcfg.b_max, *b_max);
            merge(&mut bcfg.d_o, *d_o);
            merge(&mut bcfg.fidelity, *fidelity);
            merge(&mut bcfg.rel_entropy, *rel_entropy);
            merge(&mut bcfg.t, *t);
            // Scalar formulas are deterministic; the pure-state-sampled
            // searches need a seed.
            let needs_seed = matches!(
                bcfg.formula.as_deref(),
                Some("thm1_fid") | Some("thm1_rel") | Some("thm3")
            ) && bcfg.states.is_none()
                && bcfg.fidelity.is_none()
                && bcfg.rel_entropy.is_none();
            let seed = if needs_seed {
                require_seed(cli.common.seed, cfg.seed)?
            } else {
                cli.common.seed.or(cfg.seed).unwrap_or(0)
            };
            let mut sink = OutputSink::new("bound", echo.clone(), seed, out_dir, &format);
            let code = commands::run_bound(&bcfg, cfg.thermal.as_ref(), seed, &mut sink)?;
            sink.finish()?;
            ("bound", code)
        }
        Command::Contraction { restarts, refine_steps } => {
            let mut ccfg = cfg
                .contraction
                .take()
                .ok_or_else(|| CliError::Config("config has no \"contraction\" section".into()))?;
            if let Some(r) = restarts {
                ccfg.restarts = *r;
            }
            if let Some(r) = refine_steps {
                ccfg.refine_steps = *r;
            }
            let seed = require_seed(cli.common.seed, cfg.seed)?;
            let mut sink = OutputSink::new("contraction", echo.clone(), seed, out_dir, &format);
            let code = commands::run_contraction(&ccfg, seed, &mut sink)?;
            sink.finish()?;
            ("contraction", code)
        }
        Command::LayeredScan {
            qubits,
            gamma,
            layers_min,
            layers_max,
            delta,
            epsilon,
            trials,
            n_max,
        } => {
            let mut scfg = cfg
                .layered_scan
                .take()
                .ok_or_else(|| CliError::Config("config has no \"layered_scan\" section".into()))?;
            if let Some(v) = qubits {
                scfg.qubits = *v;
            }
            if let Some(v) = gamma {
                scfg.gamma = *v;
            }
            if let Some(v) = layers_min {
                scfg.layers_min = *v;
            }
            if let Some(v) = layers_max {
                scfg.layers_max = *v;
            }
            if let Some(v) = delta {
                scfg.delta = *v;
            }
            if let Some(v) = epsilon {
                scfg.epsilon = *v;
            }
            if let Some(v) = trials {
                scfg.trials = *v;
            }
            if let Some(v) = n_max {
                scfg.n_max = *v;
            }
            let seed = require_seed(cli.common.seed, cfg.seed)?;
            let mut sink = OutputSink::new("layered_scan", echo.clone(), seed, out_dir, &format);
            let code = commands::run_layered_scan(&scfg, seed, &mut sink)?;
            sink.finish()?;
            ("layered_scan", code)
        }
        Command::Mitigate { n, trials } => {
            let mut mcfg = cfg
                .mitigate
                .take()
                .ok_or_else(|| CliError::Config("config has no \"mitigate\" section".into()))?;
            if let Some(v) = n {
                mcfg.n = Some(*v);
            }
            if let Some(v) = trials {
                mcfg.trials = *v;
            }
            let seed = require_seed(cli.common.seed, cfg.seed)?;
            let mut sink = OutputSink::new("mitigate", echo.clone(), seed, out_dir, &format);
            let code = commands::run_mitigate(&mcfg, seed, &mut sink)?;
            sink.finish()?;
            ("mitigate", code)
        }
        Command::Thermal { alpha_samples } => {
            let mut tcfg = cfg
                .thermal
                .take()
                .ok_or_else(|| CliError::Config("config has no \"thermal\" section".into()))?;
            if let Some(v) = alpha_samples {
                tcfg.alpha_samples = *v;
            }
            let seed = require_seed(cli.common.seed, cfg.seed)?;
            let mut sink = OutputSink::new("thermal", echo.clone(), seed, out_dir, &format);
            let code = commands::run_thermal(&tcfg, seed, &mut sink)?;
            sink.finish()?;
            ("thermal", code)
        }
    };
    eprintln!("{name} completed in {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
    Ok(code)
}

fn merge<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
