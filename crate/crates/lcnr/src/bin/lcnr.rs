//! `lcnr`: dataset generation, training, evaluation and logic queries for
//! crack localisation from relative frequency shifts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lcnr::checkpoint::load_checkpoint;
use lcnr::parallel::default_jobs;
use lcnr::pipeline::{self, parse_rfs};
use lcnr::{CliError, ExperimentConfig, Result};
use lcnr_core::logic::PREDICATE_NAMES;
use lcnr_core::train::BaselineKind;

#[derive(Parser, Debug)]
#[command(name = "lcnr", version, about = "Logic-constrained crack localisation on cantilever beams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the analytic scenario grid as CSV plus a manifest.
    GenData {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model on a 70/30 split and save the checkpoint and trace.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Train only on this share of the training split.
        #[arg(long)]
        fraction: Option<f64>,
        /// Train a mean-squared-error baseline instead: conv1d-mse or dnn-mse.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Predict a dataset or fixture file and write a report directory.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        /// Fixture CSV; rows without RFS are synthesised for the configured beam.
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        fixtures: Option<PathBuf>,
        /// Dataset CSV to evaluate.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Beam used to synthesise missing RFS values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Gaussian RFS noise, as a share of the largest RFS value.
        #[arg(long)]
        noise: Option<f64>,
        /// Seed of the noise.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// k-fold cross-validation with one residual file per fold.
    Kfold {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        k: Option<usize>,
        /// Parallel folds; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Retrain on growing shares of one training split.
    Fractions {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// A share to run; repeat to list several (default 0.1 to 0.9).
        #[arg(long)]
        fraction: Vec<f64>,
        /// Parallel runs; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Predict the crack position (mm) for one RFS vector.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Eight comma-separated RFS values.
        #[arg(long, allow_hyphen_values = true)]
        rfs: String,
    },
    /// Print the truth value of a formula over a dataset.
    Query {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "forall diag(x,y): eq(F(x), y)")]
        formula: String,
    },
    /// Rebuild a report directory from stored rows and an optional trace.
    Report {
        /// `rows.csv` written by `evaluate`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Configuration and data shared by the training subcommands.
#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = PREDICATE_NAMES)]
    predicate: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "agg-p")]
    agg_p: Option<f64>,
    /// Dataset CSV; the configured grid is generated when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Number of samples drawn from the data (overrides subset_size).
    #[arg(long)]
    rows: Option<usize>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load_or_default(self.config.as_deref())?;
        if let Some(p) = &self.predicate {
            cfg.set("predicate", p)?;
        }
        if let Some(a) = self.alpha {
            cfg.set("alpha", &a.to_string())?;
        }
        if let Some(p) = self.agg_p {
            cfg.set("agg_p", &p.to_string())?;
        }
        if let Some(s) = self.seed {
            cfg.set("seed", &s.to_string())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn samples(&self, cfg: &ExperimentConfig) -> Result<Vec<lcnr_core::dataset::RfsSample>> {
        pipeline::experiment_samples(cfg, self.data.as_deref(), self.rows)
    }
}

/// What the run log records.
struct RunInfo {
    out: PathBuf,
    seed: Option<u64>,
    config: String,
}

fn run(command: Command) -> Result<Option<RunInfo>> {
    match command {
        Command::GenData { config, out } => {
            let cfg = ExperimentConfig::load_or_default(config.as_deref())?;
            cfg.validate()?;
            let m = pipeline::gen_data(&cfg, &out)?;
            println!("{} rows, sha256 {}", m.rows, m.sha256);
            Ok(Some(RunInfo {
                out,
                seed: Some(cfg.train.seed),
                config: cfg.echo(),
            }))
        }
        Command::Train { exp, fraction, baseline } => {
            let mut cfg = exp.config()?;
            if let Some(f) = fraction {
                cfg.set("data_fraction", &f.to_string())?;
                cfg.validate()?;
            }
            let baseline = baseline.as_deref().map(BaselineKind::parse).transpose()?;
            let samples = exp.samples(&cfg)?;
            let o = pipeline::train_model(&cfg, &samples, baseline, &exp.out)?;
            let best = o.trace.best();
            println!(
                "best epoch {}: validation RMSE {}, satisfiability {} -> {}",
                o.trace.best_epoch,
                best.rmse_val,
                o.trace.initial.sat_train,
                o.trace.last().sat_train
            );
            Ok(Some(RunInfo {
                out: exp.out,
                seed: Some(cfg.train.seed),
                config: cfg.echo(),
            }))
        }
        Command::Evaluate { model, fixtures, data, config, out, noise, seed } => {
            let cfg = ExperimentConfig::load_or_default(config.as_deref())?;
            let ckpt = load_checkpoint(&model)?;
            let path = fixtures.or(data).ok_or_else(|| CliError::Config("--fixtures or --data is required".into()))?;
            let samples = pipeline::read_with_beam(&path, &cfg.beam)?;
            let samples = pipeline::maybe_noisy(samples, noise.map(|s| (s, seed)))?;
            let bundle = pipeline::evaluate(&ckpt, &samples, &out)?;
            println!(
                "{} rows: residual std {} mm, RMSE {} mm",
                bundle.rows.len(),
                bundle.summary.residual_std_mm,
                bundle.summary.rmse_mm
            );
            Ok(Some(RunInfo {
                out,
                seed: noise.map(|_| seed),
                config: ckpt_config(&cfg, &model),
            }))
        }
        Command::Kfold { exp, k, jobs } => {
            let mut cfg = exp.config()?;
            if let Some(k) = k {
                cfg.set("k", &k.to_string())?;
                cfg.validate()?;
            }
            let samples = exp.samples(&cfg)?;
            let folds = pipeline::kfold(&cfg, &samples, cfg.k, jobs.unwrap_or_else(default_jobs), &exp.out)?;
            for f in &folds {
                println!("fold {}: validation RMSE {}, residual std {} mm", f.fold, f.rmse_val, f.residual_std_mm);
            }
            Ok(Some(RunInfo {
                out: exp.out,
                seed: Some(cfg.train.seed),
                config: cfg.echo(),
            }))
        }
        Command::Fractions { exp, fraction, jobs } => {
            let mut cfg = exp.config()?;
            if !fraction.is_empty() {
                let list: Vec<String> = fraction.iter().map(f64::to_string).collect();
                cfg.set("fractions", &list.join(","))?;
                cfg.validate()?;
            }
            let samples = exp.samples(&cfg)?;
            let rows = pipeline::fractions(&cfg, &samples, &cfg.fractions, jobs.unwrap_or_else(default_jobs), &exp.out)?;
            for r in &rows {
                println!("fraction {}: validation RMSE {} (constant predictor {})", r.fraction, r.rmse_val, r.constant_rmse);
            }
            Ok(Some(RunInfo {
                out: exp.out,
                seed: Some(cfg.train.seed),
                config: cfg.echo(),
            }))
        }
        Command::Predict { model, rfs } => {
            let ckpt = load_checkpoint(&model)?;
            println!("{}", pipeline::predict(&ckpt, &parse_rfs(&rfs)?)?);
            Ok(None)
        }
        Command::Query { model, data, formula } => {
            let ckpt = load_checkpoint(&model)?;
            let samples = lcnr::dataset_io::read_samples(&data)?;
            println!("{}", pipeline::query(&ckpt, &formula, &samples)?.truth);
            Ok(None)
        }
        Command::Report { data, trace, out } => {
            let bundle = pipeline::report(&data, trace.as_deref(), &out)?;
            println!("{} artifacts in {}", bundle.artifacts.len(), out.display());
            Ok(Some(RunInfo {
                out,
                seed: None,
                config: String::new(),
            }))
        }
    }
}

fn ckpt_config(cfg: &ExperimentConfig, model: &Path) -> String {
    format!("model = {}\n{}", model.display(), cfg.echo())
}

fn write_run_log(info: &RunInfo, args: &[String], seconds: f64) -> Result<()> {
    let mut log = String::new();
    let _ = writeln!(log, "lcnr {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(log, "command: {}", args.join(" "));
    match info.seed {
        Some(s) => {
            let _ = writeln!(log, "seed: {s}");
        }
        None => log.push_str("seed: none\n"),
    }
    let _ = writeln!(log, "wall_time_s: {seconds:.3}");
    log.push_str("config:\n");
    log.push_str(&info.config);
    let path = info.out.join("run.log");
    std::fs::write(&path, log).map_err(CliError::io(&path))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as configuration errors.
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let start = Instant::now();
    let outcome = run(cli.command).and_then(|info| match info {
        Some(info) => write_run_log(&info, &args, start.elapsed().as_secs_f64()),
        None => Ok(()),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
