//! One function per subcommand. Each writes its artifacts under an output
//! directory and returns what it computed.

use std::path::{Path, PathBuf};

use lcnr_core::beam::BeamSpec;
use lcnr_core::dataset::{add_noise, fraction_subset, generate_grid, make_kfold, split_shuffle, subsample, RfsSample, RfsSynthesizer};
use lcnr_core::eval::{residual_std, EvalRow};
use lcnr_core::logic::{parse_formula, QueryReport};
use lcnr_core::train::{
    run_fold, run_fraction, train, train_baseline, BaselineKind, FractionRow, ModelCheckpoint, Residual, TrainTrace,
};

use crate::checkpoint::{save_checkpoint, write_trace};
use crate::config::ExperimentConfig;
use crate::dataset_io::{into_samples, read_dataset, write_dataset};
use crate::error::{CliError, Result};
use crate::manifest::{sha256_file, Manifest};
use crate::parallel::run_indexed;
use crate::report::{write_report, write_trace_plot, ReportBundle};

pub const DATASET_FILE: &str = "dataset.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODEL_FILE: &str = "model.ckpt";
pub const TRACE_FILE: &str = "trace.csv";
pub const TEST_FILE: &str = "test.csv";
pub const TRAIN_FILE: &str = "train.csv";

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

/// The full analytic grid described by `cfg`.
pub fn build_dataset(cfg: &ExperimentConfig) -> Result<Vec<RfsSample>> {
    let severity = cfg.severity_model()?;
    let synth = RfsSynthesizer::new(&cfg.beam)?;
    Ok(generate_grid(&cfg.grid, &severity, &synth)?)
}

/// Reads a dataset file, synthesising missing RFS for the configured beam.
pub fn read_with_beam(path: &Path, beam: &BeamSpec) -> Result<Vec<RfsSample>> {
    let synth = RfsSynthesizer::new(beam)?;
    into_samples(&read_dataset(path)?, Some(&synth)).map_err(|e| e.in_file(path))
}

/// Samples for an experiment: the file if given, else the generated grid,
/// then reduced to `rows` (or the configured subset size).
pub fn experiment_samples(cfg: &ExperimentConfig, data: Option<&Path>, rows: Option<usize>) -> Result<Vec<RfsSample>> {
    let all = match data {
        Some(p) => read_with_beam(p, &cfg.beam)?,
        None => build_dataset(cfg)?,
    };
    match rows.or(cfg.subset_size) {
        Some(n) if n < all.len() => Ok(subsample(&all, n, cfg.train.seed)?),
        Some(n) if n > all.len() => {
            log::warn!("requested {n} samples but only {} exist; using all", all.len());
            Ok(all)
        }
        _ => Ok(all),
    }
}

pub fn gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    create_dir(out)?;
    let samples = build_dataset(cfg)?;
    let path = out.join(DATASET_FILE);
    write_dataset(&path, &samples)?;
    let manifest = Manifest {
        file: DATASET_FILE.into(),
        rows: samples.len(),
        sha256: sha256_file(&path)?,
        config: cfg.echo(),
    };
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub trace: TrainTrace,
    pub n_train: usize,
    pub n_test: usize,
}

/// Splits, trains (the logic objective unless `baseline` is set) and writes
/// the checkpoint, the trace and both halves of the split.
pub fn train_model(
    cfg: &ExperimentConfig,
    samples: &[RfsSample],
    baseline: Option<BaselineKind>,
    out: &Path,
) -> Result<TrainOutcome> {
    create_dir(out)?;
    let tc = cfg.train_config();
    let split = split_shuffle(samples, cfg.train_ratio, tc.seed)?;
    log::info!(
        "training on {} samples, validating on {} ({} parameters)",
        split.train.len(),
        split.test.len(),
        tc.architecture.param_count()
    );
    let (checkpoint, trace) = match baseline {
        None => train(&tc, &split)?,
        Some(kind) => train_baseline(&tc, &split, kind)?,
    };
    let best = trace.best();
    log::info!("best epoch {} with validation RMSE {}", trace.best_epoch, best.rmse_val);
    save_checkpoint(&out.join(MODEL_FILE), &checkpoint)?;
    write_trace(&out.join(TRACE_FILE), &trace.records)?;
    if !trace.records.is_empty() {
        write_trace_plot(out, &trace.records, "training trace")?;
    }
    write_dataset(&out.join(TRAIN_FILE), &split.train)?;
    write_dataset(&out.join(TEST_FILE), &split.test)?;
    let summary = [
        csv_line(&[
            "n_train", "n_used", "n_test", "parameters", "best_epoch", "rmse_val_best", "sat_train_initial", "sat_train_final",
        ]
        .map(String::from)),
        csv_line(&[
            split.train.len().to_string(),
            fraction_subset(&split.train, tc.data_fraction, tc.seed)?.len().to_string(),
            split.test.len().to_string(),
            checkpoint.model.param_count().to_string(),
            trace.best_epoch.to_string(),
            best.rmse_val.to_string(),
            trace.initial.sat_train.to_string(),
            trace.last().sat_train.to_string(),
        ]),
    ]
    .concat();
    write_text(&out.join("train_summary.csv"), &summary)?;
    Ok(TrainOutcome {
        n_train: split.train.len(),
        n_test: split.test.len(),
        checkpoint,
        trace,
    })
}

/// Adds seeded Gaussian RFS noise when `sigma_rel` is given.
pub fn maybe_noisy(samples: Vec<RfsSample>, noise: Option<(f64, u64)>) -> Result<Vec<RfsSample>> {
    match noise {
        Some((sigma, seed)) => Ok(add_noise(&samples, sigma, seed)?),
        None => Ok(samples),
    }
}

pub fn eval_rows(ckpt: &ModelCheckpoint, samples: &[RfsSample]) -> Result<Vec<EvalRow>> {
    Ok(ckpt
        .residuals(samples)?
        .iter()
        .zip(samples)
        .map(|(r, s)| EvalRow::new(s.scenario_id.to_string(), r.real_mm, r.predicted_mm, s.scenario.clamping_label()))
        .collect())
}

/// Predicts every sample and writes a report directory.
pub fn evaluate(ckpt: &ModelCheckpoint, samples: &[RfsSample], out: &Path) -> Result<ReportBundle> {
    let rows = eval_rows(ckpt, samples)?;
    for r in &rows {
        log::info!(
            "scenario {}: real {} mm, predicted {:.3} mm, error {:.3} %",
            r.label,
            r.real_mm,
            r.predicted_mm,
            r.error_percent
        );
    }
    write_report(out, &rows, None, "predicted vs real crack position")
}

/// Rebuilds a report from stored rows and an optional trace.
pub fn report(rows_path: &Path, trace_path: Option<&Path>, out: &Path) -> Result<ReportBundle> {
    let rows = crate::report::read_rows(rows_path)?;
    let trace = trace_path.map(crate::checkpoint::read_trace).transpose()?;
    write_report(out, &rows, trace.as_deref(), "predicted vs real crack position")
}

pub fn residuals_csv(residuals: &[Residual]) -> String {
    let mut s = csv_line(&["scenario_id", "real_mm", "predicted_mm", "residual_mm"].map(String::from));
    for r in residuals {
        s.push_str(&csv_line(&[
            r.scenario_id.to_string(),
            r.real_mm.to_string(),
            r.predicted_mm.to_string(),
            r.residual_mm().to_string(),
        ]));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub best_epoch: usize,
    /// Best validation RMSE in target units.
    pub rmse_val: f64,
    pub residual_std_mm: f64,
    pub residuals_path: PathBuf,
}

/// k-fold cross-validation; fold `i` writes `fold_i/residuals.csv` and
/// `fold_i/trace.csv`, and `kfold.csv` lists every fold.
pub fn kfold(cfg: &ExperimentConfig, samples: &[RfsSample], k: usize, jobs: usize, out: &Path) -> Result<Vec<FoldSummary>> {
    create_dir(out)?;
    let tc = cfg.train_config();
    let plan = make_kfold(samples.len(), k, tc.seed)?;
    let results = run_indexed(k, jobs, |f| run_fold(&tc, samples, &plan, f));
    let mut summaries = Vec::with_capacity(k);
    let mut table = csv_line(
        &["fold", "n_train", "n_test", "best_epoch", "rmse_val", "residual_std_mm"].map(String::from),
    );
    for (f, res) in results.into_iter().enumerate() {
        let res = res?;
        let dir = out.join(format!("fold_{}", f + 1));
        create_dir(&dir)?;
        let residuals_path = dir.join("residuals.csv");
        write_text(&residuals_path, &residuals_csv(&res.residuals))?;
        write_trace(&dir.join(TRACE_FILE), &res.trace.records)?;
        let rows: Vec<EvalRow> = res
            .residuals
            .iter()
            .map(|r| EvalRow::new(r.scenario_id.to_string(), r.real_mm, r.predicted_mm, ""))
            .collect();
        let s = FoldSummary {
            fold: f + 1,
            n_train: samples.len() - res.residuals.len(),
            n_test: res.residuals.len(),
            best_epoch: res.trace.best_epoch,
            rmse_val: res.trace.best().rmse_val,
            residual_std_mm: residual_std(&rows)?,
            residuals_path,
        };
        log::info!("fold {}: validation RMSE {}", s.fold, s.rmse_val);
        table.push_str(&csv_line(&[
            s.fold.to_string(),
            s.n_train.to_string(),
            s.n_test.to_string(),
            s.best_epoch.to_string(),
            s.rmse_val.to_string(),
            s.residual_std_mm.to_string(),
        ]));
        summaries.push(s);
    }
    write_text(&out.join("kfold.csv"), &table)?;
    Ok(summaries)
}

/// Retrains on each share of one fixed training split; writes `fractions.csv`.
pub fn fractions(
    cfg: &ExperimentConfig,
    samples: &[RfsSample],
    fractions: &[f64],
    jobs: usize,
    out: &Path,
) -> Result<Vec<FractionRow>> {
    if fractions.is_empty() {
        return Err(CliError::Config("invalid configuration `fractions`: list is empty".into()));
    }
    create_dir(out)?;
    let tc = cfg.train_config();
    let split = split_shuffle(samples, cfg.train_ratio, tc.seed)?;
    let rows = run_indexed(fractions.len(), jobs, |i| run_fraction(&tc, &split, fractions[i]))
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut table = csv_line(
        &["fraction", "n_train", "rmse_val", "constant_rmse", "sat_train", "sat_test"].map(String::from),
    );
    for r in &rows {
        log::info!("fraction {}: validation RMSE {} (constant {})", r.fraction, r.rmse_val, r.constant_rmse);
        table.push_str(&csv_line(&[
            r.fraction.to_string(),
            r.n_train.to_string(),
            r.rmse_val.to_string(),
            r.constant_rmse.to_string(),
            r.sat_train.to_string(),
            r.sat_test.to_string(),
        ]));
    }
    write_text(&out.join("fractions.csv"), &table)?;
    Ok(rows)
}

/// Parses `1,2,3`-style RFS input.
pub fn parse_rfs(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--rfs: {:?} is not a number", v.trim())))
        })
        .collect()
}

pub fn predict(ckpt: &ModelCheckpoint, rfs: &[f64]) -> Result<f64> {
    Ok(ckpt.predict(rfs)?)
}

/// Truth of `formula` with `F` bound to the model and `x`, `y` to the data.
pub fn query(ckpt: &ModelCheckpoint, formula: &str, samples: &[RfsSample]) -> Result<QueryReport> {
    let f = parse_formula(formula, ckpt.config.aggregator)
        .map_err(|e| CliError::Config(format!("invalid --formula: {e}")))?;
    Ok(ckpt.satisfiability(&f, samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rfs_lists() {
        assert_eq!(parse_rfs("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_rfs("0.1,x").unwrap_err().exit_code(), 5);
    }

    #[test]
    fn tiny_grid_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::default();
        for (k, v) in [
            ("position_start_mm", "100"),
            ("position_end_mm", "200"),
            ("position_step_mm", "100"),
            ("depth_ratios", "0.2,0.5"),
            ("clamp_depth_ratios", "0"),
        ] {
            cfg.set(k, v).unwrap();
        }
        let m = gen_data(&cfg, dir.path()).unwrap();
        assert_eq!(m.rows, 4);
        let text = std::fs::read_to_string(dir.path().join(DATASET_FILE)).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(gen_data(&cfg, &dir.path().join("again")).unwrap().sha256, m.sha256);
    }
}
