use alloc::vec::Vec;

use num_traits::Float;

use super::{train, ModelCheckpoint, Residual, TrainConfig, TrainTrace, TRAIN_RATIO};
use crate::dataset::{fraction_subset, make_kfold, split_shuffle, DatasetSplit, FoldPlan, RfsSample};
use crate::{Error, Result};

/// Training shares swept by [`data_fraction_experiment`] by default.
pub const DEFAULT_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub checkpoint: ModelCheckpoint,
    pub trace: TrainTrace,
    /// Held-out samples of this fold, in dataset order.
    pub residuals: Vec<Residual>,
}

pub fn run_fold(config: &TrainConfig, samples: &[RfsSample], plan: &FoldPlan, fold: usize) -> Result<FoldResult> {
    let split = plan.split(samples, fold)?;
    let (checkpoint, trace) = train(config, &split)?;
    let residuals = checkpoint.residuals(&split.test)?;
    Ok(FoldResult {
        fold,
        checkpoint,
        trace,
        residuals,
    })
}

/// Trains one model per fold, sequentially. Fold assignment is seeded by
/// `config.seed`.
pub fn run_kfold(config: &TrainConfig, samples: &[RfsSample], k: usize) -> Result<Vec<FoldResult>> {
    let plan = make_kfold(samples.len(), k, config.seed)?;
    (0..k).map(|f| run_fold(config, samples, &plan, f)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FractionRow {
    pub fraction: f64,
    pub n_train: usize,
    /// Best validation RMSE, in target units.
    pub rmse_val: f64,
    pub sat_train: f64,
    pub sat_test: f64,
    /// RMSE of always predicting the mean training target.
    pub constant_rmse: f64,
}

pub fn run_fraction(config: &TrainConfig, split: &DatasetSplit, fraction: f64) -> Result<FractionRow> {
    let cfg = TrainConfig {
        data_fraction: fraction,
        ..config.clone()
    };
    cfg.validate()?;
    let (_, trace) = train(&cfg, split)?;
    let used = fraction_subset(&split.train, fraction, cfg.seed)?;
    let scaler = cfg.target_scaler();
    let mean = used
        .iter()
        .map(|s| scaler.to_target(s.scenario.crack_position_mm))
        .sum::<f64>()
        / used.len() as f64;
    let constant_rmse = (split
        .test
        .iter()
        .map(|s| {
            let d = scaler.to_target(s.scenario.crack_position_mm) - mean;
            d * d
        })
        .sum::<f64>()
        / split.test.len() as f64)
        .sqrt();
    let last = trace.last();
    Ok(FractionRow {
        fraction,
        n_train: used.len(),
        rmse_val: trace.best().rmse_val,
        sat_train: last.sat_train,
        sat_test: last.sat_test,
        constant_rmse,
    })
}

/// Splits `samples` once, then retrains on seeded subsets of the training
/// part. Every run is validated on the same held-out part.
pub fn data_fraction_experiment(
    config: &TrainConfig,
    samples: &[RfsSample],
    fractions: &[f64],
) -> Result<Vec<FractionRow>> {
    if fractions.is_empty() {
        return Err(Error::config("fractions", "at least one fraction is required"));
    }
    let split = split_shuffle(samples, TRAIN_RATIO, config.seed)?;
    fractions.iter().map(|&f| run_fraction(config, &split, f)).collect()
}
