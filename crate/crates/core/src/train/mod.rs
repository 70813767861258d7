//! Training of the logic-constrained regressor and its baselines.
//!
//! The regressor `F` maps 8 RFS features to a crack position. Training
//! maximises the truth of `forall diag(x,y): eq(F(x), y)` over mini-batches,
//! i.e. minimises `1 - satisfiability`. The baselines use the same pipeline
//! with a mean-squared-error loss.

mod experiments;
mod features;
mod model;
mod trainer;

pub use experiments::{
    data_fraction_experiment, run_fold, run_fraction, run_kfold, FoldResult, FractionRow, DEFAULT_FRACTIONS,
};
pub use features::{FeaturePipeline, InputTransform, TargetNormalization, TargetScaler};
pub use model::{Architecture, BoundModel, ConvSpec, Model};
pub use trainer::{
    fit, train, train_baseline, EpochRecord, ModelCheckpoint, Residual, TrainTrace, CHECKPOINT_FORMAT,
};

use crate::logic::{Aggregator, Predicate};
use crate::tensor::AdamConfig;
use crate::{Error, Result};

/// Share of samples used for training in a plain train/test split.
pub const TRAIN_RATIO: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub predicate: Predicate,
    pub aggregator: Aggregator,
    pub seed: u64,
    /// Share of the training split actually used, in `(0, 1]`.
    pub data_fraction: f64,
    pub architecture: Architecture,
    pub target_normalization: TargetNormalization,
    pub input_transform: InputTransform,
    pub beam_length_mm: f64,
    /// Stop after this many epochs without a better validation RMSE.
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 64,
            optimizer: AdamConfig::default(),
            predicate: Predicate::default(),
            aggregator: Aggregator::default(),
            seed: 42,
            data_fraction: 1.0,
            architecture: Architecture::default(),
            target_normalization: TargetNormalization::UnitLength,
            input_transform: InputTransform::Profile,
            beam_length_mm: 1000.0,
            early_stop_patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if !(self.data_fraction > 0.0 && self.data_fraction <= 1.0) {
            return Err(Error::config("data_fraction", "must lie in (0, 1]"));
        }
        if !(self.beam_length_mm > 0.0 && self.beam_length_mm.is_finite()) {
            return Err(Error::config("beam_length_mm", "must be finite and positive"));
        }
        if self.early_stop_patience == Some(0) {
            return Err(Error::config("early_stop_patience", "must be at least 1"));
        }
        self.optimizer.validate()?;
        self.predicate.validate()?;
        Aggregator::new(self.aggregator.p)?;
        self.architecture.validate()
    }

    pub fn target_scaler(&self) -> TargetScaler {
        TargetScaler {
            normalization: self.target_normalization,
            length_mm: self.beam_length_mm,
        }
    }
}

/// What the optimiser minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Objective {
    /// `1 - satisfiability` of the axiom.
    Logic,
    MeanSquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// The regressor architecture trained with MSE.
    Conv1dMse,
    /// A dense network of similar size trained with MSE.
    DnnMse,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Conv1dMse => "conv1d-mse",
            BaselineKind::DnnMse => "dnn-mse",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conv1d-mse" => Ok(BaselineKind::Conv1dMse),
            "dnn-mse" => Ok(BaselineKind::DnnMse),
            other => Err(Error::config("baseline", alloc::format!("unknown baseline {other:?}"))),
        }
    }
}
