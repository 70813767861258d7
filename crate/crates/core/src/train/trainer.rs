use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::SliceRandom;

use super::{Architecture, BaselineKind, FeaturePipeline, Model, Objective, TargetScaler, TrainConfig};
use crate::dataset::{fraction_subset, validate_rfs, DatasetSplit, RfsSample};
use crate::logic::{p_mean_error, Formula, Grounding};
use crate::seed::{self, Purpose};
use crate::tensor::{AdamState, Graph, Tensor};
use crate::{logic, Error, Result, MODES};

/// Format tag written into serialised checkpoints.
pub const CHECKPOINT_FORMAT: &str = "lcnr-checkpoint/1";

/// Metrics after one epoch. Epoch 0 is the untrained model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    pub sat_train: f64,
    pub sat_test: f64,
    pub rmse_train: f64,
    pub rmse_val: f64,
    /// Objective on the whole training set.
    pub loss_train: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainTrace {
    pub objective: Objective,
    pub initial: EpochRecord,
    /// One record per completed epoch.
    pub records: Vec<EpochRecord>,
    /// Epoch of the kept parameters (lowest validation RMSE).
    pub best_epoch: usize,
}

impl TrainTrace {
    pub fn last(&self) -> &EpochRecord {
        self.records.last().unwrap_or(&self.initial)
    }

    pub fn best(&self) -> &EpochRecord {
        self.records
            .iter()
            .find(|r| r.epoch == self.best_epoch)
            .unwrap_or(&self.initial)
    }
}

/// A trained regressor with everything needed to predict in millimetres.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelCheckpoint {
    pub model: Model,
    pub features: FeaturePipeline,
    pub targets: TargetScaler,
    pub config: TrainConfig,
    pub objective: Objective,
    pub best_epoch: usize,
    pub final_record: EpochRecord,
}

/// Signed prediction error for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residual {
    pub scenario_id: u64,
    pub real_mm: f64,
    pub predicted_mm: f64,
}

impl Residual {
    pub fn residual_mm(&self) -> f64 {
        self.predicted_mm - self.real_mm
    }
}

impl ModelCheckpoint {
    /// Crack position in mm for one RFS vector.
    pub fn predict(&self, rfs: &[f64]) -> Result<f64> {
        validate_rfs(rfs)?;
        let mut row = [0.0; MODES];
        row.copy_from_slice(rfs);
        Ok(self.predict_batch(&[row])?[0])
    }

    pub fn predict_batch(&self, rows: &[[f64; MODES]]) -> Result<Vec<f64>> {
        for r in rows {
            validate_rfs(r)?;
        }
        let feats: Vec<[f64; MODES]> = rows.iter().map(|r| self.features.apply(r)).collect();
        Ok(self
            .model
            .predict_rows(&feats)?
            .into_iter()
            .map(|t| self.targets.to_mm(t))
            .collect())
    }

    pub fn residuals(&self, samples: &[RfsSample]) -> Result<Vec<Residual>> {
        let rows: Vec<[f64; MODES]> = samples.iter().map(|s| s.rfs).collect();
        let pred = self.predict_batch(&rows)?;
        Ok(samples
            .iter()
            .zip(pred)
            .map(|(s, p)| Residual {
                scenario_id: s.scenario_id,
                real_mm: s.scenario.crack_position_mm,
                predicted_mm: p,
            })
            .collect())
    }

    /// Truth of the training axiom on `samples`, via the logic evaluator.
    pub fn satisfiability(&self, formula: &Formula, samples: &[RfsSample]) -> Result<logic::QueryReport> {
        let (x, y) = tensors(&self.features, &self.targets, samples)?;
        let mut g = Graph::new();
        let bound = self.model.bind(&mut g, false);
        let mut gr = Grounding::new();
        gr.variable("x", x)?.variable("y", y)?;
        gr.function("F", &bound).predicate("eq", self.config.predicate);
        logic::query_in(formula, &gr, &mut g)
    }
}

fn tensors(features: &FeaturePipeline, targets: &TargetScaler, samples: &[RfsSample]) -> Result<(Tensor, Tensor)> {
    let x = Tensor::new(
        alloc::vec![samples.len(), MODES],
        samples.iter().flat_map(|s| features.apply(&s.rfs)).collect(),
    )?;
    let y = Tensor::new(
        alloc::vec![samples.len(), 1],
        samples.iter().map(|s| targets.to_target(s.scenario.crack_position_mm)).collect(),
    )?;
    Ok((x, y))
}

struct Prepared {
    x: Vec<[f64; MODES]>,
    y: Vec<f64>,
}

impl Prepared {
    fn new(features: &FeaturePipeline, targets: &TargetScaler, samples: &[RfsSample]) -> Self {
        Prepared {
            x: samples.iter().map(|s| features.apply(&s.rfs)).collect(),
            y: samples.iter().map(|s| targets.to_target(s.scenario.crack_position_mm)).collect(),
        }
    }
}

/// Fails with [`Error::Divergence`] when the wrapped model outputs a
/// non-finite value, before any predicate sees it.
struct Finite<'a, F> {
    inner: &'a F,
    epoch: usize,
}

impl<F: logic::GroundedFunction> logic::GroundedFunction for Finite<'_, F> {
    fn apply(&self, g: &mut Graph, x: crate::tensor::Var) -> Result<crate::tensor::Var> {
        let out = self.inner.apply(g, x)?;
        if g.value(out).data().iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Divergence { epoch: self.epoch })
        }
    }
}

/// Satisfiability and RMSE of `model` on a prepared set.
fn measure(model: &Model, config: &TrainConfig, set: &Prepared, epoch: usize) -> Result<(f64, f64, f64)> {
    let pred = model.predict_rows(&set.x)?;
    if pred.iter().any(|p| !p.is_finite()) {
        return Err(Error::Divergence { epoch });
    }
    let truths: Vec<f64> = pred
        .iter()
        .zip(&set.y)
        .map(|(p, y)| config.predicate.eq(&[*p], &[*y]))
        .collect::<Result<_>>()?;
    let sat = p_mean_error(&truths, config.aggregator.p)?;
    let mse = pred.iter().zip(&set.y).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / pred.len() as f64;
    Ok((sat, mse.sqrt(), mse))
}

fn record(model: &Model, config: &TrainConfig, objective: Objective, train: &Prepared, val: &Prepared, epoch: usize) -> Result<EpochRecord> {
    let (sat_train, rmse_train, mse_train) = measure(model, config, train, epoch)?;
    let (sat_test, rmse_val, _) = measure(model, config, val, epoch)?;
    let loss_train = match objective {
        Objective::Logic => 1.0 - sat_train,
        Objective::MeanSquaredError => mse_train,
    };
    if !loss_train.is_finite() || !rmse_val.is_finite() {
        return Err(Error::Divergence { epoch });
    }
    Ok(EpochRecord {
        epoch,
        sat_train,
        sat_test,
        rmse_train,
        rmse_val,
        loss_train,
    })
}

/// A power mean of `1 - t` is at least its minimum, so the aggregate truth
/// never exceeds the best pair.
fn check_power_mean_bound(sat: f64, pairs: &[f64]) -> Result<()> {
    let best = pairs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sat.is_finite() && sat > best + 1e-12 {
        return Err(Error::Internal(alloc::format!(
            "batch satisfiability {sat} exceeds its best pair {best}"
        )));
    }
    Ok(())
}

/// Trains the logic-constrained regressor.
pub fn train(config: &TrainConfig, split: &DatasetSplit) -> Result<(ModelCheckpoint, TrainTrace)> {
    fit(config, split, Objective::Logic, &config.architecture, &mut |_| {})
}

/// Same pipeline with a mean-squared-error loss.
pub fn train_baseline(
    config: &TrainConfig,
    split: &DatasetSplit,
    kind: BaselineKind,
) -> Result<(ModelCheckpoint, TrainTrace)> {
    let arch = match kind {
        BaselineKind::Conv1dMse => config.architecture.clone(),
        BaselineKind::DnnMse => Architecture::dnn_matching(config.architecture.param_count()),
    };
    fit(config, split, Objective::MeanSquaredError, &arch, &mut |_| {})
}

/// The training loop behind [`train`] and [`train_baseline`]; `on_epoch`
/// sees every record as it is produced.
pub fn fit(
    config: &TrainConfig,
    split: &DatasetSplit,
    objective: Objective,
    architecture: &Architecture,
    on_epoch: &mut dyn FnMut(&EpochRecord),
) -> Result<(ModelCheckpoint, TrainTrace)> {
    config.validate()?;
    architecture.validate()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Contract("training needs non-empty train and test sets".into()));
    }
    let train_rows = fraction_subset(&split.train, config.data_fraction, config.seed)?;
    let features = FeaturePipeline::fit(config.input_transform, &train_rows)?;
    let targets = config.target_scaler();
    let train_set = Prepared::new(&features, &targets, &train_rows);
    let val_set = Prepared::new(&features, &targets, &split.test);

    let mut model = Model::init(architecture, &mut seed::rng(config.seed, Purpose::Init))?;
    let mut adam = AdamState::new(&model.params());
    let mut batch_rng = seed::rng(config.seed, Purpose::Batches);
    let axiom = Formula::axiom(config.aggregator);

    let initial = record(&model, config, objective, &train_set, &val_set, 0)?;
    on_epoch(&initial);
    let mut best = (initial.rmse_val, 0usize, model.clone(), initial);
    let mut records = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..train_set.x.len()).collect();
    let mut xbuf = Vec::new();
    let mut ybuf = Vec::new();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut batch_rng);
        for batch in order.chunks(config.batch_size) {
            xbuf.clear();
            ybuf.clear();
            for &i in batch {
                xbuf.extend_from_slice(&train_set.x[i]);
                ybuf.push(train_set.y[i]);
            }
            let mut g = Graph::new();
            let bound = model.bind(&mut g, true);
            let x = Tensor::new(alloc::vec![batch.len(), MODES], xbuf.clone())?;
            let y = Tensor::new(alloc::vec![batch.len(), 1], ybuf.clone())?;
            let loss = match objective {
                Objective::Logic => {
                    let mut gr = Grounding::new();
                    gr.variable("x", x)?.variable("y", y)?;
                    let checked = Finite { inner: &bound, epoch };
                    gr.function("F", &checked).predicate("eq", config.predicate);
                    let (sat, pairs) = logic::evaluate_pairs(&axiom, &gr, &mut g)?;
                    if let Some(p) = pairs {
                        check_power_mean_bound(g.value(sat).item()?, g.value(p).data())?;
                    }
                    g.rsub(1.0, sat)
                }
                Objective::MeanSquaredError => {
                    use logic::GroundedFunction;
                    let xv = g.constant(x);
                    let yv = g.constant(y);
                    let out = bound.apply(&mut g, xv)?;
                    let d = g.sub(out, yv)?;
                    let sq = g.mul(d, d)?;
                    g.mean(sq)?
                }
            };
            if !g.value(loss).item()?.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            let mut grads = g.backward(loss)?;
            let grads: Vec<Tensor> = bound
                .vars()
                .iter()
                .map(|v| grads.take(*v).ok_or_else(|| Error::Internal("missing parameter gradient".into())))
                .collect::<Result<_>>()?;
            let grad_refs: Vec<&Tensor> = grads.iter().collect();
            adam.step(&config.optimizer, &mut model.params_mut(), &grad_refs)?;
        }
        let rec = record(&model, config, objective, &train_set, &val_set, epoch)?;
        on_epoch(&rec);
        records.push(rec);
        if rec.rmse_val < best.0 {
            best = (rec.rmse_val, epoch, model.clone(), rec);
        }
        if let Some(p) = config.early_stop_patience {
            if epoch - best.1 >= p {
                break;
            }
        }
    }

    let (_, best_epoch, best_model, _) = best;
    let final_record = *records.last().unwrap_or(&initial);
    let trace = TrainTrace {
        objective,
        initial,
        records,
        best_epoch,
    };
    let checkpoint = ModelCheckpoint {
        model: best_model,
        features,
        targets,
        config: config.clone(),
        objective,
        best_epoch,
        final_record,
    };
    Ok((checkpoint, trace))
}
