use lcnr_core::beam::{BeamSpec, SeverityModel};
use lcnr_core::dataset::{generate_grid, split_shuffle, DatasetSplit, GridConfig, RfsSample, RfsSynthesizer};
use lcnr_core::logic::{self, Aggregator, Formula, Grounding, Predicate};
use lcnr_core::seed::{self, Purpose};
use lcnr_core::tensor::{AdamConfig, AdamState, Graph, Tensor};
use lcnr_core::train::{
    fit, run_fraction, train, train_baseline, Architecture, BaselineKind, ConvSpec, Model, Objective, TrainConfig,
};
use lcnr_core::{Error, MODES};
use rand::Rng;

fn samples() -> Vec<RfsSample> {
    let grid = GridConfig {
        position_start_mm: 20.0,
        position_end_mm: 980.0,
        position_step_mm: 40.0,
        depth_ratios: vec![0.2, 0.4, 0.6],
        clamp_depth_ratios: vec![0.0, 0.1],
    };
    let synth = RfsSynthesizer::new(&BeamSpec::STEEL_TEST_BEAM).unwrap();
    generate_grid(&grid, &SeverityModel::default(), &synth).unwrap()
}

fn small_arch() -> Architecture {
    Architecture {
        conv: vec![ConvSpec {
            channels: 8,
            kernel: 3,
            stride: 1,
        }],
        dense: vec![16],
        ..Architecture::default()
    }
}

fn config(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 16,
        architecture: small_arch(),
        optimizer: AdamConfig {
            learning_rate: 3e-3,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    }
}

fn split(seed: u64) -> DatasetSplit {
    split_shuffle(&samples(), 0.7, seed).unwrap()
}

#[test]
fn same_seed_same_model() {
    let cfg = config(4);
    let s = split(cfg.seed);
    let (a, ta) = train(&cfg, &s).unwrap();
    let (b, tb) = train(&cfg, &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let other = TrainConfig { seed: 7, ..cfg };
    let (c, _) = train(&other, &s).unwrap();
    assert_ne!(a.model, c.model);
}

#[test]
fn logged_loss_is_one_minus_sat() {
    let cfg = config(5);
    let (_, trace) = train(&cfg, &split(1)).unwrap();
    assert_eq!(trace.records.len(), 5);
    for r in std::iter::once(&trace.initial).chain(&trace.records) {
        assert_eq!(r.loss_train, 1.0 - r.sat_train);
        assert!((0.0..=1.0).contains(&r.sat_train) && (0.0..=1.0).contains(&r.sat_test));
    }
}

#[test]
fn training_improves_the_fit() {
    let cfg = config(30);
    let (ckpt, trace) = train(&cfg, &split(2)).unwrap();
    assert!(trace.best().rmse_val < trace.initial.rmse_val);
    assert!(trace.last().sat_train > trace.initial.sat_train);
    assert_eq!(ckpt.best_epoch, trace.best_epoch);
    assert!(trace.records.iter().all(|r| r.rmse_val >= trace.best().rmse_val));
}

#[test]
fn query_matches_logged_sat() {
    let cfg = config(3);
    let s = split(3);
    let (ckpt, trace) = train(&cfg, &s).unwrap();
    let axiom = Formula::axiom(cfg.aggregator);
    let q = ckpt.satisfiability(&axiom, &s.test).unwrap();
    assert_eq!(q.truth, trace.best().sat_test);
    assert_eq!(q.per_pair.len(), s.test.len());
}

#[test]
fn batch_prediction_equals_single_predictions() {
    let cfg = config(2);
    let s = split(4);
    let (ckpt, _) = train(&cfg, &s).unwrap();
    let rows: Vec<[f64; MODES]> = s.test.iter().map(|r| r.rfs).collect();
    let batch = ckpt.predict_batch(&rows).unwrap();
    for (r, b) in rows.iter().zip(&batch) {
        assert_eq!(ckpt.predict(r).unwrap(), *b);
    }
    assert!(ckpt.predict(&[0.1; 7]).is_err());
    assert!(ckpt.predict(&[1.5; 8]).is_err());
}

#[test]
fn full_fraction_is_plain_training() {
    let cfg = config(3);
    let s = split(5);
    let (_, trace) = train(&cfg, &s).unwrap();
    let row = run_fraction(&cfg, &s, 1.0).unwrap();
    assert_eq!(row.n_train, s.train.len());
    assert_eq!(row.rmse_val, trace.best().rmse_val);

    let half = run_fraction(&cfg, &s, 0.5).unwrap();
    assert_eq!(half.n_train, (s.train.len() as f64 * 0.5).round() as usize);
    assert!(half.constant_rmse > 0.0);
}

#[test]
fn early_stopping_halts() {
    let cfg = TrainConfig {
        early_stop_patience: Some(1),
        optimizer: AdamConfig {
            learning_rate: 0.5,
            ..AdamConfig::default()
        },
        ..config(50)
    };
    match train(&cfg, &split(6)) {
        Ok((_, trace)) => assert!(trace.records.len() < 50),
        Err(Error::Divergence { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn huge_learning_rate_diverges() {
    let cfg = TrainConfig {
        optimizer: AdamConfig {
            learning_rate: 1e300,
            ..AdamConfig::default()
        },
        ..config(3)
    };
    let r = train(&cfg, &split(7));
    assert!(matches!(r, Err(Error::Divergence { .. })), "{:?}", r.map(|(_, t)| *t.last()));
}

#[test]
fn baselines_train_with_mse() {
    let cfg = config(2);
    let s = split(8);
    let (conv, trace) = train_baseline(&cfg, &s, BaselineKind::Conv1dMse).unwrap();
    assert_eq!(conv.objective, Objective::MeanSquaredError);
    assert_eq!(conv.model.architecture, cfg.architecture);
    let r = trace.last();
    assert!((r.loss_train - r.rmse_train * r.rmse_train).abs() < 1e-12);

    let (dnn, _) = train_baseline(&cfg, &s, BaselineKind::DnnMse).unwrap();
    assert!(dnn.model.architecture.conv.is_empty());
    let target = cfg.architecture.param_count() as f64;
    assert!((dnn.model.param_count() as f64 - target).abs() / target < 0.1);
}

#[test]
fn epoch_callback_sees_every_record() {
    let cfg = config(3);
    let mut seen = Vec::new();
    let (_, trace) = fit(&cfg, &split(9), Objective::Logic, &cfg.architecture, &mut |r| seen.push(*r)).unwrap();
    assert_eq!(seen.len(), 4);
    assert_eq!(seen[0], trace.initial);
    assert_eq!(&seen[1..], trace.records.as_slice());
}

#[test]
fn empty_split_rejected() {
    let cfg = config(1);
    let mut s = split(10);
    s.test.clear();
    assert!(train(&cfg, &s).is_err());
}

/// One Adam step at a tiny learning rate on a single pair moves the
/// prediction towards its target.
#[test]
fn single_pair_step_reduces_distance() {
    let arch = small_arch();
    let predicate = Predicate::default();
    let axiom = Formula::axiom(Aggregator::default());
    let adam_cfg = AdamConfig {
        learning_rate: 1e-5,
        ..AdamConfig::default()
    };
    let mut rng = seed::rng(11, Purpose::Split);
    for trial in 0..20u64 {
        let mut model = Model::init(&arch, &mut seed::rng(trial, Purpose::Init)).unwrap();
        let x: Vec<f64> = (0..MODES).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: f64 = rng.random_range(0.0..1.0);
        let xt = Tensor::new(vec![1, MODES], x.clone()).unwrap();
        let yt = Tensor::new(vec![1, 1], vec![y]).unwrap();
        let row: [f64; MODES] = x.clone().try_into().unwrap();
        let before = (model.predict_rows(&[row]).unwrap()[0] - y).abs();

        let mut g = Graph::new();
        let bound = model.bind(&mut g, true);
        let mut gr = Grounding::new();
        gr.variable("x", xt).unwrap().variable("y", yt).unwrap();
        gr.function("F", &bound).predicate("eq", predicate);
        let sat = logic::evaluate(&axiom, &gr, &mut g).unwrap();
        let loss = g.rsub(1.0, sat);
        let mut grads = g.backward(loss).unwrap();
        let grads: Vec<Tensor> = bound.vars().iter().map(|v| grads.take(*v).unwrap()).collect();
        let refs: Vec<&Tensor> = grads.iter().collect();
        let mut adam = AdamState::new(&model.params());
        adam.step(&adam_cfg, &mut model.params_mut(), &refs).unwrap();

        let after = (model.predict_rows(&[row]).unwrap()[0] - y).abs();
        assert!(after < before, "trial {trial}: {before} -> {after}");
    }
}
