//! Flat `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Unknown keys are errors.
//! Lists are comma separated. See [`KEYS`] for every accepted key.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lcnr_core::beam::{BeamSpec, Interpolation, SeverityModel};
use lcnr_core::dataset::GridConfig;
use lcnr_core::logic::{Aggregator, DistanceKind, Predicate, Transform};
use lcnr_core::tensor::Padding;
use lcnr_core::train::{ConvSpec, InputTransform, TargetNormalization, TrainConfig, DEFAULT_FRACTIONS};

use crate::dataset_io::read_anchors;
use crate::error::{CliError, Result};

/// Every accepted key, in echo order.
pub const KEYS: [&str; 35] = [
    "beam_elastic_modulus",
    "beam_density",
    "beam_length",
    "beam_width",
    "beam_thickness",
    "position_start_mm",
    "position_end_mm",
    "position_step_mm",
    "depth_ratios",
    "clamp_depth_ratios",
    "severity_anchors",
    "interpolation",
    "epochs",
    "batch_size",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "predicate",
    "alpha",
    "transform",
    "minkowski_p",
    "agg_p",
    "seed",
    "data_fraction",
    "conv_layers",
    "dense_layers",
    "padding",
    "target_normalization",
    "input_transform",
    "early_stop_patience",
    "subset_size",
    "train_ratio",
    "k",
    "fractions",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub beam: BeamSpec,
    pub grid: GridConfig,
    /// Anchor file replacing the built-in severity anchors.
    pub severity_anchors: Option<PathBuf>,
    pub interpolation: Interpolation,
    pub train: TrainConfig,
    /// Samples drawn from the dataset before splitting; `None` uses all.
    pub subset_size: Option<usize>,
    pub train_ratio: f64,
    pub k: usize,
    pub fractions: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beam: BeamSpec::default(),
            grid: GridConfig::default(),
            severity_anchors: None,
            interpolation: Interpolation::MonotoneCubic,
            train: TrainConfig::default(),
            subset_size: Some(4000),
            train_ratio: lcnr_core::train::TRAIN_RATIO,
            k: 5,
            fractions: DEFAULT_FRACTIONS.to_vec(),
        }
    }
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid configuration `{key}`: {reason}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, format!("cannot parse {value:?}")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| num(key, v.trim())).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// `32x3,64x3/2` → channels × kernel, optional stride.
fn conv_layers(value: &str) -> Result<Vec<ConvSpec>> {
    if value.is_empty() || value == "none" {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (spec, stride) = match item.split_once('/') {
                Some((a, s)) => (a, num("conv_layers", s)?),
                None => (item, 1),
            };
            let (c, k) = spec
                .split_once('x')
                .ok_or_else(|| bad("conv_layers", format!("expected CHANNELSxKERNEL, got {item:?}")))?;
            Ok(ConvSpec {
                channels: num("conv_layers", c)?,
                kernel: num("conv_layers", k)?,
                stride,
            })
        })
        .collect()
}

fn conv_text(conv: &[ConvSpec]) -> String {
    if conv.is_empty() {
        return "none".into();
    }
    conv.iter()
        .map(|c| {
            if c.stride == 1 {
                format!("{}x{}", c.channels, c.kernel)
            } else {
                format!("{}x{}/{}", c.channels, c.kernel, c.stride)
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}: line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("{origin}: line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    /// Reads a file; a relative anchor path is resolved against its folder.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        if let (Some(a), Some(dir)) = (&cfg.severity_anchors, path.parent()) {
            if a.is_relative() {
                cfg.severity_anchors = Some(dir.join(a));
            }
        }
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "beam_elastic_modulus" => self.beam.elastic_modulus = num(key, value)?,
            "beam_density" => self.beam.density = num(key, value)?,
            "beam_length" => self.beam.length = num(key, value)?,
            "beam_width" => self.beam.width = num(key, value)?,
            "beam_thickness" => self.beam.thickness = num(key, value)?,
            "position_start_mm" => self.grid.position_start_mm = num(key, value)?,
            "position_end_mm" => self.grid.position_end_mm = num(key, value)?,
            "position_step_mm" => self.grid.position_step_mm = num(key, value)?,
            "depth_ratios" => self.grid.depth_ratios = list(key, value)?,
            "clamp_depth_ratios" => self.grid.clamp_depth_ratios = list(key, value)?,
            "severity_anchors" => {
                self.severity_anchors = if value.is_empty() || value == "builtin" {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "interpolation" => self.interpolation = Interpolation::parse(value)?,
            "epochs" => t.epochs = num(key, value)?,
            "batch_size" => t.batch_size = num(key, value)?,
            "learning_rate" => t.optimizer.learning_rate = num(key, value)?,
            "beta1" => t.optimizer.beta1 = num(key, value)?,
            "beta2" => t.optimizer.beta2 = num(key, value)?,
            "epsilon" => t.optimizer.epsilon = num(key, value)?,
            // Resets α to the named default; a later `alpha` line overrides it.
            "predicate" => t.predicate = Predicate::named(value)?,
            "alpha" => t.predicate.alpha = num(key, value)?,
            "transform" => t.predicate.transform = Transform::parse(value)?,
            "minkowski_p" => t.predicate.distance = DistanceKind::Minkowski(num(key, value)?),
            "agg_p" => t.aggregator = Aggregator::new(num(key, value)?)?,
            "seed" => t.seed = num(key, value)?,
            "data_fraction" => t.data_fraction = num(key, value)?,
            "conv_layers" => t.architecture.conv = conv_layers(value)?,
            "dense_layers" => {
                t.architecture.dense = if value.is_empty() || value == "none" {
                    Vec::new()
                } else {
                    value.split(',').map(|v| num(key, v.trim())).collect::<Result<_>>()?
                }
            }
            "padding" => t.architecture.padding = Padding::parse(value)?,
            "target_normalization" => t.target_normalization = TargetNormalization::parse(value)?,
            "input_transform" => t.input_transform = InputTransform::parse(value)?,
            "early_stop_patience" => {
                t.early_stop_patience = if value == "none" || value == "off" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "subset_size" => {
                self.subset_size = if value == "all" { None } else { Some(num(key, value)?) }
            }
            "train_ratio" => self.train_ratio = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "fractions" => self.fractions = list(key, value)?,
            other => return Err(CliError::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        let mut train = self.train.clone();
        train.beam_length_mm = self.beam.length * 1000.0;
        train.validate()?;
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(bad("train_ratio", "must lie strictly between 0 and 1"));
        }
        if self.k < 2 {
            return Err(bad("k", "must be at least 2"));
        }
        if self.subset_size == Some(0) {
            return Err(bad("subset_size", "must be positive or `all`"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(bad("fractions", format!("{f} is outside (0, 1]")));
        }
        Ok(())
    }

    /// Training settings with the beam length filled in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            beam_length_mm: self.beam.length * 1000.0,
            ..self.train.clone()
        }
    }

    pub fn severity_model(&self) -> Result<SeverityModel> {
        let anchors = match &self.severity_anchors {
            Some(path) => read_anchors(path)?,
            None => SeverityModel::default().anchors().to_vec(),
        };
        SeverityModel::new(anchors, self.interpolation).map_err(Into::into)
    }

    /// Canonical `key = value` text; parsing it gives back this config.
    pub fn echo(&self) -> String {
        let t = &self.train;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("beam_elastic_modulus", self.beam.elastic_modulus.to_string());
        put("beam_density", self.beam.density.to_string());
        put("beam_length", self.beam.length.to_string());
        put("beam_width", self.beam.width.to_string());
        put("beam_thickness", self.beam.thickness.to_string());
        put("position_start_mm", self.grid.position_start_mm.to_string());
        put("position_end_mm", self.grid.position_end_mm.to_string());
        put("position_step_mm", self.grid.position_step_mm.to_string());
        put("depth_ratios", join(&self.grid.depth_ratios));
        put("clamp_depth_ratios", join(&self.grid.clamp_depth_ratios));
        put(
            "severity_anchors",
            self.severity_anchors
                .as_ref()
                .map_or("builtin".into(), |p| p.display().to_string()),
        );
        put("interpolation", self.interpolation.as_str().into());
        put("epochs", t.epochs.to_string());
        put("batch_size", t.batch_size.to_string());
        put("learning_rate", t.optimizer.learning_rate.to_string());
        put("beta1", t.optimizer.beta1.to_string());
        put("beta2", t.optimizer.beta2.to_string());
        put("epsilon", t.optimizer.epsilon.to_string());
        put("predicate", t.predicate.name().into());
        put("alpha", t.predicate.alpha.to_string());
        put("transform", t.predicate.transform.as_str().into());
        if let DistanceKind::Minkowski(p) = t.predicate.distance {
            put("minkowski_p", p.to_string());
        }
        put("agg_p", t.aggregator.p.to_string());
        put("seed", t.seed.to_string());
        put("data_fraction", t.data_fraction.to_string());
        put("conv_layers", conv_text(&t.architecture.conv));
        put(
            "dense_layers",
            if t.architecture.dense.is_empty() {
                "none".into()
            } else {
                t.architecture.dense.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            },
        );
        put("padding", t.architecture.padding.as_str().into());
        put("target_normalization", t.target_normalization.as_str().into());
        put("input_transform", t.input_transform.as_str().into());
        put(
            "early_stop_patience",
            t.early_stop_patience.map_or("none".into(), |p| p.to_string()),
        );
        put("subset_size", self.subset_size.map_or("all".into(), |n| n.to_string()));
        put("train_ratio", self.train_ratio.to_string());
        put("k", self.k.to_string());
        put("fractions", join(&self.fractions));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("predicate", "minkowski1").unwrap();
        cfg.set("conv_layers", "16x3,8x2/2").unwrap();
        cfg.set("fractions", "0.1,0.5").unwrap();
        cfg.set("early_stop_patience", "30").unwrap();
        let back = ExperimentConfig::parse(&cfg.echo(), "echo").unwrap();
        assert_eq!(back, cfg);
        let default = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&default.echo(), "echo").unwrap(), default);
    }

    #[test]
    fn every_key_is_accepted_and_echoed() {
        let echo = ExperimentConfig::default().echo();
        for key in KEYS {
            if key == "minkowski_p" {
                continue;
            }
            assert!(echo.contains(&format!("{key} = ")), "{key}");
        }
    }

    #[test]
    fn unknown_and_malformed_keys_name_the_problem() {
        let e = ExperimentConfig::parse("epochs = 5\nepohcs = 3\n", "cfg").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("line 2") && e.to_string().contains("epohcs"));
        let e = ExperimentConfig::parse("batch_size = many", "cfg").unwrap_err();
        assert!(e.to_string().contains("batch_size"));
        let e = ExperimentConfig::parse("just words", "cfg").unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn comments_and_validation() {
        let cfg = ExperimentConfig::parse("# header\n\nepochs = 3 # short\nk = 1\n", "cfg").unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::parse("epochs = 0", "cfg").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("epochs"));
    }

    #[test]
    fn named_predicates_set_alpha() {
        let cfg = ExperimentConfig::parse("predicate = minkowski2", "cfg").unwrap();
        assert_eq!(cfg.train.predicate.alpha, 0.5);
        let cfg = ExperimentConfig::parse("predicate = minkowski2\nalpha = 2", "cfg").unwrap();
        assert_eq!(cfg.train.predicate.alpha, 2.0);
    }
}
