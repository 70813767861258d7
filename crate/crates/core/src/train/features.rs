use crate::dataset::RfsSample;
use crate::{Error, Result, MODES};

/// Per-row transform applied before the feature-wise min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum InputTransform {
    /// RFS values as they are.
    Raw,
    /// Each row rescaled to span `[0, 1]`: `(rfs - min) / (max - min)`.
    /// Removes the uniform clamping offset and the overall crack-depth
    /// scale, leaving the shape of the shift pattern. Flat rows map to 0.
    #[default]
    Profile,
}

impl InputTransform {
    pub fn as_str(self) -> &'static str {
        match self {
            InputTransform::Raw => "raw",
            InputTransform::Profile => "profile",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(InputTransform::Raw),
            "profile" => Ok(InputTransform::Profile),
            other => Err(Error::config("input_transform", alloc::format!("unknown transform {other:?}"))),
        }
    }

    pub fn apply(self, rfs: &[f64; MODES]) -> [f64; MODES] {
        match self {
            InputTransform::Raw => *rfs,
            InputTransform::Profile => {
                let lo = rfs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = rfs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let range = hi - lo;
                if range < 1e-12 {
                    [0.0; MODES]
                } else {
                    rfs.map(|v| (v - lo) / range)
                }
            }
        }
    }
}

/// Row transform followed by per-feature min-max scaling fitted on the
/// training rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeaturePipeline {
    pub transform: InputTransform,
    pub min: [f64; MODES],
    pub max: [f64; MODES],
}

impl FeaturePipeline {
    pub fn fit(transform: InputTransform, rows: &[RfsSample]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Contract("cannot fit features on zero rows".into()));
        }
        let mut min = [f64::INFINITY; MODES];
        let mut max = [f64::NEG_INFINITY; MODES];
        for r in rows {
            let t = transform.apply(&r.rfs);
            for j in 0..MODES {
                min[j] = min[j].min(t[j]);
                max[j] = max[j].max(t[j]);
            }
        }
        Ok(FeaturePipeline { transform, min, max })
    }

    /// Constant training features map to 0.
    pub fn apply(&self, rfs: &[f64; MODES]) -> [f64; MODES] {
        let t = self.transform.apply(rfs);
        core::array::from_fn(|j| {
            let range = self.max[j] - self.min[j];
            if range > 0.0 {
                (t[j] - self.min[j]) / range
            } else {
                0.0
            }
        })
    }
}

/// How crack positions are presented to the regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TargetNormalization {
    /// Position divided by the beam length.
    #[default]
    UnitLength,
    /// Position in millimetres.
    RawMm,
}

impl TargetNormalization {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetNormalization::UnitLength => "unit-length",
            TargetNormalization::RawMm => "raw-mm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unit-length" => Ok(TargetNormalization::UnitLength),
            "raw-mm" => Ok(TargetNormalization::RawMm),
            other => Err(Error::config(
                "target_normalization",
                alloc::format!("unknown normalization {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetScaler {
    pub normalization: TargetNormalization,
    pub length_mm: f64,
}

impl TargetScaler {
    pub fn to_target(&self, position_mm: f64) -> f64 {
        match self.normalization {
            TargetNormalization::UnitLength => position_mm / self.length_mm,
            TargetNormalization::RawMm => position_mm,
        }
    }

    pub fn to_mm(&self, target: f64) -> f64 {
        match self.normalization {
            TargetNormalization::UnitLength => target * self.length_mm,
            TargetNormalization::RawMm => target,
        }
    }
}
