//! Damage scenarios and their relative frequency shift (RFS) vectors.
//!
//! Positions here are in millimetres from the clamped end.

mod grid;
mod noise;
mod split;

pub use grid::{generate_grid, GridConfig};
pub use noise::add_noise;
pub use split::{fraction_subset, make_kfold, split_shuffle, subsample, DatasetSplit, FoldPlan};

use alloc::vec::Vec;

use crate::beam::{BeamSpec, ModeBasis};
use crate::{Error, Result, MODES};

/// Where an RFS vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Source {
    #[default]
    Analytic,
    Fem,
    Experimental,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Fem => "fem",
            Source::Experimental => "experimental",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(Source::Analytic),
            "fem" => Some(Source::Fem),
            "experimental" => Some(Source::Experimental),
            _ => None,
        }
    }
}

/// One transverse crack plus one clamping condition.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DamageScenario {
    /// γ₁ of the clamped end; 0 for perfect clamping.
    pub clamp_severity: f64,
    /// Crack position, mm from the clamped end.
    pub crack_position_mm: f64,
    /// Crack depth over beam thickness.
    pub crack_depth_ratio: f64,
    /// γ₂ of the transverse crack.
    pub crack_severity: f64,
}

impl DamageScenario {
    pub fn is_perfect_clamping(&self) -> bool {
        self.clamp_severity == 0.0
    }

    pub fn clamping_label(&self) -> &'static str {
        if self.is_perfect_clamping() {
            "perfect"
        } else {
            "imperfect"
        }
    }
}

/// A dataset row: a scenario and its eight-mode RFS vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RfsSample {
    pub scenario_id: u64,
    pub scenario: DamageScenario,
    pub rfs: [f64; MODES],
    pub source: Source,
}

impl RfsSample {
    /// Checks the `[0, 1)` range of every RFS entry.
    pub fn validate(&self) -> Result<()> {
        validate_rfs(&self.rfs)
    }
}

pub(crate) fn validate_rfs(rfs: &[f64]) -> Result<()> {
    if rfs.len() != MODES {
        return Err(Error::Validation(alloc::format!(
            "expected {MODES} RFS values, got {}",
            rfs.len()
        )));
    }
    for (i, v) in rfs.iter().enumerate() {
        if !v.is_finite() || !(0.0..1.0).contains(v) {
            return Err(Error::Validation(alloc::format!(
                "RFS mode {} = {v} outside [0, 1)",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Evaluates the RFS relations for one beam.
#[derive(Debug, Clone)]
pub struct RfsSynthesizer {
    modes: Vec<ModeBasis>,
    length_mm: f64,
}

impl RfsSynthesizer {
    pub fn new(beam: &BeamSpec) -> Result<Self> {
        Ok(RfsSynthesizer {
            modes: ModeBasis::for_beam(beam, MODES)?,
            length_mm: beam.length * 1000.0,
        })
    }

    pub fn length_mm(&self) -> f64 {
        self.length_mm
    }

    /// Squared normalised curvature of every mode at `x_mm`.
    pub fn curvatures(&self, x_mm: f64) -> Result<[f64; MODES]> {
        if !x_mm.is_finite() || !(0.0..=self.length_mm).contains(&x_mm) {
            return Err(Error::Domain(alloc::format!(
                "crack position {x_mm} mm outside [0, {}]",
                self.length_mm
            )));
        }
        let xi = x_mm / self.length_mm;
        let mut out = [0.0; MODES];
        for (o, m) in out.iter_mut().zip(&self.modes) {
            *o = m.curvature_sq(xi);
        }
        Ok(out)
    }

    /// RFS of a perfectly clamped beam: `γ₂ · [φ̄ᵢ''(x)]²`.
    pub fn rfs_perfect(&self, crack_severity: f64, x_mm: f64) -> Result<[f64; MODES]> {
        self.rfs_imperfect(0.0, crack_severity, x_mm)
    }

    /// RFS with a weakened clamp: `γ₁ + γ₂ · [φ̄ᵢ''(x₂)]²`.
    pub fn rfs_imperfect(
        &self,
        clamp_severity: f64,
        crack_severity: f64,
        x_mm: f64,
    ) -> Result<[f64; MODES]> {
        check_severity("clamp_severity", clamp_severity)?;
        check_severity("crack_severity", crack_severity)?;
        if clamp_severity + crack_severity >= 1.0 {
            return Err(Error::Domain("clamp and crack severities sum to 1 or more".into()));
        }
        let mut rfs = self.curvatures(x_mm)?;
        for v in &mut rfs {
            *v = clamp_severity + crack_severity * *v;
        }
        Ok(rfs)
    }

    /// RFS implied by a scenario.
    pub fn synthesize(&self, scenario: &DamageScenario) -> Result<[f64; MODES]> {
        self.rfs_imperfect(
            scenario.clamp_severity,
            scenario.crack_severity,
            scenario.crack_position_mm,
        )
    }
}

fn check_severity(name: &str, g: f64) -> Result<()> {
    if g.is_finite() && (0.0..1.0).contains(&g) {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!("{name} = {g} outside [0, 1)")))
    }
}
