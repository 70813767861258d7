//! Analytical Euler–Bernoulli cantilever model.
//!
//! Positions inside this module are in metres along the beam, measured from
//! the clamped end. The dataset layer converts to millimetres.

mod modes;
mod severity;

pub use modes::{
    characteristic_residual, natural_frequency, normalized_curvature_sq, solve_eigenvalues,
    ModeBasis, MAX_MODES,
};
pub use severity::{Interpolation, SeverityModel};

use crate::{Error, Result};

/// Material and geometry of a rectangular cantilever.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeamSpec {
    /// Young's modulus, Pa.
    pub elastic_modulus: f64,
    /// Mass density, kg/m³.
    pub density: f64,
    /// Length, m.
    pub length: f64,
    /// Width, m.
    pub width: f64,
    /// Thickness (weak-axis height), m.
    pub thickness: f64,
}

impl BeamSpec {
    /// Steel test beam: 1000 × 50 × 5 mm, E = 200 GPa, ρ = 7850 kg/m³.
    pub const STEEL_TEST_BEAM: BeamSpec = BeamSpec {
        elastic_modulus: 2.0e11,
        density: 7850.0,
        length: 1.0,
        width: 0.05,
        thickness: 0.005,
    };

    pub fn new(
        elastic_modulus: f64,
        density: f64,
        length: f64,
        width: f64,
        thickness: f64,
    ) -> Result<Self> {
        let spec = BeamSpec {
            elastic_modulus,
            density,
            length,
            width,
            thickness,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("elastic_modulus", self.elastic_modulus),
            ("density", self.density),
            ("length", self.length),
            ("width", self.width),
            ("thickness", self.thickness),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(name, "must be finite and strictly positive"));
            }
        }
        if !(self.thickness < self.width && self.width < self.length) {
            return Err(Error::config(
                "thickness",
                "slender beam requires thickness < width < length",
            ));
        }
        Ok(())
    }

    /// Second moment of area about the weak axis, m⁴.
    pub fn second_moment(&self) -> f64 {
        self.width * self.thickness * self.thickness * self.thickness / 12.0
    }

    /// Cross-section area, m².
    pub fn area(&self) -> f64 {
        self.width * self.thickness
    }
}

impl Default for BeamSpec {
    fn default() -> Self {
        Self::STEEL_TEST_BEAM
    }
}
