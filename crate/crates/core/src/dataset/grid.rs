use alloc::vec::Vec;

use super::{DamageScenario, RfsSample, RfsSynthesizer, Source};
use crate::beam::SeverityModel;
use crate::{Error, Result};

/// Axes of the scenario grid.
///
/// The clamping axis is given as clamp-crack depth ratios; a ratio of 0 is
/// the perfectly clamped beam.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConfig {
    pub position_start_mm: f64,
    pub position_end_mm: f64,
    pub position_step_mm: f64,
    pub depth_ratios: Vec<f64>,
    pub clamp_depth_ratios: Vec<f64>,
}

impl Default for GridConfig {
    /// 2 mm steps over the interior of the beam, crack depths 4 %..64 % in
    /// 4 % steps, and perfect clamping plus four clamp cracks of 10 %..20 %.
    ///
    /// The end points 0 and 1000 mm are left out: a crack at the clamp gives
    /// the same constant RFS vector as a weak clamp, and a crack at the free
    /// end gives no shift at all, so neither position is recoverable.
    fn default() -> Self {
        GridConfig {
            position_start_mm: 2.0,
            position_end_mm: 998.0,
            position_step_mm: 2.0,
            depth_ratios: (1..=16).map(|k| (4 * k) as f64 / 100.0).collect(),
            clamp_depth_ratios: alloc::vec![0.0, 0.10, 0.1333, 0.1667, 0.20],
        }
    }
}

impl GridConfig {
    pub fn positions(&self) -> Result<Vec<f64>> {
        let (start, end, step) = (
            self.position_start_mm,
            self.position_end_mm,
            self.position_step_mm,
        );
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::config("position_step_mm", "must be positive"));
        }
        if !(start.is_finite() && end.is_finite() && start <= end) {
            return Err(Error::config("position_end_mm", "must not precede position_start_mm"));
        }
        let count = ((end - start) / step + 1e-9) as usize + 1;
        Ok((0..count).map(|k| start + k as f64 * step).collect())
    }

    /// Number of scenarios the grid expands to.
    pub fn len(&self) -> Result<usize> {
        Ok(self.positions()?.len() * self.depth_ratios.len() * self.clamp_depth_ratios.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len().map_or(true, |n| n == 0)
    }
}

/// Expands the grid, clamping-major, then position, then depth.
pub fn generate_grid(
    config: &GridConfig,
    severity: &SeverityModel,
    synth: &RfsSynthesizer,
) -> Result<Vec<RfsSample>> {
    let positions = config.positions()?;
    if config.depth_ratios.is_empty() {
        return Err(Error::config("depth_ratios", "axis is empty"));
    }
    if config.clamp_depth_ratios.is_empty() {
        return Err(Error::config("clamp_depth_ratios", "axis is empty"));
    }
    let crack_severities = config
        .depth_ratios
        .iter()
        .map(|r| severity.severity(*r))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::config("depth_ratios", alloc::format!("{e}")))?;
    let clamp_severities = config
        .clamp_depth_ratios
        .iter()
        .map(|r| severity.severity(*r))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::config("clamp_depth_ratios", alloc::format!("{e}")))?;

    let mut out = Vec::with_capacity(positions.len() * crack_severities.len() * clamp_severities.len());
    for &clamp_severity in &clamp_severities {
        for &x in &positions {
            let curv = synth.curvatures(x)?;
            for (&depth, &g2) in config.depth_ratios.iter().zip(&crack_severities) {
                let mut rfs = curv;
                for v in &mut rfs {
                    *v = clamp_severity + g2 * *v;
                }
                out.push(RfsSample {
                    scenario_id: out.len() as u64 + 1,
                    scenario: DamageScenario {
                        clamp_severity,
                        crack_position_mm: x,
                        crack_depth_ratio: depth,
                        crack_severity: g2,
                    },
                    rfs,
                    source: Source::Analytic,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamSpec;
    use alloc::vec;

    fn synth() -> RfsSynthesizer {
        RfsSynthesizer::new(&BeamSpec::STEEL_TEST_BEAM).unwrap()
    }

    #[test]
    fn cartesian_count_and_order() {
        let cfg = GridConfig {
            position_start_mm: 100.0,
            position_end_mm: 200.0,
            position_step_mm: 100.0,
            depth_ratios: vec![0.2, 0.5],
            clamp_depth_ratios: vec![0.0],
        };
        let rows = generate_grid(&cfg, &SeverityModel::default(), &synth()).unwrap();
        assert_eq!(rows.len(), 4);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.scenario.crack_position_mm, r.scenario.crack_depth_ratio))
            .collect();
        assert_eq!(keys, vec![(100.0, 0.2), (100.0, 0.5), (200.0, 0.2), (200.0, 0.5)]);
        assert_eq!(rows[1].scenario.crack_severity, 0.0262);
        assert!(rows.iter().all(|r| r.scenario.is_perfect_clamping()));
        assert_eq!(rows.iter().map(|r| r.scenario_id).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn default_grid_size_is_same_order_as_reference_count() {
        let cfg = GridConfig::default();
        assert_eq!(cfg.positions().unwrap().len(), 499);
        let n = cfg.len().unwrap();
        assert_eq!(n, 499 * 16 * 5);
        assert!(n > 36573 / 10 && n < 36573 * 10);
    }

    #[test]
    fn rows_round_trip_through_synthesis() {
        let cfg = GridConfig {
            position_step_mm: 50.0,
            ..GridConfig::default()
        };
        let s = synth();
        let rows = generate_grid(&cfg, &SeverityModel::default(), &s).unwrap();
        assert_eq!(rows.len(), cfg.len().unwrap());
        for r in &rows {
            assert_eq!(s.synthesize(&r.scenario).unwrap(), r.rfs);
            r.validate().unwrap();
        }
        let imperfect = rows.iter().filter(|r| !r.scenario.is_perfect_clamping()).count();
        assert_eq!(imperfect, rows.len() * 4 / 5);
    }

    #[test]
    fn empty_axes_are_config_errors() {
        let m = SeverityModel::default();
        let s = synth();
        let mut cfg = GridConfig::default();
        cfg.depth_ratios.clear();
        assert!(matches!(generate_grid(&cfg, &m, &s), Err(Error::Config { key, .. }) if key == "depth_ratios"));
        let mut cfg = GridConfig::default();
        cfg.clamp_depth_ratios.clear();
        assert!(generate_grid(&cfg, &m, &s).is_err());
        let cfg = GridConfig {
            position_end_mm: 0.0,
            ..GridConfig::default()
        };
        assert!(generate_grid(&cfg, &m, &s).is_err());
        let cfg = GridConfig {
            depth_ratios: vec![0.9],
            ..GridConfig::default()
        };
        assert!(generate_grid(&cfg, &m, &s).is_err());
    }
}
