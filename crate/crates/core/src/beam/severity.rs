use alloc::vec::Vec;

use crate::{Error, Result};

/// How a [`SeverityModel`] interpolates between anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Interpolation {
    /// Fritsch–Carlson monotone piecewise-cubic Hermite.
    #[default]
    MonotoneCubic,
    Linear,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::MonotoneCubic => "monotone-cubic",
            Interpolation::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "monotone-cubic" => Ok(Interpolation::MonotoneCubic),
            "linear" => Ok(Interpolation::Linear),
            other => Err(Error::config("interpolation", alloc::format!("unknown interpolation {other:?}"))),
        }
    }
}

/// Crack severity γ as a function of relative crack depth a/H.
///
/// Anchors are `(depth_ratio, severity)` pairs. The curve passes exactly
/// through every anchor and never extrapolates past the last one.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeverityModel {
    anchors: Vec<(f64, f64)>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

impl SeverityModel {
    /// Measured severities of the steel test beam: a/H = 0.2, 0.25 and 0.5.
    pub const MEASURED_ANCHORS: [(f64, f64); 3] = [(0.2, 0.0033459), (0.25, 0.0051), (0.5, 0.0262)];

    /// Continuation anchor at a/H = 0.64, the deepest crack in the default
    /// grid: the power law through the 0.25 and 0.5 anchors,
    /// `0.0262 · 1.28^log2(0.0262/0.0051)`.
    pub const DEEP_ANCHOR: (f64, f64) = (0.64, 0.046927);

    pub fn new(anchors: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::config("severity_anchors", "need at least two anchors"));
        }
        if anchors[0] != (0.0, 0.0) {
            return Err(Error::config(
                "severity_anchors",
                "first anchor must be (0, 0): an undamaged beam has zero severity",
            ));
        }
        for &(r, g) in &anchors {
            if !r.is_finite() || !(0.0..1.0).contains(&r) {
                return Err(Error::config("severity_anchors", "depth ratio must lie in [0, 1)"));
            }
            if !g.is_finite() || !(0.0..1.0).contains(&g) {
                return Err(Error::config("severity_anchors", "severity must lie in [0, 1)"));
            }
        }
        for w in anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::config(
                    "severity_anchors",
                    "depth ratios must be strictly increasing",
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::config(
                    "severity_anchors",
                    "severity must be nondecreasing in depth",
                ));
            }
        }
        let slopes = match interpolation {
            Interpolation::MonotoneCubic => pchip_slopes(&anchors),
            Interpolation::Linear => Vec::new(),
        };
        Ok(SeverityModel {
            anchors,
            slopes,
            interpolation,
        })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn max_depth_ratio(&self) -> f64 {
        self.anchors[self.anchors.len() - 1].0
    }

    /// Severity at `depth_ratio` (a/H).
    pub fn severity(&self, depth_ratio: f64) -> Result<f64> {
        let max = self.max_depth_ratio();
        if !(0.0..=max).contains(&depth_ratio) {
            return Err(Error::OutOfRange {
                value: depth_ratio,
                min: 0.0,
                max,
            });
        }
        let seg = match self
            .anchors
            .binary_search_by(|a| a.0.total_cmp(&depth_ratio))
        {
            Ok(exact) => return Ok(self.anchors[exact].1),
            Err(ins) => ins - 1,
        };
        let (x0, y0) = self.anchors[seg];
        let (x1, y1) = self.anchors[seg + 1];
        let h = x1 - x0;
        let t = (depth_ratio - x0) / h;
        let value = match self.interpolation {
            Interpolation::Linear => y0 + t * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (d0, d1) = (self.slopes[seg], self.slopes[seg + 1]);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
            }
        };
        Ok(value.clamp(y0, y1))
    }
}

impl Default for SeverityModel {
    fn default() -> Self {
        let mut anchors = Vec::with_capacity(5);
        anchors.push((0.0, 0.0));
        anchors.extend_from_slice(&Self::MEASURED_ANCHORS);
        anchors.push(Self::DEEP_ANCHOR);
        Self::new(anchors, Interpolation::MonotoneCubic).expect("default anchors are valid")
    }
}

/// Fritsch–Carlson slopes with the shape-preserving three-point end rule.
fn pchip_slopes(pts: &[(f64, f64)]) -> Vec<f64> {
    let n = pts.len();
    let h: Vec<f64> = pts.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let delta: Vec<f64> = pts
        .windows(2)
        .zip(&h)
        .map(|(w, h)| (w[1].1 - w[0].1) / h)
        .collect();
    if n == 2 {
        return alloc::vec![delta[0], delta[0]];
    }
    let mut d = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
