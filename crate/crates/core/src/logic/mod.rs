//! Real-valued fuzzy logic over the autodiff tape.
//!
//! Truth values live in `[0, 1]`. Predicates turn a distance into a
//! similarity, connectives use product semantics and the universal
//! quantifier over a `diag` pairing is aggregated with the p-mean error
//! `1 - (mean((1 - t)^p))^(1/p)`.

mod formula;
mod grounding;

pub use formula::{parse_formula, Formula, Term};
pub use grounding::{evaluate, evaluate_pairs, query, query_in, GroundedFunction, Grounding, QueryReport};

use num_traits::Float;

use crate::tensor::{Graph, Var};
use crate::{Error, Result};

/// Distance between two equal-length vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DistanceKind {
    Euclidean,
    Manhattan,
    /// Order `p >= 1`.
    Minkowski(f64),
}

impl DistanceKind {
    fn validate(self) -> Result<()> {
        match self {
            DistanceKind::Minkowski(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::config("minkowski_p", "must be finite and >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn distance(self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != v.len() {
            return Err(Error::shape(&[u.len()], &[v.len()], "distance operands"));
        }
        let diffs = u.iter().zip(v).map(|(a, b)| (a - b).abs());
        Ok(match self {
            DistanceKind::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            DistanceKind::Manhattan => diffs.sum(),
            DistanceKind::Minkowski(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p),
        })
    }

    /// Row-wise distances between `[n, d]` nodes, giving `[n]`.
    pub fn distance_rows(self, g: &mut Graph, u: Var, v: Var) -> Result<Var> {
        let diff = g.sub(u, v)?;
        Ok(match self {
            DistanceKind::Euclidean => {
                let sq = g.mul(diff, diff)?;
                let s = g.sum_last(sq)?;
                g.sqrt(s)
            }
            DistanceKind::Manhattan => {
                let a = g.abs(diff);
                g.sum_last(a)?
            }
            DistanceKind::Minkowski(p) => {
                let a = g.abs(diff);
                let ap = g.powf(a, p);
                let s = g.sum_last(ap)?;
                g.powf(s, 1.0 / p)
            }
        })
    }
}

/// Maps a distance to a truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Transform {
    /// `exp(-α d)`
    #[default]
    ExpNeg,
    /// `1 / (1 + α d)`
    Inverse,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::ExpNeg => "exp-neg",
            Transform::Inverse => "inverse",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp-neg" | "exp_neg" => Ok(Transform::ExpNeg),
            "inverse" => Ok(Transform::Inverse),
            other => Err(Error::config("transform", alloc::format!("unknown transform {other:?}"))),
        }
    }
}

/// Distance-based similarity predicate `eq`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Predicate {
    pub distance: DistanceKind,
    pub transform: Transform,
    pub alpha: f64,
}

impl Default for Predicate {
    fn default() -> Self {
        Predicate {
            distance: DistanceKind::Euclidean,
            transform: Transform::ExpNeg,
            alpha: 1.0,
        }
    }
}

/// Names accepted by [`Predicate::named`].
pub const PREDICATE_NAMES: [&str; 4] = ["euclidean", "manhattan", "minkowski1", "minkowski2"];

impl Predicate {
    pub fn new(distance: DistanceKind, transform: Transform, alpha: f64) -> Result<Self> {
        let p = Predicate {
            distance,
            transform,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha", "must be finite and positive"));
        }
        self.distance.validate()
    }

    /// The four named configurations. `minkowski2` computes the same
    /// distance as `euclidean` and `minkowski1` the same as `manhattan`;
    /// the Minkowski variants default to α = 0.5 instead of 1.
    pub fn named(name: &str) -> Result<Self> {
        let (distance, alpha) = match name {
            "euclidean" => (DistanceKind::Euclidean, 1.0),
            "manhattan" => (DistanceKind::Manhattan, 1.0),
            "minkowski1" => (DistanceKind::Minkowski(1.0), 0.5),
            "minkowski2" => (DistanceKind::Minkowski(2.0), 0.5),
            other => {
                return Err(Error::config(
                    "predicate",
                    alloc::format!("unknown predicate {other:?}, expected one of {PREDICATE_NAMES:?}"),
                ))
            }
        };
        Predicate::new(distance, Transform::ExpNeg, alpha)
    }

    /// Name of the matching named configuration, ignoring α.
    pub fn name(&self) -> &'static str {
        match self.distance {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Manhattan => "manhattan",
            DistanceKind::Minkowski(1.0) => "minkowski1",
            DistanceKind::Minkowski(_) => "minkowski2",
        }
    }

    pub fn truth(&self, d: f64) -> f64 {
        match self.transform {
            Transform::ExpNeg => (-self.alpha * d).exp(),
            Transform::Inverse => 1.0 / (1.0 + self.alpha * d),
        }
    }

    pub fn eq(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.truth(self.distance.distance(u, v)?))
    }

    /// Row-wise truths of `eq(u_i, v_i)` for `[n, d]` nodes.
    pub fn eq_rows(&self, g: &mut Graph, u: Var, v: Var) -> Result<Var> {
        let d = self.distance.distance_rows(g, u, v)?;
        let ad = g.scale(d, self.alpha);
        Ok(match self.transform {
            Transform::ExpNeg => {
                let n = g.neg(ad);
                g.exp(n)
            }
            Transform::Inverse => {
                let s = g.offset(ad, 1.0);
                g.recip(s)
            }
        })
    }
}

/// The p-mean-error universal aggregator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregator {
    pub p: f64,
}

impl Default for Aggregator {
    fn default() -> Self {
        Aggregator { p: 2.0 }
    }
}

impl Aggregator {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::config("agg_p", "must be finite and >= 1"));
        }
        Ok(Aggregator { p })
    }

    pub fn aggregate(&self, truths: &[f64]) -> Result<f64> {
        p_mean_error(truths, self.p)
    }

    /// Aggregates every element of `truths` into a scalar node.
    pub fn aggregate_node(&self, g: &mut Graph, truths: Var) -> Result<Var> {
        let err = g.rsub(1.0, truths);
        // The power mean is homogeneous, so dividing by the largest error
        // (held constant) changes nothing but keeps `e^p` from underflowing.
        let c = g.value(err).data().iter().copied().fold(0.0, f64::max);
        let scaled = if c > 0.0 { g.scale(err, 1.0 / c) } else { err };
        let powed = g.powf(scaled, self.p);
        let m = g.mean(powed)?;
        let mut root = g.powf(m, 1.0 / self.p);
        if c > 0.0 {
            root = g.scale(root, c);
        }
        Ok(g.rsub(1.0, root))
    }
}

pub fn p_mean_error(truths: &[f64], p: f64) -> Result<f64> {
    if truths.is_empty() {
        return Err(Error::Contract("p-mean error of an empty set".into()));
    }
    if let Some(t) = truths.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Domain(alloc::format!("truth value {t} outside [0, 1]")));
    }
    let c = truths.iter().map(|t| 1.0 - t).fold(0.0, f64::max);
    if c == 0.0 {
        return Ok(1.0);
    }
    // Same operation order as `aggregate_node`, so both agree bit for bit.
    let inv = 1.0 / c;
    let m = truths.iter().map(|t| (inv * (1.0 - t)).powf(p)).sum::<f64>() / truths.len() as f64;
    Ok(1.0 - c * m.powf(1.0 / p))
}

/// Product-semantics connectives on plain numbers.
pub mod connective {
    pub fn not(a: f64) -> f64 {
        1.0 - a
    }

    pub fn and(a: f64, b: f64) -> f64 {
        a * b
    }

    pub fn or(a: f64, b: f64) -> f64 {
        a + b - a * b
    }

    pub fn implies(a: f64, b: f64) -> f64 {
        1.0 - a + a * b
    }
}

pub(crate) fn check_truths(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        Some(t) => Err(Error::Domain(alloc::format!("{what} produced truth value {t} outside [0, 1]"))),
        None => Ok(()),
    }
}
