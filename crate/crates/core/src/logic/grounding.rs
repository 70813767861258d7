use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{check_truths, Formula, Predicate, Term};
use crate::tensor::{Graph, Tensor, Var};
use crate::{Error, Result};

/// A differentiable map bound to a function symbol, `[n, d_in] -> [n, d_out]`.
pub trait GroundedFunction {
    fn apply(&self, g: &mut Graph, x: Var) -> Result<Var>;
}

/// Symbol table for formula evaluation.
///
/// Variables are batched `[n, d]` tensors (rank 1 is read as `[n, 1]`);
/// constants are single `[d]` vectors.
#[derive(Default)]
pub struct Grounding<'a> {
    constants: BTreeMap<String, Tensor>,
    variables: BTreeMap<String, Tensor>,
    functions: BTreeMap<String, &'a dyn GroundedFunction>,
    predicates: BTreeMap<String, Predicate>,
}

impl fmt::Debug for Grounding<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grounding")
            .field("constants", &self.constants.keys().collect::<Vec<_>>())
            .field("variables", &self.variables.keys().collect::<Vec<_>>())
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .field("predicates", &self.predicates)
            .finish()
    }
}

impl<'a> Grounding<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(&mut self, name: &str, value: &[f64]) -> &mut Self {
        self.constants.insert(name.to_string(), Tensor::vector(value));
        self
    }

    pub fn variable(&mut self, name: &str, value: Tensor) -> Result<&mut Self> {
        let value = match value.shape().len() {
            1 => {
                let n = value.len();
                value.reshape(&[n, 1])?
            }
            2 => value,
            _ => {
                return Err(Error::Contract(alloc::format!(
                    "variable `{name}` must be [n] or [n, d], got {:?}",
                    value.shape()
                )))
            }
        };
        self.variables.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn function(&mut self, name: &str, f: &'a dyn GroundedFunction) -> &mut Self {
        self.functions.insert(name.to_string(), f);
        self
    }

    pub fn predicate(&mut self, name: &str, p: Predicate) -> &mut Self {
        self.predicates.insert(name.to_string(), p);
        self
    }

    fn batch_of(&self, name: &str) -> Result<usize> {
        self.variables
            .get(name)
            .map(|t| t.shape()[0])
            .ok_or_else(|| Error::Unbound(name.to_string()))
    }
}

struct Eval<'g, 'a> {
    ground: &'g Grounding<'a>,
    graph: &'g mut Graph,
    /// Row count inside the innermost `forall`.
    rows: Option<usize>,
    leaves: BTreeMap<(String, usize), Var>,
    last_pairs: Option<Var>,
}

impl Eval<'_, '_> {
    fn symbol(&mut self, name: &str) -> Result<Var> {
        let rows = self.rows;
        let key = (name.to_string(), rows.unwrap_or(0));
        if let Some(v) = self.leaves.get(&key) {
            return Ok(*v);
        }
        let tensor = if let Some(t) = self.ground.variables.get(name) {
            match rows {
                Some(n) if n == t.shape()[0] => t.clone(),
                Some(n) => return Err(Error::shape(t.shape(), &[n], "variable rows vs quantified batch")),
                None => {
                    return Err(Error::Contract(alloc::format!(
                        "variable `{name}` used outside a quantifier"
                    )))
                }
            }
        } else if let Some(c) = self.ground.constants.get(name) {
            let n = rows.unwrap_or(1);
            let d = c.len();
            let data = c.data().iter().copied().cycle().take(n * d).collect();
            Tensor::new(alloc::vec![n, d], data)?
        } else {
            return Err(Error::Unbound(name.to_string()));
        };
        let v = self.graph.constant(tensor);
        self.leaves.insert(key, v);
        Ok(v)
    }

    fn term(&mut self, t: &Term) -> Result<Var> {
        match t {
            Term::Symbol(s) => self.symbol(s),
            Term::Apply { function, arg } => {
                let f = *self
                    .ground
                    .functions
                    .get(function)
                    .ok_or_else(|| Error::Unbound(function.clone()))?;
                let x = self.term(arg)?;
                f.apply(self.graph, x)
            }
        }
    }

    /// Brings a one-element truth up to the row count of `other`.
    fn align(&mut self, a: Var, b: Var) -> Result<(Var, Var)> {
        let (la, lb) = (self.graph.value(a).len(), self.graph.value(b).len());
        let sa = self.graph.value(a).shape().to_vec();
        let sb = self.graph.value(b).shape().to_vec();
        Ok(if sa == sb {
            (a, b)
        } else if la == 1 {
            (self.graph.broadcast(a, &sb)?, b)
        } else if lb == 1 {
            (a, self.graph.broadcast(b, &sa)?)
        } else {
            return Err(Error::shape(&sa, &sb, "connective operands"));
        })
    }

    fn checked(&self, v: Var, what: &str) -> Result<Var> {
        check_truths(self.graph.value(v).data(), what)?;
        Ok(v)
    }

    fn formula(&mut self, f: &Formula) -> Result<Var> {
        match f {
            Formula::Atom { predicate, args } => {
                let pred = *self
                    .ground
                    .predicates
                    .get(predicate)
                    .ok_or_else(|| Error::Unbound(predicate.clone()))?;
                let u = self.term(&args[0])?;
                let v = self.term(&args[1])?;
                let t = pred.eq_rows(self.graph, u, v)?;
                self.checked(t, predicate)
            }
            Formula::Not(a) => {
                let a = self.formula(a)?;
                let t = self.graph.rsub(1.0, a);
                self.checked(t, "not")
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                let (a, b) = self.align(a, b)?;
                let g = &mut *self.graph;
                let ab = g.mul(a, b)?;
                let t = match f {
                    Formula::And(..) => ab,
                    Formula::Or(..) => {
                        let s = g.add(a, b)?;
                        g.sub(s, ab)?
                    }
                    _ => {
                        let na = g.rsub(1.0, a);
                        g.add(na, ab)?
                    }
                };
                self.checked(t, "connective")
            }
            Formula::Forall {
                x,
                y,
                aggregator,
                body,
            } => {
                let n = self.ground.batch_of(x)?;
                let ny = self.ground.batch_of(y)?;
                if n != ny {
                    return Err(Error::shape(&[n], &[ny], "diag batch sizes"));
                }
                if n == 0 {
                    return Err(Error::Contract("forall over an empty batch".into()));
                }
                let outer = self.rows.replace(n);
                let pairs = self.formula(body)?;
                self.rows = outer;
                let pairs = if self.graph.value(pairs).len() == n {
                    pairs
                } else {
                    self.graph.broadcast(pairs, &[n])?
                };
                self.last_pairs = Some(pairs);
                let s = aggregator.aggregate_node(self.graph, pairs)?;
                let s = self.graph.reshape(s, &[1])?;
                self.checked(s, "forall")
            }
        }
    }
}

/// Builds the truth of `formula` on `graph` and returns its one-element node.
///
/// Gradients flow to any parameter a bound function registers on `graph`.
pub fn evaluate(formula: &Formula, grounding: &Grounding<'_>, graph: &mut Graph) -> Result<Var> {
    Ok(run(formula, grounding, graph)?.0)
}

/// [`evaluate`], also returning the per-pair truths of the last quantifier
/// evaluated, if any.
pub fn evaluate_pairs(formula: &Formula, grounding: &Grounding<'_>, graph: &mut Graph) -> Result<(Var, Option<Var>)> {
    run(formula, grounding, graph)
}

fn run(formula: &Formula, grounding: &Grounding<'_>, graph: &mut Graph) -> Result<(Var, Option<Var>)> {
    let mut e = Eval {
        ground: grounding,
        graph,
        rows: None,
        leaves: BTreeMap::new(),
        last_pairs: None,
    };
    let v = e.formula(formula)?;
    let pairs = e.last_pairs;
    if graph.value(v).len() != 1 {
        return Err(Error::Contract("formula does not reduce to a single truth value".into()));
    }
    Ok((v, pairs))
}

/// Truth of a formula together with the per-pair truths of its outermost
/// quantifier.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryReport {
    pub truth: f64,
    pub per_pair: Vec<f64>,
}

impl QueryReport {
    /// Share of pairs whose truth is at least `threshold`.
    pub fn fraction_at_least(&self, threshold: f64) -> f64 {
        if self.per_pair.is_empty() {
            return 0.0;
        }
        self.per_pair.iter().filter(|t| **t >= threshold).count() as f64 / self.per_pair.len() as f64
    }
}

pub fn query(formula: &Formula, grounding: &Grounding<'_>) -> Result<QueryReport> {
    query_in(formula, grounding, &mut Graph::new())
}

/// [`query`] on an existing graph; needed when grounded functions hold
/// parameters already placed on `g`.
pub fn query_in(formula: &Formula, grounding: &Grounding<'_>, g: &mut Graph) -> Result<QueryReport> {
    let (v, pairs) = run(formula, grounding, g)?;
    let truth = g.value(v).item()?;
    let per_pair = match (formula, pairs) {
        (Formula::Forall { .. }, Some(p)) => g.value(p).data().to_vec(),
        _ => alloc::vec![truth],
    };
    Ok(QueryReport { truth, per_pair })
}
