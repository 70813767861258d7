//! Random instances for finite-difference gradient checks. Shared with the
//! acceptance target of the `lcnr` crate.

use lcnr_core::logic::{Aggregator, Predicate};
use lcnr_core::seed::{rng, Purpose};
use lcnr_core::tensor::{max_gradient_error, Graph, Padding, Tensor, Var};
use lcnr_core::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: usize = 20;
pub const H: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;
/// Gradients smaller than this are compared in absolute terms.
pub const FLOOR: f64 = 1e-6;

fn uniform(r: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| r.random_range(lo..hi)).collect()).unwrap()
}

/// Values in `±[margin, hi)`, away from kinks at zero.
fn away_from_zero(r: &mut ChaCha8Rng, shape: &[usize], margin: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let m = r.random_range(margin..hi);
            if r.random_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

/// Reduces any node to a scalar with fixed random weights, so every output
/// entry contributes a distinct direction.
fn weighted_sum(g: &mut Graph, out: Var, weights: &Tensor) -> Result<Var> {
    let w = g.constant(weights.clone());
    let p = g.mul(out, w)?;
    Ok(g.sum(p))
}

fn worst_over<F>(seed: u64, mut instance: F) -> f64
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    let mut r = rng(seed, Purpose::Init);
    (0..INSTANCES).map(|_| instance(&mut r)).fold(0.0, f64::max)
}

pub fn conv1d(seed: u64) -> f64 {
    worst_over(seed, |r| {
        let (b, c, o) = (r.random_range(1..=3), r.random_range(1..=3), r.random_range(1..=3));
        let w: usize = r.random_range(3..=9);
        let k = r.random_range(1..=3);
        let stride = r.random_range(1..=2);
        let padding = if r.random_bool(0.5) { Padding::Same } else { Padding::Valid };
        let out_w = match padding {
            Padding::Same => w.div_ceil(stride),
            Padding::Valid => (w - k) / stride + 1,
        };
        let x = uniform(r, &[b, c, w], -1.0, 1.0);
        let kern = uniform(r, &[o, c, k], -1.0, 1.0);
        let bias = uniform(r, &[o], -0.5, 0.5);
        let wts = uniform(r, &[b, o, out_w], -1.0, 1.0);
        max_gradient_error(&[x, kern, bias], H, FLOOR, |g, v| {
            let y = g.conv1d(v[0], v[1], v[2], stride, padding)?;
            weighted_sum(g, y, &wts)
        })
        .unwrap()
    })
}

pub fn dense(seed: u64) -> f64 {
    worst_over(seed, |r| {
        let (b, i, o) = (r.random_range(1..=4), r.random_range(1..=6), r.random_range(1..=4));
        let x = uniform(r, &[b, i], -1.0, 1.0);
        let wm = uniform(r, &[o, i], -1.0, 1.0);
        let bias = uniform(r, &[o], -0.5, 0.5);
        let wts = uniform(r, &[b, o], -1.0, 1.0);
        max_gradient_error(&[x, wm, bias], H, FLOOR, |g, v| {
            let y = g.linear(v[0], v[1], v[2])?;
            weighted_sum(g, y, &wts)
        })
        .unwrap()
    })
}

pub fn relu(seed: u64) -> f64 {
    worst_over(seed, |r| {
        let n = r.random_range(1..=12);
        let x = away_from_zero(r, &[n], 0.01, 2.0);
        let wts = uniform(r, &[n], -1.0, 1.0);
        max_gradient_error(&[x], H, FLOOR, |g, v| {
            let y = g.relu(v[0]);
            weighted_sum(g, y, &wts)
        })
        .unwrap()
    })
}

/// `eq(u, v)` row-wise for one predicate; both arguments are checked.
pub fn predicate(p: Predicate, seed: u64) -> f64 {
    worst_over(seed, |r| {
        let (n, d) = (r.random_range(1..=6), r.random_range(1..=3));
        let u = uniform(r, &[n, d], -1.0, 1.0);
        // Offsets bounded away from zero keep |u - v| differentiable.
        let off = away_from_zero(r, &[n, d], 0.01, 0.8);
        let v: Vec<f64> = u.data().iter().zip(off.data()).map(|(a, o)| a + o).collect();
        let v = Tensor::new(vec![n, d], v).unwrap();
        let wts = uniform(r, &[n], -1.0, 1.0);
        max_gradient_error(&[u, v], H, FLOOR, |g, vars| {
            let t = p.eq_rows(g, vars[0], vars[1])?;
            weighted_sum(g, t, &wts)
        })
        .unwrap()
    })
}

pub fn p_mean_error(seed: u64) -> f64 {
    worst_over(seed, |r| {
        let n = r.random_range(1..=10);
        let p = [1.0, 2.0, 3.0, 4.5][r.random_range(0..4)];
        let t = uniform(r, &[n], 0.05, 0.95);
        let agg = Aggregator::new(p).unwrap();
        max_gradient_error(&[t], H, FLOOR, |g, v| agg.aggregate_node(g, v[0])).unwrap()
    })
}

/// Every op named by the gradient acceptance criterion, with its worst error.
pub fn acceptance_suite() -> Vec<(String, f64)> {
    let mut out = vec![
        ("conv1d".to_string(), conv1d(101)),
        ("dense".to_string(), dense(102)),
        ("relu".to_string(), relu(103)),
    ];
    for (i, name) in lcnr_core::logic::PREDICATE_NAMES.iter().enumerate() {
        let p = Predicate::named(name).unwrap();
        out.push((format!("predicate {name}"), predicate(p, 110 + i as u64)));
    }
    let mut inverse = Predicate::named("euclidean").unwrap();
    inverse.transform = lcnr_core::logic::Transform::Inverse;
    out.push(("predicate euclidean/inverse".to_string(), predicate(inverse, 120)));
    out.push(("pMeanError".to_string(), p_mean_error(130)));
    out
}
