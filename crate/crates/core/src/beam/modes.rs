use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::BeamSpec;
use crate::{Error, Result};

/// Largest mode index the bracketed solver supports.
pub const MAX_MODES: usize = 32;

const BISECTION_TOL: f64 = 1e-13;
const BISECTION_MAX_ITER: usize = 200;

/// Scaled characteristic function `cos λ + 1/cosh λ`.
///
/// It has the same roots and sign as `cos λ · cosh λ + 1` but stays O(1)
/// for high modes, where the unscaled product amplifies the unavoidable
/// rounding of λ by `cosh λ` (≈ 8.5e9 for the eighth mode).
pub fn characteristic_residual(lambda: f64) -> f64 {
    lambda.cos() + 1.0 / lambda.cosh()
}

/// First `n` roots of `cos λ cosh λ + 1 = 0`.
pub fn solve_eigenvalues(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_MODES {
        return Err(Error::Domain(alloc::format!(
            "mode count {n} outside 1..={MAX_MODES}"
        )));
    }
    (1..=n).map(eigenvalue).collect()
}

fn eigenvalue(mode: usize) -> Result<f64> {
    let centre = (2 * mode - 1) as f64 * PI / 2.0;
    let (mut lo, mut hi) = (centre - 1.0, centre + 1.0);
    let mut f_lo = characteristic_residual(lo);
    let f_hi = characteristic_residual(hi);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Internal(alloc::format!(
            "root of mode {mode} not bracketed"
        )));
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_TOL || mid == lo || mid == hi {
            break;
        }
        let f_mid = characteristic_residual(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    // Return whichever end has the smaller residual.
    let mid = 0.5 * (lo + hi);
    Ok([lo, mid, hi]
        .into_iter()
        .min_by(|a, b| {
            characteristic_residual(*a)
                .abs()
                .total_cmp(&characteristic_residual(*b).abs())
        })
        .unwrap_or(mid))
}

/// One transverse mode of the clamped-free beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBasis {
    /// 1-based mode number.
    pub mode_index: usize,
    /// Dimensionless eigenvalue λᵢ.
    pub eigenvalue: f64,
    /// Mode-shape coefficient σᵢ = (cosh λ + cos λ)/(sinh λ + sin λ).
    pub shape_coefficient: f64,
    /// Natural frequency of the undamaged beam, Hz.
    pub undamaged_frequency: f64,
    /// 1 − σᵢ evaluated without cancellation.
    one_minus_sigma: f64,
}

impl ModeBasis {
    /// The first `n` modes of `spec`.
    pub fn for_beam(spec: &BeamSpec, n: usize) -> Result<Vec<ModeBasis>> {
        spec.validate()?;
        let lambdas = solve_eigenvalues(n)?;
        let stiffness = (spec.elastic_modulus * spec.second_moment()
            / (spec.density * spec.area() * spec.length.powi(4)))
        .sqrt();
        Ok(lambdas
            .into_iter()
            .enumerate()
            .map(|(k, lambda)| Self::from_eigenvalue(k + 1, lambda, stiffness))
            .collect())
    }

    /// Modes with unit frequency scale; only the shape is meaningful.
    pub fn shapes(n: usize) -> Result<Vec<ModeBasis>> {
        let lambdas = solve_eigenvalues(n)?;
        Ok(lambdas
            .into_iter()
            .enumerate()
            .map(|(k, lambda)| Self::from_eigenvalue(k + 1, lambda, 1.0))
            .collect())
    }

    fn from_eigenvalue(mode_index: usize, lambda: f64, stiffness: f64) -> Self {
        let denom = lambda.sinh() + lambda.sin();
        let shape_coefficient = (lambda.cosh() + lambda.cos()) / denom;
        let one_minus_sigma = (lambda.sin() - lambda.cos() - (-lambda).exp()) / denom;
        ModeBasis {
            mode_index,
            eigenvalue: lambda,
            shape_coefficient,
            undamaged_frequency: lambda * lambda / (2.0 * PI) * stiffness,
            one_minus_sigma,
        }
    }

    /// Mode shape φ(ξ) at relative position ξ = x/L.
    pub fn shape(&self, xi: f64) -> f64 {
        let z = self.eigenvalue * xi;
        let s = self.shape_coefficient;
        self.hyperbolic_part(z) - z.cos() + s * z.sin()
    }

    /// cosh z − σ sinh z, written so that it does not cancel for large z.
    fn hyperbolic_part(&self, z: f64) -> f64 {
        0.5 * (z.exp() * self.one_minus_sigma + (-z).exp() * (1.0 + self.shape_coefficient))
    }

    /// Second derivative of φ with respect to ξ, divided by λ².
    ///
    /// Equals `cosh z + cos z − σ(sinh z + sin z)` with `z = λξ`; its value
    /// at the clamp is 2.
    pub fn scaled_curvature(&self, xi: f64) -> f64 {
        let z = self.eigenvalue * xi;
        self.hyperbolic_part(z) + z.cos() - self.shape_coefficient * z.sin()
    }

    /// Squared modal curvature normalised to 1 at the clamp, at ξ = x/L.
    pub fn curvature_sq(&self, xi: f64) -> f64 {
        if xi >= 1.0 {
            return 0.0;
        }
        let c = 0.5 * self.scaled_curvature(xi);
        (c * c).min(1.0)
    }
}

/// Natural frequency of mode `mode` (1-based) of the undamaged beam, Hz.
pub fn natural_frequency(spec: &BeamSpec, mode: usize) -> Result<f64> {
    if mode == 0 || mode > MAX_MODES {
        return Err(Error::Domain(alloc::format!(
            "mode index {mode} outside 1..={MAX_MODES}"
        )));
    }
    let modes = ModeBasis::for_beam(spec, mode)?;
    Ok(modes[mode - 1].undamaged_frequency)
}

/// Normalised squared modal curvature of mode `mode` at `x` metres on a beam
/// of `length` metres.
pub fn normalized_curvature_sq(mode: usize, x: f64, length: f64) -> Result<f64> {
    if mode == 0 || mode > MAX_MODES {
        return Err(Error::Domain(alloc::format!(
            "mode index {mode} outside 1..={MAX_MODES}"
        )));
    }
    if !(length > 0.0) || !(0.0..=length).contains(&x) {
        return Err(Error::Domain(alloc::format!(
            "position {x} outside [0, {length}]"
        )));
    }
    let modes = ModeBasis::shapes(mode)?;
    Ok(modes[mode - 1].curvature_sq(x / length))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Newton iteration on the scaled equation from the asymptotic guess,
    /// independent of the bisection path.
    fn newton_root(mode: usize) -> f64 {
        let mut l = (2 * mode - 1) as f64 * PI / 2.0;
        for _ in 0..100 {
            let f = l.cos() + 1.0 / l.cosh();
            let df = -l.sin() - l.sinh() / (l.cosh() * l.cosh());
            l -= f / df;
        }
        l
    }

    #[test]
    fn first_eigenvalues() {
        let l = solve_eigenvalues(2).unwrap();
        assert!((l[0] - 1.875104).abs() < 1e-6, "{}", l[0]);
        assert!((l[1] - 4.694091).abs() < 1e-6, "{}", l[1]);
    }

    #[test]
    fn eigenvalues_match_newton_oracle() {
        let l = solve_eigenvalues(MAX_MODES).unwrap();
        for (k, lambda) in l.iter().enumerate() {
            let oracle = newton_root(k + 1);
            assert!((lambda - oracle).abs() < 1e-12, "mode {}: {lambda} vs {oracle}", k + 1);
            assert!(characteristic_residual(*lambda).abs() < 1e-12);
            let centre = (2 * k + 1) as f64 * PI / 2.0;
            assert!((lambda - centre).abs() < 1.0);
            if k + 1 >= 5 {
                assert!((lambda - centre).abs() < 1e-3);
            }
        }
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn mode_count_bounds() {
        assert!(solve_eigenvalues(0).is_err());
        assert!(solve_eigenvalues(33).is_err());
        assert!(natural_frequency(&BeamSpec::STEEL_TEST_BEAM, 0).is_err());
    }

    #[test]
    fn test_beam_fundamental_frequency() {
        let b = BeamSpec::STEEL_TEST_BEAM;
        let l1 = newton_root(1);
        let oracle = l1 * l1 / (2.0 * PI)
            * (b.elastic_modulus * b.second_moment() / (b.density * b.area())).sqrt();
        let f1 = natural_frequency(&b, 1).unwrap();
        assert!((f1 - oracle).abs() < 1e-12);
        assert!((f1 - 4.08).abs() < 0.005, "{f1}");
    }

    #[test]
    fn frequency_scaling_laws() {
        let b = BeamSpec::STEEL_TEST_BEAM;
        let thick = BeamSpec { thickness: 0.01, ..b };
        let long = BeamSpec { length: 4.0, ..b };
        let base = ModeBasis::for_beam(&b, 8).unwrap();
        let t = ModeBasis::for_beam(&thick, 8).unwrap();
        let l = ModeBasis::for_beam(&long, 8).unwrap();
        for i in 0..8 {
            let f = base[i].undamaged_frequency;
            assert!((t[i].undamaged_frequency / f - 2.0).abs() < 1e-12);
            assert!((f / l[i].undamaged_frequency - 16.0).abs() < 1e-12);
        }
        assert!(base.windows(2).all(|w| w[0].undamaged_frequency < w[1].undamaged_frequency));
    }

    #[test]
    fn curvature_endpoints() {
        for mode in 1..=8 {
            assert_eq!(normalized_curvature_sq(mode, 0.0, 1.0).unwrap(), 1.0);
            assert_eq!(normalized_curvature_sq(mode, 1.0, 1.0).unwrap(), 0.0);
        }
        let mid = normalized_curvature_sq(1, 0.5, 1.0).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
        assert!(normalized_curvature_sq(1, -0.1, 1.0).is_err());
        assert!(normalized_curvature_sq(1, 1.1, 1.0).is_err());
    }

    /// Direct textbook mode shape, used as a finite-difference oracle.
    fn naive_shape(lambda: f64, xi: f64) -> f64 {
        let s = (lambda.cosh() + lambda.cos()) / (lambda.sinh() + lambda.sin());
        let z = lambda * xi;
        z.cosh() - z.cos() - s * (z.sinh() - z.sin())
    }

    #[test]
    fn curvature_matches_finite_differences_of_shape() {
        // Low modes only: the naive shape cancels catastrophically for high λ.
        let modes = ModeBasis::shapes(4).unwrap();
        let h = 1e-4;
        let mut state = 12345u64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let xi = 0.01 + 0.98 * ((state >> 11) as f64 / (1u64 << 53) as f64);
            for m in &modes {
                let l = m.eigenvalue;
                let fd = (naive_shape(l, xi + h) - 2.0 * naive_shape(l, xi) + naive_shape(l, xi - h))
                    / (h * h)
                    / (l * l);
                let analytic = m.scaled_curvature(xi);
                let scale = analytic.abs().max(1.0);
                assert!(
                    (fd - analytic).abs() / scale < 1e-5,
                    "mode {} xi {xi}: fd {fd} vs {analytic}",
                    m.mode_index
                );
            }
        }
    }

    #[test]
    fn curvature_maximum_is_at_clamp() {
        let modes = ModeBasis::shapes(8).unwrap();
        for m in &modes {
            let max = (0..=10_000)
                .map(|k| m.curvature_sq(k as f64 / 10_000.0))
                .fold(0.0f64, f64::max);
            assert_eq!(max, 1.0);
            assert!((0..=10_000).all(|k| {
                let v = m.curvature_sq(k as f64 / 10_000.0);
                (0.0..=1.0).contains(&v)
            }));
        }
    }

    #[test]
    fn interior_zero_count_matches_mode_index() {
        let modes = ModeBasis::shapes(8).unwrap();
        for m in &modes {
            let n = 20_000;
            let mut sign_changes = 0;
            let mut prev = m.scaled_curvature(1e-6);
            for k in 1..n {
                let v = m.scaled_curvature(k as f64 / n as f64);
                if v.signum() != prev.signum() {
                    sign_changes += 1;
                }
                prev = v;
            }
            assert_eq!(sign_changes, m.mode_index - 1, "mode {}", m.mode_index);
        }
    }
}
