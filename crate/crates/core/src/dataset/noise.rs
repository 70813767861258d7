use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use super::RfsSample;
use crate::seed::{self, Purpose};
use crate::{Error, Result};

/// Largest value strictly below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Adds zero-mean Gaussian noise to every RFS entry.
///
/// The standard deviation is `sigma_rel` times the largest RFS entry in
/// `samples`; perturbed values are clamped to `[0, 1)`.
pub fn add_noise(samples: &[RfsSample], sigma_rel: f64, seed: u64) -> Result<Vec<RfsSample>> {
    if !(sigma_rel.is_finite() && sigma_rel >= 0.0) {
        return Err(Error::config("sigma_rel", "must be finite and non-negative"));
    }
    let max = samples
        .iter()
        .flat_map(|s| s.rfs.iter().copied())
        .fold(0.0f64, f64::max);
    let sigma = sigma_rel * max;
    if sigma == 0.0 {
        return Ok(samples.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::config("sigma_rel", alloc::format!("{e}")))?;
    let mut rng = seed::rng(seed, Purpose::Noise);
    Ok(samples
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for v in &mut out.rfs {
                *v = (*v + normal.sample(&mut rng)).clamp(0.0, BELOW_ONE);
            }
            out
        })
        .collect())
}
