use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::{index, SliceRandom};

use super::RfsSample;
use crate::seed::{self, Purpose};
use crate::{Error, Result};

/// A seeded train/test partition.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<RfsSample>,
    pub test: Vec<RfsSample>,
    pub seed: u64,
    pub ratio: f64,
}

/// Shuffles `samples` and puts the first `round(ratio · n)` into `train`.
pub fn split_shuffle(samples: &[RfsSample], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config("ratio", "must lie strictly between 0 and 1"));
    }
    if samples.len() < 10 {
        return Err(Error::Contract(alloc::format!(
            "splitting needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut seed::rng(seed, Purpose::Split));
    let n_train = (ratio * samples.len() as f64).round() as usize;
    let (train, test) = order.split_at(n_train);
    Ok(DatasetSplit {
        train: train.iter().map(|&i| samples[i].clone()).collect(),
        test: test.iter().map(|&i| samples[i].clone()).collect(),
        seed,
        ratio,
    })
}

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    /// `assignments[i]` is the fold holding out sample `i`.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Indices held out by `fold`, ascending.
    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Train on every fold but `fold`, test on `fold`.
    pub fn split(&self, samples: &[RfsSample], fold: usize) -> Result<DatasetSplit> {
        if samples.len() != self.assignments.len() {
            return Err(Error::shape(
                &[samples.len()],
                &[self.assignments.len()],
                "fold plan vs samples",
            ));
        }
        if fold >= self.k {
            return Err(Error::config("fold", alloc::format!("fold {fold} >= k = {}", self.k)));
        }
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (s, &f) in samples.iter().zip(&self.assignments) {
            if f == fold {
                test.push(s.clone());
            } else {
                train.push(s.clone());
            }
        }
        Ok(DatasetSplit {
            train,
            test,
            seed: self.seed,
            ratio: 1.0 - 1.0 / self.k as f64,
        })
    }
}

/// Balanced k-fold assignment after a seeded shuffle.
pub fn make_kfold(n_samples: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n_samples {
        return Err(Error::config(
            "k",
            alloc::format!("need 2 <= k <= {n_samples}, got {k}"),
        ));
    }
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut seed::rng(seed, Purpose::Folds));
    let mut assignments = alloc::vec![0; n_samples];
    for (rank, &i) in order.iter().enumerate() {
        assignments[i] = rank % k;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// `n` samples chosen uniformly without replacement, in their original order.
pub fn subsample(samples: &[RfsSample], n: usize, seed: u64) -> Result<Vec<RfsSample>> {
    if n > samples.len() {
        return Err(Error::config(
            "subset_size",
            alloc::format!("{n} exceeds the {} available samples", samples.len()),
        ));
    }
    if n == samples.len() {
        return Ok(samples.to_vec());
    }
    let mut picked = index::sample(&mut seed::rng(seed, Purpose::Subset), samples.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| samples[i].clone()).collect())
}

/// A seeded `fraction` of `samples` (at least one). Fraction 1 is the identity.
pub fn fraction_subset(samples: &[RfsSample], fraction: f64, seed: u64) -> Result<Vec<RfsSample>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config("data_fraction", "must lie in (0, 1]"));
    }
    let n = ((fraction * samples.len() as f64).round() as usize).clamp(1, samples.len().max(1));
    subsample(samples, n.min(samples.len()), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DamageScenario, Source};

    fn samples(n: usize) -> Vec<RfsSample> {
        (0..n)
            .map(|i| RfsSample {
                scenario_id: i as u64 + 1,
                scenario: DamageScenario {
                    clamp_severity: 0.0,
                    crack_position_mm: i as f64,
                    crack_depth_ratio: 0.2,
                    crack_severity: 0.0033459,
                },
                rfs: [0.0; 8],
                source: Source::Analytic,
            })
            .collect()
    }

    fn ids(v: &[RfsSample]) -> Vec<u64> {
        v.iter().map(|s| s.scenario_id).collect()
    }

    #[test]
    fn seventy_thirty() {
        let s = split_shuffle(&samples(10), 0.7, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (7, 3));
        let mut all = ids(&s.train);
        all.extend(ids(&s.test));
        all.sort_unstable();
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let data = samples(1000);
        let a = split_shuffle(&data, 0.7, 42).unwrap();
        let b = split_shuffle(&data, 0.7, 42).unwrap();
        let c = split_shuffle(&data, 0.7, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(ids(&a.train), ids(&c.train));
    }

    #[test]
    fn split_rejects_bad_inputs() {
        assert!(matches!(split_shuffle(&samples(10), 1.0, 0), Err(Error::Config { .. })));
        assert!(split_shuffle(&samples(10), 0.0, 0).is_err());
        assert!(split_shuffle(&samples(9), 0.5, 0).is_err());
    }

    #[test]
    fn fold_sizes() {
        assert_eq!(make_kfold(10, 5, 3).unwrap().fold_sizes(), alloc::vec![2; 5]);
        let mut sizes = make_kfold(11, 5, 3).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, alloc::vec![2, 2, 2, 2, 3]);
        assert!(make_kfold(10, 1, 0).is_err());
        assert!(make_kfold(3, 4, 0).is_err());
    }

    #[test]
    fn held_out_folds_partition_the_data() {
        let data = samples(37);
        let plan = make_kfold(data.len(), 4, 9).unwrap();
        let mut seen = Vec::new();
        for f in 0..4 {
            let split = plan.split(&data, f).unwrap();
            assert_eq!(split.train.len() + split.test.len(), data.len());
            assert_eq!(ids(&split.test).len(), plan.held_out(f).len());
            seen.extend(ids(&split.test));
        }
        seen.sort_unstable();
        assert_eq!(seen, (1..=37).collect::<Vec<_>>());
    }

    #[test]
    fn subsets() {
        let data = samples(100);
        let sub = subsample(&data, 40, 5).unwrap();
        assert_eq!(sub.len(), 40);
        assert!(ids(&sub).windows(2).all(|w| w[0] < w[1]));
        assert_eq!(fraction_subset(&data, 1.0, 5).unwrap(), data);
        assert_eq!(fraction_subset(&data, 0.1, 5).unwrap().len(), 10);
        assert!(fraction_subset(&data, 0.0, 5).is_err());
        assert!(subsample(&data, 101, 5).is_err());
    }
}
