use alloc::vec::Vec;

use num_traits::Float;

use super::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be finite and positive"));
        }
        for (key, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(key, "must lie in [0, 1)"));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        Ok(())
    }
}

/// Moment estimates for a fixed list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(params: &[&Tensor]) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| alloc::vec![0.0; p.len()]).collect();
        AdamState {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
        }
    }

    /// One bias-corrected update of every parameter.
    pub fn step(&mut self, config: &AdamConfig, params: &mut [&mut Tensor], grads: &[&Tensor]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::shape(
                &[params.len(), grads.len()],
                &[self.first_moment.len()],
                "adam parameter lists",
            ));
        }
        for (p, g) in params.iter().zip(grads) {
            if p.shape() != g.shape() {
                return Err(Error::shape(p.shape(), g.shape(), "adam parameter vs gradient"));
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - config.beta1.powi(t);
        let c2 = 1.0 - config.beta2.powi(t);
        let step = config.learning_rate * c2.sqrt() / c1;
        let eps_hat = config.epsilon * c2.sqrt();
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.first_moment[i], &mut self.second_moment[i]);
            for (((w, &gr), mk), vk) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mk = config.beta1 * *mk + (1.0 - config.beta1) * gr;
                *vk = config.beta2 * *vk + (1.0 - config.beta2) * gr * gr;
                *w -= step * *mk / (vk.sqrt() + eps_hat);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig::default();
        let mut w = Tensor::vector(&[1.0, -1.0, 0.5]);
        let g = Tensor::vector(&[3.0, -0.2, 0.0]);
        let mut st = AdamState::new(&[&w]);
        st.step(&cfg, &mut [&mut w], &[&g]).unwrap();
        assert!((w.data()[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((w.data()[1] - (-1.0 + 1e-3)).abs() < 1e-9);
        assert_eq!(w.data()[2], 0.5);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let cfg = AdamConfig {
            learning_rate: 0.05,
            ..AdamConfig::default()
        };
        let mut w = Tensor::vector(&[4.0, -3.0]);
        let mut st = AdamState::new(&[&w]);
        for _ in 0..2000 {
            let g = Tensor::vector(&[2.0 * (w.data()[0] - 1.0), 2.0 * (w.data()[1] + 2.0)]);
            st.step(&cfg, &mut [&mut w], &[&g]).unwrap();
        }
        assert!((w.data()[0] - 1.0).abs() < 1e-3);
        assert!((w.data()[1] + 2.0).abs() < 1e-3);
    }

    #[test]
    fn mismatched_shapes_fail() {
        let mut w = Tensor::vector(&[1.0]);
        let g = Tensor::vector(&[1.0, 2.0]);
        let mut st = AdamState::new(&[&w]);
        assert!(st.step(&AdamConfig::default(), &mut [&mut w], &[&g]).is_err());
        assert!(AdamConfig { beta1: 1.0, ..AdamConfig::default() }.validate().is_err());
    }
}
