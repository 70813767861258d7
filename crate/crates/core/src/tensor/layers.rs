use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::{Graph, Tensor, Var};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Padding {
    Valid,
    /// Output width `ceil(width / stride)`, zero padding split with the
    /// smaller half on the left.
    #[default]
    Same,
}

impl Padding {
    pub fn as_str(self) -> &'static str {
        match self {
            Padding::Valid => "valid",
            Padding::Same => "same",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "valid" => Ok(Padding::Valid),
            "same" => Ok(Padding::Same),
            other => Err(Error::config("padding", alloc::format!("unknown padding {other:?}"))),
        }
    }
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot limit");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Convolution with kernels `[out, in, k]` and a per-channel bias.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conv1dLayer {
    pub kernels: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: Padding,
}

impl Conv1dLayer {
    /// Glorot-uniform kernels, zero bias.
    pub fn init(
        rng: &mut impl Rng,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: Padding,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel == 0 || stride == 0 {
            return Err(Error::config("conv", "channels, kernel and stride must be positive"));
        }
        let n = out_channels * in_channels * kernel;
        Ok(Conv1dLayer {
            kernels: Tensor::new(
                alloc::vec![out_channels, in_channels, kernel],
                glorot(rng, in_channels * kernel, out_channels * kernel, n),
            )?,
            bias: Tensor::zeros(&[out_channels]),
            stride,
            padding,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn kernel_width(&self) -> usize {
        self.kernels.shape()[2]
    }

    pub fn output_width(&self, width: usize) -> usize {
        match self.padding {
            Padding::Same => width.div_ceil(self.stride),
            Padding::Valid => (width.saturating_sub(self.kernel_width())) / self.stride + 1,
        }
    }

    pub fn param_count(&self) -> usize {
        self.kernels.len() + self.bias.len()
    }

    /// Applies the layer to `input` with already-registered parameters.
    pub fn forward(&self, g: &mut Graph, input: Var, kernels: Var, bias: Var) -> Result<Var> {
        g.conv1d(input, kernels, bias, self.stride, self.padding)
    }
}

/// Fully connected layer with weights `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseLayer {
    pub fn init(rng: &mut impl Rng, n_in: usize, n_out: usize) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::config("dense", "layer sizes must be positive"));
        }
        Ok(DenseLayer {
            weights: Tensor::new(alloc::vec![n_out, n_in], glorot(rng, n_in, n_out, n_in * n_out))?,
            bias: Tensor::zeros(&[n_out]),
        })
    }

    pub fn n_in(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn n_out(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}
