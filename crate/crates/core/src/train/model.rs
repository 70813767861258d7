use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use crate::logic::GroundedFunction;
use crate::tensor::{Conv1dLayer, DenseLayer, Graph, Padding, Tensor, Var};
use crate::{Error, Result, MODES};

/// One convolution stage: `channels` filters of width `kernel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvSpec {
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

/// Layer layout of a regressor from the 8 RFS features to one position.
///
/// Convolutions (each followed by ReLU) run first on the features viewed as
/// a one-channel signal, then the flattened maps go through the ReLU dense
/// layers and a final linear unit. With no convolutions this is a plain
/// multilayer perceptron.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Architecture {
    pub conv: Vec<ConvSpec>,
    pub dense: Vec<usize>,
    pub padding: Padding,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            conv: alloc::vec![
                ConvSpec {
                    channels: 32,
                    kernel: 3,
                    stride: 1
                },
                ConvSpec {
                    channels: 64,
                    kernel: 3,
                    stride: 1
                },
            ],
            dense: alloc::vec![64],
            padding: Padding::Same,
        }
    }
}

impl Architecture {
    /// Two equal hidden layers whose total parameter count is closest to
    /// `target`.
    pub fn dnn_matching(target: usize) -> Self {
        // h² + (MODES + 3)h + 1 parameters.
        let b = (MODES + 3) as f64;
        let disc = b * b + 4.0 * (target as f64 - 1.0);
        let h = ((-b + disc.max(0.0).sqrt()) / 2.0).round().max(1.0) as usize;
        Architecture {
            conv: Vec::new(),
            dense: alloc::vec![h, h],
            padding: Padding::Same,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv.iter().any(|c| c.channels == 0 || c.kernel == 0 || c.stride == 0) {
            return Err(Error::config("conv_layers", "channels, kernel and stride must be positive"));
        }
        if self.dense.contains(&0) {
            return Err(Error::config("dense_layers", "layer widths must be positive"));
        }
        let mut width = MODES;
        for c in &self.conv {
            if self.padding == Padding::Valid && width < c.kernel {
                return Err(Error::config("conv_layers", "kernel wider than its input"));
            }
            width = out_width(width, *c, self.padding);
        }
        Ok(())
    }

    /// Width of the flattened convolution output.
    fn flat_len(&self) -> usize {
        let mut width = MODES;
        let mut channels = 1;
        for c in &self.conv {
            width = out_width(width, *c, self.padding);
            channels = c.channels;
        }
        width * channels
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        let mut ch = 1;
        for c in &self.conv {
            n += c.channels * ch * c.kernel + c.channels;
            ch = c.channels;
        }
        let mut fan_in = self.flat_len();
        for &h in self.dense.iter().chain([1].iter()) {
            n += fan_in * h + h;
            fan_in = h;
        }
        n
    }
}

fn out_width(width: usize, c: ConvSpec, padding: Padding) -> usize {
    match padding {
        Padding::Same => width.div_ceil(c.stride),
        Padding::Valid => (width - c.kernel) / c.stride + 1,
    }
}

/// Trainable parameters of an [`Architecture`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Model {
    pub architecture: Architecture,
    pub convs: Vec<Conv1dLayer>,
    /// Hidden layers followed by the single-unit output layer.
    pub denses: Vec<DenseLayer>,
}

impl Model {
    pub fn init(architecture: &Architecture, rng: &mut impl Rng) -> Result<Self> {
        architecture.validate()?;
        let mut convs = Vec::new();
        let mut ch = 1;
        for c in &architecture.conv {
            convs.push(Conv1dLayer::init(rng, ch, c.channels, c.kernel, c.stride, architecture.padding)?);
            ch = c.channels;
        }
        let mut denses = Vec::new();
        let mut fan_in = architecture.flat_len();
        for &h in architecture.dense.iter().chain([1].iter()) {
            denses.push(DenseLayer::init(rng, fan_in, h)?);
            fan_in = h;
        }
        Ok(Model {
            architecture: architecture.clone(),
            convs,
            denses,
        })
    }

    pub fn param_count(&self) -> usize {
        self.convs.iter().map(Conv1dLayer::param_count).sum::<usize>()
            + self.denses.iter().map(DenseLayer::param_count).sum::<usize>()
    }

    /// Parameter tensors in registration order.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for c in &self.convs {
            out.push(&c.kernels);
            out.push(&c.bias);
        }
        for d in &self.denses {
            out.push(&d.weights);
            out.push(&d.bias);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.kernels);
            out.push(&mut c.bias);
        }
        for d in &mut self.denses {
            out.push(&mut d.weights);
            out.push(&mut d.bias);
        }
        out
    }

    /// Puts the parameters on `g`, as trainable leaves or as constants.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> BoundModel<'_> {
        let vars = self.params().into_iter().map(|p| g.leaf(p.clone(), trainable)).collect();
        BoundModel { model: self, vars }
    }

    /// Outputs for `[n, 8]` feature rows, evaluated in chunks.
    pub fn predict_rows(&self, features: &[[f64; MODES]]) -> Result<Vec<f64>> {
        const CHUNK: usize = 512;
        let mut out = Vec::with_capacity(features.len());
        for chunk in features.chunks(CHUNK) {
            let mut g = Graph::new();
            let bound = self.bind(&mut g, false);
            let x = g.constant(Tensor::new(
                alloc::vec![chunk.len(), MODES],
                chunk.iter().flatten().copied().collect(),
            )?);
            let y = bound.apply(&mut g, x)?;
            out.extend_from_slice(g.value(y).data());
        }
        Ok(out)
    }
}

/// A [`Model`] whose parameters live on a graph; usable as the function
/// symbol `F` of a formula.
#[derive(Debug)]
pub struct BoundModel<'m> {
    model: &'m Model,
    vars: Vec<Var>,
}

impl BoundModel<'_> {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

impl GroundedFunction for BoundModel<'_> {
    /// `[n, 8] -> [n, 1]`.
    fn apply(&self, g: &mut Graph, x: Var) -> Result<Var> {
        let shape = g.value(x).shape().to_vec();
        if shape.len() != 2 || shape[1] != MODES {
            return Err(Error::shape(&shape, &[shape.first().copied().unwrap_or(0), MODES], "model input"));
        }
        let n = shape[0];
        let mut vars = self.vars.iter().copied();
        let mut next = || vars.next().ok_or_else(|| Error::Internal("parameter list too short".into()));
        let mut h = x;
        if !self.model.convs.is_empty() {
            h = g.reshape(h, &[n, 1, MODES])?;
            for layer in &self.model.convs {
                let (k, b) = (next()?, next()?);
                let c = layer.forward(g, h, k, b)?;
                h = g.relu(c);
            }
            h = g.flatten(h)?;
        }
        let last = self.model.denses.len() - 1;
        for i in 0..=last {
            let (w, b) = (next()?, next()?);
            let z = g.linear(h, w, b)?;
            h = if i < last { g.relu(z) } else { z };
        }
        Ok(h)
    }
}
