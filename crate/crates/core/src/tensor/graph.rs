use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::kernels::{axpy, dot, ConvGeom};
use super::{Padding, Tensor};
use crate::{Error, Result};

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    Abs(Var),
    Powf(Var, f64),
    Sqrt(Var),
    Exp(Var),
    Recip(Var),
    Relu(Var),
    Sum(Var),
    Mean(Var),
    SumLast(Var),
    Reshape(Var),
    Broadcast(Var),
    Conv1d {
        input: Var,
        kernel: Var,
        bias: Var,
        geom: ConvGeom,
    },
    Linear {
        input: Var,
        weight: Var,
        bias: Var,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Operation tape. Nodes are appended in evaluation order, which is a
/// topological order by construction.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient with respect to `v`, or `None` if `v` does not require one.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Moves the gradient of `v` out, leaving `None`.
    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn unary(&mut self, x: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let src = &self.nodes[x.0];
        let value = Tensor {
            shape: src.value.shape.clone(),
            data: src.value.data.iter().map(|v| f(*v)).collect(),
        };
        let rg = src.requires_grad;
        self.push(value, op, rg)
    }

    fn binary(
        &mut self,
        a: Var,
        b: Var,
        op: Op,
        context: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var> {
        let (na, nb) = (&self.nodes[a.0], &self.nodes[b.0]);
        if na.value.shape != nb.value.shape {
            return Err(Error::shape(&na.value.shape, &nb.value.shape, context));
        }
        let value = Tensor {
            shape: na.value.shape.clone(),
            data: na
                .value
                .data
                .iter()
                .zip(&nb.value.data)
                .map(|(x, y)| f(*x, *y))
                .collect(),
        };
        let rg = na.requires_grad || nb.requires_grad;
        Ok(self.push(value, op, rg))
    }

    /// A leaf; `requires_grad` marks it as a trainable parameter.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, Op::Add(a, b), "add", |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, Op::Sub(a, b), "sub", |x, y| x - y)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, Op::Mul(a, b), "mul", |x, y| x * y)
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, Op::Scale(x, c), |v| c * v)
    }

    pub fn neg(&mut self, x: Var) -> Var {
        self.scale(x, -1.0)
    }

    /// `x + c` elementwise.
    pub fn offset(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, Op::Offset(x), |v| v + c)
    }

    /// `c - x` elementwise.
    pub fn rsub(&mut self, c: f64, x: Var) -> Var {
        let n = self.neg(x);
        self.offset(n, c)
    }

    /// |x|; the derivative at 0 is taken as 0.
    pub fn abs(&mut self, x: Var) -> Var {
        self.unary(x, Op::Abs(x), f64::abs)
    }

    /// `x^p` for `x >= 0`. At `x = 0` the derivative is 1 for `p = 1` and
    /// 0 otherwise.
    pub fn powf(&mut self, x: Var, p: f64) -> Var {
        if p == 1.0 {
            return self.unary(x, Op::Powf(x, p), |v| v);
        }
        self.unary(x, Op::Powf(x, p), |v| v.powf(p))
    }

    /// √x; the derivative at 0 is taken as 0.
    pub fn sqrt(&mut self, x: Var) -> Var {
        self.unary(x, Op::Sqrt(x), f64::sqrt)
    }

    pub fn exp(&mut self, x: Var) -> Var {
        self.unary(x, Op::Exp(x), f64::exp)
    }

    pub fn recip(&mut self, x: Var) -> Var {
        self.unary(x, Op::Recip(x), |v| 1.0 / v)
    }

    /// max(x, 0); the derivative at 0 is taken as 0.
    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, Op::Relu(x), |v| if v > 0.0 { v } else { 0.0 })
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.nodes[x.0].value.data.iter().sum();
        let rg = self.nodes[x.0].requires_grad;
        self.push(Tensor::scalar(s), Op::Sum(x), rg)
    }

    /// Mean of all elements, as a scalar.
    pub fn mean(&mut self, x: Var) -> Result<Var> {
        let src = &self.nodes[x.0].value;
        if src.data.is_empty() {
            return Err(Error::Contract("mean of an empty tensor".into()));
        }
        let m = src.data.iter().sum::<f64>() / src.data.len() as f64;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(Tensor::scalar(m), Op::Mean(x), rg))
    }

    /// Sums over the last axis: `[.., d] -> [..]`.
    pub fn sum_last(&mut self, x: Var) -> Result<Var> {
        let src = &self.nodes[x.0].value;
        let Some((&d, outer)) = src.shape.split_last() else {
            return Err(Error::Contract("sum_last on a scalar".into()));
        };
        let data = if d == 0 {
            vec![0.0; outer.iter().product()]
        } else {
            src.data.chunks_exact(d).map(|c| c.iter().sum()).collect()
        };
        let value = Tensor {
            shape: outer.to_vec(),
            data,
        };
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, Op::SumLast(x), rg))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.nodes[x.0].value.clone().reshape(shape)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, Op::Reshape(x), rg))
    }

    /// `[batch, ...] -> [batch, product of the rest]`.
    pub fn flatten(&mut self, x: Var) -> Result<Var> {
        let shape = self.nodes[x.0].value.shape.clone();
        let Some((&batch, rest)) = shape.split_first() else {
            return Err(Error::Contract("flatten on a scalar".into()));
        };
        self.reshape(x, &[batch, rest.iter().product()])
    }

    /// Repeats a one-element tensor into `shape`.
    pub fn broadcast(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let src = &self.nodes[x.0].value;
        if src.data.len() != 1 {
            return Err(Error::shape(&src.shape, shape, "broadcast needs a one-element tensor"));
        }
        let value = Tensor::full(shape, src.data[0]);
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, Op::Broadcast(x), rg))
    }

    /// Cross-correlation of `[batch, in, width]` with `[out, in, k]` plus a
    /// per-channel bias.
    pub fn conv1d(
        &mut self,
        input: Var,
        kernel: Var,
        bias: Var,
        stride: usize,
        padding: Padding,
    ) -> Result<Var> {
        let (xi, ki, bi) = (
            &self.nodes[input.0].value,
            &self.nodes[kernel.0].value,
            &self.nodes[bias.0].value,
        );
        let (&[batch, in_channels, width], &[out_channels, k_in, kernel_w]) =
            (xi.shape.as_slice(), ki.shape.as_slice())
        else {
            return Err(Error::shape(&xi.shape, &ki.shape, "conv1d expects [B,C,W] and [O,C,K]"));
        };
        if k_in != in_channels {
            return Err(Error::shape(&xi.shape, &ki.shape, "conv1d input channels"));
        }
        if bi.shape != [out_channels] {
            return Err(Error::shape(&bi.shape, &[out_channels], "conv1d bias"));
        }
        if stride == 0 || kernel_w == 0 {
            return Err(Error::Contract("conv1d stride and kernel width must be positive".into()));
        }
        let (out_width, pad_left) = match padding {
            Padding::Valid => {
                if width < kernel_w {
                    return Err(Error::shape(&xi.shape, &ki.shape, "conv1d valid: width < kernel"));
                }
                ((width - kernel_w) / stride + 1, 0)
            }
            Padding::Same => {
                let ow = width.div_ceil(stride);
                let total = ((ow - 1) * stride + kernel_w).saturating_sub(width);
                (ow, total / 2)
            }
        };
        let geom = ConvGeom {
            batch,
            in_channels,
            width,
            out_channels,
            kernel: kernel_w,
            stride,
            pad_left,
            out_width,
        };
        let cols = geom.im2col(&xi.data);
        let patch = geom.patch();
        let mut out = vec![0.0; batch * out_channels * out_width];
        for b in 0..batch {
            for t in 0..out_width {
                let col = &cols[(b * out_width + t) * patch..][..patch];
                for o in 0..out_channels {
                    let w = &ki.data[o * patch..][..patch];
                    out[(b * out_channels + o) * out_width + t] = bi.data[o] + dot(w, col);
                }
            }
        }
        let rg = self.nodes[input.0].requires_grad
            || self.nodes[kernel.0].requires_grad
            || self.nodes[bias.0].requires_grad;
        let value = Tensor {
            shape: vec![batch, out_channels, out_width],
            data: out,
        };
        Ok(self.push(
            value,
            Op::Conv1d {
                input,
                kernel,
                bias,
                geom,
            },
            rg,
        ))
    }

    /// `x · Wᵀ + b` for `x: [batch, in]`, `W: [out, in]`, `b: [out]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (xi, wi, bi) = (
            &self.nodes[input.0].value,
            &self.nodes[weight.0].value,
            &self.nodes[bias.0].value,
        );
        let (&[batch, n_in], &[n_out, w_in]) = (xi.shape.as_slice(), wi.shape.as_slice()) else {
            return Err(Error::shape(&xi.shape, &wi.shape, "linear expects [B,in] and [out,in]"));
        };
        if w_in != n_in {
            return Err(Error::shape(&xi.shape, &wi.shape, "linear input features"));
        }
        if bi.shape != [n_out] {
            return Err(Error::shape(&bi.shape, &[n_out], "linear bias"));
        }
        let mut out = vec![0.0; batch * n_out];
        for b in 0..batch {
            let x = &xi.data[b * n_in..][..n_in];
            for o in 0..n_out {
                out[b * n_out + o] = bi.data[o] + dot(&wi.data[o * n_in..][..n_in], x);
            }
        }
        let rg = self.nodes[input.0].requires_grad
            || self.nodes[weight.0].requires_grad
            || self.nodes[bias.0].requires_grad;
        let value = Tensor {
            shape: vec![batch, n_out],
            data: out,
        };
        Ok(self.push(
            value,
            Op::Linear {
                input,
                weight,
                bias,
            },
            rg,
        ))
    }

    /// Reverse-mode gradients of the scalar `loss`.
    ///
    /// Every leaf that requires a gradient gets one; leaves that do not
    /// influence `loss` get zeros.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let root = &self.nodes[loss.0];
        if root.value.data.len() != 1 {
            return Err(Error::Contract(alloc::format!(
                "backward needs a scalar loss, got shape {:?}",
                root.value.shape
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }

        let out = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                if !n.requires_grad {
                    return None;
                }
                let data = grads
                    .get_mut(i)
                    .and_then(Option::take)
                    .unwrap_or_else(|| vec![0.0; n.value.data.len()]);
                Some(Tensor {
                    shape: n.value.shape.clone(),
                    data,
                })
            })
            .collect();
        Ok(Gradients { grads: out })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let nodes = &self.nodes;
        let val = |v: Var| &nodes[v.0].value.data;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !nodes[v.0].requires_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; nodes[v.0].value.data.len()]);
            f(slot);
        };
        let elementwise = |dst: &mut [f64], f: &dyn Fn(usize) -> f64| {
            for (k, d) in dst.iter_mut().enumerate() {
                *d += f(k);
            }
        };

        match node.op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                acc(a, &mut |d| axpy(1.0, g, d));
                acc(b, &mut |d| axpy(1.0, g, d));
            }
            Op::Sub(a, b) => {
                acc(a, &mut |d| axpy(1.0, g, d));
                acc(b, &mut |d| axpy(-1.0, g, d));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (val(a), val(b));
                acc(a, &mut |d| elementwise(d, &|k| g[k] * vb[k]));
                acc(b, &mut |d| elementwise(d, &|k| g[k] * va[k]));
            }
            Op::Scale(x, c) => acc(x, &mut |d| axpy(c, g, d)),
            Op::Offset(x) | Op::Reshape(x) => acc(x, &mut |d| axpy(1.0, g, d)),
            Op::Abs(x) => {
                let vx = val(x);
                acc(x, &mut |d| {
                    elementwise(d, &|k| {
                        if vx[k] > 0.0 {
                            g[k]
                        } else if vx[k] < 0.0 {
                            -g[k]
                        } else {
                            0.0
                        }
                    })
                });
            }
            Op::Powf(x, p) => {
                let vx = val(x);
                acc(x, &mut |d| {
                    elementwise(d, &|k| {
                        let v = vx[k];
                        let dv = if p == 1.0 {
                            1.0
                        } else if v == 0.0 {
                            0.0
                        } else {
                            p * v.powf(p - 1.0)
                        };
                        g[k] * dv
                    })
                });
            }
            Op::Sqrt(x) => {
                let y = &node.value.data;
                acc(x, &mut |d| {
                    elementwise(d, &|k| if y[k] == 0.0 { 0.0 } else { g[k] / (2.0 * y[k]) })
                });
            }
            Op::Exp(x) => {
                let y = &node.value.data;
                acc(x, &mut |d| elementwise(d, &|k| g[k] * y[k]));
            }
            Op::Recip(x) => {
                let y = &node.value.data;
                acc(x, &mut |d| elementwise(d, &|k| -g[k] * y[k] * y[k]));
            }
            Op::Relu(x) => {
                let vx = val(x);
                acc(x, &mut |d| elementwise(d, &|k| if vx[k] > 0.0 { g[k] } else { 0.0 }));
            }
            Op::Sum(x) => acc(x, &mut |d| d.iter_mut().for_each(|v| *v += g[0])),
            Op::Broadcast(x) => {
                let total: f64 = g.iter().sum();
                acc(x, &mut |d| d[0] += total);
            }
            Op::Mean(x) => {
                let n = val(x).len() as f64;
                acc(x, &mut |d| d.iter_mut().for_each(|v| *v += g[0] / n));
            }
            Op::SumLast(x) => {
                let width = *nodes[x.0].value.shape.last().unwrap_or(&1);
                acc(x, &mut |d| {
                    for (row, gv) in d.chunks_exact_mut(width.max(1)).zip(g) {
                        row.iter_mut().for_each(|v| *v += gv);
                    }
                });
            }
            Op::Conv1d {
                input,
                kernel,
                bias,
                geom,
            } => {
                let patch = geom.patch();
                let ow = geom.out_width;
                let oc = geom.out_channels;
                acc(bias, &mut |d| {
                    for b in 0..geom.batch {
                        for (o, db) in d.iter_mut().enumerate() {
                            *db += g[(b * oc + o) * ow..][..ow].iter().sum::<f64>();
                        }
                    }
                });
                if nodes[kernel.0].requires_grad {
                    let cols = geom.im2col(val(input));
                    acc(kernel, &mut |d| {
                        for b in 0..geom.batch {
                            for t in 0..ow {
                                let col = &cols[(b * ow + t) * patch..][..patch];
                                for o in 0..oc {
                                    let go = g[(b * oc + o) * ow + t];
                                    if go != 0.0 {
                                        axpy(go, col, &mut d[o * patch..][..patch]);
                                    }
                                }
                            }
                        }
                    });
                }
                if nodes[input.0].requires_grad {
                    let w = val(kernel);
                    let mut dcols = vec![0.0; geom.batch * ow * patch];
                    for b in 0..geom.batch {
                        for t in 0..ow {
                            let dcol = &mut dcols[(b * ow + t) * patch..][..patch];
                            for o in 0..oc {
                                let go = g[(b * oc + o) * ow + t];
                                if go != 0.0 {
                                    axpy(go, &w[o * patch..][..patch], dcol);
                                }
                            }
                        }
                    }
                    acc(input, &mut |d| geom.col2im_add(&dcols, d));
                }
            }
            Op::Linear {
                input,
                weight,
                bias,
            } => {
                let xs = &nodes[input.0].value.shape;
                let (batch, n_in) = (xs[0], xs[1]);
                let n_out = nodes[weight.0].value.shape[0];
                acc(bias, &mut |d| {
                    for b in 0..batch {
                        axpy(1.0, &g[b * n_out..][..n_out], d);
                    }
                });
                let x = val(input);
                acc(weight, &mut |d| {
                    for b in 0..batch {
                        let xb = &x[b * n_in..][..n_in];
                        for o in 0..n_out {
                            let go = g[b * n_out + o];
                            if go != 0.0 {
                                axpy(go, xb, &mut d[o * n_in..][..n_in]);
                            }
                        }
                    }
                });
                let w = val(weight);
                acc(input, &mut |d| {
                    for b in 0..batch {
                        let db = &mut d[b * n_in..][..n_in];
                        for o in 0..n_out {
                            let go = g[b * n_out + o];
                            if go != 0.0 {
                                axpy(go, &w[o * n_in..][..n_in], db);
                            }
                        }
                    }
                });
            }
        }
    }
}
