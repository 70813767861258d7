//! Inner loops shared by the forward and backward passes.

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Geometry of a 1-D convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub batch: usize,
    pub in_channels: usize,
    pub width: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad_left: usize,
    pub out_width: usize,
}

impl ConvGeom {
    /// Length of one unfolded receptive field.
    pub fn patch(&self) -> usize {
        self.in_channels * self.kernel
    }

    /// Unfolds the input into `[batch * out_width, in_channels * kernel]`,
    /// zero outside the input.
    pub fn im2col(&self, input: &[f64]) -> alloc::vec::Vec<f64> {
        let patch = self.patch();
        let mut cols = alloc::vec![0.0; self.batch * self.out_width * patch];
        for b in 0..self.batch {
            for t in 0..self.out_width {
                let row = &mut cols[(b * self.out_width + t) * patch..][..patch];
                for c in 0..self.in_channels {
                    let src = &input[(b * self.in_channels + c) * self.width..][..self.width];
                    for j in 0..self.kernel {
                        if let Some(pos) = (t * self.stride + j).checked_sub(self.pad_left) {
                            if pos < self.width {
                                row[c * self.kernel + j] = src[pos];
                            }
                        }
                    }
                }
            }
        }
        cols
    }

    /// Adjoint of [`im2col`](Self::im2col): scatters column gradients back.
    pub fn col2im_add(&self, cols: &[f64], input_grad: &mut [f64]) {
        let patch = self.patch();
        for b in 0..self.batch {
            for t in 0..self.out_width {
                let row = &cols[(b * self.out_width + t) * patch..][..patch];
                for c in 0..self.in_channels {
                    let dst = &mut input_grad[(b * self.in_channels + c) * self.width..][..self.width];
                    for j in 0..self.kernel {
                        if let Some(pos) = (t * self.stride + j).checked_sub(self.pad_left) {
                            if pos < self.width {
                                dst[pos] += row[c * self.kernel + j];
                            }
                        }
                    }
                }
            }
        }
    }
}
