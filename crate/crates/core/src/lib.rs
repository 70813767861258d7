//! Crack localisation in cantilever beams from relative frequency shifts.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the pure parts
//! of the pipeline:
//!
//! - [`beam`]: Euler–Bernoulli cantilever eigenvalues, frequencies, normalised
//!   squared modal curvatures and the crack severity model.
//! - [`dataset`]: damage-scenario grids, relative frequency shift (RFS)
//!   synthesis, splits, folds and noise injection.
//! - [`tensor`]: a dense `f64` tensor with a reverse-mode autodiff tape,
//!   1-D convolution, dense layers and Adam.
//! - [`logic`]: differentiable fuzzy first-order logic (distance predicates,
//!   product connectives, diagonal quantification, p-mean-error aggregation).
//! - [`train`]: the logic-constrained convolutional regressor, its baselines
//!   and the k-fold / data-fraction experiments.
//! - [`eval`]: percent error along the beam, residual statistics and worst-k
//!   selection.
//!
//! File formats, plotting and the command line live in the `lcnr` crate.

#![no_std]
// Float methods come from num_traits::Float. Whenever std is linked (tests,
// std dependents) the inherent methods shadow it and the import looks unused.
#![allow(unused_imports)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod beam;
pub mod dataset;
mod error;
pub mod eval;
pub mod logic;
pub mod seed;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};

/// Number of vibration modes in every RFS feature vector.
pub const MODES: usize = 8;
