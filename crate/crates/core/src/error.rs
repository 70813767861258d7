use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A table lookup was asked to extrapolate.
    #[error("value {value} outside supported range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("shape mismatch: {left:?} vs {right:?} ({context})")]
    Shape {
        left: Vec<usize>,
        right: Vec<usize>,
        context: &'static str,
    },

    /// Invalid configuration; `key` names the offending setting.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A caller broke an API contract (non-scalar loss, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unbound symbol `{0}`")]
    Unbound(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    /// Input data failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The training loss stopped being finite.
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    /// An internal numerical routine failed. Indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn shape(left: &[usize], right: &[usize], context: &'static str) -> Self {
        Error::Shape {
            left: left.to_vec(),
            right: right.to_vec(),
            context,
        }
    }
}
