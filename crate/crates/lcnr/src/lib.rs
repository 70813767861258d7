//! File formats, reports and the experiment pipeline behind the `lcnr`
//! command-line tool.

pub mod checkpoint;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod pipeline;
pub mod plot;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
