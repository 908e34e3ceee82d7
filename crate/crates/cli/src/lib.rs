//! Experiment runner for `ctrecon`: configuration files, CTMAT matrix I/O,
//! grayscale previews, CSV reports and parameter sweeps.

pub mod config;
pub mod error;
pub mod matrix_file;
pub mod pipeline;
pub mod preview;

pub use config::{ExperimentConfig, Method};
pub use error::{CliError, CliResult};
pub use matrix_file::Matrix;
