//! Command-line experiments: SIR bias sweeps rendered as CSV and SVG,
//! exact reports on finite instances, and randomized theorem checks.

pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod oracle;
pub mod svg;
pub mod table;

pub use cli::{run, Cli, Command};
pub use config::{ExperimentConfig, ExperimentSection, Overrides, DEFAULT_THRESHOLDS};
pub use error::CliError;
