//! Dataset ingestion, experiment configuration and plot-ready export for
//! the `linmtl` command-line tool.

pub mod app;
pub mod config;
pub mod data;
pub mod error;
pub mod export;
pub mod svg;

pub use config::{ExperimentConfig, LossScale};
pub use data::{load_dataset, prepare_dataset, read_numeric_csv, standardize_columns, Table};
pub use error::{CliError, CliResult};
