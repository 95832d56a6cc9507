//! Experiment harness: JSON configs in, per-round metric CSVs out.

mod config;
mod report;
mod run;

pub use config::{parse_config, DatasetSource, Distribution, ExperimentConfig, IdxSource, SyntheticSource};
pub use report::{read_accuracy_series, rounds_to_threshold};
pub use run::{metrics_csv, prepare_data, run_experiment, run_seed, Prepared, SeedResult, Summary};

use std::path::PathBuf;

use fedavo_core::data::DataError;
use fedavo_core::fl::FlError;
use fedavo_core::nn::NnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    MalformedCsv { path: PathBuf, msg: String },
    #[error("empty series")]
    EmptySeries,
    #[error("seed {seed}: {source}")]
    Run { seed: u64, source: Box<HarnessError> },
    #[error(transparent)]
    Fl(#[from] FlError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
