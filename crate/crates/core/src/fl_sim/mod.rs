//! Federated training with the gradient-corrected local objective.
//!
//! Each round every user reports its local gradient, the server broadcasts the
//! average, every user runs a fixed number of gradient steps on its surrogate
//! objective starting from `h = 0`, and the server applies the average update.
//! The simulator exists to check the round and local-iteration counts that the
//! delay model assumes.

mod data;
mod linalg;
mod loss;
mod smoothness;
mod train;

pub use data::{
    CsvPartition, Dataset, SynthSpec, UserData, load_csv, load_csv_from_reader, partition_rows, synth_dataset,
};
pub use loss::{
    Loss, LossKind, global_gradient, global_loss, local_gradient, local_loss, surrogate_value_and_gradient,
};
pub use smoothness::{Smoothness, estimate_smoothness};
pub use train::{LocalSolve, RoundRecord, TrainConfig, TrainLog, federated_train, local_iterations, local_solve};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlError {
    #[error("row {row}, column {column}: cannot parse `{value}` as a number")]
    Parse { row: usize, column: usize, value: String },
    #[error("row 1 is not numeric (`{value}` in column {column}); header rows are not supported")]
    Header { column: usize, value: String },
    #[error("row {row} has {found} columns, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("need {needed} rows for the requested partition, file has {available}")]
    NotEnoughRows { needed: usize, available: usize },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("local solve diverged at iteration {iteration}: surrogate went from {before} to {after}")]
    Divergence { iteration: usize, before: f64, after: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
}
