//! Mutual-information group fairness: measurement and in-processing mitigation.
//!
//! The crate measures how much information a model's predictions carry about
//! sensitive attributes. Each supported fairness notion picks a *benefit*
//! variable derived from the predictions (the prediction itself, the
//! prediction among true positives, a correctness indicator, ...) and scores
//! bias as the plug-in mutual information between that benefit and the joint
//! sensitive-attribute value. Zero means the benefit is statistically
//! independent of group membership under the chosen notion.
//!
//! The same quantity, estimated from soft model outputs, is differentiable
//! and serves as a training regularizer: minimizing
//! `loss + strength * fairness_mi` trades accuracy for independence.
//!
//! Modules:
//! - [`data`]: CSV ingestion, schemas, subgroup enumeration, splits, and a
//!   synthetic biased-data generator for controlled tests.
//! - [`estimation`]: empirical joint distributions, entropy, and mutual
//!   information over (subgroup, benefit) cells.
//! - [`metrics`]: the per-notion MI scores plus classical pairwise baselines
//!   (rate differences, accuracy gaps) and accuracy summaries.
//! - [`model`]: a small softmax classifier with exact manual backprop.
//! - [`training`]: SGD with momentum on the regularized objective, with the
//!   analytic gradient of the MI regularizer.
//! - [`experiment`]: strength sweeps over repeated seeds with report files.
//! - [`verify`]: independent oracles (brute-force MI, finite differences,
//!   constructive zero-bias witnesses) used by tests and `selfcheck`.

use thiserror::Error;

pub mod data;
pub mod estimation;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod training;
pub mod verify;

pub use matrix::Matrix;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("value error at row {row}: {msg}")]
    Value { row: usize, msg: String },

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty condition set: {0}")]
    EmptyCondition(String),

    #[error("subgroup coverage: {0}")]
    Coverage(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an I/O error with the path it occurred on.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
