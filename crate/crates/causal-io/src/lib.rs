//! File formats and model fitting around the core: BIF Bayesian networks,
//! the SCM JSON document, graph edge lists and adjacency matrices, dataset
//! CSVs, maximum-likelihood CPT fitting, and distance reports.

pub mod bif;
pub mod dataset;
pub mod fit;
pub mod graphio;
pub mod report;
pub mod scmdoc;

pub use bif::{bif_to_scm, parse_bif, serialize_bif, BifDocument, BifProbability, BifVariable};
pub use dataset::{parse_dataset_csv, write_dataset_csv, DatasetTable};
pub use fit::fit_mle_and_orient;
pub use graphio::{
    parse_adjacency_csv, parse_graph_output, serialize_adjacency_csv, serialize_edge_list,
    GraphOutput, PartialGraph,
};
pub use report::{DistanceReport, ExperimentCell, ExperimentReport};
pub use scmdoc::{parse_scm_json, write_scm_json};

use causal_core::CoreError;
use std::fmt;

/// Errors from parsing, serialization or fitting.
#[derive(Debug)]
pub enum IoError {
    /// Syntax error with a source location.
    Parse { line: usize, col: usize, message: String },
    /// The document parsed but violates a semantic invariant.
    Semantic(String),
    Core(CoreError),
    Json(serde_json::Error),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Parse { line, col, message } => {
                write!(f, "line {line}, column {col}: {message}")
            }
            IoError::Semantic(m) => write!(f, "semantic error: {m}"),
            IoError::Core(e) => write!(f, "{e}"),
            IoError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<CoreError> for IoError {
    fn from(e: CoreError) -> Self {
        IoError::Core(e)
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, IoError>;
