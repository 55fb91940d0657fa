//! Explaining link predictions in multi-relational drug-response graphs.
//!
//! The crate builds a directed heterogeneous graph over cell-line and drug
//! nodes (sensitivity, resistance, drug-similarity and cell-similarity
//! relations), trains an R-GCN link predictor with a DistMult decoder on it,
//! and produces ranked per-edge explanations for individual predicted links.
//!
//! Three explainers are provided:
//!
//! * [`explainer::explain_cet`] — edge-mask optimization with an
//!   edge-type-weighted structure score (the main method, tag `CETE`),
//! * [`explainer::explain_mi_only`] — the same mask optimization without the
//!   structure score (tag `GNNE`),
//! * [`explainer::explain_counterfactual`] — exact single-edge-removal
//!   re-scoring (tag `EXPN`).
//!
//! Explanations are evaluated against a constructed ground truth
//! ([`groundtruth`]) with Precision@k / Recall@k / F1@k and a
//! cross-checkpoint stability metric ([`evalmetrics`]). A seeded synthetic
//! benchmark with planted ground-truth motifs ([`synth`]) makes the whole
//! pipeline runnable without any external dataset.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `cetex` binary for the pipeline subcommands
//! (`bench`/`build`/`train`/`explain`/`gt`/`eval`).

pub mod cli;
pub mod config;
pub mod evalmetrics;
pub mod explainer;
pub mod files;
pub mod graph;
pub mod groundtruth;
pub mod model;
pub mod numerics;
pub mod synth;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape mismatch between matrices, masks or embeddings.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Structural violation in a graph, triple or explanation input.
    #[error("validation error: {0}")]
    Validation(String),
    /// Malformed input file.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    /// Inconsistent or incomplete configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite value produced where a finite one is required.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Negative sampling could not find enough candidates.
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: numeric failures are 2, everything
    /// else (validation, parse, config, io) is 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
