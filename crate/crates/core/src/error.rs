use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for MalformedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("malformed N-Triples at {0}")]
    Malformed(MalformedLine),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum EntailError {
    /// The fixpoint was not reached; the partial result is attached.
    #[error("closure truncated after {max_rounds} rounds without reaching a fixpoint")]
    Truncated {
        max_rounds: u32,
        partial: Box<crate::rdfs::EntailmentResult>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("vocabulary overflow: {needed} distinct terms need renaming but only {available} generic tokens exist")]
    VocabularyOverflow { needed: usize, available: usize },
    #[error("unknown token {0:?}")]
    UnknownToken(String),
}

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("non-finite input to {0}")]
    NonFiniteInput(&'static str),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("could only generate {found} of {requested} negative samples")]
    InsufficientCandidates { found: usize, requested: usize },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Entail(#[from] EntailError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("missing dataset file {0}")]
    Missing(PathBuf),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            DatasetError::Missing(path.into())
        } else {
            DatasetError::Io {
                path: path.into(),
                source,
            }
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        DatasetError::Corrupt {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("memory is empty")]
    EmptyMemory,
    #[error("memory holds {len} triples, capacity is {capacity}")]
    CapacityExceeded { len: usize, capacity: usize },
    #[error("token index {index} out of range for vocabulary of size {vocab}")]
    TokenOutOfRange { index: usize, vocab: usize },
    #[error("non-finite loss or gradient at epoch {epoch}, batch {batch}")]
    NumericFault { epoch: usize, batch: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("yes-sample without hop label in {kg_id}")]
    MissingHopLabels { kg_id: String },
    #[error("reports come from different datasets ({0} vs {1})")]
    DatasetMismatch(String, String),
    #[error("power iteration did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("need at least 2 rows for PCA, got {0}")]
    TooFewRows(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}
