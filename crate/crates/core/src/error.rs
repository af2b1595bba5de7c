use std::path::PathBuf;

/// Errors raised by the screening engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("predictor {index} is degenerate (variance below tolerance)")]
    DegenerateFeature { index: usize },

    #[error("response component {component} is degenerate (variance below tolerance)")]
    DegenerateResponse { component: usize },

    #[error("no screenable candidates: {0}")]
    NoCandidates(String),

    #[error("index tuple {0:?} is not present in the report")]
    NotFound(Vec<usize>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("AICc penalty undefined: need n > k + q + 1 (n = {n}, k = {k}, q = {q})")]
    PenaltyUndefined { n: usize, k: usize, q: usize },

    #[error("row count mismatch: x has {x_rows} rows, y has {y_rows} rows")]
    RowMismatch { x_rows: usize, y_rows: usize },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("replicate {rep} failed")]
    Replicate {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by numerically degenerate data rather than
    /// malformed input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::DegenerateFeature { .. }
            | Error::DegenerateResponse { .. }
            | Error::NoCandidates(_)
            | Error::PenaltyUndefined { .. } => true,
            Error::Replicate { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
