use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("linear system is degenerate: all singular values below cutoff")]
    DegenerateSystem,

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("step size too large: first-order overlap matrix lost positive definiteness (smallest eigenvalue {min_eigenvalue:.3e}); reduce dbeta")]
    StepSize { min_eigenvalue: f64 },

    #[error("overlap drift |S_{i}{j} - delta| = {value:.3e} exceeds {limit:.3e}")]
    OrthogonalityLost {
        i: usize,
        j: usize,
        value: f64,
        limit: f64,
    },

    #[error("retained space is empty after canonical truncation")]
    EmptyRetainedSpace,

    #[error("Krylov indices {0} and {1} have different parity")]
    Parity(usize, usize),

    #[error("missing Krylov record for step {0}")]
    MissingRecord(usize),

    #[error("singular transformation at step {0}")]
    SingularTransform(usize),

    #[error("qubit count {n} exceeds the configured ceiling {ceiling}")]
    CeilingExceeded { n: usize, ceiling: usize },

    #[error("at beta = {beta:.4}, state {state}: {source}")]
    AtStep {
        beta: f64,
        state: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn at_step(self, beta: f64, state: usize) -> Error {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                beta,
                state,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
