use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(PathBuf),

    #[error("row-count mismatch: expected {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },

    #[error("invalid SMILES at byte {offset}: {kind}")]
    Smiles { offset: usize, kind: SmilesErrorKind },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigensolver did not converge after {iterations} restarts (max residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ill-conditioned landmark block (condition estimate {condition:.3e}); resample or grow sample_size")]
    IllConditioned { condition: f64 },

    #[error("non-finite value in MBO iteration {iteration}; dt*C is likely too large")]
    NonFinite { iteration: usize },

    #[error("AUC undefined: labels contain a single class")]
    SingleClass,

    #[error("cache error: {0}")]
    Cache(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// What went wrong while reading a SMILES string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unbalanced parentheses")]
    UnbalancedParentheses,
    #[error("unmatched ring closure {0}")]
    UnmatchedRingClosure(u32),
    #[error("unknown atom symbol `{0}`")]
    UnknownAtom(String),
    #[error("bracket atom missing closing `]`")]
    UnclosedBracket,
    #[error("empty branch")]
    EmptyBranch,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("bond symbol not followed by an atom")]
    DanglingBond,
    #[error("ring closure bonds an atom to itself or duplicates an existing bond")]
    InvalidRingBond,
    #[error("conflicting bond orders on ring closure {0}")]
    ConflictingRingBond(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}
