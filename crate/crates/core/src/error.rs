use std::path::PathBuf;

use thiserror::Error;

use crate::nehari::GroundState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("vertex index {0} out of range")]
    VertexIndex(usize),

    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),

    #[error("duplicate or asymmetric edge {{{0}, {1}}}")]
    DuplicateEdge(String, String),

    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),

    #[error("graph hypotheses violated: {0}")]
    InvalidGraph(String),

    #[error("function has {got} values but the graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFiniteResult(String),

    #[error("potential well {0} is empty")]
    EmptyWell(&'static str),

    #[error("potential well {0} is not connected")]
    DisconnectedWell(&'static str),

    #[error("potential is negative at vertex `{0}`")]
    NegativePotential(String),

    #[error("norm requires a potential pair")]
    MissingPotential,

    #[error("invalid norm exponent {0}")]
    InvalidExponent(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("lambda must be >= 1, got {0}")]
    InvalidLambda(f64),

    #[error("state leaks outside the potential wells at vertex `{0}`")]
    DomainViolation(String),

    #[error("no sign change of the fibering derivative in [1e-12, 1e12]")]
    BracketFailure,

    #[error("invalid growth envelope: {0}")]
    InvalidEnvelope(String),

    #[error("descent stalled before reaching tolerances")]
    NoDescent { best: Box<GroundState> },

    #[error("certified state violates the norm sandwich: {reason}")]
    BoundViolation {
        reason: String,
        state: Box<GroundState>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("refusing to overwrite existing output `{0}` (use --force)")]
    OutputExists(PathBuf),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, err: &serde_json::Error) -> Self {
        Error::Parse {
            path: path.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
