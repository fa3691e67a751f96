use thiserror::Error;

/// Errors surfaced by the library. Each variant maps to one failure class so
/// callers (the CLI in particular) can pick an exit code without string matching.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DickeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("register of {n} qubits exceeds the simulator limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },

    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("no valid layout: {0}")]
    Infeasible(String),

    #[error("invalid response function: {0}")]
    InvalidResponse(String),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("inconsistent specification: {0}")]
    InconsistentSpec(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, DickeError>;

impl From<serde_json::Error> for DickeError {
    fn from(e: serde_json::Error) -> Self {
        DickeError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for DickeError {
    fn from(e: std::io::Error) -> Self {
        DickeError::Io(e.to_string())
    }
}
