use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {value} outside parameter space {space}")]
    OutsideParameterSpace { value: String, space: String },

    #[error("inadmissible data: {0}")]
    InvalidData(String),

    #[error("log-likelihood diverges at {0}")]
    Divergent(String),

    #[error("{0}")]
    Capability(String),

    #[error("hypothesis {0} contains no grid point and the contour has no exact evaluator")]
    Unresolved(String),

    #[error("hypothesis shape does not match the contour: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse hypothesis `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("p-value function is not a possibility contour: {0}")]
    NotConsonant(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::InvalidData(e.to_string())
    }
}
