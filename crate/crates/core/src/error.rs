use thiserror::Error;

use crate::mapping::IterationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a vector of length {expected}, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("coordinate {index} = {value} is outside {constraint}")]
    DomainViolation {
        index: usize,
        value: f64,
        constraint: String,
    },

    #[error("coordinate {index} is not finite ({value})")]
    NonFiniteInput { index: usize, value: f64 },

    #[error("vector is empty")]
    EmptyVector,

    #[error("vector is constant; the operation is defined for nonconstant vectors only")]
    ConstantVector,

    #[error("no strict diameter decrease within {cap} iterations")]
    NotFoundWithinCap {
        cap: usize,
        trace: Box<IterationTrace>,
    },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid mean specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("component {index}: {source}")]
    Component {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn in_component(self, index: usize) -> Self {
        Error::Component {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Strips `Component`/`Step` annotations.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Component { source, .. } | Error::Step { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
