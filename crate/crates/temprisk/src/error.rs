use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal error: {0}")]
    Signal(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("insufficient samples for (beta={beta}, delta={delta}): N={n} gives gamma={gamma:.6} > min(beta, 1-beta); need N >= {required_n}")]
    InsufficientSamples {
        beta: f64,
        delta: f64,
        n: usize,
        gamma: f64,
        required_n: usize,
    },

    #[error("generation error: {0}")]
    Generation(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
