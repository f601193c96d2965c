use thiserror::Error;

/// Errors raised across the library. Each variant carries enough context to
/// be printed as a one-line diagnostic by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {0} is not an element of the space")]
    NotInSpace(String),
    #[error("unresolved: {0}")]
    Unresolved(String),
    #[error("sampler `{sampler}` cannot refine space `{space}`")]
    KindMismatch { sampler: String, space: String },
    #[error("level {level}: sampled set is not stretched")]
    NotStretched { level: usize },
    #[error("level {level}: {msg}")]
    Evaluation { level: usize, msg: String },
    #[error("level {level}: gap bound grew from {prev} to {now}")]
    GapNotMonotone { level: usize, prev: f64, now: f64 },
    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unresolved(msg: impl Into<String>) -> Self {
        Error::Unresolved(msg.into())
    }

    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
