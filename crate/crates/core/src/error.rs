use thiserror::Error;

/// Errors raised by the library. Drops during protocol execution are
/// outcomes, not errors, and never surface here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown node: {0}")]
    UnknownNode(String),

    #[error("signal-to-noise ratio is infinite for a noiseless Werner parameter (w = 1)")]
    InfiniteSnr,

    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("inconsistent round schedule: {0}")]
    Schedule(String),

    #[error("malformed dump: {0}")]
    Parse(String),

    #[error("config error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), key.as_ref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Config {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
