use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} is not a distribution (sums to {sum})")]
    NotNormalized { what: String, sum: f64 },

    #[error("no report received from base station {0}")]
    MissingReport(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
