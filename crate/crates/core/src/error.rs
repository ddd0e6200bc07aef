use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coordinate {0} is not a grid point")]
    OffGrid(f64),
    #[error("grid index {index} out of range (grid has {len} points)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("paths live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty window: start index {start} is past evaluation index {end}")]
    EmptyWindow { start: usize, end: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("instance too large to enumerate: {count} sequences (limit {limit})")]
    TooLarge { count: u128, limit: u128 },
    #[error("window truncation: {0}")]
    Truncation(String),
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    #[error("empty sample")]
    EmptySample,
    #[error("{}", match .line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Config {
        line: Option<usize>,
        message: String,
    },
    #[error("run invalidated: {0}")]
    Invalidated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn config_at(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line: Some(line),
            message: message.into(),
        }
    }
}
