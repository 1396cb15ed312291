use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("resource guard: {cells} cells exceeds the configured bound {limit}")]
    ResourceLimit { cells: u128, limit: u128 },
    #[error("machine construction error: {0}")]
    MachineConstruction(String),
    #[error("grammar is not deterministic for one-symbol lookahead: {0}")]
    GrammarConflict(String),
    #[error("rule action is not affine on cell ({i}, {j}): {reason}")]
    NonAffine { i: usize, j: usize, reason: String },
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("undefined input: {0}")]
    UndefinedInput(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
