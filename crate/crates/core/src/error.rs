use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates the operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The selected column submatrix is numerically rank deficient, so the
    /// least-squares fit is not unique.
    #[error("rank-deficient column submatrix ({columns} columns, |r_min|/|r_max| = {ratio:.3e})")]
    RankDeficient { columns: usize, ratio: f64 },

    #[error("malformed matrix text at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
