//! Error type shared by the library and the command-line front end.

use thiserror::Error;

use crate::ialm::TraceRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the domain of the nonsmooth term.
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed dataset text; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("data file not found: {0}")]
    DataMissing(String),
    /// A non-finite iterate was produced; the trace recorded so far is attached.
    #[error("divergence: non-finite iterate at outer iteration {outer_k}, inner iteration {inner_t}")]
    Divergence { outer_k: usize, inner_t: u64, trace: Vec<TraceRecord> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
