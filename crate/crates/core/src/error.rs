use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid system or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// A rank, index or value outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Bit strings or symbol vectors of the wrong length.
    #[error("codec error: {0}")]
    Codec(String),
    /// Index bits decode to a MAP/SAP combination that is never transmitted.
    #[error("illegal index combination: d = {d} >= {limit}")]
    IllegalCombination { d: u64, limit: u64 },
    /// An exhaustive enumeration would exceed its budget.
    #[error("size error: {0}")]
    Size(String),
    /// The preamble could not be located in the received stream.
    #[error("synchronisation failure: peak metric {peak:.3} below floor {floor:.3}")]
    SyncFailure { peak: f64, floor: f64 },
    /// Malformed input files.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
