use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, cap: u64 },

    #[error("root finder failed to converge for degree {degree} (root {index})")]
    NonConvergence { degree: usize, index: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("index set is empty")]
    EmptySet,

    #[error("network metadata is missing `{0}`")]
    MissingMetadata(&'static str),

    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("outside the supported envelope: {0}")]
    Envelope(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short category tag used by the command-line driver.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::Config(_) => "config",
            Error::CapExceeded { .. } => "resource",
            Error::NonConvergence { .. } => "numerics",
            Error::NonFinite(_) => "numerics",
            Error::EmptySet => "config",
            Error::MissingMetadata(_) => "network",
            Error::Parse(_) => "parse",
            Error::InvalidNetwork(_) => "network",
            Error::Envelope(_) => "envelope",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
