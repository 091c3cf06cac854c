use thiserror::Error;

/// Errors produced by the boundary-integral routines.
#[derive(Debug, Error)]
pub enum UbvpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Traces violate a compatibility constraint (e.g. zero net flux).
    #[error("incompatible data: constraint {constraint} has value {value:e}")]
    IncompatibleData { constraint: String, value: f64 },

    /// A target lies too close to a singularity of the kernel.
    #[error("near-singular evaluation: {0}")]
    NearSingular(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl UbvpError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        UbvpError::InvalidArgument(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        UbvpError::NumericFailure(msg.into())
    }

    /// Short machine-readable tag used in JSON error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            UbvpError::InvalidArgument(_) => "invalid-argument",
            UbvpError::Unsupported(_) => "unsupported",
            UbvpError::NumericFailure(_) => "numeric-failure",
            UbvpError::IncompatibleData { .. } => "incompatible-data",
            UbvpError::NearSingular(_) => "near-singular",
            UbvpError::Io(_) => "io",
            UbvpError::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, UbvpError>;
