use thiserror::Error;

/// Failure modes of the source model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input parameter lies outside its physical domain.
    #[error("domain error in `{field}`: {message}")]
    Domain { field: &'static str, message: String },

    /// Arguments are individually valid but incompatible with each other.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A matrix that must be invertible or positive definite is not.
    #[error("numerical domain error: {0}")]
    Numerical(String),

    /// The fidelity is undefined because the heralding probability vanishes.
    #[error("fidelity undefined: heralding probability is zero")]
    UndefinedFidelity,
}

impl Error {
    pub(crate) fn domain(field: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            field,
            message: message.into(),
        }
    }

    /// Name of the offending input, when the error is tied to one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::Domain { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
