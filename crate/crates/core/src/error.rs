use thiserror::Error;

pub type Result<T> = std::result::Result<T, TontineError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TontineError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("budget constraint violated: residual {residual:e}")]
    Budget { residual: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("scenario error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl TontineError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        TontineError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        TontineError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable category, used by the CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            TontineError::InvalidParameter { .. } => "invalid-parameter",
            TontineError::Domain(_) => "domain",
            TontineError::Accuracy { .. } => "accuracy",
            TontineError::Divergence(_) => "divergence",
            TontineError::Budget { .. } => "budget",
            TontineError::Root(_) => "root",
            TontineError::Config { .. } => "config",
            TontineError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for TontineError {
    fn from(e: std::io::Error) -> Self {
        TontineError::Io(e.to_string())
    }
}

impl From<csv::Error> for TontineError {
    fn from(e: csv::Error) -> Self {
        TontineError::Io(e.to_string())
    }
}
