use thiserror::Error;

/// Failure classes shared by every module. The CLI maps each class to a
/// distinct exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Amplitude constraint `0 <= v_m <= v_dc` violated.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Non-finite numbers in a matrix or a diverging simulation.
    #[error("numeric failure{}: {message}", at.map(|t| format!(" at t={t:e} s")).unwrap_or_default())]
    Numeric { message: String, at: Option<f64> },

    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            at: None,
        }
    }

    pub fn numeric_at(msg: impl Into<String>, t: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            at: Some(t),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
