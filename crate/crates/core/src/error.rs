use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("no signal in the sorted port (beta_perp = 0)")]
    NoSignal,

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("modeshape cannot be normalized: all samples are zero")]
    DegenerateShape,

    #[error("fit did not converge: {reason}")]
    NonConvergence { reason: String, best: Option<Box<crate::calibration::FitReport<f64>>> },

    #[error("fitted floor lies below the detector floor (negative imprecision {value:e})")]
    NegativeImprecision { value: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Parse { line, reason: e.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
