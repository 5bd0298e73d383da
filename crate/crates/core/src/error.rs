use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral measure has total mass {mass}, expected 1")]
    Normalization { mass: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy cannot be delivered at this radius.
    #[error("precision error: radius {r} exceeds the quadrature ceiling; achievable relative tolerance {achievable:e}")]
    Precision { r: f64, achievable: f64 },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("method unavailable: {0}")]
    MethodUnavailable(String),

    #[error("case mismatch: {0}")]
    CaseMismatch(String),

    #[error("root solver did not converge after {iterations} iterations ({unconverged} roots unconverged)")]
    Solver {
        iterations: usize,
        unconverged: usize,
        partial: Vec<Complex64>,
    },

    #[error("support unknown: {0}")]
    SupportUnknown(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
