use num_complex::Complex64;
use thiserror::Error;

/// Errors produced anywhere in the carpet pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed carpet spec: {0}")]
    MalformedSpec(String),

    #[error("cell count {requested} exceeds the configured cap {cap}")]
    CapExceeded { requested: u128, cap: u64 },

    #[error("no vertices remain after removing the outer boundary (empty spectrum)")]
    EmptySpectrum,

    #[error("eigenvalue iteration did not converge for index {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("LDLT factorization broke down at shift {sigma} after {attempts} attempts")]
    FactorizationBreakdown { sigma: f64, attempts: usize },

    #[error("pole at s = {location}{}", residue.map(|r| format!(" (residue {r})")).unwrap_or_default())]
    Pole {
        location: Complex64,
        residue: Option<Complex64>,
    },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing representation: {0}")]
    MissingRepresentation(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedSpec(_) => "malformed_spec",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::EmptySpectrum => "empty_spectrum",
            Error::NoConvergence { .. } => "no_convergence",
            Error::FactorizationBreakdown { .. } => "factorization_breakdown",
            Error::Pole { .. } => "pole",
            Error::Domain(_) => "domain",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::MissingRepresentation(_) => "missing_representation",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
