use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is invalid: must be even and at least 8")]
    InvalidGrid(usize),

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error(
        "spectrum is not conjugate-symmetric at wavenumber {wavenumber} (residue {residue:e})"
    )]
    SpectrumAsymmetric { wavenumber: i64, residue: f64 },

    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("field is negative ({value:e}) at index {index}")]
    Negative { index: usize, value: f64 },

    #[error("index {index} out of range for grid of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("invalid initial condition spec `{0}`")]
    InitialCondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
