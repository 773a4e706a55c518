//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("photon capacity exceeded: {total} photons, cap is {cap}")]
    PhotonCapExceeded { total: u32, cap: u32 },
    #[error("mode register capacity exceeded: {count} modes, cap is {cap}")]
    ModeCapExceeded { count: usize, cap: usize },
    #[error("duplicate mode label {0}")]
    DuplicateMode(String),
    #[error("mode {0} not present in register")]
    UnknownMode(String),
    #[error("matrix is not unitary: max deviation {max_dev:e}")]
    NotUnitary { max_dev: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schedule is missing event {0}")]
    MissingEvent(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// Stable machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PhotonCapExceeded { .. } => "photon_cap_exceeded",
            Error::ModeCapExceeded { .. } => "mode_cap_exceeded",
            Error::DuplicateMode(_) => "duplicate_mode",
            Error::UnknownMode(_) => "unknown_mode",
            Error::NotUnitary { .. } => "not_unitary",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MissingEvent(_) => "missing_event",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Infeasible(_) => "infeasible",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
