use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature with {points} points cannot resolve {modes} Hermite modes (aliasing)")]
    QuadratureTooSmall { points: usize, modes: usize },

    #[error("cell index {cell} out of range for a mesh with {n_cells} cells")]
    CellOutOfRange { cell: usize, n_cells: usize },

    #[error("Poisson source is not charge neutral: net charge {net_charge:e} exceeds tolerance {tolerance:e}")]
    Compatibility { net_charge: f64, tolerance: f64 },

    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    Factorization { pivot: usize, value: f64 },

    #[error("field pair was not solved from the current density (fingerprint mismatch)")]
    FieldMismatch,

    #[error("non-finite value in mode {mode} at step {step}")]
    NonFinite { step: u64, mode: usize },

    #[error("rate fit needs at least 2 peaks in the window, found {found}")]
    TooFewPeaks { found: usize },

    #[error("projected moments deviate from analytic values: {quantity} relative error {error:e}")]
    ProjectionMismatch { quantity: &'static str, error: f64 },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
