use thiserror::Error;

use crate::group::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("mode-count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },

    #[error("matrix is not a valid scattering matrix ({})", .0.summary())]
    NotScattering(Box<ValidationReport>),

    #[error("generator violates the Lie condition (residual {residual:.3e})")]
    NotGenerator { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate singular values could not be resolved (best residual {best_residual:.3e})")]
    DegeneracyUnresolved { best_residual: f64 },

    #[error("Fock space too large: dimension {dim} exceeds budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error("photon window {max_photons} too close to cutoff {cutoff} (need max_photons <= cutoff - 2)")]
    GuardBand { max_photons: usize, cutoff: usize },

    #[error("mode index {mode} out of range for {n} modes")]
    ModeOutOfRange { mode: usize, n: usize },

    #[error("malformed matrix document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
