use thiserror::Error;

/// Errors produced by the simulation library.
///
/// The variants fall into three families that callers (notably the CLI)
/// map to distinct exit statuses: invalid input, violated physical
/// preconditions, and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no analytic form: {0}")]
    NoAnalyticForm(String),

    #[error("energy {energy} lies within {distance:.3e} of a band pole at k = {k:.6}")]
    PoleProximity { energy: String, k: f64, distance: f64 },

    #[error("eigensolver failed to converge (dim = {dim}, ‖H‖_F = {frobenius:.6e}, max|H_ij| = {max_abs:.6e}): {detail}")]
    Convergence {
        dim: usize,
        frobenius: f64,
        max_abs: f64,
        detail: String,
    },

    #[error("biorthogonalization failed: max |⟨L_p|R_q⟩ − δ_pq| = {deviation:.3e} ({detail})")]
    Biorthogonalization { deviation: f64, detail: String },

    #[error("state amplitude overflowed at t = {time:.6}")]
    Overflow { time: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by inputs outside a formula's domain of
    /// validity (as opposed to malformed inputs or numerical breakdown).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_) | Error::NoAnalyticForm(_) | Error::PoleProximity { .. }
        )
    }

    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
