//! Crate-wide error type.

use crate::realize::RealizationResult;
use crate::sdp::SdpStatus;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fiber measure has no atoms")]
    EmptyMeasure,

    #[error("negative weight {weight:e} at atom {index}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("direction has near-zero norm {norm:e}")]
    ZeroDirection { norm: f64 },

    #[error("vector norm {norm} differs from 1 by more than {tol:e}")]
    NotUnit { norm: f64, tol: f64 },

    #[error("matrix is not orthogonal: worst residual {residual:e}")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not symmetric: worst residual {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error(
        "matrix violates the complete-symmetry redundancies: \
         worst residual {residual:e} exceeds tolerance {tol:e}"
    )]
    NotCompletelySymmetric { residual: f64, tol: f64 },

    #[error(
        "eigenvalue ordering violated: need lambda1 >= lambda2 >= 1 - lambda1 - lambda2 >= 0, \
         got lambda1 = {lambda1}, lambda2 = {lambda2}"
    )]
    OrderingViolation { lambda1: f64, lambda2: f64 },

    #[error(
        "tensor is not a candidate: trace {trace}, minimal eigenvalue {min_eigenvalue:e}, \
         symmetry residual {symmetry_residual:e} (tolerance {tol:e})"
    )]
    NotCandidate {
        trace: f64,
        min_eigenvalue: f64,
        symmetry_residual: f64,
        tol: f64,
    },

    #[error("SDP solver stopped with status {status:?} after {iterations} iterations")]
    Solver {
        status: SdpStatus,
        iterations: usize,
    },

    #[error("decomposition residual {residual:e} exceeds tolerance {tol:e}")]
    ToleranceNotReached {
        residual: f64,
        tol: f64,
        /// Best-effort decomposition, still usable by callers that accept it.
        best: Box<RealizationResult>,
    },

    #[error("no null-space direction found among the atom moment vectors")]
    NullSpaceNotFound,

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
