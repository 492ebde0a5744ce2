use thiserror::Error;

/// Errors raised by the constitutive, phase and mesh routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric positive-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("deformation gradient is not orientation preserving (det F = {det:e})")]
    Orientation { det: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
