use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not unitary: ||U^dag U - 1||_HS = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("logarithm undefined at the group element -1")]
    LogUndefined,

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("quadrature did not converge: estimated relative error {achieved:.3e}, requested {requested:.1e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("quadratic form is not positive definite: pivot {pivot:.6e} at row {row} (Gershgorin lower bound {gershgorin:.6e})")]
    NotPositiveDefinite {
        pivot: f64,
        row: usize,
        gershgorin: f64,
    },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
