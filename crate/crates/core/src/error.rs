use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands live in different series rings.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Laurent window in `z` is too short for the requested rows.
    #[error("z-window too small: {0}")]
    Window(String),

    /// Localization denominators vanish or the pairing is degenerate.
    #[error("singular pairing: {0}")]
    SingularPairing(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("root labeling failed: {0}")]
    Labeling(String),

    /// Adjacent path steps could not be matched even after refinement.
    #[error("root matching failed, refine the path: {0}")]
    Matching(String),

    #[error("path error: {0}")]
    Path(String),

    /// A series was evaluated outside the region where its truncation is trusted.
    #[error("outside convergence basin: {0}")]
    Basin(String),

    /// A linear solve hit a (numerically) singular matrix; resample lambda.
    #[error("singular linear solve: {0}")]
    SingularSolve(String),

    /// Rational reconstruction did not reproduce the held-out coefficients.
    #[error("inconclusive reconstruction: {0}")]
    Inconclusive(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}
