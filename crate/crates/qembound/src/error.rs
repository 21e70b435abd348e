use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Matrix input is malformed (non-square, shape mismatch, not Hermitian, ...).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// A matrix required to be positive semidefinite has a negative eigenvalue
    /// beyond tolerance.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// Scalar or structural argument out of its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Reference state of a sandwiched divergence is singular.
    #[error("singular reference state: {0}")]
    SingularReference(String),

    /// A map that must be completely positive is not (Choi matrix has a
    /// negative eigenvalue beyond tolerance).
    #[error("map is not completely positive: {0}")]
    NotCompletelyPositive(String),

    /// The state passed as a channel fixed point is not fixed within tolerance.
    #[error("not a fixed point: residual {0:.3e}")]
    NotAFixedPoint(f64),

    /// State is singular where full rank is required.
    #[error("singular state: {0}")]
    SingularState(String),

    /// Channel cannot be inverted (quasiprobability decomposition undefined).
    #[error("channel is not invertible: {0}")]
    Noninvertible(String),

    /// Regression model could not be fit to the data.
    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    /// The empirical search exhausted its sample ceiling with the success
    /// probability stuck below the target.
    #[error("target unachievable: success probability plateaued at {plateau:.4} (n_max {n_max})")]
    Unachievable { plateau: f64, n_max: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
