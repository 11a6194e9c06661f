use thiserror::Error;

/// Errors surfaced by the numerical toolkit.
#[derive(Debug, Error)]
pub enum TlfError {
    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature could not reach its error target.
    #[error("quadrature failed to converge: {0}")]
    QuadratureNonconvergence(String),

    /// An integral was detected (or suspected) to diverge.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// The operation needs a named truncation family.
    #[error("unsupported truncation family: {0}")]
    UnsupportedFamily(String),

    /// The rejection sampler exceeded its iteration budget.
    #[error("rejection sampler exceeded {0} trials without acceptance")]
    IterationLimit(u64),

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, TlfError>;
