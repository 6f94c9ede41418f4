use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of refinement depth.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// A recursion denominator vanished.
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    /// A root search left the representable bracket.
    #[error("range error: {0}")]
    Range(String),

    /// A structural hypothesis of an estimator does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Sample data cannot support the requested estimate.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
