use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A series hit its term cap before the tail estimate met the tolerance.
    #[error("{what} did not converge after {terms} terms (error estimate {estimate:e})")]
    NoConvergence {
        what: &'static str,
        terms: usize,
        estimate: f64,
    },

    #[error("quadrature failed in {what}: error estimate {estimate:e} above tolerance")]
    Quadrature { what: &'static str, estimate: f64 },

    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),

    #[error("matrix with entries sqrt(rho_ij) is not positive definite")]
    NotPositiveDefinite,

    /// The exact branch-level shadowing sampler needs 2m to be an integer.
    #[error("shadowing parameter m = {0} is not a half-integer multiple")]
    UnsupportedShape(f64),

    #[error("cluster count mu = {0} must be a positive integer for simulation")]
    NonIntegerMu(f64),

    #[error("invalid histogram range or bin count: {0}")]
    EmptyRange(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for failures caused by series or quadrature convergence rather than bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Quadrature { .. })
    }
}
