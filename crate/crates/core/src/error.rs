use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the {domain} domain of the kernel")]
    Domain { point: f64, domain: &'static str },

    #[error("pearson kernel is undefined at {0}: baseline mass is zero")]
    UndefinedKernel(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("symmetric eigensolver did not converge")]
    EigenSolver,

    #[error("trace integral diverges; the V-statistic limit law does not exist")]
    DivergentTrace,

    #[error("the limit law is degenerate: {0}")]
    DegenerateLimit(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("information matrix is singular")]
    SingularInformation,

    #[error("sample is empty")]
    EmptySample,

    #[error("sample too small: need at least {need} observations, got {got}")]
    SampleTooSmall { need: usize, got: usize },

    #[error("bootstrap aborted: {discarded} of {total} replicates failed")]
    BootstrapAborted { discarded: usize, total: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Whether the error is a refusal of a statistical route rather than a failure.
    pub fn is_route_refusal(&self) -> bool {
        matches!(self, Error::DivergentTrace | Error::DegenerateLimit(_))
    }
}
