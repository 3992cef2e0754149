use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function or model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iterative method failed to reach its tolerance.
    #[error("{method} did not converge after {iterations} iterations")]
    Convergence { method: &'static str, iterations: usize },

    /// The acceptance-rejection loop hit its proposal cap for a single sample.
    #[error(
        "rejection cap hit: {proposals} consecutive proposals rejected \
         (estimated acceptance rate {running_acceptance:.3e})"
    )]
    RejectionCap { proposals: u64, running_acceptance: f64 },

    #[error("{method} is not supported for the {scenario} scenario")]
    Unsupported { method: &'static str, scenario: &'static str },

    #[error("size error: {0}")]
    Size(String),

    /// A prepared table does not belong to the arguments it was used with.
    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
