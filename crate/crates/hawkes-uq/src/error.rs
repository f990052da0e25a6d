//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, simulation, fitting, and
/// confidence-set extraction.
#[derive(Debug, Error)]
pub enum HawkesError {
    /// A parameter failed validation; `field` names the offending entry.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    /// Node index outside `[0, D)`.
    #[error("node index {index} out of range for {count} nodes")]
    NodeOutOfRange { index: usize, count: usize },

    /// Branching spectral radius at or above one: the process has no
    /// stationary regime and simulation would explode.
    #[error("explosive process: branching spectral radius {rho} >= 1")]
    ExplosiveProcess { rho: f64 },

    /// Stationary closed forms requested for a non-stationary parameter set.
    #[error("non-stationary parameters: spectral radius {rho} >= 1")]
    NonStationary { rho: f64 },

    /// The thinning dominating rate was observed below the true intensity.
    /// Indicates a bug or numerically hostile inputs; never expected.
    #[error("dominating rate {bound} below total intensity {actual} at t={t}")]
    RateBoundViolation { t: f64, bound: f64, actual: f64 },

    /// Empirical Fisher information is singular and cannot be inverted.
    #[error("singular empirical Fisher information for node {node}")]
    SingularFisher { node: usize },

    /// A likelihood or derived quantity evaluated non-finite.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Linear program has an empty feasible region.
    #[error("infeasible linear program")]
    Infeasible,

    /// Appendix closed forms only exist for exponential kernels.
    #[error("unsupported kernel for analytic closed forms: {detail}")]
    KernelUnsupported { detail: String },

    /// Per-node failure inside a multi-node operation.
    #[error("node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<HawkesError>,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HawkesError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        HawkesError::InvalidParameter {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_node(node: usize, source: HawkesError) -> Self {
        HawkesError::AtNode {
            node,
            source: Box::new(source),
        }
    }
}
