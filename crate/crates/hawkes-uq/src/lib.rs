//! Inference of multivariate Hawkes influence networks with uncertainty
//! quantification.
//!
//! The library fits the influence matrix of a multivariate Hawkes process by
//! per-node maximum likelihood and quantifies the uncertainty of the estimate
//! two ways:
//!
//! * classical asymptotic confidence intervals built from the empirical
//!   Fisher information ([`ci_asymptotic`]), and
//! * non-asymptotic polyhedral confidence sets built from concentration of
//!   the score martingale with adapted direction vectors
//!   ([`ci_concentration`]).
//!
//! Supporting machinery: influence kernels ([`kernels`]), the event-sequence
//! data model and intensity/compensator queries ([`process`]), an
//! Ogata-thinning simulator ([`simulate`]), the decoupled per-node likelihood
//! core ([`likelihood`]), projected-gradient MLE ([`mle`]), closed forms for
//! the stationary exponential-kernel process ([`analytic`]), and a
//! Monte-Carlo coverage harness ([`coverage`]).

pub mod analytic;
pub mod ci_asymptotic;
pub mod ci_concentration;
pub mod config;
pub mod coverage;
pub mod error;
pub mod io;
pub mod kernels;
pub mod likelihood;
pub mod linalg;
pub mod lp;
pub mod mle;
pub mod process;
pub mod report;
pub mod simulate;
pub mod special;
#[cfg(test)]
pub(crate) mod test_util;

pub use error::HawkesError;
pub use kernels::KernelSpec;
pub use process::{EventSequence, KernelGrid, ModelParams};
pub use report::{CiEntry, ConfidenceReport, Method};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, HawkesError>;

/// Format a float with 17 significant digits so a rerun reproduces output
/// byte for byte and values round-trip through text exactly.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        (if x > 0.0 { "inf" } else { "-inf" }).to_string()
    } else {
        format!("{:.16e}", x)
    }
}
