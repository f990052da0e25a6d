//! Classical asymptotic confidence intervals from MLE normality.
//!
//! `sqrt(T) (alpha_hat - alpha*)` is asymptotically normal with covariance
//! the inverse Fisher information, and the empirical Fisher information is
//! consistent, so each entry gets the interval
//! `alpha_hat_ij +/- Z_{eps/2D} sqrt(sigma2_ij / T)` with `sigma2_ij` the
//! j-th diagonal entry of the inverse empirical Fisher matrix. The per-entry
//! quantile is Bonferroni-corrected by the network dimension. Lower bounds
//! are reported raw (possibly negative); a zero-clipped view rides along.

use crate::error::HawkesError;
use crate::likelihood::{empirical_fisher, NodeModel};
use crate::linalg::spd_inverse;
use crate::mle::{fit_all, FitDiagnostics, SolverOptions};
use crate::process::{EventSequence, KernelGrid};
use crate::report::{CiEntry, ConfidenceReport, Method};
use crate::special;
use nalgebra::{DMatrix, DVector};

/// Standard normal quantile `Phi^{-1}(p)`, accurate to better than 1e-9.
pub fn normal_quantile(p: f64) -> Result<f64, HawkesError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(HawkesError::invalid("p", format!("must be in (0, 1), got {p}")));
    }
    Ok(special::normal_quantile(p))
}

/// Per-entry intervals for one node's influence vector.
///
/// `fisher` is the node's empirical Fisher information; inversion is by SPD
/// factorization and failure is reported, never silently pseudo-inverted.
/// `node_count` drives the Bonferroni correction `eps / (2 D)`.
pub fn asymptotic_ci(
    node: usize,
    alpha_hat: &DVector<f64>,
    fisher: &DMatrix<f64>,
    horizon: f64,
    epsilon: f64,
    node_count: usize,
) -> Result<ConfidenceReport, HawkesError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(HawkesError::invalid("epsilon", format!("must be in (0, 1), got {epsilon}")));
    }
    if !(horizon > 0.0) {
        return Err(HawkesError::invalid("horizon", format!("must be > 0, got {horizon}")));
    }
    let d = alpha_hat.len();
    if fisher.nrows() != d || fisher.ncols() != d {
        return Err(HawkesError::invalid(
            "fisher",
            format!("must be {d}x{d}, got {}x{}", fisher.nrows(), fisher.ncols()),
        ));
    }
    let inv = spd_inverse(fisher).ok_or(HawkesError::SingularFisher { node })?;
    let z = special::normal_quantile(1.0 - epsilon / (2.0 * node_count as f64));
    let mut report = ConfidenceReport::new(Method::Asymptotic, epsilon, node_count);
    for j in 0..d {
        let half_width = z * (inv[(j, j)] / horizon).sqrt();
        report.entries.push(CiEntry::new(
            node,
            j,
            alpha_hat[j] - half_width,
            alpha_hat[j] + half_width,
            alpha_hat[j],
        ));
    }
    Ok(report)
}

/// Full pipeline over all nodes: fit, estimate Fisher, build intervals.
/// Also returns the fitted influence matrix and per-node diagnostics so
/// callers can reuse the estimates.
pub fn asymptotic_report(
    seq: &EventSequence,
    mu: &DVector<f64>,
    kernels: &KernelGrid,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<(ConfidenceReport, DMatrix<f64>, Vec<FitDiagnostics>), HawkesError> {
    let d = seq.node_count();
    let (a_hat, diags) = fit_all(seq, mu, kernels, opts)?;
    let mut report = ConfidenceReport::new(Method::Asymptotic, epsilon, d);
    for i in 0..d {
        let alpha = a_hat.row(i).transpose().into_owned();
        let m = NodeModel::new(i, mu[i], alpha.clone(), kernels.row(i, d))?;
        let fisher = empirical_fisher(&m, seq).map_err(|e| HawkesError::at_node(i, e))?;
        if fisher.singular {
            report.flags.singular_fisher.push(i);
        }
        let node_report = asymptotic_ci(i, &alpha, &fisher.matrix, seq.horizon(), epsilon, d)
            .map_err(|e| HawkesError::at_node(i, e))?;
        report.merge(node_report);
        if !diags[i].converged {
            report.flags.not_converged.push(i);
        }
    }
    Ok((report, a_hat, diags))
}
