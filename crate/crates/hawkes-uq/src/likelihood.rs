//! Decoupled per-node log-likelihood, score, Hessian, and Fisher-information
//! estimators.
//!
//! The joint log-likelihood splits into one term per target node, each
//! depending only on that node's influence vector, so every function here
//! works on a single `NodeModel`. The heavy lifting (eta vectors at event
//! times, exact eta integrals) is cached in a [`NodeView`]; the `_with`
//! variants reuse a prebuilt view, which is what the optimizer iterates on.
//!
//! With `lambda = mu + alpha . eta(t)`:
//!
//! * log-likelihood: `-integral(lambda) + sum over own events of ln lambda`
//! * score:          `sum eta/lambda - integral(eta)`, the integral exact
//!                   via kernel cumulatives
//! * Hessian:        `-sum eta eta^T / lambda^2`, negative semidefinite

use crate::error::HawkesError;
use crate::kernels::KernelSpec;
use crate::linalg::psd_rank_deficient;
use crate::process::{EventSequence, NodeView};
use nalgebra::{DMatrix, DVector};

/// Eigenvalue ratio below which an accumulated Fisher estimate is treated
/// as rank deficient.
pub const FISHER_RANK_TOL: f64 = 1e-10;

/// One node's model: background rate, influence row, and kernel row.
#[derive(Debug, Clone)]
pub struct NodeModel {
    pub node: usize,
    pub mu: f64,
    pub alpha: DVector<f64>,
    pub kernels: Vec<KernelSpec>,
}

impl NodeModel {
    pub fn new(
        node: usize,
        mu: f64,
        alpha: DVector<f64>,
        kernels: Vec<KernelSpec>,
    ) -> Result<Self, HawkesError> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(HawkesError::invalid("mu", format!("must be > 0, got {mu}")));
        }
        if alpha.len() != kernels.len() {
            return Err(HawkesError::invalid(
                "alpha",
                format!("length {} does not match kernel row {}", alpha.len(), kernels.len()),
            ));
        }
        for (j, &a) in alpha.iter().enumerate() {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(HawkesError::invalid(
                    format!("alpha[{j}]"),
                    format!("must be >= 0 and finite, got {a}"),
                ));
            }
        }
        for k in &kernels {
            k.validate()?;
        }
        Ok(NodeModel { node, mu, alpha, kernels })
    }

    pub fn view<'a>(&self, seq: &'a EventSequence) -> Result<NodeView<'a>, HawkesError> {
        NodeView::new(seq, self.node, self.kernels.clone())
    }
}

/// Log-likelihood for a prebuilt view.
pub fn loglik_with(view: &NodeView, mu: f64, alpha: &DVector<f64>) -> f64 {
    let compensator = mu * view.horizon() + alpha.dot(view.integral_to_horizon());
    let mut events = 0.0;
    for m in 0..view.own_count() {
        events += (mu + alpha.dot(view.eta_at_own(m))).ln();
    }
    events - compensator
}

/// Score (gradient of the log-likelihood in the influence vector) for a
/// prebuilt view.
pub fn score_with(view: &NodeView, mu: f64, alpha: &DVector<f64>) -> DVector<f64> {
    let mut s = -view.integral_to_horizon().clone();
    for m in 0..view.own_count() {
        let eta = view.eta_at_own(m);
        let lambda = mu + alpha.dot(eta);
        s.axpy(1.0 / lambda, eta, 1.0);
    }
    s
}

/// Hessian for a prebuilt view; symmetric negative semidefinite.
pub fn hessian_with(view: &NodeView, mu: f64, alpha: &DVector<f64>) -> DMatrix<f64> {
    let d = view.dim();
    let mut h = DMatrix::<f64>::zeros(d, d);
    for m in 0..view.own_count() {
        let eta = view.eta_at_own(m);
        let lambda = mu + alpha.dot(eta);
        h.syger(-1.0 / (lambda * lambda), eta, eta, 1.0);
    }
    // syger fills the lower triangle; mirror it.
    h.fill_upper_triangle_with_lower_triangle();
    h
}

/// Full-sequence log-likelihood of one node's model.
pub fn loglik(m: &NodeModel, seq: &EventSequence) -> Result<f64, HawkesError> {
    let view = m.view(seq)?;
    let value = loglik_with(&view, m.mu, &m.alpha);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(HawkesError::NonFinite { context: format!("log-likelihood of node {}", m.node) })
    }
}

/// Score of one node's model.
pub fn score(m: &NodeModel, seq: &EventSequence) -> Result<DVector<f64>, HawkesError> {
    Ok(score_with(&m.view(seq)?, m.mu, &m.alpha))
}

/// Hessian of one node's model.
pub fn hessian(m: &NodeModel, seq: &EventSequence) -> Result<DMatrix<f64>, HawkesError> {
    Ok(hessian_with(&m.view(seq)?, m.mu, &m.alpha))
}

/// Empirical Fisher information with a singularity flag.
#[derive(Debug, Clone)]
pub struct FisherEstimate {
    pub matrix: DMatrix<f64>,
    /// Set when the estimate has numerical rank below the dimension; not an
    /// error, but downstream inversions will refuse it.
    pub singular: bool,
}

/// Empirical Fisher information `-H / T`.
pub fn empirical_fisher(m: &NodeModel, seq: &EventSequence) -> Result<FisherEstimate, HawkesError> {
    let h = hessian(m, seq)?;
    let matrix = -h / seq.horizon();
    let singular = psd_rank_deficient(&matrix, FISHER_RANK_TOL);
    Ok(FisherEstimate { matrix, singular })
}

/// Adapted Fisher estimator at time `t`: the per-unit-time accumulation of
/// `eta eta^T / lambda^2` over the node's events strictly before `t`,
/// falling back to the identity matrix when the accumulation is rank
/// deficient (in particular before the first event).
pub fn adapted_fisher(m: &NodeModel, seq: &EventSequence, t: f64) -> Result<DMatrix<f64>, HawkesError> {
    let view = m.view(seq)?;
    Ok(adapted_fisher_with(&view, m.mu, &m.alpha, t))
}

/// Adapted Fisher estimator for a prebuilt view.
pub fn adapted_fisher_with(view: &NodeView, mu: f64, alpha: &DVector<f64>, t: f64) -> DMatrix<f64> {
    let d = view.dim();
    let mut acc = DMatrix::<f64>::zeros(d, d);
    let times = view.own_times();
    for m in 0..view.own_count() {
        if times[m] >= t {
            break;
        }
        let eta = view.eta_at_own(m);
        let lambda = mu + alpha.dot(eta);
        acc.syger(1.0 / (lambda * lambda), eta, eta, 1.0);
    }
    acc.fill_upper_triangle_with_lower_triangle();
    if t <= 0.0 || psd_rank_deficient(&acc, FISHER_RANK_TOL) {
        return DMatrix::identity(d, d);
    }
    acc / t
}
