//! Non-asymptotic confidence sets from martingale concentration of the
//! score.
//!
//! For any direction process `z(t)` adapted to the strict past, the process
//! `exp(integral z dS - V)` is a mean-one martingale, where `V` is the
//! data-dependent intrinsic variance
//! `integral lambda exp(z.eta/lambda) - z.eta - lambda dt`. Concentration
//! then bounds `integral z dS - V` by `ln(1/eps)` with probability `1-eps`.
//! Running `2D` directions (a +/- pair per axis, scaled by an adapted
//! Fisher estimate) and a union bound yields a confidence set
//! `{alpha : g_k(alpha) <= ln(2D/eps) for all k}`.
//!
//! The set is nonlinear in `alpha`; for per-entry intervals each `g_k` is
//! linearized at the MLE by central finite differences, giving a polyhedron
//! (intersected with `alpha >= 0`) whose per-axis extremes come from a small
//! dense LP. The exact membership test is kept alongside as a validation
//! and diagnostic tool.
//!
//! Direction vectors update only at target-node event times and are held
//! constant in between, so every `z(t)` depends on data strictly before `t`
//! and the integrals split cleanly over inter-event segments.

use crate::error::HawkesError;
use crate::kernels::KernelSpec;
use crate::likelihood::FISHER_RANK_TOL;
use crate::linalg::{psd_rank_deficient, spd_inverse};
use crate::lp::{maximize, minimize, LpOutcome};
use crate::mle::{fit_view, FitDiagnostics, SolverOptions};
use crate::process::{EventSequence, KernelGrid, NodeView};
use crate::report::{CiEntry, ConfidenceReport, Method};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Exponent ceiling for the intrinsic-variance integrand. Beyond it the
/// integral is reported as `+inf`, which makes the corresponding constraint
/// `g = -inf`, i.e. trivially satisfied.
const OVERFLOW_EXPONENT: f64 = 700.0;

/// Relative convergence target for per-segment Simpson refinement.
const SIMPSON_REL_TOL: f64 = 1e-8;

/// Finite-difference step scale for linearizing `g` at the MLE.
const FD_STEP: f64 = 1e-5;

/// Gradient norm below which a linearized constraint row is dropped.
const DEGENERATE_GRAD_TOL: f64 = 1e-12;

/// One constant-`z` stretch of a direction path.
#[derive(Debug, Clone)]
pub struct Segment {
    /// Segment applies on `(start, next_start]`; the first also covers 0.
    pub start: f64,
    pub z: DVector<f64>,
}

/// Piecewise-constant adapted direction path for one of the `2D` bound
/// directions: sign and axis identify which entry it bounds.
#[derive(Debug, Clone)]
pub struct DirectionSchedule {
    pub sign: f64,
    pub axis: usize,
    pub segments: Vec<Segment>,
    pub horizon: f64,
}

impl DirectionSchedule {
    /// Constant direction on the whole horizon (fixed-`z` research mode).
    pub fn constant(z: DVector<f64>, horizon: f64) -> Self {
        DirectionSchedule {
            sign: 1.0,
            axis: 0,
            segments: vec![Segment { start: 0.0, z }],
            horizon,
        }
    }

    /// The direction in force at time `t` (left-continuous: at a breakpoint
    /// the earlier segment still applies, preserving adaptedness).
    pub fn z_at(&self, t: f64) -> &DVector<f64> {
        let idx = self.segments.partition_point(|s| s.start < t);
        &self.segments[idx.saturating_sub(1)].z
    }
}

/// Linear constraint system `{alpha : G alpha <= h}` (plus implicit
/// `alpha >= 0`) from linearizing the `2D` direction statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyhedron {
    pub rows: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
    /// Direction indices whose rows were dropped (degenerate gradient or
    /// non-finite statistic).
    pub dropped: Vec<usize>,
}

impl Polyhedron {
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let m = self.rows.len();
        let n = self.rows.first().map_or(0, Vec::len);
        DMatrix::from_fn(m, n, |r, c| self.rows[r][c])
    }

    pub fn h_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.bounds.clone())
    }
}

/// Per-axis interval extracted from the polyhedron, with the LP argument
/// points kept for endpoint diagnostics.
#[derive(Debug, Clone)]
pub struct EntryInterval {
    pub lo: f64,
    pub hi: f64,
    pub unbounded: bool,
    pub lo_point: DVector<f64>,
    pub hi_point: Option<DVector<f64>>,
}

/// Precomputed state for one target node: the event-sequence view plus the
/// confidence level. Everything that depends on the influence vector is
/// evaluated on demand, so one context serves the MLE, the finite
/// differences, and the membership checks.
pub struct ConcentrationContext<'a> {
    view: NodeView<'a>,
    mu: f64,
    /// `ln(2D / epsilon)`.
    pub log_bound: f64,
}

enum SegOutcome {
    Value(f64),
    Overflow,
}

impl<'a> ConcentrationContext<'a> {
    pub fn new(
        seq: &'a EventSequence,
        node: usize,
        mu: f64,
        kernels: Vec<KernelSpec>,
        epsilon: f64,
    ) -> Result<Self, HawkesError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(HawkesError::invalid("epsilon", format!("must be in (0, 1), got {epsilon}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(HawkesError::invalid("mu", format!("must be > 0, got {mu}")));
        }
        let view = NodeView::new(seq, node, kernels)?;
        let d = view.dim();
        let log_bound = (2.0 * d as f64 / epsilon).ln();
        Ok(ConcentrationContext { view, mu, log_bound })
    }

    pub fn view(&self) -> &NodeView<'a> {
        &self.view
    }

    fn lambda_own(&self, alpha: &DVector<f64>, m: usize) -> Result<f64, HawkesError> {
        let lambda = self.mu + alpha.dot(self.view.eta_at_own(m));
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(HawkesError::NonFinite {
                context: format!("intensity at event {m} of node {}", self.view.node()),
            });
        }
        Ok(lambda)
    }

    /// Adapted direction schedules for all `2D` directions at one influence
    /// vector: directions `2j` and `2j+1` carry `+/- e_j` scaled through the
    /// inverse adapted Fisher estimate, which restarts at the identity until
    /// the accumulated information reaches full rank. Breakpoints sit
    /// exactly at the target node's event times.
    pub fn build_schedules(&self, alpha: &DVector<f64>) -> Result<Vec<DirectionSchedule>, HawkesError> {
        let d = self.view.dim();
        let t_total = self.view.horizon();
        let own_times = self.view.own_times();
        let scale = 2.0 * self.log_bound / t_total;

        // Inverse Fisher per breakpoint (shared by all directions).
        let mut inverses: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(own_times.len() + 1);
        inverses.push((0.0, DMatrix::identity(d, d)));
        let mut accum = DMatrix::<f64>::zeros(d, d);
        for m in 0..self.view.own_count() {
            let eta = self.view.eta_at_own(m);
            let lambda = self.lambda_own(alpha, m)?;
            accum.syger(1.0 / (lambda * lambda), eta, eta, 1.0);
            let t_m = own_times[m];
            // Ties collapse onto one breakpoint holding the latest state.
            let is_last_at_time = m + 1 >= self.view.own_count() || own_times[m + 1] > t_m;
            if !is_last_at_time {
                continue;
            }
            let mut full = accum.clone();
            full.fill_upper_triangle_with_lower_triangle();
            let inv = if t_m <= 0.0 || psd_rank_deficient(&full, FISHER_RANK_TOL) {
                DMatrix::identity(d, d)
            } else {
                let fisher = &full / t_m;
                spd_inverse(&fisher).unwrap_or_else(|| DMatrix::identity(d, d))
            };
            inverses.push((t_m, inv));
        }

        let mut schedules = Vec::with_capacity(2 * d);
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let segments = inverses
                    .iter()
                    .map(|(start, inv)| {
                        let col = inv.column(j);
                        let denom = col[j]; // e_j^T I^-1 e_j > 0 for SPD
                        let factor = sign * (scale / denom).sqrt();
                        Segment { start: *start, z: col * factor }
                    })
                    .collect();
                schedules.push(DirectionSchedule {
                    sign,
                    axis: j,
                    segments,
                    horizon: t_total,
                });
            }
        }
        Ok(schedules)
    }

    /// Simpson integral of the intrinsic-variance integrand over `[a, b]`
    /// with `eta(t)` supplied by `eta_of`, doubling panels until successive
    /// composite estimates agree to `SIMPSON_REL_TOL`.
    fn v_segment(
        &self,
        a: f64,
        b: f64,
        z: &DVector<f64>,
        alpha: &DVector<f64>,
        eta_of: &dyn Fn(f64) -> DVector<f64>,
    ) -> Result<SegOutcome, HawkesError> {
        if b <= a {
            return Ok(SegOutcome::Value(0.0));
        }
        let f = |t: f64| -> Result<SegOutcome, HawkesError> {
            let eta = eta_of(t);
            let lambda = self.mu + alpha.dot(&eta);
            if lambda <= 0.0 || !lambda.is_finite() {
                return Err(HawkesError::NonFinite {
                    context: format!("intensity at t={t} of node {}", self.view.node()),
                });
            }
            let ze = z.dot(&eta);
            let u = ze / lambda;
            if u > OVERFLOW_EXPONENT {
                return Ok(SegOutcome::Overflow);
            }
            Ok(SegOutcome::Value(lambda * u.exp() - ze - lambda))
        };

        // Composite Simpson with panel doubling; function values are reused
        // between refinements (odd points only are new).
        let fa = match f(a)? {
            SegOutcome::Value(v) => v,
            SegOutcome::Overflow => return Ok(SegOutcome::Overflow),
        };
        let fb = match f(b)? {
            SegOutcome::Value(v) => v,
            SegOutcome::Overflow => return Ok(SegOutcome::Overflow),
        };
        let mut values = vec![fa, fb];
        let mut estimate = f64::NAN;
        let mut panels = 1usize;
        for _ in 0..14 {
            panels *= 2;
            let h = (b - a) / panels as f64;
            let mut refined = Vec::with_capacity(panels + 1);
            for (idx, &old) in values.iter().enumerate() {
                refined.push(old);
                if idx + 1 < values.len() {
                    let t = a + h * (2 * idx + 1) as f64;
                    match f(t)? {
                        SegOutcome::Value(v) => refined.push(v),
                        SegOutcome::Overflow => return Ok(SegOutcome::Overflow),
                    }
                }
            }
            values = refined;
            let mut s = values[0] + values[panels];
            for (k, &v) in values.iter().enumerate().take(panels).skip(1) {
                s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let new_estimate = s * h / 3.0;
            if !estimate.is_nan() {
                let tol = SIMPSON_REL_TOL * new_estimate.abs().max(1e-6);
                if (new_estimate - estimate).abs() <= tol {
                    return Ok(SegOutcome::Value(new_estimate));
                }
            }
            estimate = new_estimate;
        }
        Ok(SegOutcome::Value(estimate))
    }

    /// Joint sweep computing the score pairing `integral z dS` and the
    /// intrinsic variance `V` for one schedule. Returns
    /// `(pair_score, v_integral)`; `v = +inf` signals the overflow guard.
    pub fn martingale_stat(
        &self,
        schedule: &DirectionSchedule,
        alpha: &DVector<f64>,
    ) -> Result<(f64, f64), HawkesError> {
        let view = &self.view;
        let events = view.sequence().events();
        let t_total = view.horizon();
        let node = view.node();

        let mut pair_events = 0.0;
        let mut pair_integral = 0.0;
        let mut v_total = 0.0;
        let mut overflow = false;

        let mut seg_idx = 0usize; // current schedule segment
        let mut own_idx = 0usize; // index into the node's own events
        let mut cursor = 0.0;
        let exp_rates: Option<Vec<f64>> =
            view.kernels().iter().map(KernelSpec::exponential_rate).collect();
        let d = view.dim();
        // eta immediately after `cursor` (exponential fast path state).
        let mut eta_state = DVector::<f64>::zeros(d);

        for (e_idx, stop) in events
            .iter()
            .map(|e| e.time)
            .chain(std::iter::once(t_total))
            .enumerate()
        {
            let is_event = e_idx < events.len();
            let z = &schedule.segments[seg_idx].z;
            if stop > cursor {
                let nonzero_z = z.iter().any(|&v| v != 0.0);
                if nonzero_z {
                    // Exact eta integral over (cursor, stop].
                    if let Some(rates) = &exp_rates {
                        for j in 0..d {
                            if eta_state[j] != 0.0 && z[j] != 0.0 {
                                pair_integral += z[j] * eta_state[j]
                                    * (1.0 - (-rates[j] * (stop - cursor)).exp())
                                    / rates[j];
                            }
                        }
                    } else {
                        pair_integral += z.dot(&view.eta_integral(cursor, stop));
                    }
                    if !overflow {
                        let base = eta_state.clone();
                        let a = cursor;
                        let eta_of: Box<dyn Fn(f64) -> DVector<f64>> = match &exp_rates {
                            Some(rates) => {
                                let rates = rates.clone();
                                Box::new(move |t: f64| {
                                    DVector::from_fn(d, |j, _| {
                                        base[j] * (-rates[j] * (t - a)).exp()
                                    })
                                })
                            }
                            None => Box::new(|t: f64| view.eta_at(t)),
                        };
                        match self.v_segment(cursor, stop, z, alpha, eta_of.as_ref())? {
                            SegOutcome::Value(v) => v_total += v,
                            SegOutcome::Overflow => overflow = true,
                        }
                    }
                }
                // Advance the exponential state to `stop`.
                if let Some(rates) = &exp_rates {
                    let dt = stop - cursor;
                    for j in 0..d {
                        eta_state[j] *= (-rates[j] * dt).exp();
                    }
                }
                cursor = stop;
            }
            if is_event {
                let ev = events[e_idx];
                if ev.node == node {
                    // Score jump at an own event, using the left-limit z.
                    let eta = view.eta_at_own(own_idx);
                    let lambda = self.lambda_own(alpha, own_idx)?;
                    pair_events += z.dot(eta) / lambda;
                    own_idx += 1;
                    if seg_idx + 1 < schedule.segments.len()
                        && schedule.segments[seg_idx + 1].start <= ev.time
                    {
                        seg_idx += 1;
                    }
                }
                if exp_rates.is_some() {
                    eta_state[ev.node] += view.kernels()[ev.node].exponential_rate().unwrap();
                }
            }
        }

        let v = if overflow { f64::INFINITY } else { v_total };
        Ok((pair_events - pair_integral, v))
    }

    /// All `2D` direction statistics `g_k = pair_score_k - V_k` at one
    /// influence vector, rebuilding the adapted schedules for it.
    pub fn g_all(&self, alpha: &DVector<f64>) -> Result<Vec<f64>, HawkesError> {
        let schedules = self.build_schedules(alpha)?;
        schedules
            .iter()
            .map(|s| {
                let (pair, v) = self.martingale_stat(s, alpha)?;
                Ok(if v.is_infinite() { f64::NEG_INFINITY } else { pair - v })
            })
            .collect()
    }

    /// Exact confidence-set membership: every direction statistic at most
    /// `ln(2D/eps)`.
    pub fn exact_membership(&self, alpha: &DVector<f64>) -> Result<bool, HawkesError> {
        Ok(self.g_all(alpha)?.iter().all(|&g| g <= self.log_bound))
    }

    /// Linearize the direction statistics at `alpha_hat` by central finite
    /// differences and assemble the confidence polyhedron
    /// `g_k(ah) + (alpha - ah) . grad_k <= ln(2D/eps)`.
    pub fn polyhedral_set(&self, alpha_hat: &DVector<f64>) -> Result<Polyhedron, HawkesError> {
        let d = self.view.dim();
        let g0 = self.g_all(alpha_hat)?;
        let mut grads: Vec<DVector<f64>> = vec![DVector::zeros(d); 2 * d];
        for l in 0..d {
            let h = FD_STEP * (1.0 + alpha_hat[l]);
            let mut up = alpha_hat.clone();
            up[l] += h;
            let mut dn = alpha_hat.clone();
            dn[l] -= h;
            let gp = self.g_all(&up)?;
            let gm = self.g_all(&dn)?;
            for k in 0..2 * d {
                grads[k][l] = (gp[k] - gm[k]) / (2.0 * h);
            }
        }
        let mut rows = Vec::new();
        let mut bounds = Vec::new();
        let mut dropped = Vec::new();
        for k in 0..2 * d {
            let finite = g0[k].is_finite() && grads[k].iter().all(|v| v.is_finite());
            if !finite || grads[k].norm() < DEGENERATE_GRAD_TOL {
                dropped.push(k);
                continue;
            }
            rows.push(grads[k].iter().copied().collect());
            bounds.push(self.log_bound - g0[k] + grads[k].dot(alpha_hat));
        }
        Ok(Polyhedron { rows, bounds, dropped })
    }
}

/// Build the `2D` adapted direction schedules at `alpha`.
pub fn build_schedule(
    seq: &EventSequence,
    node: usize,
    alpha: &DVector<f64>,
    mu: f64,
    kernels: Vec<KernelSpec>,
    epsilon: f64,
) -> Result<Vec<DirectionSchedule>, HawkesError> {
    ConcentrationContext::new(seq, node, mu, kernels, epsilon)?.build_schedules(alpha)
}

/// `integral_0^T z(t) . dS_t(alpha)`: score jumps at the node's events minus
/// the exact `integral z . eta dt`.
pub fn pair_score(
    schedule: &DirectionSchedule,
    alpha: &DVector<f64>,
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
) -> Result<f64, HawkesError> {
    let ctx = ConcentrationContext::new(seq, node, mu, kernels, 0.5)?;
    Ok(ctx.martingale_stat(schedule, alpha)?.0)
}

/// Intrinsic variance `V`: the exponential-compensator integral making
/// `exp(pair_score - V)` mean-one. Nonnegative; `+inf` when the overflow
/// guard trips (the associated constraint is then trivially satisfied).
pub fn v_integral(
    schedule: &DirectionSchedule,
    alpha: &DVector<f64>,
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
) -> Result<f64, HawkesError> {
    let ctx = ConcentrationContext::new(seq, node, mu, kernels, 0.5)?;
    Ok(ctx.martingale_stat(schedule, alpha)?.1)
}

/// Direction statistic `g_k(alpha)` with the schedule rebuilt at `alpha`.
pub fn g(
    k: usize,
    alpha: &DVector<f64>,
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
    epsilon: f64,
) -> Result<f64, HawkesError> {
    let ctx = ConcentrationContext::new(seq, node, mu, kernels, epsilon)?;
    let gs = ctx.g_all(alpha)?;
    gs.get(k).copied().ok_or_else(|| {
        HawkesError::invalid("k", format!("direction {k} out of range for {} directions", gs.len()))
    })
}

/// Exact confidence-set membership of `alpha` at level `1 - epsilon`.
pub fn exact_membership(
    alpha: &DVector<f64>,
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
    epsilon: f64,
) -> Result<bool, HawkesError> {
    ConcentrationContext::new(seq, node, mu, kernels, epsilon)?.exact_membership(alpha)
}

/// Linearized confidence polyhedron at the MLE.
pub fn polyhedral_set(
    alpha_hat: &DVector<f64>,
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
    epsilon: f64,
) -> Result<Polyhedron, HawkesError> {
    ConcentrationContext::new(seq, node, mu, kernels, epsilon)?.polyhedral_set(alpha_hat)
}

/// Per-axis extremes of the polyhedron (intersected with `alpha >= 0`) by
/// linear programming. The lower problem is always bounded; an unbounded
/// upper problem is flagged, an empty polyhedron is an error.
pub fn entry_ci(poly: &Polyhedron, axis: usize) -> Result<EntryInterval, HawkesError> {
    let g = poly.g_matrix();
    let h = poly.h_vector();
    let n = g.ncols();
    if axis >= n {
        return Err(HawkesError::invalid("axis", format!("{axis} out of range for {n} axes")));
    }
    let c = DVector::from_fn(n, |k, _| if k == axis { 1.0 } else { 0.0 });
    let (lo, lo_point) = match minimize(&c, &g, &h)? {
        LpOutcome::Optimal { value, point } => (value, point),
        LpOutcome::Infeasible => return Err(HawkesError::Infeasible),
        LpOutcome::Unbounded => {
            return Err(HawkesError::NonFinite { context: "lower entry bound unbounded".into() })
        }
    };
    match maximize(&c, &g, &h)? {
        LpOutcome::Optimal { value, point } => Ok(EntryInterval {
            lo,
            hi: value,
            unbounded: false,
            lo_point,
            hi_point: Some(point),
        }),
        LpOutcome::Unbounded => Ok(EntryInterval {
            lo,
            hi: f64::INFINITY,
            unbounded: true,
            lo_point,
            hi_point: None,
        }),
        LpOutcome::Infeasible => Err(HawkesError::Infeasible),
    }
}

/// Full single-node pipeline: fit the MLE, linearize, extract intervals.
/// With `check_endpoints`, each finite interval endpoint's LP vertex is run
/// through the exact membership test and failures are recorded as flags.
pub fn concentration_ci(
    seq: &EventSequence,
    node: usize,
    mu: f64,
    kernels: Vec<KernelSpec>,
    epsilon: f64,
    opts: &SolverOptions,
    check_endpoints: bool,
) -> Result<(ConfidenceReport, DVector<f64>, FitDiagnostics), HawkesError> {
    let ctx = ConcentrationContext::new(seq, node, mu, kernels, epsilon)?;
    let d = ctx.view.dim();
    let (alpha_hat, diag) = fit_view(&ctx.view, mu, opts)?;
    let mut report = ConfidenceReport::new(Method::Concentration, epsilon, d);
    if !diag.converged {
        report.flags.not_converged.push(node);
    }
    let poly = ctx.polyhedral_set(&alpha_hat)?;
    for &k in &poly.dropped {
        report.flags.dropped_rows.push((node, k));
    }
    for j in 0..d {
        match entry_ci(&poly, j) {
            Ok(interval) => {
                if interval.unbounded {
                    report.flags.unbounded.push((node, j));
                }
                report.entries.push(CiEntry::new(
                    node,
                    j,
                    interval.lo,
                    interval.hi,
                    alpha_hat[j],
                ));
                if check_endpoints {
                    if !ctx.exact_membership(&interval.lo_point)? {
                        report
                            .flags
                            .endpoint_membership_failures
                            .push((node, j, "lo".into()));
                    }
                    if let Some(hi_point) = &interval.hi_point {
                        if !ctx.exact_membership(hi_point)? {
                            report
                                .flags
                                .endpoint_membership_failures
                                .push((node, j, "hi".into()));
                        }
                    }
                }
            }
            Err(HawkesError::Infeasible) => {
                report.flags.infeasible.push(node);
                report.entries.push(CiEntry::new(node, j, f64::NAN, f64::NAN, alpha_hat[j]));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((report, alpha_hat, diag))
}

/// All-node concentration report (the counterpart of
/// [`crate::ci_asymptotic::asymptotic_report`]).
pub fn concentration_report(
    seq: &EventSequence,
    mu: &DVector<f64>,
    kernels: &KernelGrid,
    epsilon: f64,
    opts: &SolverOptions,
    check_endpoints: bool,
) -> Result<(ConfidenceReport, DMatrix<f64>, Vec<FitDiagnostics>), HawkesError> {
    let d = seq.node_count();
    if mu.len() != d {
        return Err(HawkesError::invalid("mu", format!("length {} != {d}", mu.len())));
    }
    let mut report = ConfidenceReport::new(Method::Concentration, epsilon, d);
    let mut a_hat = DMatrix::<f64>::zeros(d, d);
    let mut diags = Vec::with_capacity(d);
    for i in 0..d {
        let (node_report, alpha, diag) = concentration_ci(
            seq,
            i,
            mu[i],
            kernels.row(i, d),
            epsilon,
            opts,
            check_endpoints,
        )
        .map_err(|e| HawkesError::at_node(i, e))?;
        report.merge(node_report);
        a_hat.row_mut(i).copy_from(&alpha.transpose());
        diags.push(diag);
    }
    Ok((report, a_hat, diags))
}
