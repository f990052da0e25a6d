//! Event-sequence data model and the point-process primitives built on it:
//! intensity, the alpha-gradient vector eta, and compensator integrals.
//!
//! History is strict-past everywhere: an event at exactly time `t` does not
//! contribute to the intensity or to eta at `t`. This keeps the
//! log-likelihood well defined at event times.

use crate::error::HawkesError;
use crate::kernels::KernelSpec;
use crate::linalg::spectral_radius;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// One marked event: a time in `[0, T]` and the node it occurred on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub node: usize,
}

/// Time-ordered marked events on a horizon `[0, T]` over `D` nodes.
///
/// Events are kept sorted by time with a stable sort; exact ties are allowed
/// but flagged (`had_ties`), standing in for the infinitesimal perturbation
/// that would break them. Queries use binary search over the global order
/// plus per-node sublists.
#[derive(Debug, Clone)]
pub struct EventSequence {
    events: Vec<Event>,
    /// Indices into `events`, one sorted list per node.
    per_node: Vec<Vec<usize>>,
    horizon: f64,
    node_count: usize,
    had_ties: bool,
}

impl EventSequence {
    pub fn new(
        mut raw: Vec<(f64, usize)>,
        horizon: f64,
        node_count: usize,
    ) -> Result<Self, HawkesError> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(HawkesError::invalid("horizon", format!("must be positive and finite, got {horizon}")));
        }
        if node_count == 0 {
            return Err(HawkesError::invalid("node_count", "must be positive"));
        }
        for &(t, u) in &raw {
            if !t.is_finite() || t < 0.0 || t > horizon {
                return Err(HawkesError::invalid(
                    "event.time",
                    format!("time {t} outside [0, {horizon}]"),
                ));
            }
            if u >= node_count {
                return Err(HawkesError::NodeOutOfRange { index: u, count: node_count });
            }
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let had_ties = raw.windows(2).any(|w| w[0].0 == w[1].0);
        let events: Vec<Event> = raw.into_iter().map(|(time, node)| Event { time, node }).collect();
        let mut per_node = vec![Vec::new(); node_count];
        for (idx, ev) in events.iter().enumerate() {
            per_node[ev.node].push(idx);
        }
        Ok(EventSequence { events, per_node, horizon, node_count, had_ties })
    }

    pub fn empty(horizon: f64, node_count: usize) -> Result<Self, HawkesError> {
        Self::new(Vec::new(), horizon, node_count)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn had_ties(&self) -> bool {
        self.had_ties
    }

    /// Indices (into `events`) of the events on one node, in time order.
    pub fn node_events(&self, node: usize) -> &[usize] {
        &self.per_node[node]
    }

    /// Number of events strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.events.partition_point(|ev| ev.time < t)
    }

    /// Per-node event counts.
    pub fn counts(&self) -> Vec<usize> {
        self.per_node.iter().map(Vec::len).collect()
    }

    fn check_node(&self, i: usize) -> Result<(), HawkesError> {
        if i >= self.node_count {
            return Err(HawkesError::NodeOutOfRange { index: i, count: self.node_count });
        }
        Ok(())
    }
}

/// Kernel assignment for every directed pair: one shared spec or a full
/// `D x D` grid (`grid[i][j]` shapes the influence of node `j` on node `i`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelGrid {
    Shared(KernelSpec),
    PerPair(Vec<Vec<KernelSpec>>),
}

impl KernelGrid {
    pub fn get(&self, i: usize, j: usize) -> KernelSpec {
        match self {
            KernelGrid::Shared(k) => *k,
            KernelGrid::PerPair(g) => g[i][j],
        }
    }

    /// Materialize row `i` (kernels from every source node into node `i`).
    pub fn row(&self, i: usize, d: usize) -> Vec<KernelSpec> {
        (0..d).map(|j| self.get(i, j)).collect()
    }

    pub fn validate(&self, d: usize) -> Result<(), HawkesError> {
        match self {
            KernelGrid::Shared(k) => k.validate(),
            KernelGrid::PerPair(g) => {
                if g.len() != d || g.iter().any(|row| row.len() != d) {
                    return Err(HawkesError::invalid(
                        "kernels",
                        format!("grid must be {d}x{d}"),
                    ));
                }
                g.iter().flatten().try_for_each(KernelSpec::validate)
            }
        }
    }
}

/// Background rates, influence matrix, and kernel grid for one model.
///
/// `a[(i, j)]` is the influence of node `j` on node `i`. Construction
/// validates positivity and records the branching spectral radius
/// (`alpha_ij * total_mass(phi_ij)`); a radius at or above one sets
/// `explosive` but is not an error here — simulation refuses it.
#[derive(Debug, Clone)]
pub struct ModelParams {
    mu: DVector<f64>,
    a: DMatrix<f64>,
    kernels: KernelGrid,
    branching_rho: f64,
    explosive: bool,
}

impl ModelParams {
    pub fn new(mu: DVector<f64>, a: DMatrix<f64>, kernels: KernelGrid) -> Result<Self, HawkesError> {
        let d = mu.len();
        if d == 0 {
            return Err(HawkesError::invalid("mu", "must be non-empty"));
        }
        if a.nrows() != d || a.ncols() != d {
            return Err(HawkesError::invalid(
                "A",
                format!("must be {d}x{d}, got {}x{}", a.nrows(), a.ncols()),
            ));
        }
        for (idx, &m) in mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(HawkesError::invalid(format!("mu[{idx}]"), format!("must be > 0, got {m}")));
            }
        }
        for i in 0..d {
            for j in 0..d {
                let v = a[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(HawkesError::invalid(
                        format!("A[{i}][{j}]"),
                        format!("must be >= 0 and finite, got {v}"),
                    ));
                }
            }
        }
        kernels.validate(d)?;
        let branching = branching_matrix(&a, &kernels);
        let branching_rho = spectral_radius(&branching);
        let explosive = branching_rho >= 1.0;
        Ok(ModelParams { mu, a, kernels, branching_rho, explosive })
    }

    pub fn node_count(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn kernels(&self) -> &KernelGrid {
        &self.kernels
    }

    pub fn kernel(&self, i: usize, j: usize) -> KernelSpec {
        self.kernels.get(i, j)
    }

    pub fn kernel_row(&self, i: usize) -> Vec<KernelSpec> {
        self.kernels.row(i, self.node_count())
    }

    /// Spectral radius of the branching matrix.
    pub fn branching_spectral_radius(&self) -> f64 {
        self.branching_rho
    }

    /// Set when the branching spectral radius is >= 1.
    pub fn is_explosive(&self) -> bool {
        self.explosive
    }
}

/// Branching matrix `B_ij = alpha_ij * total_mass(phi_ij)`.
pub fn branching_matrix(a: &DMatrix<f64>, kernels: &KernelGrid) -> DMatrix<f64> {
    let d = a.nrows();
    DMatrix::from_fn(d, d, |i, j| a[(i, j)] * kernels.get(i, j).total_mass())
}

/// Conditional intensity of node `i` at time `t` given the strict past.
pub fn intensity(
    params: &ModelParams,
    seq: &EventSequence,
    i: usize,
    t: f64,
) -> Result<f64, HawkesError> {
    seq.check_node(i)?;
    let mut lambda = params.mu()[i];
    for j in 0..seq.node_count() {
        let alpha = params.a()[(i, j)];
        if alpha == 0.0 {
            continue;
        }
        let phi = params.kernel(i, j);
        for &idx in seq.node_events(j) {
            let te = seq.events()[idx].time;
            if te >= t {
                break;
            }
            lambda += alpha * phi.evaluate(t - te);
        }
    }
    Ok(lambda)
}

/// Gradient of the intensity in the influence vector: entry `j` sums
/// `phi_ij(t - t_e)` over node-`j` events strictly before `t`. Independent
/// of the influence values themselves.
pub fn eta(
    params: &ModelParams,
    seq: &EventSequence,
    i: usize,
    t: f64,
) -> Result<DVector<f64>, HawkesError> {
    seq.check_node(i)?;
    let d = seq.node_count();
    let mut out = DVector::zeros(d);
    for j in 0..d {
        let phi = params.kernel(i, j);
        let mut acc = 0.0;
        for &idx in seq.node_events(j) {
            let te = seq.events()[idx].time;
            if te >= t {
                break;
            }
            acc += phi.evaluate(t - te);
        }
        out[j] = acc;
    }
    Ok(out)
}

/// Expected event count on node `i` over `[0, t_end]`: the integral of the
/// intensity, exact via kernel cumulatives.
pub fn compensator(
    params: &ModelParams,
    seq: &EventSequence,
    i: usize,
    t_end: f64,
) -> Result<f64, HawkesError> {
    seq.check_node(i)?;
    let mut total = params.mu()[i] * t_end;
    for j in 0..seq.node_count() {
        let alpha = params.a()[(i, j)];
        if alpha == 0.0 {
            continue;
        }
        let phi = params.kernel(i, j);
        let mut mass = 0.0;
        for &idx in seq.node_events(j) {
            let te = seq.events()[idx].time;
            if te >= t_end {
                break;
            }
            mass += phi.cumulative(t_end - te);
        }
        total += alpha * mass;
    }
    Ok(total)
}

/// Precomputed per-node evaluation engine.
///
/// For a fixed target node `i` and kernel row, caches everything that does
/// not depend on the influence vector: eta at each of node `i`'s own event
/// times, the exact integral of eta to the horizon, and (for all-exponential
/// rows) the eta state after every event, which makes point queries and
/// segment integrals O(D) instead of O(events).
pub struct NodeView<'a> {
    seq: &'a EventSequence,
    node: usize,
    kernels: Vec<KernelSpec>,
    /// Per-source decay rates when the whole row is exponential.
    exp_rates: Option<Vec<f64>>,
    /// Exponential path: eta immediately after event `e` (including it).
    eta_after: Vec<DVector<f64>>,
    /// Indices into `seq.events()` of node-`i` events.
    own: Vec<usize>,
    /// eta at each own event time (strict past).
    etas_own: Vec<DVector<f64>>,
    /// Exact `integral_0^T eta(t) dt`, entry j via kernel cumulatives.
    integral_horizon: DVector<f64>,
}

impl<'a> NodeView<'a> {
    pub fn new(seq: &'a EventSequence, node: usize, kernels: Vec<KernelSpec>) -> Result<Self, HawkesError> {
        seq.check_node(node)?;
        let d = seq.node_count();
        if kernels.len() != d {
            return Err(HawkesError::invalid(
                "kernels",
                format!("row must have {d} entries, got {}", kernels.len()),
            ));
        }
        for k in &kernels {
            k.validate()?;
        }
        let exp_rates: Option<Vec<f64>> = kernels.iter().map(KernelSpec::exponential_rate).collect();

        let events = seq.events();
        let mut eta_after = Vec::new();
        if let Some(rates) = &exp_rates {
            eta_after.reserve(events.len());
            let mut state = DVector::<f64>::zeros(d);
            let mut prev_t = 0.0;
            for ev in events {
                let dt = ev.time - prev_t;
                for j in 0..d {
                    state[j] *= (-rates[j] * dt).exp();
                }
                state[ev.node] += rates[ev.node];
                eta_after.push(state.clone());
                prev_t = ev.time;
            }
        }

        let own: Vec<usize> = seq.node_events(node).to_vec();
        let mut view = NodeView {
            seq,
            node,
            kernels,
            exp_rates,
            eta_after,
            own,
            etas_own: Vec::new(),
            integral_horizon: DVector::zeros(d),
        };
        view.etas_own = view.own.iter().map(|&idx| view.eta_raw(events[idx].time)).collect();
        let t_end = seq.horizon();
        let mut c = DVector::zeros(d);
        for ev in events {
            c[ev.node] += view.kernels[ev.node].cumulative(t_end - ev.time);
        }
        view.integral_horizon = c;
        Ok(view)
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn dim(&self) -> usize {
        self.kernels.len()
    }

    pub fn horizon(&self) -> f64 {
        self.seq.horizon()
    }

    pub fn sequence(&self) -> &EventSequence {
        self.seq
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    /// Number of events on the target node.
    pub fn own_count(&self) -> usize {
        self.own.len()
    }

    /// Times of the target node's events, ascending.
    pub fn own_times(&self) -> Vec<f64> {
        self.own.iter().map(|&idx| self.seq.events()[idx].time).collect()
    }

    /// eta at the `m`-th own event (strict past).
    pub fn eta_at_own(&self, m: usize) -> &DVector<f64> {
        &self.etas_own[m]
    }

    /// Exact `integral_0^T eta(t) dt`.
    pub fn integral_to_horizon(&self) -> &DVector<f64> {
        &self.integral_horizon
    }

    /// eta at an arbitrary time (strict past).
    pub fn eta_at(&self, t: f64) -> DVector<f64> {
        self.eta_raw(t)
    }

    /// Intensity `mu + alpha . eta(t)` for a supplied influence vector.
    pub fn lambda_at(&self, mu: f64, alpha: &DVector<f64>, t: f64) -> f64 {
        mu + alpha.dot(&self.eta_at(t))
    }

    fn eta_raw(&self, t: f64) -> DVector<f64> {
        let d = self.dim();
        let events = self.seq.events();
        if let Some(rates) = &self.exp_rates {
            let cut = events.partition_point(|ev| ev.time < t);
            if cut == 0 {
                return DVector::zeros(d);
            }
            let base = &self.eta_after[cut - 1];
            let dt = t - events[cut - 1].time;
            DVector::from_fn(d, |j, _| base[j] * (-rates[j] * dt).exp())
        } else {
            let mut out = DVector::zeros(d);
            for ev in events {
                if ev.time >= t {
                    break;
                }
                out[ev.node] += self.kernels[ev.node].evaluate(t - ev.time);
            }
            out
        }
    }

    /// Exact `integral_a^b eta(t) dt` for `0 <= a <= b <= T`, entry by entry.
    pub fn eta_integral(&self, a: f64, b: f64) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        if b <= a {
            return out;
        }
        let events = self.seq.events();
        if let Some(rates) = &self.exp_rates {
            // Piecewise closed form: decay from the state after the last
            // event at or before the segment start, restart at each event
            // inside the segment.
            let mut start = a;
            let mut idx = events.partition_point(|ev| ev.time <= a);
            let mut state: DVector<f64> = if idx == 0 {
                DVector::zeros(d)
            } else {
                let base = &self.eta_after[idx - 1];
                let dt = a - events[idx - 1].time;
                DVector::from_fn(d, |j, _| base[j] * (-rates[j] * dt).exp())
            };
            loop {
                let seg_end = if idx < events.len() && events[idx].time < b {
                    events[idx].time
                } else {
                    b
                };
                let len = seg_end - start;
                if len > 0.0 {
                    for j in 0..d {
                        if state[j] != 0.0 {
                            out[j] += state[j] * (1.0 - (-rates[j] * len).exp()) / rates[j];
                        }
                    }
                    for j in 0..d {
                        state[j] *= (-rates[j] * len).exp();
                    }
                }
                if seg_end >= b {
                    break;
                }
                state[events[idx].node] += rates[events[idx].node];
                idx += 1;
                start = seg_end;
            }
        } else {
            // Cumulative differences are exact for any kernel family.
            for ev in events {
                if ev.time >= b {
                    break;
                }
                let phi = self.kernels[ev.node];
                let upper = phi.cumulative(b - ev.time);
                let lower = phi.cumulative((a - ev.time).max(0.0));
                out[ev.node] += upper - lower;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::piecewise_simpson;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shared(spec: KernelSpec) -> KernelGrid {
        KernelGrid::Shared(spec)
    }

    fn two_node_params(alpha: f64, spec: KernelSpec) -> ModelParams {
        ModelParams::new(
            DVector::from_vec(vec![0.5, 0.5]),
            DMatrix::from_element(2, 2, alpha),
            shared(spec),
        )
        .unwrap()
    }

    fn random_sequence(rng: &mut ChaCha8Rng, n: usize, horizon: f64, d: usize) -> EventSequence {
        let raw: Vec<(f64, usize)> = (0..n)
            .map(|_| (rng.gen_range(0.0..horizon), rng.gen_range(0..d)))
            .collect();
        EventSequence::new(raw, horizon, d).unwrap()
    }

    #[test]
    fn intensity_background_only() {
        let params = two_node_params(0.0, KernelSpec::exponential(1.0).unwrap());
        let seq = EventSequence::empty(10.0, 2).unwrap();
        assert_abs_diff_eq!(intensity(&params, &seq, 0, 3.0).unwrap(), 0.5);
    }

    #[test]
    fn intensity_single_event_closed_form() {
        let params = two_node_params(0.5, KernelSpec::exponential(1.0).unwrap());
        let seq = EventSequence::new(vec![(0.0, 1)], 10.0, 2).unwrap();
        let lam = intensity(&params, &seq, 0, 1.0).unwrap();
        assert_abs_diff_eq!(lam, 0.5 + 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn strict_past_excludes_event_at_t() {
        let params = two_node_params(0.5, KernelSpec::exponential(1.0).unwrap());
        let seq = EventSequence::new(vec![(1.0, 1)], 10.0, 2).unwrap();
        assert_abs_diff_eq!(intensity(&params, &seq, 0, 1.0).unwrap(), 0.5);
        assert!(intensity(&params, &seq, 0, 1.0 + 1e-9).unwrap() > 0.5);
    }

    #[test]
    fn intensity_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 3;
        let params = ModelParams::new(
            DVector::from_vec(vec![0.4, 0.6, 0.2]),
            DMatrix::from_fn(3, 3, |_, _| rng.gen_range(0.0..0.3)),
            shared(KernelSpec::gamma(2.0, 1.5).unwrap()),
        )
        .unwrap();
        let seq = random_sequence(&mut rng, 100, 50.0, d);
        for _ in 0..20 {
            let i = rng.gen_range(0..d);
            let t = rng.gen_range(0.0..50.0);
            // Brute force over the flat event list, no per-node sublists.
            let mut expect = params.mu()[i];
            for ev in seq.events() {
                if ev.time < t {
                    expect += params.a()[(i, ev.node)] * params.kernel(i, ev.node).evaluate(t - ev.time);
                }
            }
            assert_relative_eq!(intensity(&params, &seq, i, t).unwrap(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn eta_trivial_cases() {
        let params = two_node_params(0.7, KernelSpec::exponential(2.0).unwrap());
        let empty = EventSequence::empty(10.0, 2).unwrap();
        assert_eq!(eta(&params, &empty, 0, 5.0).unwrap(), DVector::zeros(2));

        let seq = EventSequence::new(vec![(0.0, 1)], 10.0, 2).unwrap();
        let e = eta(&params, &seq, 0, 1.0).unwrap();
        assert_abs_diff_eq!(e[1], 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(e[0], 0.0);
    }

    #[test]
    fn intensity_equals_mu_plus_alpha_dot_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = ModelParams::new(
            DVector::from_vec(vec![0.4, 0.9]),
            DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.0..0.4)),
            shared(KernelSpec::gaussian(0.5, 1.0, 1.0).unwrap()),
        )
        .unwrap();
        let seq = random_sequence(&mut rng, 60, 30.0, 2);
        for _ in 0..20 {
            let i = rng.gen_range(0..2);
            let t = rng.gen_range(0.0..30.0);
            let lam = intensity(&params, &seq, i, t).unwrap();
            let e = eta(&params, &seq, i, t).unwrap();
            let expect = params.mu()[i] + params.a().row(i).transpose().dot(&e);
            assert_relative_eq!(lam, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn compensator_trivial_and_closed_form() {
        let params = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_element(2, 2, 0.0),
            shared(KernelSpec::exponential(1.0).unwrap()),
        )
        .unwrap();
        let empty = EventSequence::empty(10.0, 2).unwrap();
        assert_abs_diff_eq!(compensator(&params, &empty, 0, 10.0).unwrap(), 10.0);

        let params = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_element(2, 2, 0.5),
            shared(KernelSpec::exponential(1.0).unwrap()),
        )
        .unwrap();
        let seq = EventSequence::new(vec![(0.0, 1)], 10.0, 2).unwrap();
        let got = compensator(&params, &seq, 0, 10.0).unwrap();
        assert_abs_diff_eq!(got, 10.0 + 0.5 * (1.0 - (-10.0f64).exp()), epsilon = 1e-12);
    }

    #[test]
    fn compensator_matches_intensity_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let params = ModelParams::new(
            DVector::from_vec(vec![0.5, 0.8]),
            DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.05..0.35)),
            shared(KernelSpec::gamma(2.2, 1.3).unwrap()),
        )
        .unwrap();
        let seq = random_sequence(&mut rng, 40, 20.0, 2);
        let times: Vec<f64> = seq.events().iter().map(|e| e.time).collect();
        for i in 0..2 {
            let direct = compensator(&params, &seq, i, 20.0).unwrap();
            let quad = piecewise_simpson(
                &|t| intensity(&params, &seq, i, t).unwrap(),
                0.0,
                20.0,
                &times,
                1e-10,
            );
            assert_relative_eq!(direct, quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn compensator_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = two_node_params(0.3, KernelSpec::exponential(2.0).unwrap());
        let seq = random_sequence(&mut rng, 50, 25.0, 2);
        let mut prev = 0.0;
        for step in 0..=50 {
            let t = step as f64 * 0.5;
            let v = compensator(&params, &seq, 0, t).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn sequence_validation() {
        assert!(EventSequence::new(vec![(0.0, 0)], 0.0, 1).is_err());
        assert!(EventSequence::new(vec![(2.0, 0)], 1.0, 1).is_err());
        assert!(EventSequence::new(vec![(-0.5, 0)], 1.0, 1).is_err());
        assert!(EventSequence::new(vec![(0.5, 3)], 1.0, 2).is_err());
        let tied = EventSequence::new(vec![(0.5, 0), (0.5, 1)], 1.0, 2).unwrap();
        assert!(tied.had_ties());
        let ok = EventSequence::new(vec![(0.7, 0), (0.5, 1)], 1.0, 2).unwrap();
        assert!(!ok.had_ties());
        assert_eq!(ok.events()[0].time, 0.5);
    }

    #[test]
    fn params_validation_and_branching() {
        let bad_mu = ModelParams::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_element(1, 1, 0.1),
            shared(KernelSpec::exponential(1.0).unwrap()),
        );
        assert!(bad_mu.is_err());
        let bad_a = ModelParams::new(
            DVector::from_vec(vec![1.0]),
            DMatrix::from_element(1, 1, -0.1),
            shared(KernelSpec::exponential(1.0).unwrap()),
        );
        assert!(bad_a.is_err());

        let p = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.2, 0.1, 0.4]),
            shared(KernelSpec::exponential(1.0).unwrap()),
        )
        .unwrap();
        assert!(p.branching_spectral_radius() < 1.0);
        assert!(!p.is_explosive());

        let hot = ModelParams::new(
            DVector::from_vec(vec![1.0]),
            DMatrix::from_element(1, 1, 1.2),
            shared(KernelSpec::exponential(1.0).unwrap()),
        )
        .unwrap();
        assert!(hot.is_explosive());
        assert_abs_diff_eq!(hot.branching_spectral_radius(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn node_view_matches_public_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for spec in [
            KernelSpec::exponential(1.7).unwrap(),
            KernelSpec::gamma(2.5, 1.1).unwrap(),
        ] {
            let params = ModelParams::new(
                DVector::from_vec(vec![0.5, 0.7]),
                DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.05..0.4)),
                shared(spec),
            )
            .unwrap();
            let seq = random_sequence(&mut rng, 80, 40.0, 2);
            let view = NodeView::new(&seq, 0, params.kernel_row(0)).unwrap();
            for _ in 0..25 {
                let t = rng.gen_range(0.0..40.0);
                let fast = view.eta_at(t);
                let slow = eta(&params, &seq, 0, t).unwrap();
                for j in 0..2 {
                    assert_abs_diff_eq!(fast[j], slow[j], epsilon = 1e-10);
                }
            }
            // Own-event etas agree with pointwise queries at event times.
            for (m, &idx) in seq.node_events(0).iter().enumerate() {
                let te = seq.events()[idx].time;
                let slow = eta(&params, &seq, 0, te).unwrap();
                for j in 0..2 {
                    assert_abs_diff_eq!(view.eta_at_own(m)[j], slow[j], epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn node_view_eta_integral_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for spec in [
            KernelSpec::exponential(2.0).unwrap(),
            KernelSpec::gaussian(0.4, 0.8, 1.2).unwrap(),
        ] {
            let seq = random_sequence(&mut rng, 50, 20.0, 2);
            let view = NodeView::new(&seq, 1, vec![spec, spec]).unwrap();
            let times: Vec<f64> = seq.events().iter().map(|e| e.time).collect();
            for _ in 0..10 {
                let a = rng.gen_range(0.0..18.0);
                let b = a + rng.gen_range(0.0..2.0);
                let got = view.eta_integral(a, b.min(20.0));
                for j in 0..2 {
                    let quad = piecewise_simpson(&|t| view.eta_at(t)[j], a, b.min(20.0), &times, 1e-11);
                    assert_abs_diff_eq!(got[j], quad, epsilon = 1e-7);
                }
            }
            // Whole-horizon integral equals the cached cumulative sum.
            let whole = view.eta_integral(0.0, 20.0);
            for j in 0..2 {
                assert_relative_eq!(whole[j], view.integral_to_horizon()[j], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn node_out_of_range_errors() {
        let params = two_node_params(0.1, KernelSpec::exponential(1.0).unwrap());
        let seq = EventSequence::empty(5.0, 2).unwrap();
        assert!(matches!(
            intensity(&params, &seq, 2, 1.0),
            Err(HawkesError::NodeOutOfRange { .. })
        ));
        assert!(eta(&params, &seq, 9, 1.0).is_err());
    }
}
