//! Synthetic sequence generation by Ogata-style thinning.
//!
//! Between accepted events the history is frozen, so a dominating rate built
//! from per-event suprema of the kernels over all future elapsed times stays
//! valid until the next acceptance; it is recomputed after every proposal
//! (accepted or rejected), which only tightens it. For monotone kernels the
//! supremum is the current kernel value, so the bound is the running total
//! intensity; delayed-peak kernels (gamma shape > 1, gaussian) contribute
//! their peak value until the peak has passed.
//!
//! All-exponential kernel grids take an O(D^2)-per-proposal fast path that
//! maintains the per-pair excitation state recursively. Draws come from a
//! ChaCha8 stream seeded with `seed_from_u64`; waiting times are inverse-CDF
//! exponentials, so a build's streams are fully reproducible.

use crate::error::HawkesError;
use crate::process::{EventSequence, ModelParams};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Dominating-rate slack: the recomputed bound must cover the true total
/// intensity up to this relative tolerance (floating error only).
const RATE_TOL: f64 = 1e-9;

/// Deterministic child seed for replication `rep` of a master seed
/// (splitmix64 finalizer). Order-independent, so replications can fan out.
pub fn child_seed(seed: u64, rep: u64) -> u64 {
    let mut z = seed ^ rep.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x243F_6A88_85A3_08D3);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one realization on `[0, horizon]`; deterministic given `seed`.
pub fn simulate(params: &ModelParams, horizon: f64, seed: u64) -> Result<EventSequence, HawkesError> {
    if params.is_explosive() {
        return Err(HawkesError::ExplosiveProcess { rho: params.branching_spectral_radius() });
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(HawkesError::invalid("horizon", format!("must be positive and finite, got {horizon}")));
    }
    let d = params.node_count();
    for i in 0..d {
        for j in 0..d {
            if !params.kernel(i, j).is_bounded() {
                return Err(HawkesError::invalid(
                    format!("kernels[{i}][{j}]"),
                    "thinning needs a bounded kernel (gamma shape >= 1)",
                ));
            }
        }
    }

    let all_exponential = (0..d).all(|i| (0..d).all(|j| params.kernel(i, j).exponential_rate().is_some()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = if all_exponential {
        simulate_exponential(params, horizon, &mut rng)?
    } else {
        simulate_generic(params, horizon, &mut rng)?
    };
    EventSequence::new(raw, horizon, d)
}

/// Independent realizations with deterministic per-replication child seeds;
/// replications fan out across worker threads and are gathered in order.
pub fn simulate_many(
    params: &ModelParams,
    horizon: f64,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<EventSequence>, HawkesError> {
    if n_reps == 0 {
        return Err(HawkesError::invalid("n_reps", "must be >= 1"));
    }
    (0..n_reps)
        .into_par_iter()
        .map(|rep| simulate(params, horizon, child_seed(seed, rep as u64)))
        .collect()
}

fn exp_waiting_time(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn simulate_exponential(
    params: &ModelParams,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, usize)>, HawkesError> {
    let d = params.node_count();
    let rates = DMatrix::from_fn(d, d, |i, j| params.kernel(i, j).exponential_rate().unwrap());
    // state[(i, j)] = sum over node-j events of beta_ij exp(-beta_ij (s - t_e))
    let mut state = DMatrix::<f64>::zeros(d, d);
    let mut events: Vec<(f64, usize)> = Vec::new();
    let mut s = 0.0;
    let mut lambdas = vec![0.0; d];

    loop {
        // Each lambda_i is nonincreasing until the next accepted event, so
        // the current total dominates.
        let mut bound = 0.0;
        for i in 0..d {
            let mut lam = params.mu()[i];
            for j in 0..d {
                lam += params.a()[(i, j)] * state[(i, j)];
            }
            bound += lam;
        }
        let dt = exp_waiting_time(rng, bound);
        let t_prop = s + dt;
        if t_prop > horizon {
            break;
        }
        for i in 0..d {
            for j in 0..d {
                state[(i, j)] *= (-rates[(i, j)] * dt).exp();
            }
        }
        let mut total = 0.0;
        for i in 0..d {
            let mut lam = params.mu()[i];
            for j in 0..d {
                lam += params.a()[(i, j)] * state[(i, j)];
            }
            lambdas[i] = lam;
            total += lam;
        }
        if total > bound * (1.0 + RATE_TOL) {
            return Err(HawkesError::RateBoundViolation { t: t_prop, bound, actual: total });
        }
        let u: f64 = rng.gen();
        if u * bound <= total {
            // Accept; pick the node proportionally to its intensity.
            let v: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut node = d - 1;
            for (i, &lam) in lambdas.iter().enumerate() {
                acc += lam;
                if v < acc {
                    node = i;
                    break;
                }
            }
            events.push((t_prop, node));
            for i in 0..d {
                state[(i, node)] += rates[(i, node)];
            }
        }
        s = t_prop;
    }
    Ok(events)
}

fn simulate_generic(
    params: &ModelParams,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, usize)>, HawkesError> {
    let d = params.node_count();
    let mut events: Vec<(f64, usize)> = Vec::new();
    let mut s = 0.0;
    let mut lambdas = vec![0.0; d];

    loop {
        let mut bound: f64 = params.mu().iter().sum();
        for &(te, u) in &events {
            let elapsed = s - te;
            for i in 0..d {
                let a = params.a()[(i, u)];
                if a > 0.0 {
                    bound += a * params.kernel(i, u).sup_after(elapsed);
                }
            }
        }
        let dt = exp_waiting_time(rng, bound);
        let t_prop = s + dt;
        if t_prop > horizon {
            break;
        }
        let mut total = 0.0;
        for i in 0..d {
            let mut lam = params.mu()[i];
            for &(te, u) in &events {
                let a = params.a()[(i, u)];
                if a > 0.0 {
                    lam += a * params.kernel(i, u).evaluate(t_prop - te);
                }
            }
            lambdas[i] = lam;
            total += lam;
        }
        if total > bound * (1.0 + RATE_TOL) {
            return Err(HawkesError::RateBoundViolation { t: t_prop, bound, actual: total });
        }
        let u: f64 = rng.gen();
        if u * bound <= total {
            let v: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut node = d - 1;
            for (i, &lam) in lambdas.iter().enumerate() {
                acc += lam;
                if v < acc {
                    node = i;
                    break;
                }
            }
            events.push((t_prop, node));
        }
        s = t_prop;
    }
    Ok(events)
}
