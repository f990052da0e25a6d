//! Influence kernels: the time-decay functions shaping how an event on one
//! node excites the intensity of another, plus their cumulative integrals.
//!
//! Three families are supported:
//!
//! * `Exponential(beta)`: `phi(dt) = beta * exp(-beta dt)`, unit mass.
//! * `Gamma(k, beta)`: gamma density with shape `k` and rate `beta`,
//!   `phi(dt) = beta^k dt^(k-1) exp(-beta dt) / Gamma(k)`; `k = 1` reduces
//!   exactly to `Exponential(beta)`.
//! * `Gaussian(tau, sigma, beta)`: `phi(dt) = exp(-beta (dt-tau)^2 / sigma)
//!   / sqrt(2 pi sigma)` truncated to `dt >= 0`. The truncated curve does
//!   not integrate to one and both `beta` and `sigma` are carried verbatim;
//!   `total_mass` reports the actual mass instead of renormalizing.
//!
//! All kernels vanish for negative elapsed time.

use crate::error::HawkesError;
use crate::special::{erf, gamma_p, ln_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parametric influence function for one directed node pair.
///
/// Parameters are validated at construction (`validate`); evaluation assumes
/// a valid spec. Serializes as `{"type": "exponential"|"gamma"|"gaussian",
/// "beta": f, "k": f?, "tau": f?, "sigma": f?}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `beta exp(-beta dt)`: decay starts immediately after the event.
    Exponential { beta: f64 },
    /// Gamma density, shape `k`, rate `beta`. `k > 1` delays the peak to
    /// `(k-1)/beta`; `k < 1` diverges at zero elapsed time.
    Gamma { k: f64, beta: f64 },
    /// Bell curve peaking `tau` after the event with width `sigma` and
    /// sharpness `beta`.
    Gaussian { tau: f64, sigma: f64, beta: f64 },
}

impl KernelSpec {
    pub fn exponential(beta: f64) -> Result<Self, HawkesError> {
        let spec = KernelSpec::Exponential { beta };
        spec.validate().map(|_| spec)
    }

    pub fn gamma(k: f64, beta: f64) -> Result<Self, HawkesError> {
        let spec = KernelSpec::Gamma { k, beta };
        spec.validate().map(|_| spec)
    }

    pub fn gaussian(tau: f64, sigma: f64, beta: f64) -> Result<Self, HawkesError> {
        let spec = KernelSpec::Gaussian { tau, sigma, beta };
        spec.validate().map(|_| spec)
    }

    /// Check parameter positivity (delay `tau` may be zero).
    pub fn validate(&self) -> Result<(), HawkesError> {
        let check = |name: &str, v: f64, allow_zero: bool| {
            if !v.is_finite() || v < 0.0 || (v == 0.0 && !allow_zero) {
                Err(HawkesError::invalid(
                    format!("kernel.{name}"),
                    format!("must be {} and finite, got {v}", if allow_zero { ">= 0" } else { "> 0" }),
                ))
            } else {
                Ok(())
            }
        };
        match *self {
            KernelSpec::Exponential { beta } => check("beta", beta, false),
            KernelSpec::Gamma { k, beta } => {
                check("k", k, false)?;
                check("beta", beta, false)
            }
            KernelSpec::Gaussian { tau, sigma, beta } => {
                check("tau", tau, true)?;
                check("sigma", sigma, false)?;
                check("beta", beta, false)
            }
        }
    }

    /// Kernel value at elapsed time `dt`; zero for `dt < 0`.
    pub fn evaluate(&self, dt: f64) -> f64 {
        if dt < 0.0 {
            return 0.0;
        }
        match *self {
            KernelSpec::Exponential { beta } => beta * (-beta * dt).exp(),
            KernelSpec::Gamma { k, beta } => {
                if dt == 0.0 {
                    return match k {
                        k if k > 1.0 => 0.0,
                        k if k == 1.0 => beta,
                        _ => f64::INFINITY,
                    };
                }
                (k * beta.ln() + (k - 1.0) * dt.ln() - beta * dt - ln_gamma(k)).exp()
            }
            KernelSpec::Gaussian { tau, sigma, beta } => {
                let d = dt - tau;
                (-beta * d * d / sigma).exp() / (2.0 * PI * sigma).sqrt()
            }
        }
    }

    /// Integral of the kernel over `[0, dt]`.
    pub fn cumulative(&self, dt: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        match *self {
            KernelSpec::Exponential { beta } => 1.0 - (-beta * dt).exp(),
            KernelSpec::Gamma { k, beta } => gamma_p(k, beta * dt),
            KernelSpec::Gaussian { tau, sigma, beta } => {
                let a = (beta / sigma).sqrt();
                let coef = PI.sqrt() / (2.0 * a * (2.0 * PI * sigma).sqrt());
                coef * (erf(a * (dt - tau)) + erf(a * tau))
            }
        }
    }

    /// Total kernel mass, the limit of `cumulative` as `dt -> inf`.
    pub fn total_mass(&self) -> f64 {
        match *self {
            KernelSpec::Exponential { .. } | KernelSpec::Gamma { .. } => 1.0,
            KernelSpec::Gaussian { tau, sigma, beta } => {
                let a = (beta / sigma).sqrt();
                let coef = PI.sqrt() / (2.0 * a * (2.0 * PI * sigma).sqrt());
                coef * (1.0 + erf(a * tau))
            }
        }
    }

    /// Supremum of the kernel over `[elapsed, inf)`; the thinning simulator
    /// uses this as a per-event majorant that stays valid until the history
    /// changes. Infinite for `Gamma` with `k < 1` at `elapsed = 0`.
    pub fn sup_after(&self, elapsed: f64) -> f64 {
        let e = elapsed.max(0.0);
        match *self {
            KernelSpec::Exponential { .. } => self.evaluate(e),
            KernelSpec::Gamma { k, beta } => {
                if k <= 1.0 {
                    self.evaluate(e)
                } else {
                    self.evaluate(e.max((k - 1.0) / beta))
                }
            }
            KernelSpec::Gaussian { tau, .. } => self.evaluate(e.max(tau)),
        }
    }

    /// Decay rate when the kernel is exponential; fast evaluation paths key
    /// off this.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            KernelSpec::Exponential { beta } => Some(beta),
            _ => None,
        }
    }

    /// True when the kernel value is bounded on `[0, inf)`. Thinning needs a
    /// finite dominating rate, so simulation rejects unbounded kernels.
    pub fn is_bounded(&self) -> bool {
        match *self {
            KernelSpec::Gamma { k, .. } => k >= 1.0,
            _ => true,
        }
    }
}
