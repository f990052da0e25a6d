//! Experiment configuration: one JSON file carries everything a run needs
//! (dimension, horizon, background rates, influence matrix, kernel grid).
//! The same file drives `simulate` and `fit` (fitting ignores `A`).
//!
//! ```json
//! {
//!   "D": 2,
//!   "T": 200.0,
//!   "mu": [0.5, 0.5],
//!   "A": [[0.3, 0.1], [0.2, 0.3]],
//!   "kernels": {"type": "exponential", "beta": 1.0}
//! }
//! ```
//!
//! `kernels` is either a single shared spec or a `D x D` grid of specs;
//! `A` may be omitted (defaults to all zeros).

use crate::error::HawkesError;
use crate::process::{KernelGrid, ModelParams};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub mu: Vec<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    pub kernels: KernelGrid,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HawkesError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| HawkesError::Parse {
            path: path.display().to_string(),
            // serde_json carries line/column in its Display output.
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_path(&self, path: &Path) -> Result<(), HawkesError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    /// Field-by-field validation with the offending field named.
    pub fn validate(&self) -> Result<(), HawkesError> {
        let fail = |field: &str, message: String| Err(HawkesError::Config { field: field.into(), message });
        if self.d == 0 {
            return fail("D", "must be >= 1".into());
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return fail("T", format!("must be positive and finite, got {}", self.t));
        }
        if self.mu.len() != self.d {
            return fail("mu", format!("expected {} entries, got {}", self.d, self.mu.len()));
        }
        for (i, &m) in self.mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(HawkesError::Config {
                    field: format!("mu[{i}]"),
                    message: format!("must be > 0, got {m}"),
                });
            }
        }
        if let Some(a) = &self.a {
            if a.len() != self.d {
                return fail("A", format!("expected {} rows, got {}", self.d, a.len()));
            }
            for (i, row) in a.iter().enumerate() {
                if row.len() != self.d {
                    return Err(HawkesError::Config {
                        field: format!("A[{i}]"),
                        message: format!("expected {} entries, got {}", self.d, row.len()),
                    });
                }
                for (j, &v) in row.iter().enumerate() {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(HawkesError::Config {
                            field: format!("A[{i}][{j}]"),
                            message: format!("must be >= 0 and finite, got {v}"),
                        });
                    }
                }
            }
        }
        self.kernels.validate(self.d).map_err(|e| HawkesError::Config {
            field: "kernels".into(),
            message: e.to_string(),
        })
    }

    /// Materialize model parameters; a missing `A` means no influences.
    pub fn params(&self) -> Result<ModelParams, HawkesError> {
        let mu = DVector::from_vec(self.mu.clone());
        let a = match &self.a {
            Some(rows) => DMatrix::from_fn(self.d, self.d, |i, j| rows[i][j]),
            None => DMatrix::zeros(self.d, self.d),
        };
        ModelParams::new(mu, a, self.kernels.clone())
    }

    pub fn mu_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.mu.clone())
    }
}
