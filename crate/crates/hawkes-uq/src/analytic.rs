//! Closed forms for the stationary exponential-kernel process: expected
//! intensity, the second-moment matrix W of the exponentially smoothed
//! event stream, the Fisher-information upper bound, the Chebyshev score
//! tail bound, and the covariance density. Used as oracles and diagnostics;
//! everything here assumes a common exponential kernel and rejects anything
//! else with `KernelUnsupported`.

use crate::error::HawkesError;
use crate::linalg::{lu_solve, matrix_exp, spectral_radius};
use crate::process::ModelParams;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

fn check_stationary(a: &DMatrix<f64>) -> Result<f64, HawkesError> {
    let rho = spectral_radius(a);
    if rho >= 1.0 {
        return Err(HawkesError::NonStationary { rho });
    }
    Ok(rho)
}

/// Expected stationary intensity: the solution of `(I - A) Lambda = mu`.
pub fn stationary_intensity(
    mu: &DVector<f64>,
    a: &DMatrix<f64>,
) -> Result<DVector<f64>, HawkesError> {
    check_stationary(a)?;
    let d = mu.len();
    let sys = DMatrix::identity(d, d) - a;
    lu_solve(&sys, mu).ok_or_else(|| HawkesError::NonFinite {
        context: "stationary intensity solve".into(),
    })
}

/// Second moment of the exponentially smoothed event vector:
/// `W = Lambda Lambda^T + (beta/2) Sigma + (beta/4) A (I-A)^-1 Sigma
///    + (beta/4) Sigma A^T (I-A^T)^-1`, with `Sigma = diag(Lambda)`.
pub fn w_matrix(
    mu: &DVector<f64>,
    a: &DMatrix<f64>,
    beta: f64,
) -> Result<DMatrix<f64>, HawkesError> {
    if !(beta > 0.0) {
        return Err(HawkesError::invalid("beta", format!("must be > 0, got {beta}")));
    }
    let lambda = stationary_intensity(mu, a)?;
    let d = mu.len();
    let sigma = DMatrix::from_diagonal(&lambda);
    let id = DMatrix::<f64>::identity(d, d);
    let inv = (&id - a)
        .try_inverse()
        .ok_or(HawkesError::NonFinite { context: "(I-A) inversion".into() })?;
    let cross = a * &inv * &sigma;
    let w = &lambda * lambda.transpose()
        + &sigma * (beta / 2.0)
        + (&cross + cross.transpose()) * (beta / 4.0);
    // Symmetric by construction; tidy up roundoff.
    Ok((&w + w.transpose()) * 0.5)
}

/// Upper bound on the Fisher information in the PSD order: `W / mu_i`.
pub fn fisher_upper_bound(mu_i: f64, w: &DMatrix<f64>) -> Result<DMatrix<f64>, HawkesError> {
    if !(mu_i > 0.0) {
        return Err(HawkesError::invalid("mu_i", format!("must be > 0, got {mu_i}")));
    }
    Ok(w / mu_i)
}

/// Chebyshev bound on the one-sided score tail:
/// `P(z.S_i(alpha*) >= eps_scale sqrt(T)) <= min(1, z.W z / (mu_i eps^2))`.
pub fn score_tail_bound(
    z: &DVector<f64>,
    w: &DMatrix<f64>,
    mu_i: f64,
    eps_scale: f64,
) -> Result<f64, HawkesError> {
    if !(eps_scale > 0.0) {
        return Err(HawkesError::invalid("eps_scale", format!("must be > 0, got {eps_scale}")));
    }
    if !(mu_i > 0.0) {
        return Err(HawkesError::invalid("mu_i", format!("must be > 0, got {mu_i}")));
    }
    let quad = (w * z).dot(z);
    Ok((quad / (mu_i * eps_scale * eps_scale)).min(1.0))
}

/// Covariance density of the stationary counts at lag `tau != 0`:
/// `c(tau) = beta exp(-beta (I-A) tau) A (I + (1/2)(I-A)^-1 A) Sigma` for
/// positive lags and the transpose reflection for negative ones. The atom
/// at zero lag is `Sigma`, reported separately via [`StationarySummary`].
pub fn covariance_density(
    a: &DMatrix<f64>,
    mu: &DVector<f64>,
    beta: f64,
    tau: f64,
) -> Result<DMatrix<f64>, HawkesError> {
    if tau == 0.0 {
        return Err(HawkesError::invalid("tau", "zero lag holds the atom; query tau != 0"));
    }
    if !(beta > 0.0) {
        return Err(HawkesError::invalid("beta", format!("must be > 0, got {beta}")));
    }
    let lambda = stationary_intensity(mu, a)?;
    let d = mu.len();
    let sigma = DMatrix::from_diagonal(&lambda);
    let id = DMatrix::<f64>::identity(d, d);
    let inv = (&id - a)
        .try_inverse()
        .ok_or(HawkesError::NonFinite { context: "(I-A) inversion".into() })?;
    let t = tau.abs();
    let decay = matrix_exp(&((&id - a) * (-beta * t)));
    let c = decay * a * (&id + inv * a * 0.5) * sigma * beta;
    Ok(if tau > 0.0 { c } else { c.transpose() })
}

/// Stationary diagnostics bundle printed by the CLI `report` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarySummary {
    pub spectral_radius: f64,
    pub lambda: Vec<f64>,
    /// Diagonal of `Sigma = diag(Lambda)`.
    pub sigma: Vec<f64>,
    /// Present only for a shared exponential kernel (the closed form needs
    /// a single decay rate).
    pub w: Option<Vec<Vec<f64>>>,
    pub beta: Option<f64>,
}

impl StationarySummary {
    pub fn from_params(params: &ModelParams) -> Result<Self, HawkesError> {
        let d = params.node_count();
        let rho = check_stationary(&params.branching_spectral_radius_matrix())?;
        let lambda = stationary_intensity(params.mu(), params.a())?;

        // The W closed form exists for one shared exponential decay rate.
        let mut common_beta: Option<f64> = None;
        let mut uniform = true;
        for i in 0..d {
            for j in 0..d {
                match params.kernel(i, j).exponential_rate() {
                    Some(b) => match common_beta {
                        None => common_beta = Some(b),
                        Some(prev) if prev == b => {}
                        Some(_) => uniform = false,
                    },
                    None => {
                        return Err(HawkesError::KernelUnsupported {
                            detail: format!("kernel ({i},{j}) is not exponential"),
                        })
                    }
                }
            }
        }
        let (w, beta) = match (uniform, common_beta) {
            (true, Some(b)) => {
                let w = w_matrix(params.mu(), params.a(), b)?;
                let rows = (0..d)
                    .map(|r| (0..d).map(|c| w[(r, c)]).collect())
                    .collect();
                (Some(rows), Some(b))
            }
            _ => (None, None),
        };
        Ok(StationarySummary {
            spectral_radius: rho,
            lambda: lambda.iter().copied().collect(),
            sigma: lambda.iter().copied().collect(),
            w,
            beta,
        })
    }
}

impl ModelParams {
    /// Branching matrix as used by the stationarity checks here (for
    /// exponential kernels it is the influence matrix itself).
    fn branching_spectral_radius_matrix(&self) -> DMatrix<f64> {
        crate::process::branching_matrix(self.a(), self.kernels())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::linalg::sym_eigenvalues;
    use crate::process::KernelGrid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stationary_intensity_basics() {
        let mu = DVector::from_vec(vec![0.7, 1.3]);
        let zero = DMatrix::zeros(2, 2);
        assert_eq!(stationary_intensity(&mu, &zero).unwrap(), mu);

        let mu1 = DVector::from_vec(vec![1.0]);
        let a1 = DMatrix::from_element(1, 1, 0.5);
        assert_abs_diff_eq!(stationary_intensity(&mu1, &a1).unwrap()[0], 2.0, epsilon = 1e-12);

        let hot = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(
            stationary_intensity(&mu1, &hot),
            Err(HawkesError::NonStationary { .. })
        ));
    }

    #[test]
    fn stationary_solve_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = rng.gen_range(1..5usize);
            let mu = DVector::from_fn(d, |_, _| rng.gen_range(0.2..2.0));
            let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(0.0..0.8 / d as f64));
            let lam = stationary_intensity(&mu, &a).unwrap();
            let residual = (DMatrix::identity(d, d) - &a) * &lam - &mu;
            assert!(residual.amax() < 1e-10);
        }
    }

    #[test]
    fn w_matrix_zero_influence() {
        let mu = DVector::from_vec(vec![0.5, 2.0]);
        let a = DMatrix::zeros(2, 2);
        let w = w_matrix(&mu, &a, 3.0).unwrap();
        // mu mu^T + (beta/2) diag(mu)
        for r in 0..2 {
            for c in 0..2 {
                let want = mu[r] * mu[c] + if r == c { 1.5 * mu[r] } else { 0.0 };
                assert_abs_diff_eq!(w[(r, c)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn w_matrix_scalar_worked_example() {
        // mu=1, alpha=0.5, beta=2: Lambda=2, W = 4 + 2 + 2 = 8.
        let w = w_matrix(
            &DVector::from_vec(vec![1.0]),
            &DMatrix::from_element(1, 1, 0.5),
            2.0,
        )
        .unwrap();
        assert_abs_diff_eq!(w[(0, 0)], 8.0, epsilon = 1e-12);
    }

    #[test]
    fn w_matrix_symmetric_and_dominates_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = rng.gen_range(1..4usize);
            let mu = DVector::from_fn(d, |_, _| rng.gen_range(0.3..1.5));
            let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(0.0..0.7 / d as f64));
            let beta = rng.gen_range(0.5..3.0);
            let w = w_matrix(&mu, &a, beta).unwrap();
            for r in 0..d {
                for c in 0..d {
                    assert_abs_diff_eq!(w[(r, c)], w[(c, r)], epsilon = 1e-12);
                }
            }
            let lam = stationary_intensity(&mu, &a).unwrap();
            let rest = &w - &lam * lam.transpose();
            let ev = sym_eigenvalues(&rest);
            assert!(ev[0] > -1e-10, "W - Lambda Lambda^T not PSD: {ev:?}");
        }
    }

    #[test]
    fn fisher_bound_scaling() {
        let w = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let b1 = fisher_upper_bound(1.0, &w).unwrap();
        assert_eq!(b1, w);
        let b2 = fisher_upper_bound(2.0, &w).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(b2[(r, c)], 0.5 * w[(r, c)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn tail_bound_trivial_cases() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let zero = DVector::zeros(2);
        assert_eq!(score_tail_bound(&zero, &w, 1.0, 0.5).unwrap(), 0.0);
        let z = DVector::from_vec(vec![10.0, 0.0]);
        assert_eq!(score_tail_bound(&z, &w, 1.0, 0.5).unwrap(), 1.0);
        let z = DVector::from_vec(vec![0.3, 0.0]);
        assert_abs_diff_eq!(
            score_tail_bound(&z, &w, 1.0, 1.0).unwrap(),
            0.09,
            epsilon = 1e-12
        );
    }

    #[test]
    fn covariance_density_reflection_and_zero_influence() {
        let mu = DVector::from_vec(vec![0.8, 1.1]);
        let zero = DMatrix::zeros(2, 2);
        let c = covariance_density(&zero, &mu, 2.0, 0.7).unwrap();
        assert!(c.amax() < 1e-14);

        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.2, 0.1, 0.25]);
        let fwd = covariance_density(&a, &mu, 2.0, 0.7).unwrap();
        let bwd = covariance_density(&a, &mu, 2.0, -0.7).unwrap();
        for r in 0..2 {
            for c2 in 0..2 {
                assert_abs_diff_eq!(fwd[(r, c2)], bwd[(c2, r)], epsilon = 1e-13);
            }
        }
        assert!(covariance_density(&a, &mu, 2.0, 0.0).is_err());
    }

    #[test]
    fn covariance_density_reconstructs_w() {
        // W = Lambda Lambda^T + (beta/2) Sigma
        //   + integral_0^inf (beta/2) e^(-beta tau) (c(tau) + c(tau)^T) dtau.
        let mu = DVector::from_vec(vec![0.9, 0.6]);
        let a = DMatrix::from_row_slice(2, 2, &[0.35, 0.15, 0.2, 0.3]);
        let beta = 1.7;
        let rho = spectral_radius(&a);
        let upper = 40.0 / (beta * (1.0 - rho));
        let lam = stationary_intensity(&mu, &a).unwrap();
        let sigma = DMatrix::from_diagonal(&lam);
        let w = w_matrix(&mu, &a, beta).unwrap();
        let target = &w - &lam * lam.transpose() - sigma * (beta / 2.0);
        // Force quadrature samples near the origin where the integrand
        // lives; a single adaptive pass over [0, upper] would step over it.
        let breaks: Vec<f64> = (1..60).map(|k| upper * k as f64 / 60.0).collect();
        for r in 0..2 {
            for c2 in 0..2 {
                let integral = crate::test_util::piecewise_simpson(
                    &|tau| {
                        if tau <= 0.0 {
                            return 0.0;
                        }
                        let c = covariance_density(&a, &mu, beta, tau).unwrap();
                        0.5 * beta * (-beta * tau).exp() * (c[(r, c2)] + c[(c2, r)])
                    },
                    0.0,
                    upper,
                    &breaks,
                    1e-10,
                );
                assert_relative_eq!(integral, target[(r, c2)], max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn summary_requires_shared_exponential() {
        let params = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_element(2, 2, 0.2),
            KernelGrid::Shared(KernelSpec::gamma(2.0, 1.0).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            StationarySummary::from_params(&params),
            Err(HawkesError::KernelUnsupported { .. })
        ));

        let ok = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_element(2, 2, 0.2),
            KernelGrid::Shared(KernelSpec::exponential(1.3).unwrap()),
        )
        .unwrap();
        let s = StationarySummary::from_params(&ok).unwrap();
        assert!(s.w.is_some());
        assert_eq!(s.beta, Some(1.3));
        assert!(s.spectral_radius < 1.0);
        // Mixed rates: Lambda still reported, W omitted.
        let mixed = ModelParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_element(2, 2, 0.2),
            KernelGrid::PerPair(vec![
                vec![KernelSpec::exponential(1.0).unwrap(), KernelSpec::exponential(2.0).unwrap()],
                vec![KernelSpec::exponential(2.0).unwrap(), KernelSpec::exponential(1.0).unwrap()],
            ]),
        )
        .unwrap();
        let s = StationarySummary::from_params(&mixed).unwrap();
        assert!(s.w.is_none());
    }
}
