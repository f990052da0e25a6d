//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Spectral radius (largest eigenvalue modulus) of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
/// Returns `None` when the factorization fails (not PD / singular).
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Eigenvalues of a symmetric matrix, ascending. The input is symmetrized
/// first so callers can pass matrices with roundoff asymmetry.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Rank-deficiency test for a symmetric PSD matrix: deficient when the
/// smallest eigenvalue is below `rel_tol` times the largest (or the matrix
/// is identically zero).
pub fn psd_rank_deficient(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    let ev = sym_eigenvalues(m);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => hi <= 0.0 || lo < rel_tol * hi,
        _ => true,
    }
}

/// Solve `a x = b` by partial-pivot LU.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}

/// Matrix exponential by scaling-and-squaring with a diagonal Padé
/// approximant. Accuracy is well inside 1e-10 for the sizes used here.
pub fn matrix_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix_exp requires a square matrix");
    let norm = inf_norm(a);
    // Scale until the norm is at most 1/2, apply Padé(6,6), square back.
    let s = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);

    const Q: usize = 6;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut num = eye.clone();
    let mut den = eye.clone();
    let mut term = eye.clone();
    let mut c = 1.0;
    for k in 0..Q {
        let kf = k as f64;
        c *= (Q as f64 - kf) / ((2.0 * Q as f64 - kf) * (kf + 1.0));
        term = &term * &scaled;
        num += &term * c;
        if k % 2 == 0 {
            den -= &term * c;
        } else {
            den += &term * c;
        }
    }
    let mut f = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        f = &f * &f;
    }
    f
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
