//! Oracles shared by unit tests: quadrature independent of the production
//! code paths, plus small helpers for random instances.

/// Recursive adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 40)
}

/// Quadrature of a piecewise-smooth integrand: split at the supplied break
/// points (event times), integrate each piece adaptively.
pub fn piecewise_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    cuts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_integrates_polynomial_exactly() {
        let v = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12);
        assert_abs_diff_eq!(v, 4.0 - 4.0 + 2.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_handles_exponential() {
        let v = adaptive_simpson(&|x| (-x).exp(), 0.0, 5.0, 1e-12);
        assert_abs_diff_eq!(v, 1.0 - (-5.0f64).exp(), epsilon = 1e-11);
    }

    #[test]
    fn piecewise_splits_at_kinks() {
        let f = |x: f64| if x < 1.0 { 1.0 } else { 2.0 };
        let v = piecewise_simpson(&f, 0.0, 2.0, &[1.0], 1e-12);
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-10);
    }
}
