//! Dense simplex solver for the small linear programs behind per-entry
//! confidence-interval extraction: `min/max c.x` over `{G x <= h, x >= 0}`.
//!
//! Big-M phase handling with the M component carried symbolically: every
//! cost is a `(unit, M)` pair compared lexicographically, so no numeric
//! big constant ever pollutes the arithmetic. Bland's smallest-index rule
//! for both the entering and leaving choices guarantees termination.
//! Problems here have at most a few dozen rows and columns.

use crate::error::HawkesError;
use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;
const ZERO_TOL: f64 = 1e-9;

/// Result of one LP solve.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { value: f64, point: DVector<f64> },
    Unbounded,
    Infeasible,
}

/// Minimize `c.x` subject to `G x <= h`, `x >= 0`.
pub fn minimize(
    c: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Result<LpOutcome, HawkesError> {
    let n = c.len();
    let m = g.nrows();
    if g.ncols() != n || h.len() != m {
        return Err(HawkesError::invalid(
            "lp",
            format!("shape mismatch: c[{n}], G {}x{}, h[{}]", g.nrows(), g.ncols(), h.len()),
        ));
    }

    // Column layout: structural | one slack or surplus per row | artificials.
    let n_art = (0..m).filter(|&l| h[l] < 0.0).count();
    let cols = n + m + n_art;
    let mut tab = DMatrix::<f64>::zeros(m, cols);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut basis = vec![0usize; m];
    // Cost pairs (unit, M) per column.
    let mut cost_unit = vec![0.0; cols];
    let mut cost_m = vec![0.0; cols];
    for j in 0..n {
        cost_unit[j] = c[j];
    }

    let mut art = 0;
    for l in 0..m {
        let flip = h[l] < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[(l, j)] = sign * g[(l, j)];
        }
        rhs[l] = sign * h[l];
        // Slack for <= rows, surplus for flipped rows.
        tab[(l, n + l)] = sign;
        if flip {
            let a_col = n + m + art;
            tab[(l, a_col)] = 1.0;
            cost_m[a_col] = 1.0;
            basis[l] = a_col;
            art += 1;
        } else {
            basis[l] = n + l;
        }
    }

    let mut iters = 0usize;
    loop {
        iters += 1;
        if iters > 100_000 {
            return Err(HawkesError::NonFinite { context: "simplex iteration cap".into() });
        }
        // Reduced costs r_j = c_j - c_B . tab_col_j, in (unit, M) pairs.
        let mut entering: Option<usize> = None;
        for j in 0..cols {
            if basis.contains(&j) {
                continue;
            }
            let mut r_unit = cost_unit[j];
            let mut r_m = cost_m[j];
            for l in 0..m {
                let b = basis[l];
                let t = tab[(l, j)];
                if t != 0.0 {
                    r_unit -= cost_unit[b] * t;
                    r_m -= cost_m[b] * t;
                }
            }
            let negative = r_m < -ZERO_TOL || (r_m.abs() <= ZERO_TOL && r_unit < -ZERO_TOL);
            if negative {
                entering = Some(j);
                break; // Bland: smallest index.
            }
        }
        let Some(e) = entering else {
            // Optimal. Positive artificial in the basis means infeasible.
            for l in 0..m {
                if basis[l] >= n + m && rhs[l] > ZERO_TOL {
                    return Ok(LpOutcome::Infeasible);
                }
            }
            let mut point = DVector::<f64>::zeros(n);
            let mut value = 0.0;
            for l in 0..m {
                if basis[l] < n {
                    point[basis[l]] = rhs[l];
                }
                value += cost_unit[basis[l]] * rhs[l];
            }
            return Ok(LpOutcome::Optimal { value, point });
        };

        // Ratio test, ties broken by smallest basis column (Bland).
        let mut leaving: Option<(usize, f64)> = None;
        for l in 0..m {
            let t = tab[(l, e)];
            if t > PIVOT_TOL {
                let ratio = rhs[l] / t;
                match leaving {
                    None => leaving = Some((l, ratio)),
                    Some((best_l, best_r)) => {
                        if ratio < best_r - PIVOT_TOL
                            || (ratio < best_r + PIVOT_TOL && basis[l] < basis[best_l])
                        {
                            leaving = Some((l, ratio));
                        }
                    }
                }
            }
        }
        let Some((piv_row, _)) = leaving else {
            // No blocking row. If the column still carries M-cost reduction
            // the problem is infeasible in a degenerate way; otherwise the
            // true objective is unbounded.
            return Ok(LpOutcome::Unbounded);
        };

        // Pivot.
        let p = tab[(piv_row, e)];
        for j in 0..cols {
            tab[(piv_row, j)] /= p;
        }
        rhs[piv_row] /= p;
        for l in 0..m {
            if l != piv_row {
                let f = tab[(l, e)];
                if f != 0.0 {
                    for j in 0..cols {
                        tab[(l, j)] -= f * tab[(piv_row, j)];
                    }
                    rhs[l] -= f * rhs[piv_row];
                    if rhs[l].abs() < 1e-14 {
                        rhs[l] = 0.0;
                    }
                }
            }
        }
        basis[piv_row] = e;
    }
}

/// Maximize `c.x` subject to `G x <= h`, `x >= 0`.
pub fn maximize(
    c: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Result<LpOutcome, HawkesError> {
    Ok(match minimize(&(-c), g, h)? {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn axis(n: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 })
    }

    /// Brute-force oracle: enumerate candidate vertices from all n-subsets
    /// of {G rows} union {x_j = 0} union {x_j = big box}, keep the feasible
    /// ones, and read off per-axis extremes inside the box. Axes whose
    /// maximum keeps growing when the box is enlarged are unbounded; the
    /// caller compares two box sizes.
    pub fn vertex_extremes(
        g: &DMatrix<f64>,
        h: &DVector<f64>,
        big: f64,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = g.ncols();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for l in 0..g.nrows() {
            rows.push(((0..n).map(|j| g[(l, j)]).collect(), h[l]));
        }
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push((r.clone(), 0.0)); // -x_j <= 0
            let mut rb = vec![0.0; n];
            rb[j] = 1.0;
            rows.push((rb, big)); // x_j <= big
        }
        let k = rows.len();
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut subset = vec![0usize; n];
        fn rec(
            rows: &[(Vec<f64>, f64)],
            n: usize,
            k: usize,
            start: usize,
            depth: usize,
            subset: &mut Vec<usize>,
            vertices: &mut Vec<Vec<f64>>,
        ) {
            if depth == n {
                let a = DMatrix::from_fn(n, n, |r, c| rows[subset[r]].0[c]);
                let b = DVector::from_fn(n, |r, _| rows[subset[r]].1);
                if let Some(x) = a.clone().lu().solve(&b) {
                    // Check the solve really worked (singular systems can
                    // still return garbage) and the point is feasible.
                    let residual = (&a * &x - &b).amax();
                    if residual < 1e-7 {
                        let feasible = rows.iter().all(|(row, bound)| {
                            row.iter().zip(x.iter()).map(|(r, v)| r * v).sum::<f64>()
                                <= bound + 1e-7
                        });
                        if feasible {
                            vertices.push(x.iter().copied().collect());
                        }
                    }
                }
                return;
            }
            for i in start..k {
                subset[depth] = i;
                rec(rows, n, k, i + 1, depth + 1, subset, vertices);
            }
        }
        rec(&rows, n, k, 0, 0, &mut subset, &mut vertices);
        if vertices.is_empty() {
            return None;
        }
        let mut mins = vec![f64::INFINITY; n];
        let mut maxs = vec![f64::NEG_INFINITY; n];
        for v in &vertices {
            for j in 0..n {
                mins[j] = mins[j].min(v[j]);
                maxs[j] = maxs[j].max(v[j]);
            }
        }
        Some((mins, maxs))
    }

    /// Doubled-box oracle: per-axis (min, max, unbounded-above flag).
    pub fn vertex_oracle(
        g: &DMatrix<f64>,
        h: &DVector<f64>,
    ) -> Option<(Vec<f64>, Vec<(f64, bool)>)> {
        let (mins, max1) = vertex_extremes(g, h, 1e6)?;
        let (_, max2) = vertex_extremes(g, h, 2e6).expect("feasibility cannot depend on the box");
        let maxs = max1
            .iter()
            .zip(&max2)
            .map(|(&m1, &m2)| (m1, m2 > m1 + 1e-3))
            .collect();
        Some((mins, maxs))
    }

    #[test]
    fn unit_box_extremes() {
        // 0 <= x <= 1 in 2D encoded as rows x_j <= 1.
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let h = DVector::from_vec(vec![1.0, 1.0]);
        for j in 0..2 {
            let lo = minimize(&axis(2, j), &g, &h).unwrap();
            let hi = maximize(&axis(2, j), &g, &h).unwrap();
            match (lo, hi) {
                (LpOutcome::Optimal { value: l, .. }, LpOutcome::Optimal { value: u, .. }) => {
                    assert_abs_diff_eq!(l, 0.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(u, 1.0, epsilon = 1e-12);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn single_constraint_leaves_other_axis_unbounded() {
        let g = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let h = DVector::from_vec(vec![5.0]);
        match maximize(&axis(2, 0), &g, &h).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_abs_diff_eq!(value, 5.0, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(maximize(&axis(2, 1), &g, &h).unwrap(), LpOutcome::Unbounded));
        match minimize(&axis(2, 1), &g, &h).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_abs_diff_eq!(value, 0.0, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // x_0 <= -1 contradicts x_0 >= 0.
        let g = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let h = DVector::from_vec(vec![-1.0]);
        assert!(matches!(minimize(&axis(2, 0), &g, &h).unwrap(), LpOutcome::Infeasible));
        // Sandwich: x_0 >= 2 (as -x_0 <= -2) and x_0 <= 1.
        let g = DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]);
        let h = DVector::from_vec(vec![-2.0, 1.0]);
        assert!(matches!(minimize(&axis(1, 0), &g, &h).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn negative_rhs_feasible_region() {
        // x_0 >= 1 via -x_0 <= -1, plus x_0 + x_1 <= 3.
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, 1.0]);
        let h = DVector::from_vec(vec![-1.0, 3.0]);
        match minimize(&axis(2, 0), &g, &h).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_abs_diff_eq!(value, 1.0, epsilon = 1e-10);
                assert!(point[0] >= 1.0 - 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
        match maximize(&axis(2, 1), &g, &h).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_abs_diff_eq!(value, 2.0, epsilon = 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_polyhedra_match_vertex_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2718);
        let mut checked = 0;
        for case in 0..100 {
            let n = rng.gen_range(1..=3usize);
            let m = rng.gen_range(1..=6usize);
            let g = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            // Mostly feasible instances: bias h upward.
            let h = DVector::from_fn(m, |_, _| rng.gen_range(-0.3..1.5));
            let oracle = vertex_oracle(&g, &h);
            for j in 0..n {
                let lo = minimize(&axis(n, j), &g, &h).unwrap();
                let hi = maximize(&axis(n, j), &g, &h).unwrap();
                match &oracle {
                    None => {
                        assert!(
                            matches!(lo, LpOutcome::Infeasible),
                            "case {case}: oracle infeasible, lp {lo:?}"
                        );
                    }
                    Some((mins, maxs)) => {
                        match lo {
                            LpOutcome::Optimal { value, .. } => {
                                assert_abs_diff_eq!(value, mins[j], epsilon = 1e-8);
                            }
                            other => panic!("case {case} axis {j}: min gave {other:?}"),
                        }
                        match hi {
                            LpOutcome::Optimal { value, .. } => {
                                assert!(!maxs[j].1, "case {case} axis {j}: oracle says unbounded");
                                assert_abs_diff_eq!(value, maxs[j].0, epsilon = 1e-8);
                            }
                            LpOutcome::Unbounded => {
                                assert!(maxs[j].1, "case {case} axis {j}: oracle bounded at {}", maxs[j].0);
                            }
                            other => panic!("case {case} axis {j}: max gave {other:?}"),
                        }
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 50, "too few feasible cases exercised: {checked}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn boxes_recover_their_bounds(b0 in 0.1f64..5.0, b1 in 0.1f64..5.0) {
            let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
            let h = DVector::from_vec(vec![b0, b1]);
            for (j, want) in [(0usize, b0), (1, b1)] {
                match maximize(&axis(2, j), &g, &h).unwrap() {
                    LpOutcome::Optimal { value, .. } => prop_assert!((value - want).abs() < 1e-9),
                    other => prop_assert!(false, "unexpected {:?}", other),
                }
            }
        }
    }
}
