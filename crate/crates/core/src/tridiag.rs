//! Symmetric tridiagonal helpers: LDL^T log-determinants and Sturm
//! bisection eigensolves. No dense eigensolver is needed anywhere.

use crate::error::{Error, Result};

/// Log-determinant of a symmetric positive definite tridiagonal matrix via
/// LDL^T pivots. Fails with the index of the first non-positive pivot.
///
/// `diag` holds the n diagonal entries, `off` the n-1 off-diagonal entries.
pub fn ldlt_log_det(diag: &[f64], off: &[f64]) -> Result<f64> {
    assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
    let mut log_det = 0.0;
    let mut pivot = diag[0];
    if pivot <= 0.0 {
        return Err(Error::NonPositivePivot { index: 0, pivot });
    }
    log_det += pivot.ln();
    for i in 1..diag.len() {
        pivot = diag[i] - off[i - 1] * off[i - 1] / pivot;
        if pivot <= 0.0 {
            return Err(Error::NonPositivePivot { index: i, pivot });
        }
        log_det += pivot.ln();
    }
    Ok(log_det)
}

/// Number of eigenvalues strictly below `lambda` (Sturm sequence: count of
/// negative LDL^T pivots of A - lambda I).
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let guard = 1.0e-300;
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo - 1.0, hi + 1.0)
}

fn bisect_eigenvalue(diag: &[f64], off: &[f64], k: usize, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(diag, off, mid) <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The `k` smallest eigenvalues, ascending, via Sturm bisection.
pub fn smallest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let k = k.min(n);
    let (lo, hi) = gershgorin_bounds(diag, off);
    (0..k).map(|i| bisect_eigenvalue(diag, off, i, lo, hi)).collect()
}

/// All eigenvalues, ascending. O(n^2 log(1/eps)); fine at desk scale.
pub fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    smallest_eigenvalues(diag, off, diag.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_two_by_two() {
        // [[1, -1], [-1, 3]] has eigenvalues 2 -+ sqrt(2)
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(sturm_count(&d, &e, 0.0), 0);
        assert_eq!(sturm_count(&d, &e, 1.0), 1);
        assert_eq!(sturm_count(&d, &e, 4.0), 2);
    }

    #[test]
    fn eigenvalues_of_discrete_laplacian() {
        // -d^2 on a chain: eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 40;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let evals = eigenvalues(&d, &e);
        for (k, ev) in evals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((ev - exact).abs() < 1.0e-10, "k={k}: {ev} vs {exact}");
        }
    }

    #[test]
    fn log_det_matches_eigenvalue_sum() {
        let n = 25;
        let d: Vec<f64> = (0..n).map(|i| 3.0 + 0.1 * (i as f64).sin()).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| -0.8 + 0.01 * i as f64).collect();
        let via_ldlt = ldlt_log_det(&d, &e).unwrap();
        let via_eigen: f64 = eigenvalues(&d, &e).iter().map(|ev| ev.ln()).sum();
        assert!((via_ldlt - via_eigen).abs() < 1.0e-9);
    }

    #[test]
    fn log_det_reports_first_bad_pivot() {
        let d = [2.0, 0.1, 2.0];
        let e = [1.0, 1.0];
        match ldlt_log_det(&d, &e) {
            Err(Error::NonPositivePivot { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }
}
