//! Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.

/// Number of eigenvalues of (T - x I) strictly below x, via the signs of the
/// LDL^T pivots of the shifted matrix.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let mut denom = d;
        if denom == 0.0 {
            denom = f64::EPSILON * (off[i - 1].abs() + 1.0);
        }
        d = (diag[i] - x) - off[i - 1] * off[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue, bisected to ~1e-13 relative.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    assert_eq!(off.len() + 1, diag.len());
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < off.len() {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let floor = 1e-15 * lo.abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        // Tolerance relative to the eigenvalue itself, not the Gershgorin span.
        if hi - lo <= 1e-14 * lo.abs().max(hi.abs()).max(floor) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laplacian_smallest_eigenvalue() {
        // -d2/dx2 on (0,1), Dirichlet both ends, n interior points:
        // lambda_1 = (2 - 2 cos(pi h)) / h^2 for the discrete operator.
        let n = 500;
        let h = 1.0 / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let got = smallest_eigenvalue(&diag, &off);
        let exact_discrete = (2.0 - 2.0 * (std::f64::consts::PI * h).cos()) / (h * h);
        assert_relative_eq!(got, exact_discrete, max_relative = 1e-10);
        assert_relative_eq!(got, std::f64::consts::PI.powi(2), max_relative = 1e-4);
    }

    #[test]
    fn diagonal_matrix() {
        let diag = vec![3.0, -1.0, 7.0];
        let off = vec![0.0, 0.0];
        assert_relative_eq!(smallest_eigenvalue(&diag, &off), -1.0, max_relative = 1e-12);
    }
}
