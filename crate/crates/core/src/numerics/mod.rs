//! Small numerical building blocks shared across the crate.

pub mod gauss;
pub mod nelder_mead;
pub mod pchip;
pub mod tridiag;

use crate::error::{Error, Result};

/// Bracketed bisection for f(root) = 0. Requires a sign change on [lo, hi].
/// Runs until the bracket width drops below `xtol` (absolute) or machine
/// resolution, whichever comes first.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo:.3e}, {fhi:.3e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at machine resolution
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo < xtol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A few secant steps to polish a root estimate; falls back to the input
/// if the iteration leaves [lo, hi] or stalls.
pub fn secant_polish<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    x1: f64,
    lo: f64,
    hi: f64,
    iters: usize,
) -> f64 {
    let mut a = x0;
    let mut b = x1;
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..iters {
        let denom = fb - fa;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let c = b - fb * (b - a) / denom;
        if !c.is_finite() || c < lo || c > hi {
            break;
        }
        a = b;
        fa = fb;
        b = c;
        fb = f(b);
        if fb == 0.0 || (b - a).abs() < f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    if fb.abs() <= fa.abs() {
        b
    } else {
        a
    }
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid_uniform(ys: &[f64], h: f64) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    let interior: f64 = ys[1..ys.len() - 1].iter().sum();
    h * (0.5 * (ys[0] + ys[ys.len() - 1]) + interior)
}

/// Cumulative trapezoid prefix sums: `out[i]` = integral from x0 to x_i.
pub fn trapezoid_prefix(ys: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; ys.len()];
    for i in 1..ys.len() {
        out[i] = out[i - 1] + 0.5 * h * (ys[i - 1] + ys[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn bisect_rejects_no_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn trapezoid_integrates_parabola() {
        let n = 10_001;
        let h = 1.0 / (n as f64 - 1.0);
        let ys: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(2)).collect();
        assert_relative_eq!(trapezoid_uniform(&ys, h), 1.0 / 3.0, max_relative = 1e-7);
        let prefix = trapezoid_prefix(&ys, h);
        assert_relative_eq!(prefix[n - 1], 1.0 / 3.0, max_relative = 1e-7);
        assert_relative_eq!(prefix[(n - 1) / 2], 1.0 / 24.0, max_relative = 1e-6);
    }
}
