//! Monotone cubic (Fritsch-Carlson) interpolation on a uniform grid.
//!
//! Used to interpolate ln rho when building grid-backed drift fields: the
//! shape-preserving slopes avoid overshoot in the exponential tails, and the
//! interpolant's analytic derivative gives the drift directly.

/// Shape-preserving piecewise-cubic Hermite interpolant on a uniform grid.
#[derive(Debug, Clone)]
pub struct PchipUniform {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl PchipUniform {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        assert!(y.len() >= 3, "need at least 3 knots");
        assert!(h > 0.0);
        let n = y.len();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h).collect();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] > 0.0 {
                // Uniform spacing reduces the Fritsch-Carlson weighted
                // harmonic mean to weights (1, 1) scaled by 2.
                slope[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
            }
        }
        slope[0] = endpoint_slope(d[0], d[1]);
        slope[n - 1] = endpoint_slope(d[n - 2], d[n - 3]);
        PchipUniform { x0, h, y, slope }
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.x0) / self.h;
        let i = (t.floor() as isize).clamp(0, self.y.len() as isize - 2) as usize;
        (i, t - i as f64)
    }

    /// Interpolated value; clamps x to the knot range.
    pub fn value(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let t = t.clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * self.h * self.slope[i] + h01 * self.y[i + 1]
            + h11 * self.h * self.slope[i + 1]
    }

    /// Analytic derivative of the interpolant; clamps x to the knot range.
    pub fn derivative(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let t = t.clamp(0.0, 1.0);
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / self.h
            + dh10 * self.slope[i]
            + dh11 * self.slope[i + 1]
    }
}

fn endpoint_slope(d_near: f64, d_far: f64) -> f64 {
    // Non-centered three-point estimate with the standard monotonicity clamp.
    let s = 1.5 * d_near - 0.5 * d_far;
    if s * d_near <= 0.0 {
        0.0
    } else if d_near * d_far < 0.0 && s.abs() > 3.0 * d_near.abs() {
        3.0 * d_near
    } else {
        s
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn reproduces_knots_exactly() {
        let y: Vec<f64> = (0..50).map(|i| (-0.1 * (i as f64 - 20.0).powi(2)).exp()).collect();
        let p = PchipUniform::new(0.0, 1.0, y.clone());
        for (i, &yi) in y.iter().enumerate() {
            assert_relative_eq!(p.value(i as f64), yi, max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_tracks_smooth_function() {
        // ln of a gaussian is a parabola; slopes should be near-exact.
        let h = 0.01;
        let y: Vec<f64> = (0..2001).map(|i| {
            let x = -10.0 + h * i as f64;
            -0.5 * x * x
        }).collect();
        let p = PchipUniform::new(-10.0, h, y);
        for &x in &[-7.3, -1.0, 0.004, 2.55, 9.2] {
            assert_abs_diff_eq!(p.derivative(x), -x, epsilon = 1e-3);
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let y: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let p = PchipUniform::new(0.0, 1.0, y);
        let mut prev = p.value(0.0);
        let mut x = 0.05;
        while x < 29.0 {
            let v = p.value(x);
            assert!(v >= prev - 1e-12, "overshoot at x = {x}");
            prev = v;
            x += 0.05;
        }
    }
}
