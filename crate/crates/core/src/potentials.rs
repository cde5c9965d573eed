//! Potential models: the square double well and the double Rosen-Morse well,
//! their derived geometry, and the ammonia reduced mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::bisect;

/// Square double well: infinite walls at +/- b/2, a barrier of thickness d
/// and height v0 centered on the origin, V = 0 in the two wells.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SquareDoubleWell {
    b: f64,
    d: f64,
    v0: f64,
}

impl SquareDoubleWell {
    pub fn new(b: f64, d: f64, v0: f64) -> Result<Self> {
        if !(b.is_finite() && d.is_finite() && v0.is_finite()) {
            return Err(Error::Domain("square well parameters must be finite".into()));
        }
        if !(d > 0.0 && d < b) {
            return Err(Error::Domain(format!(
                "need 0 < d < b, got d = {d}, b = {b}"
            )));
        }
        if !(v0 > 0.0) {
            return Err(Error::Domain(format!("need V0 > 0, got {v0}")));
        }
        Ok(SquareDoubleWell { b, d, v0 })
    }

    pub fn outer_width(&self) -> f64 {
        self.b
    }

    pub fn barrier_thickness(&self) -> f64 {
        self.d
    }

    pub fn barrier_height(&self) -> f64 {
        self.v0
    }

    /// Well width L = (b - d) / 2.
    pub fn well_width(&self) -> f64 {
        0.5 * (self.b - self.d)
    }

    /// Half-domain: the walls sit at +/- b/2.
    pub fn wall(&self) -> f64 {
        0.5 * self.b
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("NaN position".into()));
        }
        if x.abs() >= self.wall() {
            return Err(Error::WallRegion {
                x: x.abs(),
                half_width: self.wall(),
            });
        }
        Ok(if x.abs() < 0.5 * self.d { self.v0 } else { 0.0 })
    }

    /// Hard walls force the turning points to the barrier edge and the outer
    /// wall for every E in (0, V0); returned exactly.
    pub fn turning_points(&self, energy: f64) -> Result<TurningPoints> {
        if !(energy > 0.0 && energy < self.v0) {
            return Err(Error::NoBarrier { energy });
        }
        Ok(TurningPoints {
            b_inner: 0.5 * self.d,
            c_outer: 0.5 * self.b,
            energy,
        })
    }
}

/// Double Rosen-Morse potential, mirror-symmetric about the origin:
/// V(x) = A tanh(|x|/d - k) - B sech^2(|x|/d - k).
///
/// Evaluation uses the x >= 0 branch and mirrors, which makes the parity
/// V(x) = V(-x) bit-exact.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RosenMorseDouble {
    a: f64,
    b: f64,
    d: f64,
    k: f64,
}

/// Derived geometry of the Rosen-Morse double well.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RmGeometry {
    /// Location of the two minima, +/- x0.
    pub x0: f64,
    /// Barrier height V(0) - V(x0).
    pub v0: f64,
    /// Well depth (dissociation energy) V(inf) - V(x0).
    pub vd: f64,
}

impl RosenMorseDouble {
    pub fn new(a: f64, b: f64, d: f64, k: f64) -> Result<Self> {
        if ![a, b, d, k].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("Rosen-Morse parameters must be finite".into()));
        }
        if a < 0.0 || !(b > 0.0) || !(d > 0.0) || !(k > 0.0) {
            return Err(Error::Domain(format!(
                "need A >= 0, B > 0, d > 0, k > 0; got A = {a}, B = {b}, d = {d}, k = {k}"
            )));
        }
        if a >= 2.0 * b {
            return Err(Error::Domain(format!(
                "need A < 2B for the minimum location, got A = {a}, 2B = {}",
                2.0 * b
            )));
        }
        Ok(RosenMorseDouble { a, b, d, k })
    }

    pub fn asymmetry(&self) -> f64 {
        self.a
    }

    pub fn depth_amplitude(&self) -> f64 {
        self.b
    }

    pub fn length_scale(&self) -> f64 {
        self.d
    }

    pub fn offset(&self) -> f64 {
        self.k
    }

    /// Total evaluation; defined for every finite x.
    pub fn value(&self, x: f64) -> f64 {
        let y = x.abs() / self.d - self.k;
        let sech = 1.0 / y.cosh();
        self.a * y.tanh() - self.b * sech * sech
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("NaN position".into()));
        }
        Ok(self.value(x))
    }

    /// Closed-form minima location, barrier height and well depth.
    pub fn geometry(&self) -> RmGeometry {
        let th = (self.a / (2.0 * self.b)).atanh();
        let x0 = (self.k - th) * self.d;
        let tk = self.k.tanh();
        // V(0) - V(x0) expanded; the A^2 term carries 1/(4B) so that this
        // equals evaluate(0) - evaluate(x0) identically.
        let v0 = self.a * self.a / (4.0 * self.b) - self.a * tk + self.b * tk * tk;
        let vd = self.a + self.b + self.a * self.a / (4.0 * self.b);
        RmGeometry { x0, v0, vd }
    }

    /// Classical turning points for V(x0) < E < V(0): bracketed bisection on
    /// each side of the right minimum, seeded by a coarse scan.
    pub fn turning_points(&self, energy: f64) -> Result<TurningPoints> {
        let g = self.geometry();
        let v_top = self.value(0.0);
        let v_min = v_top - g.v0;
        if !(energy > v_min && energy < v_top) {
            return Err(Error::NoBarrier { energy });
        }
        let f = |x: f64| self.value(x) - energy;

        // Inner point in (0, x0): V decreases from V(0) to V(x0).
        let b_inner = bisect(f, 0.0, g.x0, 1e-14 * self.d.max(1.0))?;

        // Outer point in (x0, far): V increases from V(x0) toward A. March
        // outward until the bracket closes.
        let mut hi = g.x0 + self.d;
        let mut guard = 0;
        while f(hi) < 0.0 {
            hi += self.d;
            guard += 1;
            if guard > 10_000 {
                return Err(Error::NoBarrier { energy });
            }
        }
        let c_outer = bisect(f, g.x0, hi, 1e-14 * self.d.max(1.0))?;

        Ok(TurningPoints {
            b_inner,
            c_outer,
            energy,
        })
    }
}

/// Classical turning points around one well at a given energy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TurningPoints {
    /// Inner turning point (barrier side), > 0.
    pub b_inner: f64,
    /// Outer turning point.
    pub c_outer: f64,
    /// Energy at which both were computed.
    pub energy: f64,
}

/// Either potential family, for config-driven dispatch.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum Potential {
    Square(SquareDoubleWell),
    RosenMorse(RosenMorseDouble),
}

impl Potential {
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        match self {
            Potential::Square(w) => w.evaluate(x),
            Potential::RosenMorse(p) => p.evaluate(x),
        }
    }

    pub fn turning_points(&self, energy: f64) -> Result<TurningPoints> {
        match self {
            Potential::Square(w) => w.turning_points(energy),
            Potential::RosenMorse(p) => p.turning_points(energy),
        }
    }
}

/// Reduced mass of the nitrogen atom against the three hydrogens:
/// m = 3 mH mN / (3 mH + mN).
pub fn reduced_mass(m_h: f64, m_n: f64) -> Result<f64> {
    if !(m_h > 0.0 && m_n > 0.0) || !m_h.is_finite() || !m_n.is_finite() {
        return Err(Error::Domain(format!(
            "masses must be positive, got mH = {m_h}, mN = {m_n}"
        )));
    }
    Ok(3.0 * m_h * m_n / (3.0 * m_h + m_n))
}
