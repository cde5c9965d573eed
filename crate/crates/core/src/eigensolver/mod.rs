//! Bound-state solvers: analytic matching for the square double well and
//! Numerov shooting for smooth potentials.

mod numerov;
mod square;

pub use numerov::{numerov_bound_state, numerov_bound_state_fn, rm_grid, GridSpec, Level};
pub use square::{solve_square_levels, square_bound_state, SquareLevels};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{trapezoid_prefix, trapezoid_uniform};
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Uniformly spaced position grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, n: usize) -> Self {
        assert!(n >= 3 && end > start);
        UniformGrid {
            start,
            step: (end - start) / (n as f64 - 1.0),
            n,
        }
    }

    /// Grid symmetric about the origin; odd point counts include x = 0.
    pub fn symmetric(half_width: f64, n: usize) -> Self {
        Self::new(-half_width, half_width, n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start - 1e-12 * self.step && x <= self.end() + 1e-12 * self.step
    }

    /// Index of the cell containing x, clamped to valid cells.
    pub fn cell(&self, x: f64) -> usize {
        let t = (x - self.start) / self.step;
        (t.floor() as isize).clamp(0, self.n as isize - 2) as usize
    }

    /// Index of the nearest node.
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x - self.start) / self.step).round() as isize;
        t.clamp(0, self.n as isize - 1) as usize
    }
}

/// A normalized bound state sampled on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundState {
    /// Eigenvalue in working energy units.
    pub energy: f64,
    /// Wavenumber k = sqrt(2mE)/hbar; populated for square-well states.
    pub wavenumber: Option<f64>,
    pub grid: UniformGrid,
    pub psi: Vec<f64>,
    pub parity: Parity,
    /// Pre-normalization integral of |psi|^2.
    pub norm_check: f64,
    pub units: UnitSystem,
}

impl BoundState {
    /// Builds a state from raw samples, normalizing in place.
    pub(crate) fn from_samples(
        grid: UniformGrid,
        mut psi: Vec<f64>,
        energy: f64,
        wavenumber: Option<f64>,
        parity: Parity,
        units: UnitSystem,
    ) -> Result<Self> {
        if psi.len() != grid.n {
            return Err(Error::Numerics("sample count does not match grid".into()));
        }
        let density: Vec<f64> = psi.iter().map(|p| p * p).collect();
        let norm_check = trapezoid_uniform(&density, grid.step);
        if !(norm_check > 0.0) || !norm_check.is_finite() {
            return Err(Error::Numerics(format!(
                "non-normalizable samples: integral = {norm_check}"
            )));
        }
        let scale = norm_check.sqrt().recip();
        for p in &mut psi {
            *p *= scale;
        }
        Ok(BoundState {
            energy,
            wavenumber,
            grid,
            psi,
            parity,
            norm_check,
            units,
        })
    }

    /// Linear interpolation of psi between grid nodes.
    pub fn psi_at(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfGrid {
                x,
                lo: self.grid.start,
                hi: self.grid.end(),
            });
        }
        let i = self.grid.cell(x);
        let t = (x - self.grid.x(i)) / self.grid.step;
        Ok(self.psi[i] * (1.0 - t) + self.psi[i + 1] * t)
    }

    /// |psi|^2 at x.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        Ok(self.psi_at(x)?.powi(2))
    }

    /// Integral of |psi|^2 on the grid; 1 after normalization.
    pub fn norm(&self) -> f64 {
        let density: Vec<f64> = self.psi.iter().map(|p| p * p).collect();
        trapezoid_uniform(&density, self.grid.step)
    }

    /// Interior sign changes, ignoring samples below a noise floor.
    pub fn node_count(&self) -> usize {
        let floor = 1e-9 * self.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let mut count = 0;
        let mut last_sign = 0i8;
        for &p in &self.psi {
            if p.abs() <= floor {
                continue;
            }
            let s = if p > 0.0 { 1 } else { -1 };
            if last_sign != 0 && s != last_sign {
                count += 1;
            }
            last_sign = s;
        }
        count
    }

    /// Max relative deviation from psi(x) = +/- psi(-x) on matched nodes;
    /// only meaningful for grids symmetric about the origin.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.grid.n;
        let scale = self.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let sign = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut worst = 0.0f64;
        for i in 0..n / 2 {
            let diff = (self.psi[i] - sign * self.psi[n - 1 - i]).abs();
            worst = worst.max(diff / scale);
        }
        worst
    }

    /// Variational energy <psi|H|psi> by quadrature, with the kinetic part
    /// integrated by parts: (hbar^2/2m) psi'^2 + V psi^2.
    pub fn energy_expectation<V: Fn(f64) -> f64>(&self, v: V) -> f64 {
        let h = self.grid.step;
        let n = self.grid.n;
        let kin_coef = self.units.hbar().powi(2) / (2.0 * self.units.mass());
        let mut integrand = vec![0.0; n];
        for i in 0..n {
            let dpsi = if i == 0 {
                (self.psi[1] - self.psi[0]) / h
            } else if i == n - 1 {
                (self.psi[n - 1] - self.psi[n - 2]) / h
            } else {
                (self.psi[i + 1] - self.psi[i - 1]) / (2.0 * h)
            };
            integrand[i] = kin_coef * dpsi * dpsi + v(self.grid.x(i)) * self.psi[i] * self.psi[i];
        }
        trapezoid_uniform(&integrand, h)
    }

    /// Cumulative distribution of |psi|^2 at every node.
    pub fn density_cdf(&self) -> Vec<f64> {
        let density: Vec<f64> = self.psi.iter().map(|p| p * p).collect();
        trapezoid_prefix(&density, self.grid.step)
    }
}

/// Ground / first-excited doublet with its splitting and oscillation period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumPair {
    pub e0: f64,
    pub e1: f64,
    pub delta_e: f64,
    /// T = 2 pi hbar / delta_e in working time units.
    pub period: f64,
}

/// Packs two ordered levels into a SpectrumPair.
pub fn spectrum_pair(e0: f64, e1: f64, units: &UnitSystem) -> Result<SpectrumPair> {
    if !(e1 > e0) {
        return Err(Error::EnergyOrdering { e0, e1 });
    }
    let delta_e = e1 - e0;
    Ok(SpectrumPair {
        e0,
        e1,
        delta_e,
        period: units.period_from_splitting(delta_e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectrum_pair_examples() {
        let u = UnitSystem::dimensionless();
        let p = spectrum_pair(1.0, 1.0 + 2.0 * std::f64::consts::PI, &u).unwrap();
        assert_relative_eq!(p.period, 1.0, max_relative = 1e-14);
        assert_eq!(p.delta_e, 2.0 * std::f64::consts::PI);
        assert!(spectrum_pair(1.0, 1.0, &u).is_err());

        let us = UnitSystem::spectroscopic(2.4866).unwrap();
        let pair = spectrum_pair(0.0, 0.8, &us).unwrap();
        assert_relative_eq!(pair.period, 41.695, max_relative = 1e-4);
        assert_relative_eq!(
            us.frequency_ghz_from_period(pair.period).unwrap(),
            23.98,
            max_relative = 1e-3
        );
    }

    #[test]
    fn grid_indexing() {
        let g = UniformGrid::symmetric(3.0, 7);
        assert_eq!(g.x(3), 0.0);
        assert_eq!(g.step, 1.0);
        assert_eq!(g.cell(0.4), 3);
        assert_eq!(g.nearest(0.6), 4);
        assert!(g.contains(3.0) && !g.contains(3.1));
    }
}
