//! Analytic levels of the square double well via its transcendental
//! matching conditions.
//!
//! Even states: k cot(kL) + kappa tanh(kappa d/2) = 0.
//! Odd states:  kappa tan(kL) + k tanh(kappa d/2) = 0.
//! Here kappa^2 = k0^2 - k^2 and k0 = sqrt(2 m V0)/hbar.

use crate::error::{Error, Result};
use crate::eigensolver::{BoundState, Parity, UniformGrid};
use crate::numerics::{bisect, secant_polish};
use crate::potentials::SquareDoubleWell;
use crate::units::UnitSystem;

/// Lowest sub-barrier doublet wavenumbers.
#[derive(Debug, Clone, Copy)]
pub struct SquareLevels {
    pub k_even: f64,
    pub k_odd: f64,
    pub k0: f64,
}

impl SquareLevels {
    pub fn energy(&self, k: f64, units: &UnitSystem) -> f64 {
        units.hbar().powi(2) * k * k / (2.0 * units.mass())
    }
}

fn kappa(k0: f64, k: f64) -> f64 {
    (k0 * k0 - k * k).max(0.0).sqrt()
}

fn even_condition(well: &SquareDoubleWell, k0: f64, k: f64) -> f64 {
    let l = well.well_width();
    let kap = kappa(k0, k);
    let kl = k * l;
    k * kl.cos() / kl.sin() + kap * (kap * 0.5 * well.barrier_thickness()).tanh()
}

fn odd_condition(well: &SquareDoubleWell, k0: f64, k: f64) -> f64 {
    let l = well.well_width();
    let kap = kappa(k0, k);
    let kl = k * l;
    kap * kl.sin() / kl.cos() + k * (kap * 0.5 * well.barrier_thickness()).tanh()
}

/// Odd condition divided by kappa. The raw form vanishes identically as
/// kappa -> 0 (k -> k0) whether or not an eigenvalue sits there; this
/// rescaling removes that spurious zero, so root scanning stays honest
/// near the barrier top.
fn odd_condition_scaled(well: &SquareDoubleWell, k0: f64, k: f64) -> f64 {
    let l = well.well_width();
    let kap = kappa(k0, k);
    let kl = k * l;
    let half_d = 0.5 * well.barrier_thickness();
    let tanh_over_kappa = if kap * half_d > 1e-8 {
        (kap * half_d).tanh() / kap
    } else {
        half_d
    };
    kl.sin() / kl.cos() + k * tanh_over_kappa
}

/// Finds the lowest positive root of `f` on (0, k_max] by scanning for sign
/// changes and rejecting pole brackets (where bisection does not drive the
/// residual to zero). The scan includes the endpoint: near-threshold roots
/// can sit within a fraction of a scan step of k_max.
fn lowest_root<F: Fn(f64) -> f64 + Copy>(f: F, k_max: f64, scale: f64) -> Option<f64> {
    const SCAN: usize = 10_000;
    let h = k_max / SCAN as f64;
    let mut prev_k = 0.5 * h;
    let mut prev_f = f(prev_k);
    if prev_f == 0.0 {
        return Some(prev_k);
    }
    for i in 1..=SCAN {
        let k = i as f64 * h;
        let fk = f(k);
        if fk == 0.0 {
            return Some(k);
        }
        if prev_f.signum() != fk.signum() {
            if let Ok(root) = bisect(f, prev_k, k, 0.0) {
                let root = secant_polish(f, root - 1e-9 * k_max, root, prev_k, k, 6);
                if f(root).abs() <= 1e-11 * scale {
                    return Some(root);
                }
                // Sign change across a pole: keep scanning.
            }
        }
        prev_k = k;
        prev_f = fk;
    }
    None
}

/// Lowest even and odd wavenumbers with E < V0, or an error if the even
/// condition has no sub-barrier root.
pub fn solve_square_levels(well: &SquareDoubleWell, units: &UnitSystem) -> Result<SquareLevels> {
    let k0 = (2.0 * units.mass() * well.barrier_height()).sqrt() / units.hbar();
    let l = well.well_width();
    let k_max = (std::f64::consts::PI / l).min(k0) * (1.0 - 1e-12);
    let scale = (k0 * k0).max(1.0);

    let k_even = lowest_root(|k| even_condition(well, k0, k), k_max, scale)
        .ok_or(Error::NoSubBarrierDoublet {
            v0: well.barrier_height(),
        })?;
    let k_odd = lowest_root(|k| odd_condition_scaled(well, k0, k), k_max, scale)
        .ok_or(Error::NoSubBarrierDoublet {
            v0: well.barrier_height(),
        })?;

    if !(k_even < k_odd) {
        return Err(Error::Bracketing(format!(
            "doublet ordering violated: k_even = {k_even}, k_odd = {k_odd}"
        )));
    }
    Ok(SquareLevels { k_even, k_odd, k0 })
}

/// Samples the piecewise analytic wavefunction for a root k of the matching
/// condition of the given parity.
pub fn square_bound_state(
    well: &SquareDoubleWell,
    k: f64,
    parity: Parity,
    n_points: usize,
    units: &UnitSystem,
) -> Result<BoundState> {
    let k0 = (2.0 * units.mass() * well.barrier_height()).sqrt() / units.hbar();
    if !(k > 0.0 && k < k0) {
        return Err(Error::Domain(format!(
            "wavenumber must satisfy 0 < k < k0 = {k0}, got {k}"
        )));
    }
    let residual = match parity {
        Parity::Even => even_condition(well, k0, k),
        Parity::Odd => odd_condition(well, k0, k),
    };
    let scale = (k0 * k0).max(1.0);
    if residual.abs() > 1e-10 * scale {
        return Err(Error::Matching {
            jump: residual.abs(),
        });
    }

    let kap = kappa(k0, k);
    let half_b = well.wall();
    let half_d = 0.5 * well.barrier_thickness();
    let l = well.well_width();
    let sin_kl = (k * l).sin();
    let grid = UniformGrid::symmetric(half_b, n_points);

    let psi: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            match parity {
                Parity::Even => {
                    if x <= -half_d {
                        (k * (x + half_b)).sin()
                    } else if x < half_d {
                        (sin_kl / (kap * half_d).cosh()) * (kap * x).cosh()
                    } else {
                        -(k * (x - half_b)).sin()
                    }
                }
                Parity::Odd => {
                    if x <= -half_d {
                        (k * (x + half_b)).sin()
                    } else if x < half_d {
                        (-sin_kl / (kap * half_d).sinh()) * (kap * x).sinh()
                    } else {
                        (k * (x - half_b)).sin()
                    }
                }
            }
        })
        .collect();

    let energy = units.hbar().powi(2) * k * k / (2.0 * units.mass());
    BoundState::from_samples(grid, psi, energy, Some(k), parity, *units)
}
