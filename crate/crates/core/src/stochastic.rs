//! Osmotic drift fields and Euler-Maruyama sampling of first-passage times.
//!
//! A stationary bound state drives the diffusion
//!     dx = u(x) dt + sqrt(hbar/m) dW,
//! with u = (hbar/m) psi'/psi. The square-well ground state gets the exact
//! piecewise drift; smooth states get a monotone-cubic interpolant of
//! ln rho, whose analytic derivative stays exact on exponential tails.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::SquareWellClosedForm;
use crate::eigensolver::{BoundState, Parity};
use crate::error::{Error, Result};
use crate::first_passage::FptEnsemble;
use crate::numerics::pchip::PchipUniform;
use crate::potentials::Potential;

/// Drift field u(x) of a stationary bound state.
#[derive(Debug, Clone)]
pub struct OsmoticField {
    kind: FieldKind,
    sigma2: f64,
    mass: f64,
    domain: (f64, f64),
    source_energy: f64,
}

#[derive(Debug, Clone)]
enum FieldKind {
    /// Exact piecewise drift of the even square-well ground state.
    SquareEven {
        k: f64,
        kappa: f64,
        half_b: f64,
        half_d: f64,
        /// hbar / m.
        scale: f64,
    },
    /// (sigma^2/2) d(ln rho)/dx from a shape-preserving interpolant.
    Grid { log_density: PchipUniform },
}

impl OsmoticField {
    /// Closed-form drift for the even ground state of a square double well.
    pub fn from_square_even(cf: &SquareWellClosedForm) -> Self {
        let units = *cf.units();
        OsmoticField {
            kind: FieldKind::SquareEven {
                k: cf.wavenumber(),
                kappa: cf.kappa(),
                half_b: cf.well().wall(),
                half_d: 0.5 * cf.well().barrier_thickness(),
                scale: units.sigma_sq(),
            },
            sigma2: units.sigma_sq(),
            mass: units.mass(),
            domain: (-cf.well().wall(), cf.well().wall()),
            source_energy: cf.energy(),
        }
    }

    /// Grid-interpolated drift from a nodeless state. The outermost sample
    /// on each side is dropped (solvers pin it to exactly zero).
    pub fn from_state(state: &BoundState) -> Result<Self> {
        if state.parity != Parity::Even || state.node_count() != 0 {
            return Err(Error::Domain(
                "drift fields require a nodeless (even ground) state".into(),
            ));
        }
        let n = state.grid.n;
        let sign = if state.psi.iter().sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        let interior = &state.psi[1..n - 1];
        if interior.iter().any(|&p| sign * p <= 0.0) {
            return Err(Error::Domain(
                "state density vanishes inside the grid interior".into(),
            ));
        }
        let ln_rho: Vec<f64> = interior.iter().map(|&p| 2.0 * (sign * p).ln()).collect();
        let x0 = state.grid.x(1);
        let log_density = PchipUniform::new(x0, state.grid.step, ln_rho);
        Ok(OsmoticField {
            kind: FieldKind::Grid {
                log_density,
            },
            sigma2: state.units.sigma_sq(),
            mass: state.units.mass(),
            domain: (state.grid.x(1), state.grid.x(n - 2)),
            source_energy: state.energy,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma2
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn source_energy(&self) -> f64 {
        self.source_energy
    }

    /// Drift at x; assumes x is inside the domain.
    #[inline]
    fn drift(&self, x: f64) -> f64 {
        match &self.kind {
            FieldKind::SquareEven {
                k,
                kappa,
                half_b,
                half_d,
                scale,
            } => {
                if x < -half_d {
                    let (s, c) = (k * (x + half_b)).sin_cos();
                    scale * k * c / s
                } else if x > *half_d {
                    let (s, c) = (k * (x - half_b)).sin_cos();
                    scale * k * c / s
                } else {
                    scale * kappa * (kappa * x).tanh()
                }
            }
            FieldKind::Grid { log_density } => 0.5 * self.sigma2 * log_density.derivative(x),
        }
    }

    /// Osmotic velocity with domain checks.
    pub fn velocity(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("NaN position".into()));
        }
        if x < self.domain.0 || x > self.domain.1 {
            return Err(Error::OutOfGrid {
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(self.drift(x))
    }

    /// The same velocity through the density-ratio form (hbar/2m) rho'/rho;
    /// agrees with [`Self::velocity`] to rounding.
    pub fn velocity_from_density_ratio(&self, x: f64) -> Result<f64> {
        match &self.kind {
            FieldKind::SquareEven { .. } => self.velocity(x),
            FieldKind::Grid { log_density } => {
                self.velocity(x)?;
                let rho = log_density.value(x).exp();
                let drho = rho * log_density.derivative(x);
                Ok(0.5 * self.sigma2 * drho / rho)
            }
        }
    }
}

/// Instantaneous energy (m/2) u^2 + V of a stationary-state trajectory.
pub fn instantaneous_energy(field: &OsmoticField, x: f64, potential: &Potential) -> Result<f64> {
    let u = field.velocity(x)?;
    let v = potential.evaluate(x)?;
    Ok(0.5 * field.mass * u * u + v)
}

/// Integration settings for one trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    /// Stream seed; ensembles derive one per trajectory from a base seed.
    pub seed: u64,
    pub x_init: f64,
    /// Absorbing point; None runs a stationary (never-absorbed) trajectory.
    pub absorb_at: Option<f64>,
    /// Reflecting boundary (stop-rule wall or grid edge).
    pub reflect_at: f64,
    pub max_steps: u64,
    /// Path recording stride; 0 = first-passage only, no storage.
    pub record_stride: u64,
    /// Permits horizons shorter than 50x the expected exit time.
    pub override_horizon: bool,
}

impl TrajectoryConfig {
    pub fn validate(&self, field: &OsmoticField, mfpt_estimate: Option<f64>) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Domain(format!("need dt > 0, got {}", self.dt)));
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be positive".into()));
        }
        let (lo, hi) = field.domain();
        if self.reflect_at < lo - 1e-12 * (hi - lo) {
            return Err(Error::Domain(format!(
                "reflecting boundary {} lies outside the drift field domain [{lo}, {hi}]",
                self.reflect_at
            )));
        }
        let right = match self.absorb_at {
            Some(ab) => {
                if ab > hi + 1e-12 * (hi - lo) {
                    return Err(Error::Domain(format!(
                        "absorbing boundary {ab} lies outside the drift field domain [{lo}, {hi}]"
                    )));
                }
                ab
            }
            None => hi,
        };
        if !(self.x_init > self.reflect_at && self.x_init < right) {
            return Err(Error::Domain(format!(
                "start {} must lie strictly inside ({}, {right})",
                self.x_init, self.reflect_at
            )));
        }
        if let Some(est) = mfpt_estimate {
            if !self.override_horizon && (self.max_steps as f64) * self.dt < 50.0 * est {
                return Err(Error::Domain(format!(
                    "horizon {} below 50x the expected exit time {est}; raise max_steps \
                     or set override_horizon",
                    self.max_steps as f64 * self.dt
                )));
            }
        }
        Ok(())
    }

    /// Default timeout: 100x the expected exit time.
    pub fn steps_for_estimate(dt: f64, mfpt_estimate: f64) -> u64 {
        (100.0 * mfpt_estimate / dt).ceil() as u64
    }
}

/// Outcome of a single trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct PassageOutcome {
    /// First time the absorbing boundary was crossed; None = timed out.
    pub tau: Option<f64>,
    pub steps: u64,
    pub clamped_steps: u64,
    /// (t, x) samples every `record_stride` steps.
    pub path: Option<Vec<(f64, f64)>>,
    pub energy: Option<EnergySeries>,
}

/// Instantaneous-energy record along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Time average over every step outside the wall layer (see
    /// `wall_excluded`).
    pub mean: f64,
    /// Minimum of E - V(x) over every step; nonnegative by construction.
    pub min_margin: f64,
    /// Minimum recorded energy inside the square-well barrier, if any step
    /// visited it.
    pub barrier_min: Option<f64>,
    /// Steps excluded from the mean for sitting within half a noise
    /// standard deviation of a reflecting wall. The discrete chain samples
    /// that layer uniformly rather than with the ~z^2 continuum density, so
    /// the divergent u^2 there would give the estimator an infinite mean;
    /// the layer's continuum contribution is O(sqrt(dt)) and excluded.
    pub wall_excluded: u64,
}

struct RawOutcome {
    exit_step: Option<u64>,
    clamped: u64,
    steps: u64,
}

/// Core Euler-Maruyama loop. The observer sees (step, x, u, reflected)
/// before each move, with u unclamped; `reflected` marks positions produced
/// by the boundary reflection map rather than by the SDE step itself.
///
/// Absorption uses Brownian-bridge crossing detection: a step whose
/// endpoints both sit below the boundary still crosses it mid-step with
/// probability exp(-2 (b-x)(b-x') / sigma^2 dt). Endpoint-only detection
/// systematically misses those excursions and overestimates passage times
/// by O(sqrt(dt)).
fn integrate<O: FnMut(u64, f64, f64, bool)>(
    cfg: &TrajectoryConfig,
    field: &OsmoticField,
    mut observe: O,
) -> Result<RawOutcome> {
    let mut rng = Pcg64Mcg::seed_from_u64(cfg.seed);
    let noise_scale = (field.sigma2 * cfg.dt).sqrt();
    // One clamped drift step moves at most 10 noise standard deviations.
    let u_max = 10.0 * (field.sigma2 / cfg.dt).sqrt();
    let absorb = cfg.absorb_at.unwrap_or(f64::INFINITY);
    let right_wall = if cfg.absorb_at.is_some() {
        f64::INFINITY
    } else {
        field.domain.1
    };
    let left_wall = cfg.reflect_at;
    // Bridge crossings are negligible (< 1e-16) beyond this distance.
    let bridge_range = 6.0 * noise_scale;

    let mut x = cfg.x_init;
    let mut clamped = 0u64;
    let mut reflected = false;
    for step in 0..cfg.max_steps {
        let u_raw = field.drift(x);
        observe(step, x, u_raw, reflected);
        let u = if u_raw.abs() > u_max {
            clamped += 1;
            u_max.copysign(u_raw)
        } else {
            u_raw
        };
        let noise: f64 = rng.sample(StandardNormal);
        let mut xn = x + u * cfg.dt + noise_scale * noise;
        if xn >= absorb {
            return Ok(RawOutcome {
                exit_step: Some(step),
                clamped,
                steps: step + 1,
            });
        }
        if absorb - xn < bridge_range && absorb - x < bridge_range {
            let p_cross =
                (-2.0 * (absorb - x) * (absorb - xn) / (field.sigma2 * cfg.dt)).exp();
            let draw: f64 = rng.random();
            if draw < p_cross {
                return Ok(RawOutcome {
                    exit_step: Some(step),
                    clamped,
                    steps: step + 1,
                });
            }
        }
        if !xn.is_finite() {
            return Err(Error::Numerics(format!(
                "non-finite position at step {step}"
            )));
        }
        let mut guard = 0;
        reflected = false;
        while xn < left_wall || xn > right_wall {
            if xn < left_wall {
                xn = 2.0 * left_wall - xn;
            } else {
                xn = 2.0 * right_wall - xn;
            }
            reflected = true;
            guard += 1;
            if guard > 64 {
                return Err(Error::Numerics(format!(
                    "reflection failed to restore the domain at step {step}"
                )));
            }
        }
        if xn == left_wall {
            xn = xn.next_up();
        } else if xn == right_wall {
            xn = xn.next_down();
        }
        x = xn;
    }
    Ok(RawOutcome {
        exit_step: None,
        clamped,
        steps: cfg.max_steps,
    })
}

/// Simulates one trajectory. Passing the potential enables instantaneous
/// energy tracking; `record_stride > 0` stores path/energy samples.
pub fn simulate_first_passage(
    cfg: &TrajectoryConfig,
    field: &OsmoticField,
    potential: Option<&Potential>,
) -> Result<PassageOutcome> {
    cfg.validate(field, None)?;

    let v_at: Option<Box<dyn Fn(f64) -> f64>> = potential.map(|p| match *p {
        Potential::Square(w) => {
            let (half_d, v0) = (0.5 * w.barrier_thickness(), w.barrier_height());
            Box::new(move |x: f64| if x.abs() < half_d { v0 } else { 0.0 })
                as Box<dyn Fn(f64) -> f64>
        }
        Potential::RosenMorse(p) => Box::new(move |x: f64| p.value(x)) as Box<dyn Fn(f64) -> f64>,
    });
    let barrier_half_d = potential.and_then(|p| match p {
        Potential::Square(w) => Some(0.5 * w.barrier_thickness()),
        Potential::RosenMorse(_) => None,
    });

    let stride = cfg.record_stride;
    let mut path = if stride > 0 { Some(Vec::new()) } else { None };
    let mut times = Vec::new();
    let mut energies = Vec::new();
    let mut e_sum = 0.0;
    let mut e_steps = 0u64;
    let mut wall_excluded = 0u64;
    let mut min_margin = f64::INFINITY;
    let mut barrier_min = f64::INFINITY;
    let half_m = 0.5 * field.mass;

    // Wall layer excluded from the energy mean (see EnergySeries docs).
    let wall_margin = 0.5 * (field.sigma2 * cfg.dt).sqrt();
    let left_wall = cfg.reflect_at;
    let right_wall = if cfg.absorb_at.is_some() {
        f64::INFINITY
    } else {
        field.domain().1
    };

    let raw = integrate(cfg, field, |step, x, u, _reflected| {
        let t = step as f64 * cfg.dt;
        if let Some(path) = path.as_mut() {
            if step % stride == 0 {
                path.push((t, x));
            }
        }
        if let Some(v_at) = &v_at {
            let v = v_at(x);
            let e = half_m * u * u + v;
            if x - left_wall > wall_margin && right_wall - x > wall_margin {
                e_sum += e;
                e_steps += 1;
            } else {
                wall_excluded += 1;
            }
            if e - v < min_margin {
                min_margin = e - v;
            }
            if let Some(hd) = barrier_half_d {
                if x.abs() < hd && e < barrier_min {
                    barrier_min = e;
                }
            }
            if stride > 0 && step % stride == 0 {
                times.push(t);
                energies.push(e);
            }
        }
    })?;

    let energy = v_at.map(|_| EnergySeries {
        times,
        energies,
        mean: e_sum / e_steps.max(1) as f64,
        min_margin,
        barrier_min: barrier_min.is_finite().then_some(barrier_min),
        wall_excluded,
    });

    Ok(PassageOutcome {
        tau: raw.exit_step.map(|s| (s + 1) as f64 * cfg.dt),
        steps: raw.steps,
        clamped_steps: raw.clamped,
        path,
        energy,
    })
}

/// Per-trajectory stream seed: splittable, keyed by (base seed, id), so
/// ensembles reproduce bit-exactly regardless of worker scheduling.
pub fn derive_stream_seed(base_seed: u64, trajectory_id: u64) -> u64 {
    splitmix64(base_seed ^ (trajectory_id.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One row of an ensemble run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FptRecord {
    pub trajectory_id: u64,
    pub seed: u64,
    /// None = timed out.
    pub tau: Option<f64>,
    pub steps: u64,
    pub clamped_steps: u64,
}

/// All trajectories of an ensemble, in trajectory order.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleOutcome {
    pub records: Vec<FptRecord>,
}

impl EnsembleOutcome {
    pub fn timed_out(&self) -> usize {
        self.records.iter().filter(|r| r.tau.is_none()).count()
    }

    pub fn total_clamped(&self) -> u64 {
        self.records.iter().map(|r| r.clamped_steps).sum()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.tau).collect()
    }

    pub fn to_ensemble(&self, config_digest: u64) -> Result<FptEnsemble> {
        FptEnsemble::from_taus(self.taus(), self.timed_out(), config_digest)
    }
}

/// Runs `n` independent trajectories in parallel. The template's seed acts
/// as the ensemble base seed; absorption is required.
pub fn run_ensemble(
    template: &TrajectoryConfig,
    n: u64,
    field: &OsmoticField,
    mfpt_estimate: Option<f64>,
) -> Result<EnsembleOutcome> {
    if template.absorb_at.is_none() {
        return Err(Error::Domain(
            "ensembles need an absorbing boundary".into(),
        ));
    }
    template.validate(field, mfpt_estimate)?;
    let records: Vec<FptRecord> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = derive_stream_seed(template.seed, i);
            let cfg = TrajectoryConfig {
                seed,
                record_stride: 0,
                ..*template
            };
            let raw = integrate(&cfg, field, |_, _, _, _| {})?;
            Ok(FptRecord {
                trajectory_id: i,
                seed,
                tau: raw.exit_step.map(|s| (s + 1) as f64 * cfg.dt),
                steps: raw.steps,
                clamped_steps: raw.clamped,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleOutcome { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{solve_square_levels, square_bound_state};
    use crate::potentials::SquareDoubleWell;
    use crate::units::UnitSystem;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference_field() -> (OsmoticField, SquareDoubleWell) {
        let well = SquareDoubleWell::new(6.0, 2.0, 2.0).unwrap();
        let cf = SquareWellClosedForm::new(well, UnitSystem::dimensionless()).unwrap();
        (OsmoticField::from_square_even(&cf), well)
    }

    #[test]
    fn closed_form_drift_shape() {
        let (field, _) = reference_field();
        // Odd through the origin, zero at the center.
        assert_eq!(field.velocity(0.0).unwrap(), 0.0);
        for &x in &[0.3, 0.9, 1.7, 2.5] {
            assert_relative_eq!(
                field.velocity(-x).unwrap(),
                -field.velocity(x).unwrap(),
                max_relative = 1e-12
            );
        }
        // Repulsion away from the left wall.
        assert!(field.velocity(-2.999).unwrap() > 100.0);
        // Outside the walls: domain error.
        assert!(field.velocity(-3.5).is_err());
    }

    #[test]
    fn closed_form_matches_log_derivative() {
        // u must equal (hbar/m) psi'/psi of the analytic state; check in the
        // barrier where psi = C cosh(kappa x).
        let well = SquareDoubleWell::new(6.0, 2.0, 2.0).unwrap();
        let u = UnitSystem::dimensionless();
        let cf = SquareWellClosedForm::new(well, u).unwrap();
        let field = OsmoticField::from_square_even(&cf);
        for &x in &[-0.8, -0.2, 0.4, 0.99] {
            let expected = cf.kappa() * (cf.kappa() * x).tanh();
            assert_relative_eq!(field.velocity(x).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn grid_field_consistency_between_forms() {
        let well = SquareDoubleWell::new(6.0, 2.0, 2.0).unwrap();
        let u = UnitSystem::dimensionless();
        let levels = solve_square_levels(&well, &u).unwrap();
        let state = square_bound_state(
            &well,
            levels.k_even,
            Parity::Even,
            12_001,
            &u,
        )
        .unwrap();
        let grid_field = OsmoticField::from_state(&state).unwrap();
        let cf = SquareWellClosedForm::new(well, u).unwrap();
        let exact = OsmoticField::from_square_even(&cf);
        for &x in &[-2.0, -1.2, -0.5, 0.5, 1.5, 2.2] {
            // The two algebraic forms of the drift agree to rounding.
            assert_relative_eq!(
                grid_field.velocity(x).unwrap(),
                grid_field.velocity_from_density_ratio(x).unwrap(),
                max_relative = 1e-8
            );
            // And the interpolated drift tracks the closed form.
            let a = grid_field.velocity(x).unwrap();
            let b = exact.velocity(x).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-3 * (1.0 + b.abs()));
        }
        // Odd drift for the even source on symmetric points.
        for &x in &[0.4, 1.1, 2.3] {
            let plus = grid_field.velocity(x).unwrap();
            let minus = grid_field.velocity(-x).unwrap();
            assert_abs_diff_eq!(plus + minus, 0.0, epsilon = 1e-10 * plus.abs().max(1.0));
        }
    }

    #[test]
    fn odd_state_is_rejected() {
        let well = SquareDoubleWell::new(6.0, 2.0, 2.0).unwrap();
        let u = UnitSystem::dimensionless();
        let levels = solve_square_levels(&well, &u).unwrap();
        let odd = square_bound_state(&well, levels.k_odd, Parity::Odd, 2001, &u).unwrap();
        assert!(OsmoticField::from_state(&odd).is_err());
    }

    #[test]
    fn instantaneous_energy_floor_in_barrier() {
        let (field, well) = reference_field();
        let pot = Potential::Square(well);
        // E(0) = V0 exactly; inside the barrier E >= V0.
        assert_relative_eq!(
            instantaneous_energy(&field, 0.0, &pot).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        for &x in &[-0.9, -0.3, 0.6] {
            assert!(instantaneous_energy(&field, x, &pot).unwrap() >= 2.0);
        }
    }

    #[test]
    fn seed_determinism_and_sensitivity() {
        let (field, _) = reference_field();
        let cfg = TrajectoryConfig {
            dt: 1e-4,
            seed: 99,
            x_init: -2.0,
            absorb_at: Some(2.0),
            reflect_at: -3.0,
            max_steps: 50_000_000,
            record_stride: 0,
            override_horizon: false,
        };
        let a = simulate_first_passage(&cfg, &field, None).unwrap();
        let b = simulate_first_passage(&cfg, &field, None).unwrap();
        assert_eq!(a.tau, b.tau);
        assert_eq!(a.steps, b.steps);
        let c = simulate_first_passage(
            &TrajectoryConfig { seed: 100, ..cfg },
            &field,
            None,
        )
        .unwrap();
        assert_ne!(a.tau, c.tau);
    }

    #[test]
    fn free_diffusion_mean_exit_time() {
        // u = 0 via a flat state: reflict at 0, absorb at 1, start at 0+:
        // tau = L^2/sigma^2 = 1. Monte Carlo agrees within 3 sigma + dt bias.
        let grid = crate::eigensolver::UniformGrid::new(-0.1, 1.1, 1201);
        let flat = BoundState::from_samples(
            grid,
            vec![1.0; 1201],
            0.0,
            None,
            Parity::Even,
            UnitSystem::dimensionless(),
        )
        .unwrap();
        let field = OsmoticField::from_state(&flat).unwrap();
        let template = TrajectoryConfig {
            dt: 1e-4,
            seed: 4242,
            x_init: 1e-6,
            absorb_at: Some(1.0),
            reflect_at: 0.0,
            max_steps: 2_000_000,
            record_stride: 0,
            override_horizon: false,
        };
        let out = run_ensemble(&template, 2000, &field, Some(1.0)).unwrap();
        assert_eq!(out.timed_out(), 0);
        let ens = out.to_ensemble(0).unwrap();
        let tol = 3.0 * ens.stderr() + 0.02;
        assert!(
            (ens.mean() - 1.0).abs() < tol,
            "mean = {}, tol = {tol}",
            ens.mean()
        );
    }

    #[test]
    fn ensemble_is_reproducible_across_runs() {
        let (field, _) = reference_field();
        let template = TrajectoryConfig {
            dt: 1e-3,
            seed: 7,
            x_init: -2.0,
            absorb_at: Some(2.0),
            reflect_at: -3.0,
            max_steps: 40_000_000,
            record_stride: 0,
            override_horizon: false,
        };
        let a = run_ensemble(&template, 64, &field, None).unwrap();
        let b = run_ensemble(&template, 64, &field, None).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.tau, rb.tau);
            assert_eq!(ra.seed, rb.seed);
        }
    }

    /// KS distance between the folded (|x|) visit histogram and the folded
    /// density. Folding removes the well-exchange mode, whose correlation
    /// time is the mean tunneling time itself (~55 here) and which therefore
    /// needs far longer runs than any within-well statistic.
    fn folded_ks(field: &OsmoticField, state: &BoundState, steps: u64, seed: u64) -> f64 {
        let cfg = TrajectoryConfig {
            dt: 1e-4,
            seed,
            x_init: -2.0,
            absorb_at: None,
            reflect_at: -3.0,
            max_steps: steps,
            record_stride: 0,
            override_horizon: true,
        };
        let nbins = 300usize;
        let width = 3.0 / nbins as f64;
        let mut counts = vec![0u64; nbins];
        let raw = integrate(&cfg, field, |_, x, _, _| {
            let b = ((x.abs() / width) as usize).min(nbins - 1);
            counts[b] += 1;
        })
        .unwrap();
        assert_eq!(raw.steps, cfg.max_steps);

        let cdf = state.density_cdf();
        let folded_cdf_at = |y: f64| -> f64 {
            let hi = cdf[state.grid.nearest(y)];
            let lo = cdf[state.grid.nearest(-y)];
            hi - lo
        };
        let total = steps as f64;
        let mut acc = 0.0;
        let mut d_max = 0.0f64;
        for (i, &c) in counts.iter().enumerate() {
            acc += c as f64 / total;
            let edge = width * (i + 1) as f64;
            d_max = d_max.max((acc - folded_cdf_at(edge)).abs());
        }
        d_max
    }

    #[test]
    fn stationary_histogram_matches_density() {
        let (field, well) = reference_field();
        let u = UnitSystem::dimensionless();
        let levels = solve_square_levels(&well, &u).unwrap();
        let state = square_bound_state(&well, levels.k_even, Parity::Even, 6001, &u).unwrap();

        // KS distance decreases with trajectory length and drops below the
        // 0.01 desk-scale threshold.
        let d_short = folded_ks(&field, &state, 2_000_000, 31337);
        let d_long = folded_ks(&field, &state, 200_000_000, 31337);
        assert!(d_long < d_short, "KS must shrink: {d_short} -> {d_long}");
        assert!(d_long < 0.01, "KS distance = {d_long}");
    }

    #[test]
    fn stationary_wells_stay_balanced() {
        // The left/right occupancy split equilibrates at the well-exchange
        // rate; with T / tau ~ 360 exchanges it should sit within a few
        // percent of one half.
        let (field, _) = reference_field();
        let cfg = TrajectoryConfig {
            dt: 1e-3,
            seed: 271828,
            x_init: -2.0,
            absorb_at: None,
            reflect_at: -3.0,
            max_steps: 20_000_000,
            record_stride: 0,
            override_horizon: true,
        };
        let mut left = 0u64;
        let raw = integrate(&cfg, &field, |_, x, _, _| {
            if x < 0.0 {
                left += 1;
            }
        })
        .unwrap();
        let frac = left as f64 / raw.steps as f64;
        // ~360 exchanges -> std of the split ~ 0.5/sqrt(360) ~ 0.026.
        assert!((frac - 0.5).abs() < 0.08, "left-well occupancy = {frac}");
    }

    #[test]
    fn energy_tracking_along_trajectory() {
        let (field, well) = reference_field();
        let pot = Potential::Square(well);
        let cfg = TrajectoryConfig {
            dt: 1e-4,
            seed: 11,
            x_init: -2.0,
            absorb_at: None,
            reflect_at: -3.0,
            max_steps: 4_000_000,
            record_stride: 100,
            override_horizon: true,
        };
        let out = simulate_first_passage(&cfg, &field, Some(&pot)).unwrap();
        let e = out.energy.unwrap();
        assert_eq!(e.times.len(), e.energies.len());
        // Energy never dips below the local potential.
        assert!(e.min_margin >= 0.0);
        // Barrier excursions always carry E >= V0.
        assert!(e.barrier_min.unwrap() >= well.barrier_height());
        // Long-run average near the ground energy (10% band at this length).
        let e0 = field.source_energy();
        assert!((e.mean - e0).abs() / e0 < 0.10, "mean = {}, E0 = {e0}", e.mean);
        let path = out.path.unwrap();
        assert_eq!(path.len(), 40_000);
    }

    #[test]
    fn timeout_is_recorded_not_dropped() {
        let (field, _) = reference_field();
        let template = TrajectoryConfig {
            dt: 1e-4,
            seed: 5,
            x_init: -2.0,
            absorb_at: Some(2.0),
            reflect_at: -3.0,
            max_steps: 100, // far below the ~5e5-step passage scale
            record_stride: 0,
            override_horizon: true,
        };
        let out = run_ensemble(&template, 8, &field, None).unwrap();
        assert_eq!(out.timed_out(), 8);
        assert!(out.records.iter().all(|r| r.tau.is_none() && r.steps == 100));
        // All-timeout batches cannot form statistics.
        assert!(out.to_ensemble(0).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let (field, _) = reference_field();
        let good = TrajectoryConfig {
            dt: 1e-4,
            seed: 1,
            x_init: -2.0,
            absorb_at: Some(2.0),
            reflect_at: -3.0,
            max_steps: 1000,
            record_stride: 0,
            override_horizon: false,
        };
        assert!(TrajectoryConfig { dt: 0.0, ..good }.validate(&field, None).is_err());
        assert!(TrajectoryConfig { x_init: 2.5, ..good }.validate(&field, None).is_err());
        assert!(TrajectoryConfig {
            absorb_at: Some(4.0),
            ..good
        }
        .validate(&field, None)
        .is_err());
        // Horizon rule: 1000 steps x 1e-4 = 0.1 << 50 * tau.
        assert!(good.validate(&field, Some(55.0)).is_err());
        assert!(TrajectoryConfig {
            override_horizon: true,
            ..good
        }
        .validate(&field, Some(55.0))
        .is_ok());
    }
}
