//! Closed-form and asymptotic results for double-well tunneling times:
//! the square-well mean-exit-time formula and its high-barrier limit, the
//! doublet-splitting asymptotics, and WKB barrier/period quantities for
//! smooth wells.

use serde::Serialize;

use crate::eigensolver::{solve_square_levels, BoundState};
use crate::error::{Error, Result};
use crate::numerics::gauss::GaussLegendre;
use crate::potentials::{RosenMorseDouble, SquareDoubleWell, TurningPoints};
use crate::units::UnitSystem;

/// Square double well with its solved ground wavenumber and decay constant:
/// kappa^2 = k0^2 - k^2, k0 = sqrt(2 m V0)/hbar.
#[derive(Debug, Clone, Copy)]
pub struct SquareWellClosedForm {
    well: SquareDoubleWell,
    k: f64,
    kappa: f64,
    k0: f64,
    units: UnitSystem,
}

impl SquareWellClosedForm {
    /// Solves the even matching condition for the ground wavenumber.
    pub fn new(well: SquareDoubleWell, units: UnitSystem) -> Result<Self> {
        let levels = solve_square_levels(&well, &units)?;
        Ok(Self::assemble(well, levels.k_even, levels.k0, units))
    }

    /// Builds from an externally supplied ground wavenumber; `k` must solve
    /// the even condition (validated through the eigensolver).
    pub fn from_wavenumber(well: SquareDoubleWell, k: f64, units: UnitSystem) -> Result<Self> {
        // square_bound_state re-checks the matching residual.
        crate::eigensolver::square_bound_state(
            &well,
            k,
            crate::eigensolver::Parity::Even,
            64,
            &units,
        )?;
        let k0 = (2.0 * units.mass() * well.barrier_height()).sqrt() / units.hbar();
        Ok(Self::assemble(well, k, k0, units))
    }

    fn assemble(well: SquareDoubleWell, k: f64, k0: f64, units: UnitSystem) -> Self {
        SquareWellClosedForm {
            well,
            k,
            kappa: (k0 * k0 - k * k).sqrt(),
            k0,
            units,
        }
    }

    pub fn well(&self) -> &SquareDoubleWell {
        &self.well
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn energy(&self) -> f64 {
        self.units.hbar().powi(2) * self.k * self.k / (2.0 * self.units.mass())
    }
}

/// Mean exit time of the even ground state across the barrier, between the
/// barrier edges -d/2 and +d/2 with the reflecting wall at -b/2.
pub fn dsw_mean_tau(cf: &SquareWellClosedForm) -> f64 {
    mean_tau_formula(
        cf.units.mass(),
        cf.units.hbar(),
        cf.well.well_width(),
        cf.well.barrier_thickness(),
        cf.k,
        cf.kappa,
        cf.k0,
    )
}

/// The raw formula, kept separate so the vanishing-barrier limit can be
/// exercised directly.
pub(crate) fn mean_tau_formula(
    m: f64,
    hbar: f64,
    l: f64,
    d: f64,
    k: f64,
    kappa: f64,
    k0: f64,
) -> f64 {
    let kd = kappa * d;
    // tanh(kd/2)/kappa and sinh(kd)/kappa are finite as kappa -> 0.
    let (tanh_half_over_kappa, sinh_over_kappa) = if kd > 1e-6 {
        ((0.5 * kd).tanh() / kappa, kd.sinh() / kappa)
    } else {
        (0.5 * d * (1.0 - kd * kd / 12.0), d * (1.0 + kd * kd / 6.0))
    };
    let r = k0 * k0 / (2.0 * k * k);
    let bracket = 0.5 * d + l * (1.0 - r + r * kd.cosh()) + r * sinh_over_kappa;
    (2.0 * m / hbar) * tanh_half_over_kappa * bracket
}

/// High-barrier limit of [`dsw_mean_tau`] with validity diagnostics. The
/// leading relative error is 1/(kappa L), so the limit is only tight when
/// both kappa d and kappa L are large.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HighBarrierTau {
    pub tau: f64,
    pub kappa_d: f64,
    pub kappa_l: f64,
}

pub fn dsw_mean_tau_high_barrier(cf: &SquareWellClosedForm) -> HighBarrierTau {
    let m = cf.units.mass();
    let hbar = cf.units.hbar();
    let l = cf.well.well_width();
    let d = cf.well.barrier_thickness();
    let tau =
        m * l * cf.k0 * cf.k0 / (2.0 * hbar * cf.kappa * cf.k * cf.k) * (cf.kappa * d).exp();
    HighBarrierTau {
        tau,
        kappa_d: cf.kappa * d,
        kappa_l: cf.kappa * l,
    }
}

/// High-barrier doublet splitting and probability oscillation period. The
/// two expressions are exact inverses: period * delta_e = 2 pi hbar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplittingPeriod {
    pub delta_e: f64,
    pub period: f64,
}

pub fn dsw_splitting_and_period(cf: &SquareWellClosedForm) -> SplittingPeriod {
    let m = cf.units.mass();
    let hbar = cf.units.hbar();
    let l = cf.well.well_width();
    let d = cf.well.barrier_thickness();
    let delta_e = 4.0 * hbar * hbar * cf.k * cf.k / (l * cf.kappa * m) * (-cf.kappa * d).exp();
    let period = std::f64::consts::PI * l * cf.kappa * m / (2.0 * hbar * cf.k * cf.k)
        * (cf.kappa * d).exp();
    SplittingPeriod { delta_e, period }
}

/// WKB quantities for a symmetric double well at energy E:
/// the barrier integral Phi, the in-well classical period, and the derived
/// tunneling-time and splitting estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WkbQuantities {
    /// Barrier attenuation integral over (-b, b).
    pub phi: f64,
    /// Classical round-trip period between the turning points of one well.
    pub t_cl: f64,
    /// Mean tunneling-time estimate e^Phi T_cl.
    pub tau_wkb: f64,
    /// Probability oscillation period estimate pi e^Phi T_cl.
    pub t_big_wkb: f64,
    /// Splitting estimate (2 hbar / T_cl) e^-Phi.
    pub delta_e_wkb: f64,
    /// Max of the WKB validity expression away from the turning points;
    /// the approximation needs this small against 1.
    pub validity_max: f64,
}

/// WKB quantities for a Rosen-Morse double well.
pub fn wkb_quantities(
    pot: &RosenMorseDouble,
    energy: f64,
    tp: &TurningPoints,
    units: &UnitSystem,
) -> Result<WkbQuantities> {
    wkb_quantities_fn(|x| pot.value(x), energy, tp, units)
}

/// Same for an arbitrary symmetric potential.
pub fn wkb_quantities_fn<V: Fn(f64) -> f64>(
    v: V,
    energy: f64,
    tp: &TurningPoints,
    units: &UnitSystem,
) -> Result<WkbQuantities> {
    if (tp.energy - energy).abs() > 1e-9 * energy.abs().max(1.0) {
        return Err(Error::Domain(
            "turning points were computed at a different energy".into(),
        ));
    }
    let phi = barrier_integral(&v, energy, tp.b_inner, units)?;
    let t_cl = classical_period(&v, energy, tp.b_inner, tp.c_outer, units)?;
    let boost = phi.exp();
    let tau_wkb = boost * t_cl;
    let t_big_wkb = std::f64::consts::PI * tau_wkb;
    let delta_e_wkb = 2.0 * units.hbar() / t_cl / boost;

    // Validity diagnostic: (hbar^2/2m) |V'| / |E - V|^(3/2), sampled away
    // from the turning points where it formally diverges.
    let mut validity_max: f64 = 0.0;
    let span = tp.c_outer;
    let dx = 1e-5 * span;
    let margin = 0.04 * (tp.c_outer - tp.b_inner);
    let coef = units.hbar().powi(2) / (2.0 * units.mass());
    let mut x = -tp.c_outer + margin;
    while x < tp.c_outer - margin {
        if (x - tp.b_inner).abs() > margin && (x + tp.b_inner).abs() > margin {
            let dv = (v(x + dx) - v(x - dx)) / (2.0 * dx);
            let gap = (energy - v(x)).abs();
            if gap > 0.0 {
                validity_max = validity_max.max(coef * dv.abs() / gap.powf(1.5));
            }
        }
        x += span / 200.0;
    }

    Ok(WkbQuantities {
        phi,
        t_cl,
        tau_wkb,
        t_big_wkb,
        delta_e_wkb,
        validity_max,
    })
}

/// Barrier integral Phi = int_{-b}^{b} kappa(x) dx for a symmetric barrier.
/// The integrand vanishes like sqrt at the turning points; substituting
/// x = b - s^2 regularizes it for Gauss-Legendre.
pub fn barrier_integral<V: Fn(f64) -> f64>(
    v: &V,
    energy: f64,
    b_inner: f64,
    units: &UnitSystem,
) -> Result<f64> {
    if !(b_inner > 0.0) {
        return Err(Error::Domain(format!(
            "inner turning point must be positive, got {b_inner}"
        )));
    }
    let coef = 2.0 * units.mass() / units.hbar().powi(2);
    let gl = GaussLegendre::new(64);
    let half = gl.integrate(0.0, b_inner.sqrt(), |s| {
        let x = b_inner - s * s;
        let q = (coef * (v(x) - energy)).max(0.0);
        2.0 * s * q.sqrt()
    });
    Ok(2.0 * half)
}

/// Classical round-trip period 2 int_b^c dx / v_cl between the turning
/// points of one well. Both endpoint singularities are removed by the
/// x = b + s^2 / x = c - s^2 substitutions.
pub fn classical_period<V: Fn(f64) -> f64>(
    v: &V,
    energy: f64,
    b: f64,
    c: f64,
    units: &UnitSystem,
) -> Result<f64> {
    if !(c > b) {
        return Err(Error::Domain(format!("need b < c, got b = {b}, c = {c}")));
    }
    let coef = 2.0 * units.mass() / units.hbar().powi(2);
    let gl = GaussLegendre::new(64);
    let mid = 0.5 * (b + c);
    let k_at = |x: f64| (coef * (energy - v(x))).max(0.0).sqrt();
    let left = gl.integrate(0.0, (mid - b).sqrt(), |s| {
        let x = b + s * s;
        let k = k_at(x);
        if k > 0.0 {
            2.0 * s / k
        } else {
            0.0
        }
    });
    let right = gl.integrate(0.0, (c - mid).sqrt(), |s| {
        let x = c - s * s;
        let k = k_at(x);
        if k > 0.0 {
            2.0 * s / k
        } else {
            0.0
        }
    });
    Ok(2.0 * units.mass() / units.hbar() * (left + right))
}

/// Ratio of the two-state tunneling time to the mean exit time; pi/2 in the
/// high-barrier limit.
pub fn qm_sq_ratio(tau_qm: f64, tau_bar: f64) -> Result<f64> {
    if !(tau_qm > 0.0 && tau_bar > 0.0) {
        return Err(Error::Domain(format!(
            "times must be positive, got tau_qm = {tau_qm}, tau_bar = {tau_bar}"
        )));
    }
    Ok(tau_qm / tau_bar)
}

/// Tunneling frequency 1/(pi tau_bar) in working units.
pub fn sq_frequency(tau_bar: f64) -> Result<f64> {
    if !(tau_bar > 0.0) {
        return Err(Error::Domain(format!(
            "mean exit time must be positive, got {tau_bar}"
        )));
    }
    Ok(1.0 / (std::f64::consts::PI * tau_bar))
}

/// Two-state tunneling time tau_QM = T/2 = pi hbar / delta_e.
pub fn tau_qm_from_splitting(delta_e: f64, units: &UnitSystem) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(Error::Domain(format!(
            "splitting must be positive, got {delta_e}"
        )));
    }
    Ok(0.5 * units.period_from_splitting(delta_e))
}

/// Variational cross-check: <psi|H|psi> from a sampled state.
pub fn state_energy_expectation(state: &BoundState, pot: &RosenMorseDouble) -> f64 {
    state.energy_expectation(|x| pot.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cf(b: f64, d: f64, v0: f64) -> SquareWellClosedForm {
        let well = SquareDoubleWell::new(b, d, v0).unwrap();
        SquareWellClosedForm::new(well, UnitSystem::dimensionless()).unwrap()
    }

    #[test]
    fn wavenumber_identity() {
        let c = cf(6.0, 2.0, 2.0);
        assert_relative_eq!(
            c.kappa() * c.kappa() + c.wavenumber() * c.wavenumber(),
            c.k0() * c.k0(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mean_tau_reference_magnitude() {
        // b = 6, d = 2, V0 = 2, hbar = m = 1: the barrier-edge window value
        // sits in the several-tens range; the quadrature oracle pins it to
        // 0.1% in the integration tests.
        let c = cf(6.0, 2.0, 2.0);
        let tau = dsw_mean_tau(&c);
        assert!(tau > 40.0 && tau < 60.0, "tau = {tau}");
    }

    #[test]
    fn mean_tau_finite_at_vanishing_barrier() {
        // kappa d -> 0 keeps the formula finite and continuous.
        let near = mean_tau_formula(1.0, 1.0, 2.0, 2.0, 1.0, 1e-7, 1.0);
        let at = mean_tau_formula(1.0, 1.0, 2.0, 2.0, 1.0, 0.0, 1.0);
        assert!(near.is_finite() && at.is_finite());
        assert_relative_eq!(near, at, max_relative = 1e-8);
        // Explicit kappa = 0 value: (2m/hbar)(d/2)[d/2 + L + r L + r d].
        let r = 0.5;
        let expected = 2.0 * 1.0 * (0.5 * 2.0 + 2.0 * (1.0 - r + r) + r * 2.0);
        assert_relative_eq!(at, expected, max_relative = 1e-12);
    }

    #[test]
    fn mean_tau_grows_exponentially_with_k0() {
        // Fixed d: monotone growth, log-linear slope -> d at large k0.
        let d = 2.0;
        let mut prev_tau = 0.0;
        let mut prev_k0 = 0.0;
        let mut last_slope = 0.0;
        for i in 0..14 {
            let k0 = 2.0 + 0.5 * i as f64;
            let v0 = 0.5 * k0 * k0;
            let c = cf(6.0, d, v0);
            let tau = dsw_mean_tau(&c);
            assert!(tau > prev_tau, "tau must grow with k0");
            if prev_tau > 0.0 {
                last_slope = (tau.ln() - prev_tau.ln()) / (k0 - prev_k0);
            }
            prev_tau = tau;
            prev_k0 = k0;
        }
        assert_relative_eq!(last_slope, d, max_relative = 0.06);
    }

    #[test]
    fn high_barrier_limit_converges_monotonically() {
        // Ratio exact/limit decreases toward 1 once kappa d >= 4; the
        // leading error term is 1/(kappa L).
        let mut prev_ratio = f64::INFINITY;
        for &v0 in &[4.0, 8.0, 16.0, 32.0, 64.0, 128.0] {
            let c = cf(6.0, 2.0, v0);
            let hb = dsw_mean_tau_high_barrier(&c);
            if hb.kappa_d < 4.0 {
                continue;
            }
            let ratio = dsw_mean_tau(&c) / hb.tau;
            assert!(ratio > 1.0, "exact exceeds limit, ratio = {ratio}");
            assert!(ratio < prev_ratio, "ratio must decrease");
            prev_ratio = ratio;
            assert_relative_eq!(ratio - 1.0, 1.0 / hb.kappa_l, max_relative = 0.25);
        }
        assert!(prev_ratio < 1.06);
    }

    #[test]
    fn high_barrier_within_five_percent_for_thin_barrier() {
        // kappa d ~ 10 with d = 1 puts kappa L ~ 25: within 5%.
        let c = cf(6.0, 1.0, 50.7);
        let hb = dsw_mean_tau_high_barrier(&c);
        assert!(
            hb.kappa_d > 9.0 && hb.kappa_d < 11.0,
            "kappa d = {}",
            hb.kappa_d
        );
        let ratio = dsw_mean_tau(&c) / hb.tau;
        assert!((ratio - 1.0).abs() < 0.05, "ratio = {ratio}");
    }

    #[test]
    fn splitting_period_are_exact_inverses() {
        for &v0 in &[2.0, 10.0, 50.0] {
            let c = cf(6.0, 2.0, v0);
            let sp = dsw_splitting_and_period(&c);
            assert_relative_eq!(
                sp.period * sp.delta_e,
                2.0 * std::f64::consts::PI,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn asymptotic_splitting_matches_exact_roots() {
        // V0 = 50: asymptotic splitting within 10% of the exact doublet.
        let u = UnitSystem::dimensionless();
        let well = SquareDoubleWell::new(6.0, 2.0, 50.0).unwrap();
        let levels = solve_square_levels(&well, &u).unwrap();
        let de_exact = 0.5 * (levels.k_odd * levels.k_odd - levels.k_even * levels.k_even);
        let c = cf(6.0, 2.0, 50.0);
        let sp = dsw_splitting_and_period(&c);
        assert_relative_eq!(sp.delta_e, de_exact, max_relative = 0.10);
    }

    #[test]
    fn exact_ratio_approaches_half_pi() {
        // Exact doublet half-period over exact mean exit time: the leading
        // corrections cancel, leaving the ratio within a fraction of a
        // percent of pi/2 already at V0 = 50.
        let u = UnitSystem::dimensionless();
        let well = SquareDoubleWell::new(6.0, 2.0, 50.0).unwrap();
        let levels = solve_square_levels(&well, &u).unwrap();
        let de = 0.5 * (levels.k_odd * levels.k_odd - levels.k_even * levels.k_even);
        let tau_qm = tau_qm_from_splitting(de, &u).unwrap();
        let c = cf(6.0, 2.0, 50.0);
        let ratio = qm_sq_ratio(tau_qm, dsw_mean_tau(&c)).unwrap();
        assert_relative_eq!(ratio, std::f64::consts::FRAC_PI_2, max_relative = 0.02);
    }

    #[test]
    fn ratio_and_frequency_basics() {
        assert_relative_eq!(
            qm_sq_ratio(std::f64::consts::FRAC_PI_2 * 3.0, 3.0).unwrap(),
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-15
        );
        assert!(qm_sq_ratio(-1.0, 1.0).is_err());
        assert_relative_eq!(
            sq_frequency(1.0 / std::f64::consts::PI).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn harmonic_classical_period_is_energy_independent() {
        // V = x^2/2 (hbar = m = omega = 1): full round trip 2 pi at any E.
        let u = UnitSystem::dimensionless();
        let v = |x: f64| 0.5 * x * x;
        for &e in &[0.05f64, 0.5, 2.0, 11.0] {
            let x_t = (2.0 * e).sqrt();
            let t_cl = classical_period(&v, e, -x_t, x_t, &u).unwrap();
            assert_relative_eq!(t_cl, 2.0 * std::f64::consts::PI, max_relative = 1e-8);
        }
    }

    #[test]
    fn wkb_internal_identities() {
        let pot = RosenMorseDouble::new(398.0, 2810.0, 0.17, 2.22).unwrap();
        let u = UnitSystem::spectroscopic(2.4866).unwrap();
        let g = pot.geometry();
        let e = pot.value(g.x0) + 600.0;
        let tp = pot.turning_points(e).unwrap();
        let w = wkb_quantities(&pot, e, &tp, &u).unwrap();
        assert_relative_eq!(
            w.tau_wkb / w.t_big_wkb,
            1.0 / std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            w.t_big_wkb,
            2.0 * std::f64::consts::PI * u.hbar() / w.delta_e_wkb,
            max_relative = 1e-12
        );
        assert!(w.phi > 0.0 && w.t_cl > 0.0);
        assert!(w.validity_max.is_finite());
    }
}
