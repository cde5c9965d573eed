//! Unit systems: dimensionless (hbar = m = 1) and spectroscopic (cm^-1, Angstrom, ps).
//!
//! The spectroscopic system works internally in "natural" units built from
//! the energy unit hc * 1 cm^-1, the length unit 1 Angstrom and the time unit
//! 1 ps, so that energies read directly in cm^-1, lengths in Angstrom and
//! times in ps. Masses are converted from atomic mass units at construction.

use serde::Serialize;

use crate::error::{Error, Result};

/// Planck constant, J s (exact SI value).
pub const H_JOULE_S: f64 = 6.626_070_15e-34;

/// Speed of light, cm/s (exact SI value).
pub const C_CM_PER_S: f64 = 2.997_924_58e10;

/// Energy of one wavenumber quantum: hc * 1 cm^-1, in joules.
pub const HC_JOULE_CM: f64 = 1.986_445_857_1e-23;

/// hbar expressed in cm^-1 * ps, the action unit of the spectroscopic system.
pub const HBAR_CM_PS: f64 = 1.0e12 / (2.0 * std::f64::consts::PI * C_CM_PER_S);

/// Atomic mass constant, kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;

/// Natural mass unit of the spectroscopic system, kg:
/// (hc cm^-1) * ps^2 / Angstrom^2.
pub const NATURAL_MASS_KG: f64 = HC_JOULE_CM * 1.0e-4;

/// Conversion factor from atomic mass units to spectroscopic natural mass.
pub const AMU_TO_NATURAL: f64 = AMU_KG / NATURAL_MASS_KG;

/// Atomic masses of hydrogen (1H) and nitrogen (14N), in u.
pub const M_HYDROGEN_AMU: f64 = 1.007_825;
pub const M_NITROGEN_AMU: f64 = 14.003_074;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitMode {
    Dimensionless,
    Spectroscopic,
}

/// Active unit system: holds hbar and the particle mass in working units
/// plus the fixed conversion constants of the spectroscopic system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnitSystem {
    mode: UnitMode,
    hbar: f64,
    mass: f64,
}

impl UnitSystem {
    /// Dimensionless system: hbar = 1 and mass = 1 exactly.
    pub fn dimensionless() -> Self {
        UnitSystem {
            mode: UnitMode::Dimensionless,
            hbar: 1.0,
            mass: 1.0,
        }
    }

    /// Spectroscopic system for a particle of the given mass in u.
    /// Working units: energy cm^-1, length Angstrom, time ps.
    pub fn spectroscopic(mass_amu: f64) -> Result<Self> {
        if !(mass_amu > 0.0) || !mass_amu.is_finite() {
            return Err(Error::Domain(format!(
                "particle mass must be positive and finite, got {mass_amu} u"
            )));
        }
        Ok(UnitSystem {
            mode: UnitMode::Spectroscopic,
            hbar: HBAR_CM_PS,
            mass: mass_amu * AMU_TO_NATURAL,
        })
    }

    pub fn mode(&self) -> UnitMode {
        self.mode
    }

    /// hbar in working units.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Particle mass in working units.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Diffusion coefficient of the osmotic process, sigma^2 = hbar/m.
    pub fn sigma_sq(&self) -> f64 {
        self.hbar / self.mass
    }

    /// Probability oscillation period T = 2 pi hbar / dE, working time units.
    pub fn period_from_splitting(&self, delta_e: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar / delta_e
    }

    /// Frequency in GHz of a working-unit period (spectroscopic: ps).
    pub fn frequency_ghz_from_period(&self, period: f64) -> Result<f64> {
        self.require_spectroscopic("GHz conversion")?;
        if !(period > 0.0) {
            return Err(Error::Domain(format!("period must be positive, got {period}")));
        }
        Ok(1.0e3 / period)
    }

    /// Frequency in GHz corresponding to an energy splitting in cm^-1:
    /// nu = dE / (2 pi hbar).
    pub fn frequency_ghz_from_splitting(&self, delta_e: f64) -> Result<f64> {
        self.require_spectroscopic("GHz conversion")?;
        Ok(delta_e / (2.0 * std::f64::consts::PI * self.hbar) * 1.0e3)
    }

    /// Working energy (cm^-1) to joules.
    pub fn energy_to_joules(&self, e: f64) -> Result<f64> {
        self.require_spectroscopic("joule conversion")?;
        Ok(e * HC_JOULE_CM)
    }

    pub fn energy_from_joules(&self, e_j: f64) -> Result<f64> {
        self.require_spectroscopic("joule conversion")?;
        Ok(e_j / HC_JOULE_CM)
    }

    /// Working length (Angstrom) to meters.
    pub fn length_to_meters(&self, x: f64) -> Result<f64> {
        self.require_spectroscopic("meter conversion")?;
        Ok(x * 1.0e-10)
    }

    pub fn length_from_meters(&self, x_m: f64) -> Result<f64> {
        self.require_spectroscopic("meter conversion")?;
        Ok(x_m * 1.0e10)
    }

    /// Working time (ps) to seconds.
    pub fn time_to_seconds(&self, t: f64) -> Result<f64> {
        self.require_spectroscopic("second conversion")?;
        Ok(t * 1.0e-12)
    }

    pub fn time_from_seconds(&self, t_s: f64) -> Result<f64> {
        self.require_spectroscopic("second conversion")?;
        Ok(t_s * 1.0e12)
    }

    /// Particle mass in u (spectroscopic mode only).
    pub fn mass_amu(&self) -> Result<f64> {
        self.require_spectroscopic("mass in u")?;
        Ok(self.mass / AMU_TO_NATURAL)
    }

    fn require_spectroscopic(&self, what: &str) -> Result<()> {
        match self.mode {
            UnitMode::Spectroscopic => Ok(()),
            UnitMode::Dimensionless => Err(Error::Domain(format!(
                "{what} requires the spectroscopic unit system"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dimensionless_is_unit_scaled() {
        let u = UnitSystem::dimensionless();
        assert_eq!(u.hbar(), 1.0);
        assert_eq!(u.mass(), 1.0);
        assert_eq!(u.sigma_sq(), 1.0);
    }

    #[test]
    fn hbar_cm_ps_value() {
        // hbar = h / 2pi, expressed in (hc cm^-1) * ps.
        let expected = H_JOULE_S / (2.0 * std::f64::consts::PI) / HC_JOULE_CM * 1.0e12;
        assert_relative_eq!(HBAR_CM_PS, expected, max_relative = 1e-9);
        assert_relative_eq!(HBAR_CM_PS, 5.308_837, max_relative = 1e-6);
    }

    #[test]
    fn splitting_to_period_and_ghz() {
        // dE = 0.8 cm^-1 -> T = 41.69 ps -> nu_QM = 23.98 GHz.
        let u = UnitSystem::spectroscopic(2.4866).unwrap();
        let t = u.period_from_splitting(0.8);
        assert_relative_eq!(t, 41.695, max_relative = 1e-4);
        let nu = u.frequency_ghz_from_period(t).unwrap();
        assert_relative_eq!(nu, 23.984, max_relative = 1e-4);
        let nu2 = u.frequency_ghz_from_splitting(0.8).unwrap();
        assert_relative_eq!(nu, nu2, max_relative = 1e-12);
        // Direct route: nu = c * (0.8 cm^-1) in GHz.
        assert_relative_eq!(nu, C_CM_PER_S * 0.8 / 1.0e9, max_relative = 1e-12);
    }

    #[test]
    fn dimensionless_period_identity() {
        // dE = 2 pi hbar -> T = 1.
        let u = UnitSystem::dimensionless();
        assert_relative_eq!(
            u.period_from_splitting(2.0 * std::f64::consts::PI),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn round_trips_are_identity() {
        let u = UnitSystem::spectroscopic(2.4866).unwrap();
        for v in [1.0, 0.8, 950.0, 13.4578, 1e-3] {
            assert_relative_eq!(
                u.energy_from_joules(u.energy_to_joules(v).unwrap()).unwrap(),
                v,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                u.length_from_meters(u.length_to_meters(v).unwrap()).unwrap(),
                v,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                u.time_from_seconds(u.time_to_seconds(v).unwrap()).unwrap(),
                v,
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(u.mass_amu().unwrap(), 2.4866, max_relative = 1e-12);
    }

    #[test]
    fn schroedinger_prefactor_matches_si() {
        // hbar^2/(2 m_u) in cm^-1 Angstrom^2 via the working constants vs
        // an independent SI evaluation.
        let u = UnitSystem::spectroscopic(1.0).unwrap();
        let working = u.hbar() * u.hbar() / (2.0 * u.mass());
        let hbar_si = H_JOULE_S / (2.0 * std::f64::consts::PI);
        let si = hbar_si * hbar_si / (2.0 * AMU_KG) / HC_JOULE_CM / 1.0e-20;
        assert_relative_eq!(working, si, max_relative = 1e-9);
        assert_relative_eq!(working, 16.857, max_relative = 1e-3);
    }

    #[test]
    fn ghz_requires_spectroscopic() {
        let u = UnitSystem::dimensionless();
        assert!(u.frequency_ghz_from_period(1.0).is_err());
    }
}
