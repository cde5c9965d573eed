//! TOML run-configuration schemas. Unknown keys are rejected so that typos
//! surface as errors naming the offending key.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use doublewell::potentials::{Potential, RosenMorseDouble, SquareDoubleWell};
use doublewell::units::UnitSystem;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: Option<UnitsConfig>,
    pub potential: Option<PotentialConfig>,
    pub output: Option<OutputConfig>,
    pub solve: Option<SolveConfig>,
    pub mfpt: Option<MfptConfig>,
    pub simulate: Option<SimulateConfig>,
    pub ensemble: Option<EnsembleConfig>,
    pub tail_fit: Option<TailFitConfig>,
    pub dsw_scan: Option<DswScanConfig>,
    pub wkb: Option<WkbConfig>,
    pub ratio_scan: Option<RatioScanConfig>,
    pub ammonia: Option<AmmoniaSection>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("config error in {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn units(&self) -> Result<UnitSystem> {
        match &self.units {
            None => Ok(UnitSystem::dimensionless()),
            Some(u) => u.build(),
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        let p = self
            .potential
            .as_ref()
            .context("config needs a [potential] section")?;
        p.build()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    /// "dimensionless" or "spectroscopic".
    pub system: String,
    /// Particle mass in u; required for the spectroscopic system unless the
    /// ammonia section derives it from atomic masses.
    pub mass_amu: Option<f64>,
}

impl UnitsConfig {
    pub fn build(&self) -> Result<UnitSystem> {
        match self.system.as_str() {
            "dimensionless" => Ok(UnitSystem::dimensionless()),
            "spectroscopic" => {
                let m = self
                    .mass_amu
                    .context("spectroscopic units need units.mass_amu")?;
                Ok(UnitSystem::spectroscopic(m)?)
            }
            other => bail!("unknown units.system '{other}' (dimensionless | spectroscopic)"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// "square" or "rosen-morse".
    pub family: String,
    /// Square well: outer width.
    pub b: Option<f64>,
    /// Barrier thickness (square) or length scale (rosen-morse).
    pub d: Option<f64>,
    /// Square well: barrier height.
    pub v0: Option<f64>,
    /// Rosen-Morse amplitudes.
    pub a: Option<f64>,
    pub b_depth: Option<f64>,
    /// Rosen-Morse offset.
    pub k: Option<f64>,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential> {
        match self.family.as_str() {
            "square" => {
                let b = self.b.context("square potential needs potential.b")?;
                let d = self.d.context("square potential needs potential.d")?;
                let v0 = self.v0.context("square potential needs potential.v0")?;
                Ok(Potential::Square(SquareDoubleWell::new(b, d, v0)?))
            }
            "rosen-morse" => {
                let a = self.a.context("rosen-morse needs potential.a")?;
                let b = self
                    .b_depth
                    .context("rosen-morse needs potential.b_depth")?;
                let d = self.d.context("rosen-morse needs potential.d")?;
                let k = self.k.context("rosen-morse needs potential.k")?;
                Ok(Potential::RosenMorse(RosenMorseDouble::new(a, b, d, k)?))
            }
            other => bail!("unknown potential.family '{other}' (square | rosen-morse)"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Any of: ground, first-excited, second-even, second-odd.
    pub levels: Option<Vec<String>>,
    pub grid_points: Option<usize>,
    /// Explicit half-width for the solver grid; omit for automatic.
    pub half_width: Option<f64>,
    /// Write one CSV (x, psi, V) per solved state.
    pub export_states: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfptConfig {
    /// Reflecting boundary; omit to use the wall / grid edge.
    pub a: Option<f64>,
    pub x_start: f64,
    pub x_end: f64,
    pub grid_points: Option<usize>,
    /// Also evaluate the factorized high-barrier form.
    pub high_barrier: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub dt: f64,
    pub steps: u64,
    pub x_init: f64,
    pub absorb: Option<f64>,
    pub reflect: Option<f64>,
    pub record_stride: u64,
    pub seed: Option<u64>,
    pub record_energy: Option<bool>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n: u64,
    pub dt: f64,
    pub x_init: f64,
    pub absorb: f64,
    pub reflect: Option<f64>,
    pub seed: Option<u64>,
    /// 0 = derive from the quadrature estimate.
    pub max_steps: Option<u64>,
    pub histogram_bins: Option<usize>,
    pub workers: Option<usize>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFitConfig {
    /// CSV of first-passage records produced by the ensemble subcommand.
    pub input: String,
    /// Fit window start; omit for the sample median.
    pub threshold: Option<f64>,
    pub histogram_bins: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DswScanConfig {
    pub b: f64,
    pub d_values: Vec<f64>,
    pub k0_min: f64,
    pub k0_max: f64,
    pub k0_steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WkbConfig {
    /// Energy at which to evaluate; omit to use the solved ground state.
    pub energy: Option<f64>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioScanConfig {
    /// "barrier" sweeps the depth amplitude; "stop-rule" sweeps the window.
    pub mode: String,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub steps: Option<usize>,
    /// Depth amplitudes for the stop-rule sweep.
    pub b_values: Option<Vec<f64>>,
    pub xf_steps: Option<usize>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmmoniaSection {
    pub delta_e0: Option<f64>,
    pub delta_e1: Option<f64>,
    pub pair_gap: Option<f64>,
    pub d_angstrom: Option<f64>,
    pub k: Option<f64>,
    pub m_h_amu: Option<f64>,
    pub m_n_amu: Option<f64>,
    pub a_bounds: Option<[f64; 2]>,
    pub b_bounds: Option<[f64; 2]>,
    /// Pin (A, B) and skip the fit.
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub grid_points: Option<usize>,
    pub seed: Option<u64>,
    pub ensemble: Option<AmmoniaEnsembleConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmmoniaEnsembleConfig {
    pub n: u64,
    pub dt_ps: f64,
    pub workers: Option<usize>,
}
