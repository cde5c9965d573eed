//! Subcommand implementations.

pub mod ammonia;
pub mod ensemble;
pub mod mfpt;
pub mod scans;
pub mod simulate;
pub mod solve;

use anyhow::{bail, Result};

use doublewell::closed_forms::SquareWellClosedForm;
use doublewell::eigensolver::{
    numerov_bound_state, solve_square_levels, square_bound_state, BoundState, GridSpec, Level,
    Parity,
};
use doublewell::potentials::Potential;
use doublewell::stochastic::OsmoticField;
use doublewell::units::UnitSystem;

/// Ground (even) state of either potential family, sampled on `points`.
pub fn ground_state(
    potential: &Potential,
    units: &UnitSystem,
    points: usize,
    half_width: Option<f64>,
) -> Result<BoundState> {
    match potential {
        Potential::Square(w) => {
            let levels = solve_square_levels(w, units)?;
            Ok(square_bound_state(w, levels.k_even, Parity::Even, points, units)?)
        }
        Potential::RosenMorse(p) => {
            let spec = GridSpec { points, half_width };
            Ok(numerov_bound_state(p, &spec, Level::Ground, units)?)
        }
    }
}

/// Drift field for the ground state: closed form for the square well,
/// grid-interpolated otherwise.
pub fn ground_field(
    potential: &Potential,
    units: &UnitSystem,
    points: usize,
) -> Result<OsmoticField> {
    match potential {
        Potential::Square(w) => {
            let cf = SquareWellClosedForm::new(*w, *units)?;
            Ok(OsmoticField::from_square_even(&cf))
        }
        Potential::RosenMorse(_) => {
            let state = ground_state(potential, units, points, None)?;
            Ok(OsmoticField::from_state(&state)?)
        }
    }
}

pub fn parse_level(name: &str) -> Result<Level> {
    Ok(match name {
        "ground" => Level::Ground,
        "first-excited" => Level::FirstExcited,
        "second-even" => Level::SecondEven,
        "second-odd" => Level::SecondOdd,
        other => bail!("unknown level '{other}' (ground | first-excited | second-even | second-odd)"),
    })
}

/// Installs a rayon pool of the requested size for the closure, or runs it
/// on the default pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None | Some(0) => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}
