//! `solve`: bound levels of the configured potential, with optional state
//! export (x, psi, V).

use anyhow::{bail, Context, Result};
use serde::Serialize;

use doublewell::eigensolver::{
    numerov_bound_state, solve_square_levels, spectrum_pair, square_bound_state, BoundState,
    GridSpec, Level, Parity,
};
use doublewell::potentials::Potential;

use crate::config::RunConfig;
use crate::output::{fmt_f64, Csv, OutputWriter};

#[derive(Serialize)]
struct LevelOut {
    which: String,
    energy: f64,
    nodes: usize,
    parity: String,
    wavenumber: Option<f64>,
    norm_check: f64,
}

#[derive(Serialize)]
struct SolveReport {
    schema: String,
    levels: Vec<LevelOut>,
    ground_pair: Option<PairOut>,
}

#[derive(Serialize)]
struct PairOut {
    delta_e: f64,
    period: f64,
}

pub fn run(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let units = cfg.units()?;
    let potential = cfg.potential()?;
    let section = cfg.solve.as_ref().context("config needs a [solve] section")?;
    let points = section.grid_points.unwrap_or(8001);
    let names = section
        .levels
        .clone()
        .unwrap_or_else(|| vec!["ground".into(), "first-excited".into()]);

    let mut states: Vec<(String, BoundState)> = Vec::new();
    for name in &names {
        let which = super::parse_level(name)?;
        let state = match &potential {
            Potential::Square(w) => {
                let levels = solve_square_levels(w, &units)?;
                let (k, parity) = match which {
                    Level::Ground => (levels.k_even, Parity::Even),
                    Level::FirstExcited => (levels.k_odd, Parity::Odd),
                    _ => bail!("the square-well solver covers the lowest doublet only"),
                };
                square_bound_state(w, k, parity, points, &units)?
            }
            Potential::RosenMorse(p) => {
                let spec = GridSpec {
                    points,
                    half_width: section.half_width,
                };
                numerov_bound_state(p, &spec, which, &units)?
            }
        };
        states.push((name.clone(), state));
    }

    let ground_pair = {
        let e0 = states.iter().find(|(n, _)| n == "ground");
        let e1 = states.iter().find(|(n, _)| n == "first-excited");
        match (e0, e1) {
            (Some((_, a)), Some((_, b))) => {
                let pair = spectrum_pair(a.energy, b.energy, &units)?;
                Some(PairOut {
                    delta_e: pair.delta_e,
                    period: pair.period,
                })
            }
            _ => None,
        }
    };

    if section.export_states.unwrap_or(true) {
        for (name, state) in &states {
            let mut csv = Csv::new("doublewell.solve.state.v1", "x,psi,v");
            for i in 0..state.grid.n {
                let x = state.grid.x(i);
                let v = potential.evaluate(x).unwrap_or(f64::INFINITY);
                csv.row(&[fmt_f64(x), fmt_f64(state.psi[i]), fmt_f64(v)]);
            }
            out.write_csv(&format!("state_{name}.csv"), &csv, "wavefunction samples")?;
        }
    }

    let report = SolveReport {
        schema: "doublewell.solve.v1".into(),
        levels: states
            .iter()
            .map(|(n, s)| LevelOut {
                which: n.clone(),
                energy: s.energy,
                nodes: s.node_count(),
                parity: format!("{:?}", s.parity),
                wavenumber: s.wavenumber,
                norm_check: s.norm_check,
            })
            .collect(),
        ground_pair,
    };
    out.write_json("levels.json", &report, "bound levels")?;

    let summary = report
        .levels
        .iter()
        .map(|l| format!("{} = {:.6}", l.which, l.energy))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(format!("solve: {summary}"))
}
