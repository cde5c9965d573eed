//! `mfpt`: mean exit time of the ground state over a window, by quadrature.

use anyhow::{Context, Result};
use serde::Serialize;

use doublewell::first_passage::{mfpt_high_barrier_quadrature, mfpt_quadrature};
use doublewell::potentials::Potential;

use crate::config::RunConfig;
use crate::output::OutputWriter;

#[derive(Serialize)]
struct MfptReport {
    schema: String,
    tau: f64,
    a: f64,
    x_start: f64,
    x_end: f64,
    ground_energy: f64,
    high_barrier: Option<HighBarrierOut>,
}

#[derive(Serialize)]
struct HighBarrierOut {
    tau: f64,
    well_occupancy: f64,
    factorization_valid: bool,
}

pub fn run(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let units = cfg.units()?;
    let potential = cfg.potential()?;
    let section = cfg.mfpt.as_ref().context("config needs a [mfpt] section")?;
    let points = section.grid_points.unwrap_or(12_001);

    let state = super::ground_state(&potential, &units, points, None)?;
    let a = section.a.unwrap_or(match &potential {
        Potential::Square(w) => -w.wall(),
        Potential::RosenMorse(_) => state.grid.x(1),
    });
    let tau = mfpt_quadrature(&state, a, section.x_start, section.x_end)?;

    let high_barrier = if section.high_barrier.unwrap_or(false) {
        let hb = mfpt_high_barrier_quadrature(&state, &potential, state.energy)?;
        Some(HighBarrierOut {
            tau: hb.tau,
            well_occupancy: hb.well_occupancy,
            factorization_valid: hb.factorization_valid,
        })
    } else {
        None
    };

    let report = MfptReport {
        schema: "doublewell.mfpt.v1".into(),
        tau,
        a,
        x_start: section.x_start,
        x_end: section.x_end,
        ground_energy: state.energy,
        high_barrier,
    };
    out.write_json("mfpt.json", &report, "mean exit time")?;
    Ok(format!(
        "mfpt: tau = {tau:.6} over ({}, {}) reflecting at {a}",
        section.x_start, section.x_end
    ))
}
