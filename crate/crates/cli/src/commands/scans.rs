//! Parameter scans: `dsw-scan` (square-well mean exit time over barrier
//! grids), `wkb` (barrier integral and period quantities), and `ratio-scan`
//! (two-state versus exit-time ratio over barrier heights or stop rules).

use anyhow::{bail, Context, Result};
use serde::Serialize;

use doublewell::closed_forms::{
    dsw_mean_tau, dsw_mean_tau_high_barrier, dsw_splitting_and_period, tau_qm_from_splitting,
    wkb_quantities, SquareWellClosedForm,
};
use doublewell::eigensolver::{numerov_bound_state, GridSpec, Level};
use doublewell::first_passage::mfpt_quadrature;
use doublewell::potentials::{Potential, RosenMorseDouble, SquareDoubleWell};
use doublewell::units::UnitSystem;

use crate::config::RunConfig;
use crate::output::{fmt_f64, Csv, OutputWriter};

pub fn run_dsw_scan(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let units = cfg.units()?;
    let section = cfg
        .dsw_scan
        .as_ref()
        .context("config needs a [dsw_scan] section")?;
    if section.k0_steps < 2 {
        bail!("dsw_scan.k0_steps must be at least 2");
    }

    let mut csv = Csv::new(
        "doublewell.dsw-scan.v1",
        "d,k0,v0,k_even,kappa,tau,tau_high_barrier,delta_e_asym,period_asym",
    );
    let mut rows = 0usize;
    for &d in &section.d_values {
        for i in 0..section.k0_steps {
            let k0 = section.k0_min
                + (section.k0_max - section.k0_min) * i as f64 / (section.k0_steps - 1) as f64;
            let v0 = units.hbar().powi(2) * k0 * k0 / (2.0 * units.mass());
            let Ok(well) = SquareDoubleWell::new(section.b, d, v0) else {
                continue;
            };
            let Ok(cf) = SquareWellClosedForm::new(well, units) else {
                continue; // no sub-barrier doublet at this corner
            };
            let tau = dsw_mean_tau(&cf);
            let hb = dsw_mean_tau_high_barrier(&cf);
            let sp = dsw_splitting_and_period(&cf);
            csv.row(&[
                fmt_f64(d),
                fmt_f64(k0),
                fmt_f64(v0),
                fmt_f64(cf.wavenumber()),
                fmt_f64(cf.kappa()),
                fmt_f64(tau),
                fmt_f64(hb.tau),
                fmt_f64(sp.delta_e),
                fmt_f64(sp.period),
            ]);
            rows += 1;
        }
    }
    out.write_csv("dsw_scan.csv", &csv, "mean exit time over (d, k0)")?;
    Ok(format!("dsw-scan: {rows} rows over d = {:?}", section.d_values))
}

#[derive(Serialize)]
struct WkbReport {
    schema: String,
    energy: f64,
    b_inner: f64,
    c_outer: f64,
    phi: f64,
    t_cl: f64,
    tau_wkb: f64,
    t_big_wkb: f64,
    delta_e_wkb: f64,
    validity_max: f64,
    exact_delta_e0: Option<f64>,
    exact_period: Option<f64>,
}

pub fn run_wkb(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let units = cfg.units()?;
    let potential = cfg.potential()?;
    let Potential::RosenMorse(pot) = potential else {
        bail!("the wkb subcommand needs a rosen-morse potential");
    };
    let section = cfg.wkb.as_ref().context("config needs a [wkb] section")?;
    let points = section.grid_points.unwrap_or(8001);
    let spec = GridSpec {
        points,
        half_width: None,
    };

    let (energy, exact) = match section.energy {
        Some(e) => (e, None),
        None => {
            let g0 = numerov_bound_state(&pot, &spec, Level::Ground, &units)?;
            let g1 = numerov_bound_state(&pot, &spec, Level::FirstExcited, &units)?;
            let de = g1.energy - g0.energy;
            (g0.energy, Some((de, units.period_from_splitting(de))))
        }
    };
    let tp = pot.turning_points(energy)?;
    let w = wkb_quantities(&pot, energy, &tp, &units)?;

    let report = WkbReport {
        schema: "doublewell.wkb.v1".into(),
        energy,
        b_inner: tp.b_inner,
        c_outer: tp.c_outer,
        phi: w.phi,
        t_cl: w.t_cl,
        tau_wkb: w.tau_wkb,
        t_big_wkb: w.t_big_wkb,
        delta_e_wkb: w.delta_e_wkb,
        validity_max: w.validity_max,
        exact_delta_e0: exact.map(|e| e.0),
        exact_period: exact.map(|e| e.1),
    };
    out.write_json("wkb.json", &report, "WKB quantities")?;
    Ok(format!(
        "wkb: phi = {:.4}, t_cl = {:.6}, tau_wkb = {:.6}",
        w.phi, w.t_cl, w.tau_wkb
    ))
}

pub fn run_ratio_scan(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let units = cfg.units()?;
    let potential = cfg.potential()?;
    let Potential::RosenMorse(base) = potential else {
        bail!("the ratio-scan subcommand needs a rosen-morse potential");
    };
    let section = cfg
        .ratio_scan
        .as_ref()
        .context("config needs a [ratio_scan] section")?;
    let points = section.grid_points.unwrap_or(8001);

    match section.mode.as_str() {
        "barrier" => {
            let b_min = section.b_min.context("ratio_scan.b_min required")?;
            let b_max = section.b_max.context("ratio_scan.b_max required")?;
            let steps = section.steps.unwrap_or(12).max(2);
            let mut csv = Csv::new(
                "doublewell.ratio-scan.barrier.v1",
                "b_depth,v0,vd,barrier_fraction,delta_e0,tau_qm,tau_bar,ratio",
            );
            let mut last = (0.0, 0.0);
            for i in 0..steps {
                let b = b_min + (b_max - b_min) * i as f64 / (steps - 1) as f64;
                let pot =
                    RosenMorseDouble::new(base.asymmetry(), b, base.length_scale(), base.offset())?;
                let r = ratio_point(&pot, &units, points)?;
                csv.row(&[
                    fmt_f64(b),
                    fmt_f64(r.v0),
                    fmt_f64(r.vd),
                    fmt_f64(r.v0 / r.vd),
                    fmt_f64(r.delta_e0),
                    fmt_f64(r.tau_qm),
                    fmt_f64(r.tau_bar),
                    fmt_f64(r.ratio),
                ]);
                last = (r.v0, r.ratio);
            }
            out.write_csv("ratio_scan.csv", &csv, "ratio versus barrier height")?;
            Ok(format!(
                "ratio-scan: {steps} barrier points, final V0 = {:.2} ratio = {:.5}",
                last.0, last.1
            ))
        }
        "stop-rule" => {
            let b_values = section
                .b_values
                .clone()
                .context("ratio_scan.b_values required for stop-rule mode")?;
            let xf_steps = section.xf_steps.unwrap_or(11).max(2);
            let mut csv = Csv::new(
                "doublewell.ratio-scan.stop-rule.v1",
                "b_depth,v0,x_f,tau_bar,ratio",
            );
            for &b in &b_values {
                let pot =
                    RosenMorseDouble::new(base.asymmetry(), b, base.length_scale(), base.offset())?;
                let spec = GridSpec {
                    points,
                    half_width: None,
                };
                let g0 = numerov_bound_state(&pot, &spec, Level::Ground, &units)?;
                let g1 = numerov_bound_state(&pot, &spec, Level::FirstExcited, &units)?;
                let tau_qm = tau_qm_from_splitting(g1.energy - g0.energy, &units)?;
                let tp = pot.turning_points(g0.energy)?;
                let x0 = pot.geometry().x0;
                let a = g0.grid.x(1);
                let geom = pot.geometry();
                for i in 0..xf_steps {
                    let xf =
                        tp.b_inner + (x0 - tp.b_inner) * i as f64 / (xf_steps - 1) as f64;
                    let tau = mfpt_quadrature(&g0, a, -xf, xf)?;
                    csv.row(&[
                        fmt_f64(b),
                        fmt_f64(geom.v0),
                        fmt_f64(xf),
                        fmt_f64(tau),
                        fmt_f64(tau_qm / tau),
                    ]);
                }
            }
            out.write_csv("ratio_scan.csv", &csv, "ratio versus stop rule")?;
            Ok(format!(
                "ratio-scan: stop-rule sweep over {} potentials x {xf_steps} windows",
                b_values.len()
            ))
        }
        other => bail!("unknown ratio_scan.mode '{other}' (barrier | stop-rule)"),
    }
}

struct RatioPoint {
    v0: f64,
    vd: f64,
    delta_e0: f64,
    tau_qm: f64,
    tau_bar: f64,
    ratio: f64,
}

fn ratio_point(pot: &RosenMorseDouble, units: &UnitSystem, points: usize) -> Result<RatioPoint> {
    let spec = GridSpec {
        points,
        half_width: None,
    };
    let g0 = numerov_bound_state(pot, &spec, Level::Ground, units)?;
    let g1 = numerov_bound_state(pot, &spec, Level::FirstExcited, units)?;
    let delta_e0 = g1.energy - g0.energy;
    let tau_qm = tau_qm_from_splitting(delta_e0, units)?;
    let tp = pot.turning_points(g0.energy)?;
    let tau_bar = mfpt_quadrature(&g0, g0.grid.x(1), -tp.b_inner, tp.b_inner)?;
    let g = pot.geometry();
    Ok(RatioPoint {
        v0: g.v0,
        vd: g.vd,
        delta_e0,
        tau_qm,
        tau_bar,
        ratio: tau_qm / tau_bar,
    })
}
