//! `ensemble`: parallel first-passage sampling, and `tail-fit`: the
//! exponential tail of a stored ensemble.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use doublewell::first_passage::{
    fit_exponential_tail, fnv1a64, histogram, mfpt_quadrature, FptEnsemble,
};
use doublewell::stochastic::{run_ensemble, TrajectoryConfig};

use crate::config::RunConfig;
use crate::output::{fmt_f64, Csv, OutputWriter};

#[derive(Serialize)]
struct EnsembleReport {
    schema: String,
    n: u64,
    mean: f64,
    stderr: f64,
    median: f64,
    timed_out: usize,
    clamped_steps: u64,
    quadrature_estimate: f64,
    base_seed: u64,
    config_digest: String,
}

pub fn run(cfg: &RunConfig, out: &mut OutputWriter, seed_override: Option<u64>, workers: Option<usize>) -> Result<String> {
    let units = cfg.units()?;
    let potential = cfg.potential()?;
    let section = cfg
        .ensemble
        .as_ref()
        .context("config needs an [ensemble] section")?;
    let points = section.grid_points.unwrap_or(8001);

    let state = super::ground_state(&potential, &units, points, None)?;
    let field = super::ground_field(&potential, &units, points)?;
    let reflect = section.reflect.unwrap_or(field.domain().0);
    let seed = seed_override.or(section.seed).unwrap_or(0);

    // Quadrature estimate drives the timeout.
    let quad_a = reflect.max(state.grid.x(1));
    let estimate = mfpt_quadrature(&state, quad_a, section.x_init, section.absorb)?;
    let max_steps = match section.max_steps {
        Some(n) if n > 0 => n,
        _ => TrajectoryConfig::steps_for_estimate(section.dt, estimate),
    };

    let template = TrajectoryConfig {
        dt: section.dt,
        seed,
        x_init: section.x_init,
        absorb_at: Some(section.absorb),
        reflect_at: reflect,
        max_steps,
        record_stride: 0,
        override_horizon: false,
    };
    template.validate(&field, Some(estimate))?;

    if section.n == 0 {
        // Validation-only dry run: config checked, nothing to write.
        return Ok(format!(
            "ensemble: dry run ok (quadrature estimate tau = {estimate:.6})"
        ));
    }

    let workers = workers.or(section.workers);
    let outcome = super::with_workers(workers, || {
        run_ensemble(&template, section.n, &field, Some(estimate))
    })??;

    let digest = fnv1a64(
        format!(
            "{potential:?};{units:?};dt={};x0={};absorb={};reflect={};seed={seed}",
            section.dt, section.x_init, section.absorb, reflect
        )
        .as_bytes(),
    );
    let ens: FptEnsemble = outcome.to_ensemble(digest)?;

    let mut csv = Csv::new(
        "doublewell.ensemble.fpt.v1",
        "trajectory_id,seed,tau,steps,clamped_steps,timed_out",
    );
    for r in &outcome.records {
        csv.row(&[
            r.trajectory_id.to_string(),
            r.seed.to_string(),
            r.tau.map(fmt_f64).unwrap_or_default(),
            r.steps.to_string(),
            r.clamped_steps.to_string(),
            (r.tau.is_none() as u8).to_string(),
        ]);
    }
    out.write_csv("ensemble_fpt.csv", &csv, "first-passage records")?;

    let bins = section.histogram_bins.unwrap_or(60);
    write_histogram(out, &ens, bins, "ensemble_histogram.csv")?;

    if ens.timeout_fraction() > 0.001 {
        eprintln!(
            "warning: {:.2}% of trajectories timed out",
            100.0 * ens.timeout_fraction()
        );
    }

    let report = EnsembleReport {
        schema: "doublewell.ensemble.v1".into(),
        n: section.n,
        mean: ens.mean(),
        stderr: ens.stderr(),
        median: ens.median(),
        timed_out: ens.timed_out(),
        clamped_steps: outcome.total_clamped(),
        quadrature_estimate: estimate,
        base_seed: seed,
        config_digest: format!("{digest:016x}"),
    };
    out.write_json("ensemble_summary.json", &report, "ensemble statistics")?;

    Ok(format!(
        "ensemble: n = {}, mean tau = {:.6} +- {:.6} (quadrature {:.6}, {} timed out)",
        section.n,
        ens.mean(),
        ens.stderr(),
        estimate,
        ens.timed_out()
    ))
}

pub fn write_histogram(
    out: &mut OutputWriter,
    ens: &FptEnsemble,
    bins: usize,
    name: &str,
) -> Result<()> {
    let mut csv = Csv::new(
        "doublewell.histogram.v1",
        "bin_left,bin_right,count,density",
    );
    for b in histogram(ens, bins) {
        csv.row(&[
            fmt_f64(b.left),
            fmt_f64(b.right),
            b.count.to_string(),
            fmt_f64(b.density),
        ]);
    }
    out.write_csv(name, &csv, "passage-time histogram")?;
    Ok(())
}

#[derive(Serialize)]
struct TailFitReport {
    schema: String,
    rate: f64,
    tau_l: f64,
    amplitude: f64,
    threshold: f64,
    goodness: f64,
    n: usize,
    n_exceedances: usize,
    timed_out: usize,
    rate_stderr: f64,
}

pub fn run_tail_fit(cfg: &RunConfig, out: &mut OutputWriter) -> Result<String> {
    let section = cfg
        .tail_fit
        .as_ref()
        .context("config needs a [tail_fit] section")?;
    let (taus, timed_out) = read_fpt_csv(std::path::Path::new(&section.input))?;
    let ens = FptEnsemble::from_taus(taus, timed_out, 0)?;
    let threshold = section.threshold.unwrap_or_else(|| ens.median());
    let fit = fit_exponential_tail(&ens, threshold)?;

    let report = TailFitReport {
        schema: "doublewell.tail-fit.v1".into(),
        rate: fit.rate,
        tau_l: fit.tau_l(),
        amplitude: fit.amplitude,
        threshold: fit.threshold,
        goodness: fit.goodness,
        n: ens.len(),
        n_exceedances: fit.n_exceedances,
        timed_out: ens.timed_out(),
        rate_stderr: fit.rate_stderr,
    };
    out.write_json("tail_fit.json", &report, "exponential tail fit")?;
    write_histogram(out, &ens, cfg.tail_fit.as_ref().and_then(|t| t.histogram_bins).unwrap_or(60), "tail_histogram.csv")?;
    Ok(format!(
        "tail-fit: tau_l = {:.6} (rate {:.6e}, R^2 = {:.4}, {} exceedances)",
        fit.tau_l(),
        fit.rate,
        fit.goodness,
        fit.n_exceedances
    ))
}

/// Reads trajectory records written by the ensemble subcommand.
fn read_fpt_csv(path: &std::path::Path) -> Result<(Vec<f64>, usize)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut taus = Vec::new();
    let mut timed_out = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("trajectory_id") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            bail!("{}:{}: expected 6 fields", path.display(), lineno + 1);
        }
        if fields[5].trim() == "1" {
            timed_out += 1;
        } else {
            taus.push(fields[2].trim().parse::<f64>().with_context(|| {
                format!("{}:{}: bad tau '{}'", path.display(), lineno + 1, fields[2])
            })?);
        }
    }
    Ok((taus, timed_out))
}
