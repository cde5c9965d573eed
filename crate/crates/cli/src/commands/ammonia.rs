//! `ammonia`: the end-to-end inversion pipeline.

use anyhow::{Context, Result};

use doublewell::ammonia::{
    run_ammonia_pipeline, AmmoniaConfig, AmmoniaReport, EnsembleSettings, FitBounds,
    SpectroscopicTargets,
};
use doublewell::units::{M_HYDROGEN_AMU, M_NITROGEN_AMU};

use crate::config::RunConfig;
use crate::output::{fmt_f64, Csv, OutputWriter};

pub fn run(cfg: &RunConfig, out: &mut OutputWriter, seed_override: Option<u64>, workers: Option<usize>) -> Result<String> {
    let section = cfg
        .ammonia
        .as_ref()
        .context("config needs an [ammonia] section")?;

    let defaults = AmmoniaConfig::default();
    let mut pipeline_cfg = AmmoniaConfig {
        targets: SpectroscopicTargets {
            delta_e0: section.delta_e0.unwrap_or(defaults.targets.delta_e0),
            delta_e1: section.delta_e1.unwrap_or(defaults.targets.delta_e1),
            pair_gap: section.pair_gap.unwrap_or(defaults.targets.pair_gap),
        },
        d: section.d_angstrom.unwrap_or(defaults.d),
        k: section.k.unwrap_or(defaults.k),
        m_h_amu: section.m_h_amu.unwrap_or(M_HYDROGEN_AMU),
        m_n_amu: section.m_n_amu.unwrap_or(M_NITROGEN_AMU),
        bounds: FitBounds {
            a: section
                .a_bounds
                .map(|b| (b[0], b[1]))
                .unwrap_or(defaults.bounds.a),
            b: section
                .b_bounds
                .map(|b| (b[0], b[1]))
                .unwrap_or(defaults.bounds.b),
        },
        fixed_a_b: match (section.a, section.b) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        },
        grid_points: section.grid_points.unwrap_or(defaults.grid_points),
        ensemble: section.ensemble.as_ref().map(|e| EnsembleSettings {
            n: e.n,
            dt_ps: e.dt_ps,
        }),
        seed: seed_override.or(section.seed).unwrap_or(defaults.seed),
    };
    if pipeline_cfg.grid_points < 1001 {
        pipeline_cfg.grid_points = 1001;
    }

    let ens_workers = workers.or(section.ensemble.as_ref().and_then(|e| e.workers));
    let report: AmmoniaReport =
        super::with_workers(ens_workers, || run_ammonia_pipeline(&pipeline_cfg))??;

    // Level attachment.
    let mut levels = Csv::new("doublewell.ammonia.levels.v1", "label,energy_cm1");
    levels.row(&["E0_minus".into(), fmt_f64(report.ground_pair.e0)]);
    levels.row(&["E0_plus".into(), fmt_f64(report.ground_pair.e1)]);
    levels.row(&["E1_minus".into(), fmt_f64(report.second_pair.e0)]);
    levels.row(&["E1_plus".into(), fmt_f64(report.second_pair.e1)]);
    out.write_csv("ammonia_levels.csv", &levels, "doublet energies")?;

    if let Some(ens) = &report.ensemble {
        let mut csv = Csv::new(
            "doublewell.histogram.v1",
            "bin_left,bin_right,count,density",
        );
        for b in &ens.histogram {
            csv.row(&[
                fmt_f64(b.left),
                fmt_f64(b.right),
                b.count.to_string(),
                fmt_f64(b.density),
            ]);
        }
        out.write_csv("ammonia_histogram.csv", &csv, "passage-time histogram")?;
    }
    out.write_json("ammonia_report.json", &report, "pipeline report")?;

    Ok(format!(
        "ammonia: tau_bar = {:.4} ps, nu_sq = {:.4} GHz, nu_qm = {:.4} GHz (experiment {} GHz)",
        report.tau_bar_ps, report.nu_sq_ghz, report.nu_qm_ghz, report.nu_exp_ghz
    ))
}
