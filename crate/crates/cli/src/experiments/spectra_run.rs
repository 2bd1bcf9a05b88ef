//! Singular-value histograms of random matrix products over the configured
//! ensemble/depth grid.

use serde::Serialize;

use dld_core::spectra::{product_singular_values, Ensemble};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{derive_seed, RunStatus};
use crate::output::{fmt_f64, RunWriter};

#[derive(Serialize)]
struct StatsBlock {
    ensemble: String,
    width: usize,
    depth: usize,
    realizations: usize,
    min: f64,
    max: f64,
    median: f64,
    fraction_in_band: f64,
    fraction_below_tenth: f64,
    log_spread: f64,
    band: (f64, f64),
}

fn ensemble_label(e: Ensemble) -> &'static str {
    match e {
        Ensemble::Gaussian => "gaussian",
        Ensemble::Orthogonal => "orthogonal",
    }
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.spectra.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .spectra
            .expect("spectra default exists")
    });
    for &ensemble in &settings.ensembles {
        for &depth in &settings.depths {
            let report = product_singular_values(
                settings.width,
                depth,
                ensemble,
                settings.realizations,
                derive_seed(config.seed, &[depth as u64, ensemble as u64]),
            )?;
            let label = ensemble_label(ensemble);
            let name = format!("spectra_{label}_depth{depth}");
            writer.csv(
                &name,
                "value",
                report.values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
            )?;
            let summary = report.summary(settings.band);
            writer.json(
                &format!("{name}_stats"),
                &StatsBlock {
                    ensemble: label.to_string(),
                    width: settings.width,
                    depth,
                    realizations: settings.realizations,
                    min: summary.min,
                    max: summary.max,
                    median: summary.median,
                    fraction_in_band: summary.fraction_in_band,
                    fraction_below_tenth: report.fraction_below(0.1),
                    log_spread: summary.log_spread,
                    band: settings.band,
                },
            )?;
        }
    }
    Ok(RunStatus::ok())
}
