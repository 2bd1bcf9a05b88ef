//! Dynamical-isometry grid: end-to-end Jacobian singular values of a deep
//! tanh orthogonal network over gain and input-variance values, against the
//! scaled-Gaussian linear product baseline.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dld_core::init::random_orthogonal;
use dld_core::spectra::{isometry_metrics, jacobian_nonlinear, product_singular_values, Ensemble};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{derive_seed, RunStatus};
use crate::output::{fmt_f64, RunWriter};

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.isometry.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .isometry
            .expect("isometry default exists")
    });

    // A single network probed across the whole grid, as in the figure.
    let net = random_orthogonal(
        &vec![settings.width; settings.depth + 1],
        derive_seed(config.seed, &[settings.width as u64, settings.depth as u64]),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[11]));
    let raw: DVector<f64> =
        DVector::from_fn(settings.width, |_, _| rng.sample(rand_distr::StandardNormal));

    let mut rows = Vec::new();
    for &q1 in &settings.q_values {
        let x1 = &raw * (q1 * settings.width as f64 / raw.norm_squared()).sqrt();
        for &gain in &settings.gains {
            let probe = jacobian_nonlinear(&net, &x1, gain)?;
            let summary = probe.summary(settings.band);
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                fmt_f64(gain),
                fmt_f64(q1),
                fmt_f64(summary.fraction_in_band),
                fmt_f64(summary.log_spread),
                fmt_f64(summary.min),
                fmt_f64(summary.median),
                fmt_f64(summary.max)
            ));
            if settings.emit_values {
                writer.csv(
                    &format!("isometry_values_g{gain}_q{q1}"),
                    "value",
                    probe.values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
                )?;
            }
        }
    }
    writer.csv(
        "isometry_grid",
        "gain,q1,fraction_in_band,log_spread,min,median,max",
        rows,
    )?;

    // Linear scaled-Gaussian product of the same shape, for comparison.
    let baseline = product_singular_values(
        settings.width,
        settings.depth,
        Ensemble::Gaussian,
        1,
        derive_seed(config.seed, &[13]),
    )?;
    let summary = isometry_metrics(&baseline.values, settings.band);
    writer.csv(
        "isometry_baseline",
        "ensemble,width,depth,fraction_in_band,log_spread,min,median,max",
        vec![format!(
            "gaussian,{},{},{},{},{},{},{}",
            settings.width,
            settings.depth,
            fmt_f64(summary.fraction_in_band),
            fmt_f64(summary.log_spread),
            fmt_f64(summary.min),
            fmt_f64(summary.median),
            fmt_f64(summary.max)
        )],
    )?;
    Ok(RunStatus::ok())
}
