//! Edge-of-chaos analysis: the theoretical fixed-point curve q_inf(g) and
//! deep-network simulations of the population-variance recursion.

use dld_core::init::random_orthogonal;
use dld_core::spectra::{q_fixed_point, q_profile, ChaosCurve};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{derive_seed, RunStatus};
use crate::output::{fmt_f64, RunWriter};

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.chaos.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .chaos
            .expect("chaos default exists")
    });

    let mut gains = Vec::new();
    let mut g = settings.theory_gain_lo;
    while g <= settings.theory_gain_hi + 1e-12 {
        gains.push(g);
        g += settings.theory_gain_step;
    }
    let theory = ChaosCurve::theory(&gains, settings.tolerance);
    writer.csv(
        "chaos_theory",
        "gain,q_inf",
        theory
            .gains
            .iter()
            .zip(&theory.q_values)
            .map(|(g, q)| format!("{},{}", fmt_f64(*g), fmt_f64(*q)))
            .collect::<Vec<_>>(),
    )?;

    // One orthogonal stack reused across gains: the gain is a scalar in the
    // forward dynamics, not part of the weights.
    let net = random_orthogonal(
        &vec![settings.sim_width; settings.sim_depth],
        derive_seed(config.seed, &[settings.sim_width as u64]),
    )?;
    let mut rows = Vec::new();
    for &gain in &settings.sim_gains {
        let profile = q_profile(&net, gain, settings.q1, derive_seed(config.seed, &[7]))?;
        let tail = &profile[settings.sim_depth - 5..];
        let simulated = tail.iter().sum::<f64>() / tail.len() as f64;
        let predicted = q_fixed_point(gain, settings.tolerance);
        rows.push(format!(
            "{},{},{}",
            fmt_f64(gain),
            fmt_f64(simulated),
            fmt_f64(predicted)
        ));
    }
    writer.csv("chaos_simulation", "gain,q_simulated,q_theory", rows)?;
    Ok(RunStatus::ok())
}
