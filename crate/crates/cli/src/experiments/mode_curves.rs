//! Mode-strength learning curves on the hierarchical tree task: analytic
//! sigmoids, linear simulations from decoupled and small-random starts, the
//! tanh comparison network, and half-learning delays for each variant.

use dld_core::analytic::{half_learning_delay, learning_time, mode_strength_curve, ModeParams};
use dld_core::init::{decoupled_spectral, small_gaussian};
use dld_core::netsim::{train, ModeTrajectory, StopReason, TanhTrainConfig, TrainConfig};
use dld_core::tasks::compute_correlations;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{build_dataset, whitened_stats, RunStatus};
use crate::output::{fmt_f64, RunWriter};

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config
        .mode_curves
        .clone()
        .unwrap_or_else(|| default_settings(config));
    let dataset = build_dataset(&config.task)?;
    let (_white, stats) = whitened_stats(config, &dataset)?;

    let modes = resolve_modes(&settings.modes, stats.num_modes())?;
    let tau = 1.0 / settings.learning_rate;

    // Analytic sigmoids sampled on the recording grid.
    let params: Vec<ModeParams> = (0..stats.num_modes())
        .map(|alpha| ModeParams::new(stats.s[alpha].max(f64::MIN_POSITIVE), tau, settings.u0, 3))
        .collect::<dld_core::Result<_>>()?;
    let sample_times: Vec<usize> = (0..=settings.max_iters)
        .step_by(settings.record_every)
        .collect();
    let analytic = ModeTrajectory {
        mode_strengths: sample_times
            .iter()
            .map(|&t| {
                params
                    .iter()
                    .map(|p| mode_strength_curve(t as f64, p))
                    .collect()
            })
            .collect(),
        loss: sample_times
            .iter()
            .map(|&t| {
                0.5 * params
                    .iter()
                    .map(|p| {
                        let miss = p.s - mode_strength_curve(t as f64, p);
                        miss * miss
                    })
                    .sum::<f64>()
            })
            .collect(),
        times: sample_times,
    };
    write_trajectory(writer, "mode_curves_analytic", &analytic, &modes)?;

    let layer_sizes = [
        stats.input_dim(),
        settings.hidden,
        stats.output_dim(),
    ];
    // Run the full recording window; converged loss can round below zero.
    let train_cfg = TrainConfig {
        learning_rate: settings.learning_rate,
        max_iters: settings.max_iters,
        loss_threshold: f64::NEG_INFINITY,
        record_every: settings.record_every,
        seed: config.seed,
    };

    let mut diverged = 0usize;
    let decoupled_net = decoupled_spectral(&stats, &layer_sizes, settings.u0, config.seed)?;
    let decoupled = train(decoupled_net, &stats, &train_cfg)?;
    diverged += (decoupled.stop == StopReason::Diverged) as usize;
    write_trajectory(writer, "mode_curves_linear_decoupled", &decoupled.trajectory, &modes)?;

    let random_net = small_gaussian(&layer_sizes, settings.random_sigma, config.seed + 1)?;
    let random = train(random_net, &stats, &train_cfg)?;
    diverged += (random.stop == StopReason::Diverged) as usize;
    write_trajectory(writer, "mode_curves_linear_random", &random.trajectory, &modes)?;

    // The tanh comparison network trains in the raw frame (unit one-hot
    // inputs), matching the plotted convention of its evolving input-output
    // correlation; its analytic reference uses the raw singular values.
    let raw_stats = compute_correlations(&dataset)?;
    let tanh_cfg = TanhTrainConfig {
        hidden: settings.tanh.hidden,
        learning_rate: settings.tanh.learning_rate,
        max_iters: settings.tanh.max_iters,
        record_every: settings.record_every,
        init_scale: settings.tanh.init_scale,
        seed: config.seed + 2,
    };
    let (tanh_trajectory, tanh_stop) = dld_core::netsim::train_tanh_three_layer(
        &dataset,
        &raw_stats,
        &tanh_cfg,
    )?;
    diverged += (tanh_stop == StopReason::Diverged) as usize;
    write_trajectory(writer, "mode_curves_tanh", &tanh_trajectory, &modes)?;

    // Half-learning delays per variant against the matching analytic frame.
    let tanh_tau = 1.0 / settings.tanh.learning_rate;
    let raw_params: Vec<ModeParams> = (0..raw_stats.num_modes())
        .map(|alpha| {
            ModeParams::new(
                raw_stats.s[alpha].max(f64::MIN_POSITIVE),
                tanh_tau,
                settings.u0,
                3,
            )
        })
        .collect::<dld_core::Result<_>>()?;
    let mut delay_rows = Vec::new();
    for (variant, trajectory, frame_params, frame_stats) in [
        ("linear_decoupled", &decoupled.trajectory, &params, &stats),
        ("linear_random", &random.trajectory, &params, &stats),
        ("tanh", &tanh_trajectory, &raw_params, &raw_stats),
    ] {
        let delays = half_learning_delay(trajectory, frame_params)?;
        for &mode in &modes {
            let alpha = mode - 1;
            let s = frame_stats.s[alpha];
            let analytic_half =
                learning_time(settings.u0, 0.5 * s, s, frame_params[alpha].tau)?;
            let (sim, delay) = match delays[alpha] {
                Some(d) => (
                    fmt_f64(analytic_half * (1.0 + d)),
                    fmt_f64(d),
                ),
                None => (String::new(), String::new()),
            };
            delay_rows.push(format!(
                "{variant},{mode},{},{},{sim},{delay}",
                fmt_f64(s),
                fmt_f64(analytic_half)
            ));
        }
    }
    writer.csv(
        "mode_curves_delays",
        "variant,mode,s,analytic_half_iter,simulated_half_iter,fractional_delay",
        delay_rows,
    )?;

    Ok(RunStatus {
        divergence_only: diverged == 3,
    })
}

fn default_settings(config: &ExperimentConfig) -> crate::config::ModeCurvesSettings {
    crate::config::ExperimentConfig::default_for(config.experiment, config.scale)
        .mode_curves
        .expect("mode_curves default exists")
}

fn resolve_modes(requested: &[usize], available: usize) -> Result<Vec<usize>> {
    let modes: Vec<usize> = if requested.is_empty() {
        (1..=available).collect()
    } else {
        requested.to_vec()
    };
    for &m in &modes {
        if m == 0 || m > available {
            return Err(CliError::Config(format!(
                "mode index {m} outside 1..={available}"
            )));
        }
    }
    Ok(modes)
}

fn write_trajectory(
    writer: &mut RunWriter,
    name: &str,
    trajectory: &ModeTrajectory,
    modes: &[usize],
) -> Result<()> {
    let header = std::iter::once("iter,loss".to_string())
        .chain(modes.iter().map(|m| format!("mode_{m}")))
        .collect::<Vec<_>>()
        .join(",");
    let rows = trajectory.times.iter().enumerate().map(|(row, &t)| {
        let mut fields = vec![t.to_string(), fmt_f64(trajectory.loss[row])];
        fields.extend(
            modes
                .iter()
                .map(|&m| fmt_f64(trajectory.mode_strengths[row][m - 1])),
        );
        fields.join(",")
    });
    writer.csv(name, &header, rows.collect::<Vec<_>>())?;
    Ok(())
}
