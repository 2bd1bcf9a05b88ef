//! Depth-5 supervised learning from small-random versus greedy-pretrained
//! initial conditions, with literal pretraining time charged to the
//! pretrained run.

use serde::Serialize;

use dld_core::init::{greedy_pretrain_linear, small_gaussian, PretrainMode};
use dld_core::netsim::{loss_from_stats, train, StopReason, TrainConfig};
use dld_core::tasks::consistency_score;
use nalgebra::DMatrix;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::sweep_common::layer_sizes;
use crate::experiments::{build_dataset, normalization_of, RunStatus};
use crate::output::{fmt_f64, RunWriter};

#[derive(Serialize)]
struct Summary {
    consistency_score: f64,
    consistency_floor: f64,
    consistency_warning: bool,
    threshold: f64,
    random_status: String,
    random_iterations: usize,
    pretrain_iterations: usize,
    pretrained_finetune_iterations: usize,
    pretrained_total_iterations: usize,
    pretrained_status: String,
    pretrained_wins: bool,
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.pretrain.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .pretrain
            .expect("pretrain default exists")
    });
    let dataset = build_dataset(&config.task)?;
    let stats = dld_core::tasks::compute_correlations_with(&dataset, normalization_of(config))?;

    let score = consistency_score(&stats);
    let warning = score < settings.consistency_floor;
    if warning {
        log::warn!(
            "consistency score {score:.4} below {:.4}; pretraining may not decouple this task",
            settings.consistency_floor
        );
    }

    let sizes = layer_sizes(
        stats.input_dim(),
        stats.output_dim(),
        settings.hidden,
        settings.depth,
    );
    let zero_loss = loss_from_stats(
        &DMatrix::zeros(stats.output_dim(), stats.input_dim()),
        &stats,
    );
    let threshold = settings.threshold_fraction * zero_loss;
    let train_cfg = TrainConfig {
        learning_rate: settings.learning_rate,
        max_iters: settings.max_iters,
        loss_threshold: threshold,
        record_every: settings.record_every,
        seed: config.seed,
    };

    let random_net = small_gaussian(&sizes, settings.random_sigma, config.seed)?;
    let random_run = train(random_net, &stats, &train_cfg)?;
    writer.csv(
        "pretrain_vs_random_random",
        "iter,loss",
        random_run
            .trajectory
            .times
            .iter()
            .zip(&random_run.trajectory.loss)
            .map(|(t, l)| format!("{t},{}", fmt_f64(*l)))
            .collect::<Vec<_>>(),
    )?;

    let pretrained = greedy_pretrain_linear(
        &dataset,
        &sizes,
        PretrainMode::Literal {
            learning_rate: None,
            loss_ratio: settings.pretrain_loss_ratio,
            max_epochs: settings.pretrain_max_epochs,
        },
        config.seed + 1,
    )?;
    let finetune_run = train(pretrained.net, &stats, &train_cfg)?;
    // Pretraining time is prepended: the curve starts at the iteration
    // count already spent on the autoencoder stack.
    writer.csv(
        "pretrain_vs_random_pretrained",
        "iter,loss",
        finetune_run
            .trajectory
            .times
            .iter()
            .zip(&finetune_run.trajectory.loss)
            .map(|(t, l)| format!("{},{}", t + pretrained.iterations, fmt_f64(*l)))
            .collect::<Vec<_>>(),
    )?;

    let pretrained_total = pretrained.iterations + finetune_run.iterations;
    let summary = Summary {
        consistency_score: score,
        consistency_floor: settings.consistency_floor,
        consistency_warning: warning,
        threshold,
        random_status: status_label(random_run.stop).to_string(),
        random_iterations: random_run.iterations,
        pretrain_iterations: pretrained.iterations,
        pretrained_finetune_iterations: finetune_run.iterations,
        pretrained_total_iterations: pretrained_total,
        pretrained_status: status_label(finetune_run.stop).to_string(),
        pretrained_wins: finetune_run.stop == StopReason::ThresholdReached
            && (pretrained_total < random_run.iterations
                || random_run.stop != StopReason::ThresholdReached),
    };
    writer.json("pretrain_vs_random_summary", &summary)?;

    Ok(RunStatus {
        divergence_only: random_run.stop == StopReason::Diverged
            && finetune_run.stop == StopReason::Diverged,
    })
}

fn status_label(stop: StopReason) -> &'static str {
    match stop {
        StopReason::ThresholdReached => "reached",
        StopReason::MaxIters => "unreached",
        StopReason::Diverged => "diverged",
    }
}
