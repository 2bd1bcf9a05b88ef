//! Learning time and optimal learning rate as a function of network depth,
//! from decoupled initial conditions, with a per-depth rate grid search.

use dld_core::init::decoupled_spectral;
use dld_core::netsim::loss_from_stats;
use nalgebra::DMatrix;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::sweep_common::{best_cell, layer_sizes, run_cell, CellStatus};
use crate::experiments::{build_dataset, normalization_of, RunStatus};
use crate::output::{fmt_f64, RunWriter};

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.sweep.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .sweep
            .expect("depth sweep default exists")
    });
    let dataset = build_dataset(&config.task)?;
    let stats = dld_core::tasks::compute_correlations_with(&dataset, normalization_of(config))?;

    // Threshold relative to the zero-map loss, so every depth and rate
    // chases the same target.
    let zero_loss = loss_from_stats(
        &DMatrix::zeros(stats.output_dim(), stats.input_dim()),
        &stats,
    );
    let threshold = settings.threshold_fraction * zero_loss;
    let rates = settings.rate_grid.rates();

    let mut cell_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut rate_rows = Vec::new();
    let mut any_usable = false;
    for &depth in &settings.depths {
        let sizes = layer_sizes(stats.input_dim(), stats.output_dim(), settings.hidden, depth);
        let mut cells = Vec::with_capacity(rates.len());
        for &rate in &rates {
            let net = decoupled_spectral(
                &stats,
                &sizes,
                settings.u0,
                crate::experiments::derive_seed(config.seed, &[depth as u64]),
            )?;
            let cell = run_cell(net, &stats, depth, rate, threshold, settings.max_iters)?;
            cell_rows.push(cell.csv_row(""));
            cells.push(cell);
        }
        match best_cell(&cells) {
            Some(best) => {
                any_usable = true;
                time_rows.push(format!(
                    "{depth},{},{},reached",
                    fmt_f64(best.rate),
                    best.iterations
                ));
                rate_rows.push(format!("{depth},{}", fmt_f64(best.rate)));
            }
            None => {
                let all_diverged = cells.iter().all(|c| c.status == CellStatus::Diverged);
                time_rows.push(format!(
                    "{depth},,,{}",
                    if all_diverged { "diverged" } else { "unreachable" }
                ));
                any_usable |= !all_diverged;
            }
        }
    }

    writer.csv(
        "depth_sweep_cells",
        "depth,rate,status,iterations,final_loss",
        cell_rows,
    )?;
    writer.csv(
        "learning_time_vs_depth",
        "depth,best_rate,iterations,status",
        time_rows,
    )?;
    writer.csv("optimal_rate_vs_depth", "depth,best_rate", rate_rows)?;

    Ok(RunStatus {
        divergence_only: !any_usable,
    })
}
