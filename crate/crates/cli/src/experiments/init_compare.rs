//! Learning time versus depth for scaled-Gaussian, greedy-pretrained, and
//! random orthogonal initial conditions, under a common grid-search
//! protocol.

use dld_core::init::{greedy_pretrain_linear, random_orthogonal, scaled_gaussian, PretrainMode};
use dld_core::netsim::{loss_from_stats, LinearNetwork};
use nalgebra::DMatrix;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::sweep_common::{best_cell, layer_sizes, run_cell, CellStatus};
use crate::experiments::{build_dataset, derive_seed, normalization_of, RunStatus};
use crate::output::{fmt_f64, RunWriter};

const INIT_KINDS: [&str; 3] = ["scaled_gaussian", "greedy_pretrain", "random_orthogonal"];

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let settings = config.init_compare.clone().unwrap_or_else(|| {
        ExperimentConfig::default_for(config.experiment, config.scale)
            .init_compare
            .expect("init compare default exists")
    });
    let sweep = &settings.sweep;
    let dataset = build_dataset(&config.task)?;
    let stats = dld_core::tasks::compute_correlations_with(&dataset, normalization_of(config))?;

    let zero_loss = loss_from_stats(
        &DMatrix::zeros(stats.output_dim(), stats.input_dim()),
        &stats,
    );
    let threshold = sweep.threshold_fraction * zero_loss;
    let rates = sweep.rate_grid.rates();

    let mut cell_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut any_usable = false;
    for (init_index, &init_kind) in INIT_KINDS.iter().enumerate() {
        for &depth in &sweep.depths {
            let sizes = layer_sizes(stats.input_dim(), stats.output_dim(), sweep.hidden, depth);
            let seed = derive_seed(config.seed, &[init_index as u64, depth as u64]);
            let net = build_init(init_kind, &dataset, &sizes, settings.pretrain_delta, seed)?;
            let mut cells = Vec::with_capacity(rates.len());
            for &rate in &rates {
                let cell = run_cell(
                    net.clone(),
                    &stats,
                    depth,
                    rate,
                    threshold,
                    sweep.max_iters,
                )?;
                cell_rows.push(cell.csv_row(&format!("{init_kind},")));
                cells.push(cell);
            }
            match best_cell(&cells) {
                Some(best) => {
                    any_usable = true;
                    time_rows.push(format!(
                        "{init_kind},{depth},{},{},reached",
                        fmt_f64(best.rate),
                        best.iterations
                    ));
                }
                None => {
                    let all_diverged = cells.iter().all(|c| c.status == CellStatus::Diverged);
                    // An initialization that cannot reach threshold inside
                    // the iteration budget still carries information: its
                    // time is at least the budget.
                    let floor = cells
                        .iter()
                        .filter(|c| c.status == CellStatus::Unreached)
                        .map(|c| c.iterations)
                        .max();
                    match floor {
                        Some(iters) if !all_diverged => {
                            any_usable = true;
                            time_rows.push(format!(
                                "{init_kind},{depth},,{iters},unreached"
                            ));
                        }
                        _ => {
                            time_rows.push(format!("{init_kind},{depth},,,diverged"));
                        }
                    }
                }
            }
        }
    }

    writer.csv(
        "init_compare_cells",
        "init,depth,rate,status,iterations,final_loss",
        cell_rows,
    )?;
    writer.csv(
        "init_compare_times",
        "init,depth,best_rate,iterations,status",
        time_rows,
    )?;

    Ok(RunStatus {
        divergence_only: !any_usable,
    })
}

fn build_init(
    kind: &str,
    dataset: &dld_core::tasks::TaskDataset,
    sizes: &[usize],
    pretrain_delta: f64,
    seed: u64,
) -> Result<LinearNetwork> {
    Ok(match kind {
        "scaled_gaussian" => scaled_gaussian(sizes, seed)?,
        "random_orthogonal" => random_orthogonal(sizes, seed)?,
        "greedy_pretrain" => {
            greedy_pretrain_linear(
                dataset,
                sizes,
                PretrainMode::ClosedForm {
                    delta: pretrain_delta,
                },
                seed,
            )?
            .net
        }
        other => {
            return Err(crate::error::CliError::Config(format!(
                "unknown init kind `{other}`"
            )))
        }
    })
}
