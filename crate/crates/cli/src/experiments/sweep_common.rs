//! Shared learning-rate grid-search machinery for the depth sweeps.

use dld_core::netsim::{train, LinearNetwork, StopReason, TrainConfig};
use dld_core::tasks::CorrelationStats;

use crate::error::Result;
use crate::output::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Reached,
    Unreached,
    Diverged,
}

impl CellStatus {
    pub fn label(self) -> &'static str {
        match self {
            CellStatus::Reached => "reached",
            CellStatus::Unreached => "unreached",
            CellStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub depth: usize,
    pub rate: f64,
    pub status: CellStatus,
    pub iterations: usize,
    pub final_loss: f64,
}

impl CellResult {
    pub fn csv_row(&self, prefix: &str) -> String {
        format!(
            "{prefix}{},{},{},{},{}",
            self.depth,
            fmt_f64(self.rate),
            self.status.label(),
            self.iterations,
            fmt_f64(self.final_loss)
        )
    }
}

/// Hidden-layer stack for one sweep depth.
pub fn layer_sizes(n_in: usize, n_out: usize, hidden: usize, depth: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(depth);
    sizes.push(n_in);
    sizes.extend(std::iter::repeat(hidden).take(depth - 2));
    sizes.push(n_out);
    sizes
}

/// Trains one grid cell to the loss threshold.
pub fn run_cell(
    net: LinearNetwork,
    stats: &CorrelationStats,
    depth: usize,
    rate: f64,
    loss_threshold: f64,
    max_iters: usize,
) -> Result<CellResult> {
    let cfg = TrainConfig {
        learning_rate: rate,
        max_iters,
        loss_threshold,
        record_every: max_iters.max(1),
        seed: 0,
    };
    let outcome = train(net, stats, &cfg)?;
    let status = match outcome.stop {
        StopReason::ThresholdReached => CellStatus::Reached,
        StopReason::MaxIters => CellStatus::Unreached,
        StopReason::Diverged => CellStatus::Diverged,
    };
    Ok(CellResult {
        depth,
        rate,
        status,
        iterations: outcome.iterations,
        final_loss: *outcome.trajectory.loss.last().unwrap(),
    })
}

/// Grid argmin of iterations-to-threshold among reached cells.
pub fn best_cell(cells: &[CellResult]) -> Option<&CellResult> {
    cells
        .iter()
        .filter(|c| c.status == CellStatus::Reached)
        .min_by(|a, b| {
            a.iterations
                .cmp(&b.iterations)
                .then(a.rate.partial_cmp(&b.rate).unwrap())
        })
}
