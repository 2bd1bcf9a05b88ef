//! Experiment runners: each reproduces one of the paper-style analyses at
//! the configured scale and emits CSV/JSON plot data.

mod chaos;
mod consistency;
mod depth_sweep;
mod init_compare;
mod isometry;
mod mode_curves;
mod pretrain_vs_random;
mod spectra_run;
mod sweep_common;

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dld_core::linalg;
use dld_core::tasks::{
    compute_correlations_with, generate_hierarchical_diffusion, load_idx, whiten_inputs_for,
    CorrelationStats, Normalization, TaskDataset,
};

use crate::config::{ExperimentConfig, ExperimentKind, TaskSpec};
use crate::error::{CliError, Result};
use crate::output::RunWriter;

/// What a finished run reports back to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStatus {
    /// Every training cell diverged; nothing usable was produced.
    pub divergence_only: bool,
}

impl RunStatus {
    pub fn ok() -> RunStatus {
        RunStatus {
            divergence_only: false,
        }
    }
}

/// Dispatches a validated configuration to its runner.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunStatus> {
    config.validate()?;
    let start = std::time::Instant::now();
    let mut writer = RunWriter::new(out_dir, config)?;
    let status = match config.experiment {
        ExperimentKind::ModeCurves => mode_curves::run(config, &mut writer)?,
        ExperimentKind::DepthSweep => depth_sweep::run(config, &mut writer)?,
        ExperimentKind::InitCompare => init_compare::run(config, &mut writer)?,
        ExperimentKind::PretrainVsRandom => pretrain_vs_random::run(config, &mut writer)?,
        ExperimentKind::Spectra => spectra_run::run(config, &mut writer)?,
        ExperimentKind::Chaos => chaos::run(config, &mut writer)?,
        ExperimentKind::IsometryGrid => isometry::run(config, &mut writer)?,
        ExperimentKind::Consistency => consistency::run(config, &mut writer)?,
    };
    writer.finish(start.elapsed().as_millis())?;
    Ok(status)
}

/// Materializes the configured task.
pub fn build_dataset(task: &TaskSpec) -> Result<TaskDataset> {
    match task {
        TaskSpec::Tree(cfg) => Ok(generate_hierarchical_diffusion(cfg)?),
        TaskSpec::Idx {
            images,
            labels,
            one_hot_dim,
        } => Ok(load_idx(images, labels, *one_hot_dim)?),
        TaskSpec::Synthetic {
            n_in,
            n_out,
            singular_values,
            seed,
            aligned,
        } => synthetic_dataset(*n_in, *n_out, singular_values, *seed, *aligned),
    }
}

/// White synthetic task: one-hot inputs and outputs built from a prescribed
/// singular spectrum between Haar-random bases.
fn synthetic_dataset(
    n_in: usize,
    n_out: usize,
    singular_values: &[f64],
    seed: u64,
    aligned: bool,
) -> Result<TaskDataset> {
    if n_in == 0 || n_out == 0 {
        return Err(CliError::Config("synthetic task needs positive dims".into()));
    }
    if singular_values.len() > n_in.min(n_out) {
        return Err(CliError::Config(format!(
            "synthetic task lists {} singular values but min(n_in, n_out) = {}",
            singular_values.len(),
            n_in.min(n_out)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (left, right) = if aligned {
        (DMatrix::identity(n_out, n_out), DMatrix::identity(n_in, n_in))
    } else {
        (
            linalg::haar_orthogonal(n_out, &mut rng),
            linalg::haar_orthogonal(n_in, &mut rng),
        )
    };
    let mut map = DMatrix::zeros(n_out, n_in);
    for (alpha, &s) in singular_values.iter().enumerate() {
        map += s * left.column(alpha) * right.column(alpha).transpose();
    }
    let inputs = DMatrix::identity(n_in, n_in);
    let outputs = map * &inputs;
    Ok(TaskDataset::new(inputs, outputs, "synthetic")?)
}

/// Normalization convention selected by the config flag.
pub fn normalization_of(config: &ExperimentConfig) -> Normalization {
    if config.normalize {
        Normalization::PerExample
    } else {
        Normalization::Sum
    }
}

/// Dataset and statistics in a whitened frame consistent with the config's
/// normalization: sigma11 comes out as the identity either way.
pub fn whitened_stats(
    config: &ExperimentConfig,
    dataset: &TaskDataset,
) -> Result<(TaskDataset, CorrelationStats)> {
    let norm = normalization_of(config);
    let white = whiten_inputs_for(dataset, norm)?;
    let stats = compute_correlations_with(&white, norm)?;
    Ok((white, stats))
}

/// Deterministic derived seed for independent sub-streams.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        state ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(state << 6)
            .wrapping_add(state >> 2);
        state = state.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    }
    state
}
