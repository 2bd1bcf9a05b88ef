//! Pretraining consistency check: diagonality of V^T sigma11 V for the
//! configured task, against a random-basis baseline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use dld_core::linalg::haar_orthogonal;
use dld_core::tasks::consistency_score;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{build_dataset, normalization_of, RunStatus};
use crate::output::{fmt_f64, RunWriter};

#[derive(Serialize)]
struct ConsistencyReport {
    task: String,
    score: f64,
    random_baseline_score: f64,
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<RunStatus> {
    let dataset = build_dataset(&config.task)?;
    let stats = dld_core::tasks::compute_correlations_with(&dataset, normalization_of(config))?;
    let score = consistency_score(&stats);

    // Baseline: replace V by a Haar-random orthogonal basis.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut randomized = stats.clone();
    randomized.v = haar_orthogonal(stats.input_dim(), &mut rng);
    let baseline = consistency_score(&randomized);

    writer.csv(
        "consistency",
        "label,score",
        vec![
            format!("task,{}", fmt_f64(score)),
            format!("random_baseline,{}", fmt_f64(baseline)),
        ],
    )?;
    writer.json(
        "consistency_report",
        &ConsistencyReport {
            task: dataset.name.clone(),
            score,
            random_baseline_score: baseline,
        },
    )?;
    Ok(RunStatus::ok())
}
