//! Weight-initialization schemes: small/scaled Gaussian draws, Haar
//! orthogonal stacks, exact decoupled spectral initializations, and greedy
//! layer-wise linear autoencoder pretraining.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::netsim::{self, LinearNetwork, StopReason, TrainConfig};
use crate::tasks::{CorrelationStats, Normalization, TaskDataset, RANK_TOLERANCE};

/// Initialization families exposed through experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    SmallGaussian,
    ScaledGaussian,
    RandomOrthogonal,
    DecoupledSpectral,
    GreedyPretrain,
}

/// Declarative initialization choice: `scale` is sigma for Gaussian draws,
/// the composite mode strength u0 for spectral initializations, and the
/// per-layer shortfall delta for closed-form pretraining.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub kind: InitKind,
    pub scale: f64,
    pub seed: u64,
}

fn build_layers<F>(layer_sizes: &[usize], mut make: F) -> Result<LinearNetwork>
where
    F: FnMut(usize, usize, usize) -> DMatrix<f64>,
{
    if layer_sizes.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least three layers, got {:?}",
            layer_sizes
        )));
    }
    if layer_sizes.iter().any(|&n| n == 0) {
        return Err(Error::Shape("zero-width layer".into()));
    }
    let weights = layer_sizes
        .windows(2)
        .enumerate()
        .map(|(l, w)| make(l, w[1], w[0]))
        .collect();
    LinearNetwork::new(weights)
}

/// I.i.d. zero-mean Gaussian entries with standard deviation sigma.
pub fn small_gaussian(layer_sizes: &[usize], sigma: f64, seed: u64) -> Result<LinearNetwork> {
    if sigma < 0.0 {
        return Err(Error::InvalidArgument("sigma must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_layers(layer_sizes, |_, rows, cols| {
        linalg::gaussian_matrix(rows, cols, &mut rng) * sigma
    })
}

/// Norm-preserving Gaussian initialization: entries N(0, 1/fan_in), where
/// fan-in is the source-layer width.
pub fn scaled_gaussian(layer_sizes: &[usize], seed: u64) -> Result<LinearNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_layers(layer_sizes, |_, rows, cols| {
        linalg::gaussian_matrix(rows, cols, &mut rng) / (cols as f64).sqrt()
    })
}

/// Haar-distributed orthogonal layer stack. Rectangular layers receive
/// orthonormal columns (tall) or orthonormal rows (wide).
pub fn random_orthogonal(layer_sizes: &[usize], seed: u64) -> Result<LinearNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_layers(layer_sizes, |_, rows, cols| {
        linalg::haar_semi_orthogonal(rows, cols, &mut rng)
    })
}

/// Decoupled spectral initialization with equal composite strength u0 on
/// every mode that fits through the network.
pub fn decoupled_spectral(
    stats: &CorrelationStats,
    layer_sizes: &[usize],
    u0: f64,
    seed: u64,
) -> Result<LinearNetwork> {
    if u0 <= 0.0 {
        return Err(Error::InvalidArgument("u0 must be positive".into()));
    }
    let active = layer_sizes.iter().copied().min().unwrap_or(0);
    decoupled_spectral_per_mode(stats, layer_sizes, &vec![u0; active], seed)
}

/// Decoupled spectral initialization with explicit per-mode composite
/// strengths: layer l is R_{l+1} D R_l^T with the input/output bases pinned
/// to V and U and interior bases drawn Haar.
pub fn decoupled_spectral_per_mode(
    stats: &CorrelationStats,
    layer_sizes: &[usize],
    strengths: &[f64],
    seed: u64,
) -> Result<LinearNetwork> {
    if layer_sizes.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least three layers, got {:?}",
            layer_sizes
        )));
    }
    if layer_sizes[0] != stats.input_dim()
        || *layer_sizes.last().unwrap() != stats.output_dim()
    {
        return Err(Error::Shape(format!(
            "layer sizes {:?} incompatible with statistics mapping {} -> {}",
            layer_sizes,
            stats.input_dim(),
            stats.output_dim()
        )));
    }
    if strengths.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "mode strengths must be non-negative".into(),
        ));
    }
    let num_weights = layer_sizes.len() - 1;
    let exponent = 1.0 / num_weights as f64;
    let per_layer: Vec<f64> = strengths.iter().map(|&v| v.powf(exponent)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bases: Vec<DMatrix<f64>> = Vec::with_capacity(layer_sizes.len());
    bases.push(stats.v.clone());
    for &n in &layer_sizes[1..layer_sizes.len() - 1] {
        bases.push(linalg::haar_orthogonal(n, &mut rng));
    }
    bases.push(stats.u.clone());

    let weights = (0..num_weights)
        .map(|l| {
            let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
            let mut diag = DMatrix::zeros(rows, cols);
            for alpha in 0..rows.min(cols).min(per_layer.len()) {
                diag[(alpha, alpha)] = per_layer[alpha];
            }
            &bases[l + 1] * diag * bases[l].transpose()
        })
        .collect();
    LinearNetwork::new(weights)
}

/// How greedy pretraining realizes the autoencoder endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PretrainMode {
    /// Jump straight to the closed-form endpoint with per-layer mode
    /// strengths sqrt(1 - delta).
    ClosedForm { delta: f64 },
    /// Literally train each layer's linear autoencoder by gradient descent
    /// until its loss falls to `loss_ratio` of the initial loss.
    Literal {
        learning_rate: Option<f64>,
        loss_ratio: f64,
        max_epochs: usize,
    },
}

/// Result of greedy pretraining: the stacked encoder network, the gradient
/// iterations spent, and how many pass-through modes were zeroed by rank
/// deficiency of the data.
#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub net: LinearNetwork,
    pub iterations: usize,
    pub zeroed_modes: usize,
}

/// Greedy layer-wise linear autoencoder pretraining.
///
/// Each layer is initialized as the encoder of a linear autoencoder over the
/// representation below it, so its weights end at R M^{1/2} Q^T with Q the
/// input principal axes at that level. When the output width equals the
/// input width, the closed form pairs the top layer with the matching
/// decoder, making the composite map Q M' Q^T on the pretraining task.
pub fn greedy_pretrain_linear(
    dataset: &TaskDataset,
    layer_sizes: &[usize],
    mode: PretrainMode,
    seed: u64,
) -> Result<PretrainOutcome> {
    if layer_sizes.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least three layers, got {:?}",
            layer_sizes
        )));
    }
    if layer_sizes[0] != dataset.input_dim() {
        return Err(Error::Shape(format!(
            "first layer width {} does not match input dim {}",
            layer_sizes[0],
            dataset.input_dim()
        )));
    }
    match mode {
        PretrainMode::ClosedForm { delta } => closed_form_pretrain(dataset, layer_sizes, delta, seed),
        PretrainMode::Literal {
            learning_rate,
            loss_ratio,
            max_epochs,
        } => literal_pretrain(dataset, layer_sizes, learning_rate, loss_ratio, max_epochs, seed),
    }
}

fn closed_form_pretrain(
    dataset: &TaskDataset,
    layer_sizes: &[usize],
    delta: f64,
    seed: u64,
) -> Result<PretrainOutcome> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} outside [0, 1]"
        )));
    }
    let sigma11 = &dataset.inputs * dataset.inputs.transpose();
    let (eigenvalues, q) = linalg::symmetric_eigen_desc(&sigma11);
    let data_rank = eigenvalues
        .iter()
        .filter(|&&v| v > RANK_TOLERANCE * eigenvalues[0].max(0.0))
        .count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = layer_sizes.len();
    let mirrored = layer_sizes[depth - 1] == layer_sizes[0];
    let mut bases: Vec<DMatrix<f64>> = Vec::with_capacity(depth);
    bases.push(q.clone());
    for &n in &layer_sizes[1..depth - 1] {
        bases.push(linalg::haar_orthogonal(n, &mut rng));
    }
    if mirrored {
        bases.push(q);
    } else {
        bases.push(linalg::haar_orthogonal(layer_sizes[depth - 1], &mut rng));
    }

    let strength = (1.0 - delta).sqrt();
    let weights: Vec<DMatrix<f64>> = (0..depth - 1)
        .map(|l| {
            let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
            let mut diag = DMatrix::zeros(rows, cols);
            for alpha in 0..rows.min(cols).min(data_rank) {
                diag[(alpha, alpha)] = strength;
            }
            &bases[l + 1] * diag * bases[l].transpose()
        })
        .collect();
    let bottleneck = *layer_sizes.iter().min().unwrap();
    Ok(PretrainOutcome {
        net: LinearNetwork::new(weights)?,
        iterations: 0,
        zeroed_modes: bottleneck.saturating_sub(data_rank),
    })
}

fn literal_pretrain(
    dataset: &TaskDataset,
    layer_sizes: &[usize],
    learning_rate: Option<f64>,
    loss_ratio: f64,
    max_epochs: usize,
    seed: u64,
) -> Result<PretrainOutcome> {
    if !(loss_ratio > 0.0 && loss_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "loss_ratio {loss_ratio} must lie in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut representation = &dataset.inputs * dataset.inputs.transpose();
    let mut weights: Vec<DMatrix<f64>> = Vec::with_capacity(layer_sizes.len() - 1);
    let mut iterations = 0usize;
    let depth = layer_sizes.len();
    for l in 0..depth - 1 {
        let (hidden, visible) = (layer_sizes[l + 1], layer_sizes[l]);
        let mut encoder = linalg::gaussian_matrix(hidden, visible, &mut rng) * 0.01;
        let decoder = linalg::gaussian_matrix(visible, hidden, &mut rng) * 0.01;
        if max_epochs > 0 {
            let trace: f64 = (0..visible).map(|i| representation[(i, i)]).sum();
            let stats = CorrelationStats::from_correlations(
                representation.clone(),
                representation.clone(),
                trace,
                Normalization::Sum,
            )?;
            let rate = learning_rate.unwrap_or_else(|| 0.5 / stats.s[0].max(f64::MIN_POSITIVE));
            let initial = netsim::loss_from_stats(&(&decoder * &encoder), &stats);
            let cfg = TrainConfig {
                learning_rate: rate,
                max_iters: max_epochs,
                loss_threshold: loss_ratio * initial,
                record_every: max_epochs.max(1),
                seed,
            };
            let autoencoder = LinearNetwork::new(vec![encoder, decoder])?;
            let outcome = netsim::train(autoencoder, &stats, &cfg)?;
            if outcome.stop == StopReason::Diverged {
                return Err(Error::Diverged {
                    iteration: outcome.iterations,
                    loss: *outcome.trajectory.loss.last().unwrap(),
                });
            }
            iterations += outcome.iterations;
            encoder = outcome.net.weights()[0].clone();
        }
        representation = &encoder * representation * encoder.transpose();
        weights.push(encoder);
    }

    let final_trace: f64 = (0..representation.nrows())
        .map(|i| representation[(i, i)])
        .sum();
    let zeroed = if final_trace <= RANK_TOLERANCE {
        *layer_sizes.iter().min().unwrap()
    } else {
        let (eigs, _) = linalg::symmetric_eigen_desc(&representation);
        let live = eigs.iter().filter(|&&v| v > RANK_TOLERANCE * eigs[0]).count();
        layer_sizes.iter().min().unwrap().saturating_sub(live)
    };
    Ok(PretrainOutcome {
        net: LinearNetwork::new(weights)?,
        iterations,
        zeroed_modes: zeroed,
    })
}
