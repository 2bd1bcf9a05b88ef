//! Gradient-descent simulation of deep linear networks (plus the tanh
//! comparison network) driven entirely by correlation statistics: examples
//! are never forward-propagated during linear training, only sigma31 is.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tasks::{CorrelationStats, Normalization, TaskDataset};

/// Loss blow-up factor beyond which a run is flagged as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// Default consistency-score threshold for training with input correlations.
pub const ALIGNMENT_THRESHOLD: f64 = 0.99;

/// An ordered stack of weight matrices; `weights[l]` maps layer l to l+1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNetwork {
    weights: Vec<DMatrix<f64>>,
    layer_sizes: Vec<usize>,
}

impl LinearNetwork {
    pub fn new(weights: Vec<DMatrix<f64>>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Shape(format!(
                "a deep network needs at least two weight matrices (one hidden layer), got {}",
                weights.len()
            )));
        }
        let mut layer_sizes = Vec::with_capacity(weights.len() + 1);
        layer_sizes.push(weights[0].ncols());
        for (l, w) in weights.iter().enumerate() {
            if l > 0 && w.ncols() != weights[l - 1].nrows() {
                return Err(Error::Shape(format!(
                    "weights[{l}] expects input dim {}, previous layer outputs {}",
                    w.ncols(),
                    weights[l - 1].nrows()
                )));
            }
            layer_sizes.push(w.nrows());
        }
        Ok(LinearNetwork {
            weights,
            layer_sizes,
        })
    }

    /// Number of layers N_l (counting input and output).
    pub fn depth(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.weights
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Writes a versioned CSV checkpoint: a file header, then one
    /// `layer,index,rows,cols` header per weight matrix followed by
    /// row-major values.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "dld-checkpoint,v1,{}", self.weights.len())?;
        for (idx, m) in self.weights.iter().enumerate() {
            writeln!(w, "layer,{},{},{}", idx, m.nrows(), m.ncols())?;
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<LinearNetwork> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Format {
            path: path.display().to_string(),
            detail: "empty checkpoint".into(),
        })??;
        let parts: Vec<&str> = header.trim().split(',').collect();
        if parts.len() != 3 || parts[0] != "dld-checkpoint" || parts[1] != "v1" {
            return Err(Error::Format {
                path: path.display().to_string(),
                detail: format!("unrecognized checkpoint header `{header}`"),
            });
        }
        let count: usize = parts[2].parse().map_err(|_| Error::Format {
            path: path.display().to_string(),
            detail: "bad layer count".into(),
        })?;
        let mut weights = Vec::with_capacity(count);
        for expected_idx in 0..count {
            let header = lines.next().ok_or_else(|| Error::Format {
                path: path.display().to_string(),
                detail: "missing layer header".into(),
            })??;
            let parts: Vec<&str> = header.trim().split(',').collect();
            if parts.len() != 4 || parts[0] != "layer" {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    detail: format!("bad layer header `{header}`"),
                });
            }
            let idx: usize = parts[1].parse().unwrap_or(usize::MAX);
            if idx != expected_idx {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    detail: format!("layer index {idx}, expected {expected_idx}"),
                });
            }
            let rows: usize = parts[2].parse().map_err(|_| Error::Format {
                path: path.display().to_string(),
                detail: "bad layer rows".into(),
            })?;
            let cols: usize = parts[3].parse().map_err(|_| Error::Format {
                path: path.display().to_string(),
                detail: "bad layer cols".into(),
            })?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = lines.next().ok_or_else(|| Error::Format {
                    path: path.display().to_string(),
                    detail: "truncated layer block".into(),
                })??;
                for field in line.trim().split(',') {
                    data.push(field.parse::<f64>().map_err(|_| Error::Format {
                        path: path.display().to_string(),
                        detail: format!("bad value `{field}`"),
                    })?);
                }
            }
            weights.push(DMatrix::from_row_slice(rows, cols, &data));
        }
        LinearNetwork::new(weights)
    }
}

/// Training-loop parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub loss_threshold: f64,
    pub record_every: usize,
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || self.record_every == 0 {
            return Err(Error::InvalidArgument(
                "learning_rate and record_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a training run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ThresholdReached,
    MaxIters,
    Diverged,
}

/// Recorded time series of per-mode strengths and loss.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub times: Vec<usize>,
    pub mode_strengths: Vec<Vec<f64>>,
    pub loss: Vec<f64>,
}

impl ModeTrajectory {
    pub fn num_modes(&self) -> usize {
        self.mode_strengths.first().map_or(0, |row| row.len())
    }

    /// CSV export with columns `iter,loss,mode_1,...,mode_k`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let k = self.num_modes();
        let header: Vec<String> = (1..=k).map(|i| format!("mode_{i}")).collect();
        writeln!(w, "iter,loss,{}", header.join(","))?;
        for (row, t) in self.times.iter().enumerate() {
            let modes: Vec<String> = self.mode_strengths[row]
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            writeln!(w, "{},{},{}", t, self.loss[row], modes.join(","))?;
        }
        Ok(())
    }
}

/// Outcome of a training run: trajectory, final weights, stop condition.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub trajectory: ModeTrajectory,
    pub net: LinearNetwork,
    pub stop: StopReason,
    pub iterations: usize,
}

fn check_shapes(net: &LinearNetwork, stats: &CorrelationStats) -> Result<()> {
    if net.input_dim() != stats.input_dim() || net.output_dim() != stats.output_dim() {
        return Err(Error::Shape(format!(
            "network maps {} -> {} but statistics are {} -> {}",
            net.input_dim(),
            net.output_dim(),
            stats.input_dim(),
            stats.output_dim()
        )));
    }
    Ok(())
}

/// End-to-end map W_tot, accumulated by a left fold from the input side.
pub fn effective_map(net: &LinearNetwork) -> DMatrix<f64> {
    let mut acc = net.weights[0].clone();
    for w in &net.weights[1..] {
        acc = w * acc;
    }
    acc
}

/// Squared-error loss expressed through correlation statistics:
/// E = (|Y|^2 - 2 tr(W sigma31^T) + tr(W sigma11 W^T)) / 2.
pub fn loss_from_stats(w_tot: &DMatrix<f64>, stats: &CorrelationStats) -> f64 {
    let cross: f64 = w_tot
        .iter()
        .zip(stats.sigma31.iter())
        .map(|(a, b)| a * b)
        .sum();
    let ws = w_tot * &stats.sigma11;
    let quad: f64 = ws.iter().zip(w_tot.iter()).map(|(a, b)| a * b).sum();
    0.5 * (stats.output_sq_norm - 2.0 * cross + quad)
}

/// First min(N1, N3) diagonal entries of U^T W_tot V.
pub fn mode_strengths(net: &LinearNetwork, stats: &CorrelationStats) -> DVector<f64> {
    mode_strengths_of_map(&effective_map(net), stats)
}

/// Mode strengths of an arbitrary end-to-end map under the task's bases.
pub fn mode_strengths_of_map(w_tot: &DMatrix<f64>, stats: &CorrelationStats) -> DVector<f64> {
    let k = stats.num_modes();
    let mut out = DVector::zeros(k);
    // diag(U^T W V)_a = u_a . (W v_a); avoids forming the full product.
    for alpha in 0..k {
        let wv = w_tot * stats.v.column(alpha);
        out[alpha] = stats.u.column(alpha).dot(&wv);
    }
    out
}

fn finite_or_divergence(weights: &[DMatrix<f64>], iteration: usize) -> Result<()> {
    for w in weights {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "weight update",
                iteration,
            });
        }
    }
    Ok(())
}

/// One batch gradient step of a three-layer network, both layers updated
/// simultaneously from the pre-step weights.
pub fn grad_step_three_layer(
    net: &mut LinearNetwork,
    stats: &CorrelationStats,
    learning_rate: f64,
) -> Result<()> {
    if net.depth() != 3 {
        return Err(Error::Shape(format!(
            "three-layer step requires depth 3, network has {}",
            net.depth()
        )));
    }
    check_shapes(net, stats)?;
    let w21 = &net.weights[0];
    let w32 = &net.weights[1];
    let bracket = &stats.sigma31 - w32 * (w21 * &stats.sigma11);
    let delta21 = w32.transpose() * &bracket * learning_rate;
    let delta32 = &bracket * w21.transpose() * learning_rate;
    net.weights[0] += delta21;
    net.weights[1] += delta32;
    finite_or_divergence(&net.weights, 0)
}

/// One batch gradient step at any depth: for each layer the update is
/// suffix^T [sigma31 - W_tot sigma11] prefix^T with empty products equal to
/// the identity. Prefix/suffix chains are accumulated thin (anchored at the
/// input/output dimensions), so a step costs O(N_l) skinny products.
pub fn grad_step_deep(
    net: &mut LinearNetwork,
    stats: &CorrelationStats,
    learning_rate: f64,
) -> Result<()> {
    check_shapes(net, stats)?;
    let num_weights = net.weights.len();

    // prefix[l] = W^{l-1} ... W^1 (layer_sizes[l] x N1), prefix[0] = I.
    let mut prefixes: Vec<DMatrix<f64>> = Vec::with_capacity(num_weights + 1);
    prefixes.push(DMatrix::identity(net.input_dim(), net.input_dim()));
    for l in 0..num_weights {
        let next = &net.weights[l] * &prefixes[l];
        prefixes.push(next);
    }
    // suffix[l] = W^{L} ... W^{l+1} (N3 x layer_sizes[l+1]), suffix[last] = I.
    let mut suffixes: Vec<DMatrix<f64>> =
        vec![DMatrix::identity(net.output_dim(), net.output_dim()); num_weights];
    for l in (0..num_weights - 1).rev() {
        suffixes[l] = &suffixes[l + 1] * &net.weights[l + 1];
    }

    let w_tot = prefixes[num_weights].clone();
    let bracket = &stats.sigma31 - &w_tot * &stats.sigma11;
    for l in 0..num_weights {
        let projected = &bracket * prefixes[l].transpose();
        let delta = suffixes[l].transpose() * projected * learning_rate;
        net.weights[l] += delta;
    }
    finite_or_divergence(&net.weights, 0)
}

fn train_loop(
    mut net: LinearNetwork,
    stats: &CorrelationStats,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_shapes(&net, stats)?;
    let mut trajectory = ModeTrajectory {
        times: Vec::new(),
        mode_strengths: Vec::new(),
        loss: Vec::new(),
    };
    let mut record = |iter: usize, w_tot: &DMatrix<f64>, loss: f64| {
        trajectory.times.push(iter);
        trajectory
            .mode_strengths
            .push(mode_strengths_of_map(w_tot, stats).iter().copied().collect());
        trajectory.loss.push(loss);
    };

    let w0 = effective_map(&net);
    let initial_loss = loss_from_stats(&w0, stats);
    record(0, &w0, initial_loss);
    if initial_loss < cfg.loss_threshold {
        return Ok(TrainOutcome {
            trajectory,
            net,
            stop: StopReason::ThresholdReached,
            iterations: 0,
        });
    }

    let divergence_cap = DIVERGENCE_FACTOR * initial_loss.max(f64::MIN_POSITIVE);
    let mut stop = StopReason::MaxIters;
    let mut iterations = cfg.max_iters;
    for iter in 1..=cfg.max_iters {
        if let Err(err) = grad_step_deep(&mut net, stats, cfg.learning_rate) {
            match err {
                Error::NonFinite { .. } => {
                    stop = StopReason::Diverged;
                    iterations = iter;
                    break;
                }
                other => return Err(other),
            }
        }
        let w_tot = effective_map(&net);
        let loss = loss_from_stats(&w_tot, stats);
        let recorded = iter % cfg.record_every == 0;
        if recorded {
            record(iter, &w_tot, loss);
        }
        if !loss.is_finite() || loss > divergence_cap {
            if !recorded {
                record(iter, &w_tot, loss);
            }
            stop = StopReason::Diverged;
            iterations = iter;
            break;
        }
        if loss < cfg.loss_threshold {
            if !recorded {
                record(iter, &w_tot, loss);
            }
            stop = StopReason::ThresholdReached;
            iterations = iter;
            break;
        }
    }
    if stop == StopReason::MaxIters && cfg.max_iters % cfg.record_every != 0 {
        let w_tot = effective_map(&net);
        record(cfg.max_iters, &w_tot, loss_from_stats(&w_tot, stats));
    }
    Ok(TrainOutcome {
        trajectory,
        net,
        stop,
        iterations,
    })
}

/// Full-batch training via `grad_step_deep`, recording mode strengths and
/// loss every `record_every` iterations.
pub fn train(net: LinearNetwork, stats: &CorrelationStats, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_loop(net, stats, cfg)
}

/// Training with task-aligned (non-white) input correlations. Requires the
/// input eigenbasis to lie along V, checked through the consistency score;
/// converges to the best rank-N2 approximation of sigma31 sigma11^{-1}.
pub fn train_with_input_correlations(
    net: LinearNetwork,
    stats: &CorrelationStats,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_input_correlations_threshold(net, stats, cfg, ALIGNMENT_THRESHOLD)
}

pub fn train_with_input_correlations_threshold(
    net: LinearNetwork,
    stats: &CorrelationStats,
    cfg: &TrainConfig,
    alignment_threshold: f64,
) -> Result<TrainOutcome> {
    let score = crate::tasks::consistency_score(stats);
    if score < alignment_threshold {
        return Err(Error::Misaligned {
            score,
            required: alignment_threshold,
        });
    }
    train_loop(net, stats, cfg)
}

/// Layer-wise tanh forward pass x^{l+1} = g W^l tanh(x^l); returns all
/// layer activations including the raw input.
pub fn forward_tanh(net: &LinearNetwork, input: &DVector<f64>, gain: f64) -> Vec<DVector<f64>> {
    let mut activations = Vec::with_capacity(net.depth());
    activations.push(input.clone());
    for w in &net.weights {
        let prev = activations.last().unwrap();
        let squashed = prev.map(f64::tanh);
        activations.push(w * squashed * gain);
    }
    activations
}

/// Full-batch squared-error loss and exact backpropagation gradients of the
/// three-layer tanh network y = W32 tanh(W21 x).
pub fn tanh_loss_and_gradients(
    w21: &DMatrix<f64>,
    w32: &DMatrix<f64>,
    dataset: &TaskDataset,
) -> (f64, DMatrix<f64>, DMatrix<f64>) {
    let x = &dataset.inputs;
    let hidden = (w21 * x).map(f64::tanh);
    let errors = w32 * &hidden - &dataset.outputs;
    let loss = 0.5 * errors.iter().map(|e| e * e).sum::<f64>();
    let grad_w32 = &errors * hidden.transpose();
    let mut back = w32.transpose() * &errors;
    for j in 0..back.ncols() {
        for i in 0..back.nrows() {
            let h = hidden[(i, j)];
            back[(i, j)] *= 1.0 - h * h;
        }
    }
    let grad_w21 = back * x.transpose();
    (loss, grad_w21, grad_w32)
}

/// Configuration for the three-layer tanh comparison network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TanhTrainConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub record_every: usize,
    pub init_scale: f64,
    pub seed: u64,
}

/// Trains y = W32 tanh(W21 x) by exact full-batch backpropagation and
/// records the diagonal of U^T sigma31_tanh(t) V, the network's evolving
/// input-output correlation expressed in the task's singular bases.
pub fn train_tanh_three_layer(
    dataset: &TaskDataset,
    stats: &CorrelationStats,
    cfg: &TanhTrainConfig,
) -> Result<(ModeTrajectory, StopReason)> {
    if cfg.learning_rate <= 0.0 || cfg.max_iters == 0 || cfg.record_every == 0 || cfg.hidden == 0 {
        return Err(Error::InvalidArgument(
            "tanh training needs positive rate, iterations, stride and width".into(),
        ));
    }
    let x = &dataset.inputs;
    let scale = match stats.normalization {
        Normalization::Sum => 1.0,
        Normalization::PerExample => 1.0 / dataset.num_examples() as f64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w21 = linalg::gaussian_matrix(cfg.hidden, dataset.input_dim(), &mut rng) * cfg.init_scale;
    let mut w32 = linalg::gaussian_matrix(dataset.output_dim(), cfg.hidden, &mut rng) * cfg.init_scale;

    let mut trajectory = ModeTrajectory {
        times: Vec::new(),
        mode_strengths: Vec::new(),
        loss: Vec::new(),
    };
    let mut initial_loss = f64::INFINITY;
    let mut stop = StopReason::MaxIters;
    for iter in 0..=cfg.max_iters {
        let (raw_loss, grad_w21, grad_w32) = tanh_loss_and_gradients(&w21, &w32, dataset);
        let loss = raw_loss * scale;
        if iter == 0 {
            initial_loss = loss;
        }
        if iter % cfg.record_every == 0 || iter == cfg.max_iters {
            let predictions = &w32 * (&w21 * x).map(f64::tanh);
            let sigma31_tanh = predictions * x.transpose() * scale;
            trajectory.times.push(iter);
            trajectory.mode_strengths.push(
                mode_strengths_of_map(&sigma31_tanh, stats)
                    .iter()
                    .copied()
                    .collect(),
            );
            trajectory.loss.push(loss);
        }
        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial_loss.max(f64::MIN_POSITIVE) {
            stop = StopReason::Diverged;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }
        w32 -= grad_w32 * cfg.learning_rate;
        w21 -= grad_w21 * cfg.learning_rate;
    }

    Ok((trajectory, stop))
}
