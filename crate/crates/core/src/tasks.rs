//! Task generation and ingestion, plus the correlation statistics whose SVD
//! drives every learning-dynamics computation in this crate.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Relative cutoff below which a singular value does not count toward rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Paired input/output example matrices: one column per example.
#[derive(Debug, Clone)]
pub struct TaskDataset {
    pub inputs: DMatrix<f64>,
    pub outputs: DMatrix<f64>,
    pub name: String,
}

impl TaskDataset {
    pub fn new(inputs: DMatrix<f64>, outputs: DMatrix<f64>, name: impl Into<String>) -> Result<Self> {
        if inputs.ncols() != outputs.ncols() {
            return Err(Error::Shape(format!(
                "inputs have {} examples but outputs have {}",
                inputs.ncols(),
                outputs.ncols()
            )));
        }
        if inputs.ncols() == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one example".into()));
        }
        if inputs.iter().chain(outputs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite entries".into()));
        }
        Ok(TaskDataset {
            inputs,
            outputs,
            name: name.into(),
        })
    }

    pub fn num_examples(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.nrows()
    }

    /// Autoencoding view of this dataset: outputs equal inputs.
    pub fn autoencoding(&self) -> TaskDataset {
        TaskDataset {
            inputs: self.inputs.clone(),
            outputs: self.inputs.clone(),
            name: format!("{}-autoencode", self.name),
        }
    }

    /// Writes the dataset as CSV: one `kind,rows,cols` header per matrix
    /// block followed by row-major values.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        for (kind, m) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            writeln!(w, "{},{},{}", kind, m.nrows(), m.ncols())?;
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn from_csv(path: &Path) -> Result<TaskDataset> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let mut read_block = |expected: &str| -> Result<DMatrix<f64>> {
            let header = lines
                .next()
                .ok_or_else(|| Error::Format {
                    path: path.display().to_string(),
                    detail: format!("missing `{expected}` block header"),
                })??;
            let parts: Vec<&str> = header.trim().split(',').collect();
            if parts.len() != 3 || parts[0] != expected {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    detail: format!("expected header `{expected},rows,cols`, found `{header}`"),
                });
            }
            let rows: usize = parts[1].parse().map_err(|_| Error::Format {
                path: path.display().to_string(),
                detail: format!("bad row count in `{header}`"),
            })?;
            let cols: usize = parts[2].parse().map_err(|_| Error::Format {
                path: path.display().to_string(),
                detail: format!("bad column count in `{header}`"),
            })?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = lines.next().ok_or_else(|| Error::Format {
                    path: path.display().to_string(),
                    detail: "truncated matrix block".into(),
                })??;
                for field in line.trim().split(',') {
                    data.push(field.parse::<f64>().map_err(|_| Error::Format {
                        path: path.display().to_string(),
                        detail: format!("bad value `{field}`"),
                    })?);
                }
            }
            if data.len() != rows * cols {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    detail: format!("expected {} values, found {}", rows * cols, data.len()),
                });
            }
            Ok(DMatrix::from_row_slice(rows, cols, &data))
        };
        let inputs = read_block("inputs")?;
        let outputs = read_block("outputs")?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        TaskDataset::new(inputs, outputs, name)
    }
}

/// Configuration of the hierarchical diffusion generator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TreeTaskConfig {
    pub levels: u32,
    pub flip_prob: f64,
    pub num_features: usize,
    pub seed: u64,
}

/// Generates a hierarchical diffusion task: orthogonal one-hot items, and
/// output features diffused down a binary tree with per-edge sign flips.
pub fn generate_hierarchical_diffusion(cfg: &TreeTaskConfig) -> Result<TaskDataset> {
    if !(0.0..=0.5).contains(&cfg.flip_prob) {
        return Err(Error::InvalidArgument(format!(
            "flip_prob {} outside [0, 0.5]",
            cfg.flip_prob
        )));
    }
    if cfg.levels < 1 || cfg.levels > 20 {
        return Err(Error::InvalidArgument(format!(
            "levels {} must lie in [1, 20] (leaf count caps at 2^20)",
            cfg.levels
        )));
    }
    if cfg.num_features == 0 {
        return Err(Error::InvalidArgument("num_features must be >= 1".into()));
    }
    let leaves = 1usize << cfg.levels;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outputs = DMatrix::zeros(cfg.num_features, leaves);
    let mut values: Vec<f64> = Vec::with_capacity(leaves);
    let mut next: Vec<f64> = Vec::with_capacity(leaves);
    for feature in 0..cfg.num_features {
        values.clear();
        values.push(if rng.gen::<f64>() < 0.5 { 1.0 } else { -1.0 });
        for _ in 0..cfg.levels {
            next.clear();
            for &v in &values {
                for _ in 0..2 {
                    let flipped = rng.gen::<f64>() < cfg.flip_prob;
                    next.push(if flipped { -v } else { v });
                }
            }
            std::mem::swap(&mut values, &mut next);
        }
        for (leaf, &v) in values.iter().enumerate() {
            outputs[(feature, leaf)] = v;
        }
    }
    TaskDataset::new(
        DMatrix::identity(leaves, leaves),
        outputs,
        format!("tree-l{}-p{}-f{}", cfg.levels, cfg.flip_prob, cfg.num_features),
    )
}

/// Whether correlation matrices hold raw sums over examples or per-example
/// averages. Averaging rescales time: training with averaged statistics at
/// rate lambda matches raw-sum statistics at rate lambda / P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Sum,
    PerExample,
}

/// Input and input-output correlations with the SVD of the latter: the
/// complete sufficient statistics for linear-network learning.
#[derive(Debug, Clone)]
pub struct CorrelationStats {
    pub sigma11: DMatrix<f64>,
    pub sigma31: DMatrix<f64>,
    /// Full orthogonal output basis, N3 x N3.
    pub u: DMatrix<f64>,
    /// Singular values, descending, length min(N1, N3).
    pub s: DVector<f64>,
    /// Full orthogonal input basis, N1 x N1.
    pub v: DMatrix<f64>,
    pub rank: usize,
    /// Sum (or mean, under `PerExample`) of squared output norms; the
    /// weight-independent part of the squared error.
    pub output_sq_norm: f64,
    pub normalization: Normalization,
}

impl CorrelationStats {
    pub fn input_dim(&self) -> usize {
        self.sigma11.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.sigma31.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.s.len()
    }

    /// Builds stats directly from correlation matrices (used by synthetic
    /// tasks and pretraining stages that never materialize examples).
    pub fn from_correlations(
        sigma11: DMatrix<f64>,
        sigma31: DMatrix<f64>,
        output_sq_norm: f64,
        normalization: Normalization,
    ) -> Result<CorrelationStats> {
        if sigma11.nrows() != sigma11.ncols() || sigma11.nrows() != sigma31.ncols() {
            return Err(Error::Shape(format!(
                "sigma11 is {}x{} but sigma31 is {}x{}",
                sigma11.nrows(),
                sigma11.ncols(),
                sigma31.nrows(),
                sigma31.ncols()
            )));
        }
        let asym = linalg::max_abs(&(&sigma11 - sigma11.transpose()));
        let scale = linalg::max_abs(&sigma11).max(1e-300);
        if asym > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "sigma11 asymmetry {asym:.3e} exceeds 1e-10 * {scale:.3e}"
            )));
        }
        let svd = linalg::thin_svd(&sigma31)?;
        let u = linalg::complete_orthonormal_basis(&svd.u);
        let v = linalg::complete_orthonormal_basis(&svd.v);
        let s = svd.singular_values;
        let rank = s.iter().filter(|&&x| x > RANK_TOLERANCE * s[0]).count();
        Ok(CorrelationStats {
            sigma11,
            sigma31,
            u,
            s,
            v,
            rank,
            output_sq_norm,
            normalization,
        })
    }
}

/// Correlation statistics as raw sums over examples.
pub fn compute_correlations(dataset: &TaskDataset) -> Result<CorrelationStats> {
    compute_correlations_with(dataset, Normalization::Sum)
}

/// Correlation statistics with an explicit normalization choice.
pub fn compute_correlations_with(
    dataset: &TaskDataset,
    normalization: Normalization,
) -> Result<CorrelationStats> {
    let x = &dataset.inputs;
    let y = &dataset.outputs;
    let scale = match normalization {
        Normalization::Sum => 1.0,
        Normalization::PerExample => 1.0 / dataset.num_examples() as f64,
    };
    let sigma11 = x * x.transpose() * scale;
    let sigma31 = y * x.transpose() * scale;
    let output_sq_norm = y.iter().map(|v| v * v).sum::<f64>() * scale;
    CorrelationStats::from_correlations(sigma11, sigma31, output_sq_norm, normalization)
}

/// Default condition-number cap for whitening.
pub const WHITEN_CONDITION_CAP: f64 = 1e12;

/// Transforms inputs by the symmetric inverse square root of their raw-sum
/// correlation matrix, so the returned dataset has sigma11 = I.
pub fn whiten_inputs(dataset: &TaskDataset) -> Result<TaskDataset> {
    whiten_inputs_with(dataset, WHITEN_CONDITION_CAP)
}

pub fn whiten_inputs_with(dataset: &TaskDataset, condition_cap: f64) -> Result<TaskDataset> {
    let sigma11 = &dataset.inputs * dataset.inputs.transpose();
    let w = linalg::symmetric_inverse_sqrt(&sigma11, condition_cap)?;
    TaskDataset::new(
        &w * &dataset.inputs,
        dataset.outputs.clone(),
        format!("{}-whitened", dataset.name),
    )
}

/// Whitening consistent with a normalization convention: the returned
/// inputs make the correspondingly normalized sigma11 the identity.
pub fn whiten_inputs_for(
    dataset: &TaskDataset,
    normalization: Normalization,
) -> Result<TaskDataset> {
    let white = whiten_inputs(dataset)?;
    match normalization {
        Normalization::Sum => Ok(white),
        Normalization::PerExample => {
            let scale = (dataset.num_examples() as f64).sqrt();
            TaskDataset::new(white.inputs * scale, white.outputs, white.name)
        }
    }
}

fn read_u32(cursor: &mut std::io::Cursor<Vec<u8>>, path: &Path) -> Result<u32> {
    cursor.read_u32::<BigEndian>().map_err(|_| Error::IdxTruncated {
        path: path.display().to_string(),
        needed: cursor.position() as usize + 4,
        found: cursor.get_ref().len(),
    })
}

/// Loads an IDX image/label pair into a dataset: pixels scaled to [0, 1],
/// labels one-hot encoded.
pub fn load_idx(path_images: &Path, path_labels: &Path, one_hot_dim: usize) -> Result<TaskDataset> {
    let mut bytes = Vec::new();
    std::fs::File::open(path_images)?.read_to_end(&mut bytes)?;
    let mut cur = std::io::Cursor::new(bytes);
    let magic = read_u32(&mut cur, path_images)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::IdxMagic {
            path: path_images.display().to_string(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut cur, path_images)? as usize;
    let rows = read_u32(&mut cur, path_images)? as usize;
    let cols = read_u32(&mut cur, path_images)? as usize;
    let pixel_dim = rows * cols;
    let needed = 16 + count * pixel_dim;
    let buf = cur.into_inner();
    if buf.len() < needed {
        return Err(Error::IdxTruncated {
            path: path_images.display().to_string(),
            needed,
            found: buf.len(),
        });
    }
    let mut inputs = DMatrix::zeros(pixel_dim, count);
    for example in 0..count {
        for p in 0..pixel_dim {
            inputs[(p, example)] = buf[16 + example * pixel_dim + p] as f64 / 255.0;
        }
    }

    let mut bytes = Vec::new();
    std::fs::File::open(path_labels)?.read_to_end(&mut bytes)?;
    let mut cur = std::io::Cursor::new(bytes);
    let magic = read_u32(&mut cur, path_labels)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::IdxMagic {
            path: path_labels.display().to_string(),
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = read_u32(&mut cur, path_labels)? as usize;
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let buf = cur.into_inner();
    if buf.len() < 8 + count {
        return Err(Error::IdxTruncated {
            path: path_labels.display().to_string(),
            needed: 8 + count,
            found: buf.len(),
        });
    }
    let mut outputs = DMatrix::zeros(one_hot_dim, count);
    for example in 0..count {
        let label = buf[8 + example] as usize;
        if label >= one_hot_dim {
            return Err(Error::LabelOutOfRange {
                label,
                dim: one_hot_dim,
                index: example,
            });
        }
        outputs[(label, example)] = 1.0;
    }
    TaskDataset::new(inputs, outputs, "idx")
}

/// Diagonality ratio of V^T sigma11 V in [0, 1]; exactly 1 when the input
/// principal axes coincide with the task's right singular vectors.
pub fn consistency_score(stats: &CorrelationStats) -> f64 {
    let m = stats.v.transpose() * &stats.sigma11 * &stats.v;
    let diag_sq: f64 = (0..m.nrows()).map(|i| m[(i, i)] * m[(i, i)]).sum();
    let total_sq: f64 = m.iter().map(|x| x * x).sum();
    if total_sq == 0.0 {
        return 1.0;
    }
    diag_sq / total_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, max_abs};
    use approx::assert_abs_diff_eq;

    fn tree_cfg() -> TreeTaskConfig {
        TreeTaskConfig {
            levels: 5,
            flip_prob: 0.1,
            num_features: 1000,
            seed: 11,
        }
    }

    #[test]
    fn diffusion_produces_one_hot_inputs() {
        let data = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        assert_eq!(data.num_examples(), 32);
        assert_eq!(data.input_dim(), 32);
        assert_eq!(data.output_dim(), 1000);
        assert_eq!(data.inputs, DMatrix::identity(32, 32));
        assert!(data.outputs.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn diffusion_zero_flip_prob_gives_constant_features() {
        let cfg = TreeTaskConfig {
            levels: 5,
            flip_prob: 0.0,
            num_features: 4,
            seed: 3,
        };
        let data = generate_hierarchical_diffusion(&cfg).unwrap();
        for f in 0..4 {
            let first = data.outputs[(f, 0)];
            assert!((0..32).all(|leaf| data.outputs[(f, leaf)] == first));
        }
    }

    #[test]
    fn diffusion_is_deterministic() {
        let a = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        let b = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        assert_eq!(a.outputs, b.outputs);
    }

    #[test]
    fn diffusion_rejects_bad_parameters() {
        let mut cfg = tree_cfg();
        cfg.flip_prob = 0.6;
        assert!(generate_hierarchical_diffusion(&cfg).is_err());
        cfg.flip_prob = 0.1;
        cfg.levels = 21;
        assert!(generate_hierarchical_diffusion(&cfg).is_err());
    }

    #[test]
    fn diffusion_singular_values_group_hierarchically() {
        // Three-level tree: the top mode separates from the sibling pair
        // below it, which stay close to each other.
        let cfg = TreeTaskConfig {
            levels: 3,
            flip_prob: 0.1,
            num_features: 200,
            seed: 7,
        };
        let stats = compute_correlations(&generate_hierarchical_diffusion(&cfg).unwrap()).unwrap();
        let s = &stats.s;
        assert!(s[0] > s[1]);
        let sibling_gap = (s[1] - s[2]).abs() / s[1];
        let level_gap = (s[0] - s[1]) / s[0];
        assert!(
            sibling_gap < level_gap,
            "sibling modes should pair up: {s:?}"
        );
    }

    #[test]
    fn correlations_identity_inputs() {
        let data = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        let stats = compute_correlations(&data).unwrap();
        assert!(max_abs(&(&stats.sigma11 - DMatrix::identity(32, 32))) < 1e-14);
    }

    #[test]
    fn correlations_autoencoding_matches_sigma11() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = linalg::gaussian_matrix(6, 40, &mut rng);
        let data = TaskDataset::new(x.clone(), x, "auto").unwrap();
        let stats = compute_correlations(&data).unwrap();
        assert!(max_abs(&(&stats.sigma31 - &stats.sigma11)) < 1e-12);
    }

    #[test]
    fn correlations_svd_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let x = linalg::gaussian_matrix(8, 8, &mut rng);
        let y = linalg::gaussian_matrix(5, 8, &mut rng);
        let data = TaskDataset::new(x, y, "rand").unwrap();
        let stats = compute_correlations(&data).unwrap();
        let mut rebuilt = DMatrix::zeros(5, 8);
        for alpha in 0..stats.num_modes() {
            rebuilt += stats.s[alpha]
                * stats.u.column(alpha)
                * stats.v.column(alpha).transpose();
        }
        let rel = frobenius(&(&rebuilt - &stats.sigma31)) / frobenius(&stats.sigma31);
        assert!(rel < 1e-8, "reconstruction error {rel:.3e}");
        let u_err = max_abs(&(stats.u.transpose() * &stats.u - DMatrix::identity(5, 5)));
        let v_err = max_abs(&(stats.v.transpose() * &stats.v - DMatrix::identity(8, 8)));
        assert!(u_err < 1e-10 && v_err < 1e-10);
    }

    #[test]
    fn per_example_normalization_scales_sums() {
        let data = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        let raw = compute_correlations(&data).unwrap();
        let avg = compute_correlations_with(&data, Normalization::PerExample).unwrap();
        assert_abs_diff_eq!(avg.s[0], raw.s[0] / 32.0, epsilon = 1e-10);
    }

    #[test]
    fn whitening_makes_inputs_white() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let base = linalg::gaussian_matrix(10, 10, &mut rng);
        let x = &base * linalg::gaussian_matrix(10, 500, &mut rng);
        let y = linalg::gaussian_matrix(3, 500, &mut rng);
        let data = TaskDataset::new(x, y, "corr").unwrap();
        let white = whiten_inputs(&data).unwrap();
        let sigma = &white.inputs * white.inputs.transpose();
        assert!(max_abs(&(sigma - DMatrix::identity(10, 10))) < 1e-8);
        assert_eq!(white.outputs, data.outputs);
    }

    #[test]
    fn whitening_scaled_inputs() {
        let data = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        let scaled = TaskDataset::new(&data.inputs * 3.0, data.outputs.clone(), "x3").unwrap();
        let white = whiten_inputs(&scaled).unwrap();
        let sigma = &white.inputs * white.inputs.transpose();
        assert!(max_abs(&(sigma - DMatrix::identity(32, 32))) < 1e-10);
    }

    #[test]
    fn whitening_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = linalg::gaussian_matrix(6, 90, &mut rng);
        let y = linalg::gaussian_matrix(2, 90, &mut rng);
        let data = TaskDataset::new(x, y, "w").unwrap();
        let once = whiten_inputs(&data).unwrap();
        let twice = whiten_inputs(&once).unwrap();
        let sigma = &twice.inputs * twice.inputs.transpose();
        assert!(max_abs(&(sigma - DMatrix::identity(6, 6))) < 1e-8);
    }

    #[test]
    fn whitening_rejects_singular_inputs() {
        let mut x = DMatrix::zeros(4, 10);
        for j in 0..10 {
            x[(0, j)] = 1.0;
            x[(1, j)] = j as f64;
        }
        let data = TaskDataset::new(x, DMatrix::zeros(2, 10), "sing").unwrap();
        match whiten_inputs(&data) {
            Err(Error::RankDeficient { null_dims, dim, .. }) => {
                assert_eq!(dim, 4);
                assert_eq!(null_dims, 2);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn consistency_autoencoding_is_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let x = linalg::gaussian_matrix(7, 60, &mut rng);
        let data = TaskDataset::new(x.clone(), x, "auto").unwrap();
        let stats = compute_correlations(&data).unwrap();
        assert!((consistency_score(&stats) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn consistency_white_inputs_is_one() {
        let data = generate_hierarchical_diffusion(&tree_cfg()).unwrap();
        let stats = compute_correlations(&data).unwrap();
        assert!((consistency_score(&stats) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn consistency_invariant_under_mode_permutation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let x = linalg::gaussian_matrix(5, 80, &mut rng);
        let y = linalg::gaussian_matrix(4, 80, &mut rng);
        let data = TaskDataset::new(x, y, "p").unwrap();
        let mut stats = compute_correlations(&data).unwrap();
        let base = consistency_score(&stats);
        // Swap two columns of V (with the matching S swap).
        let c0 = stats.v.column(0).clone_owned();
        let c1 = stats.v.column(1).clone_owned();
        stats.v.set_column(0, &c1);
        stats.v.set_column(1, &c0);
        stats.s.swap_rows(0, 1);
        assert_abs_diff_eq!(consistency_score(&stats), base, epsilon = 1e-12);
    }

    #[test]
    fn dataset_csv_round_trip() {
        let data = generate_hierarchical_diffusion(&TreeTaskConfig {
            levels: 2,
            flip_prob: 0.2,
            num_features: 3,
            seed: 4,
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("task.csv");
        data.to_csv(&path).unwrap();
        let back = TaskDataset::from_csv(&path).unwrap();
        assert_eq!(back.inputs, data.inputs);
        assert_eq!(back.outputs, data.outputs);
    }

    fn write_idx_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
        let images = dir.join("img.idx");
        let labels = dir.join("lab.idx");
        // Two 2x2 images with known pixel bytes.
        let mut img: Vec<u8> = Vec::new();
        img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        img.extend_from_slice(&2u32.to_be_bytes());
        img.extend_from_slice(&2u32.to_be_bytes());
        img.extend_from_slice(&2u32.to_be_bytes());
        img.extend_from_slice(&[0, 51, 102, 255, 255, 204, 153, 0]);
        std::fs::write(&images, img).unwrap();
        let mut lab: Vec<u8> = Vec::new();
        lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        lab.extend_from_slice(&2u32.to_be_bytes());
        lab.extend_from_slice(&[3, 0]);
        std::fs::write(&labels, lab).unwrap();
        (images, labels)
    }

    #[test]
    fn idx_fixture_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = write_idx_fixture(dir.path());
        let data = load_idx(&images, &labels, 4).unwrap();
        assert_eq!(data.input_dim(), 4);
        assert_eq!(data.output_dim(), 4);
        assert_eq!(data.num_examples(), 2);
        assert_abs_diff_eq!(data.inputs[(0, 0)], 0.0);
        assert_abs_diff_eq!(data.inputs[(1, 0)], 51.0 / 255.0);
        assert_abs_diff_eq!(data.inputs[(3, 0)], 1.0);
        assert_abs_diff_eq!(data.inputs[(0, 1)], 1.0);
        assert_eq!(data.outputs[(3, 0)], 1.0);
        assert_eq!(data.outputs[(0, 1)], 1.0);
    }

    #[test]
    fn idx_empty_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("empty.idx");
        std::fs::write(&images, []).unwrap();
        let labels = dir.path().join("lab.idx");
        std::fs::write(&labels, []).unwrap();
        assert!(matches!(
            load_idx(&images, &labels, 10),
            Err(Error::IdxTruncated { .. })
        ));
    }

    #[test]
    fn idx_bad_magic_and_label_range() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = write_idx_fixture(dir.path());
        let mut bytes = std::fs::read(&images).unwrap();
        bytes[3] = 0x99;
        let bad = dir.path().join("bad.idx");
        std::fs::write(&bad, bytes).unwrap();
        assert!(matches!(
            load_idx(&bad, &labels, 4),
            Err(Error::IdxMagic { .. })
        ));
        // Label 3 out of range for one_hot_dim = 2.
        assert!(matches!(
            load_idx(&images, &labels, 2),
            Err(Error::LabelOutOfRange { label: 3, .. })
        ));
    }
}
