//! Experiment configuration schema (JSON, versioned) with desk- and
//! paper-scale built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dld_core::tasks::TreeTaskConfig;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ModeCurves,
    DepthSweep,
    InitCompare,
    PretrainVsRandom,
    Spectra,
    Chaos,
    IsometryGrid,
    Consistency,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ModeCurves => "mode_curves",
            ExperimentKind::DepthSweep => "depth_sweep",
            ExperimentKind::InitCompare => "init_compare",
            ExperimentKind::PretrainVsRandom => "pretrain_vs_random",
            ExperimentKind::Spectra => "spectra",
            ExperimentKind::Chaos => "chaos",
            ExperimentKind::IsometryGrid => "isometry_grid",
            ExperimentKind::Consistency => "consistency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Desk,
    Paper,
}

impl Default for ScaleKind {
    fn default() -> Self {
        ScaleKind::Desk
    }
}

/// Task source: generated tree, IDX files on disk, or a synthetic task with
/// a prescribed singular spectrum under white one-hot inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TaskSpec {
    Tree(TreeTaskConfig),
    Idx {
        images: PathBuf,
        labels: PathBuf,
        one_hot_dim: usize,
    },
    Synthetic {
        n_in: usize,
        n_out: usize,
        singular_values: Vec<f64>,
        seed: u64,
        /// Place the singular bases on the standard axes, so the task
        /// satisfies the pretraining consistency condition exactly.
        #[serde(default)]
        aligned: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateGrid {
    pub count: usize,
    pub log10_lo: f64,
    pub log10_hi: f64,
}

impl RateGrid {
    pub fn rates(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![10f64.powf(self.log10_lo)];
        }
        (0..self.count)
            .map(|k| {
                let t = k as f64 / (self.count - 1) as f64;
                10f64.powf(self.log10_lo + t * (self.log10_hi - self.log10_lo))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhSettings {
    pub hidden: usize,
    pub learning_rate: f64,
    pub init_scale: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCurvesSettings {
    pub learning_rate: f64,
    pub u0: f64,
    pub random_sigma: f64,
    pub hidden: usize,
    pub max_iters: usize,
    pub record_every: usize,
    /// 1-indexed modes to emit; empty means every mode.
    pub modes: Vec<usize>,
    pub tanh: TanhSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub depths: Vec<usize>,
    pub hidden: usize,
    pub u0: f64,
    pub rate_grid: RateGrid,
    pub threshold_fraction: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitCompareSettings {
    #[serde(flatten)]
    pub sweep: SweepSettings,
    pub pretrain_delta: f64,
    pub gaussian_sigma_scale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainSettings {
    pub depth: usize,
    pub hidden: usize,
    pub random_sigma: f64,
    pub learning_rate: f64,
    pub threshold_fraction: f64,
    pub max_iters: usize,
    pub record_every: usize,
    pub pretrain_loss_ratio: f64,
    pub pretrain_max_epochs: usize,
    pub consistency_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraSettings {
    pub width: usize,
    pub depths: Vec<usize>,
    pub ensembles: Vec<dld_core::spectra::Ensemble>,
    pub realizations: usize,
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSettings {
    pub theory_gain_lo: f64,
    pub theory_gain_hi: f64,
    pub theory_gain_step: f64,
    pub sim_gains: Vec<f64>,
    pub sim_width: usize,
    pub sim_depth: usize,
    pub q1: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometrySettings {
    pub gains: Vec<f64>,
    pub q_values: Vec<f64>,
    pub width: usize,
    pub depth: usize,
    pub band: (f64, f64),
    pub emit_values: bool,
}

/// Complete experiment description. Any omitted section falls back to the
/// desk-scale default for the chosen experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub scale: ScaleKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Divide correlation sums by the example count P. Defaults to true
    /// (better conditioning); training at rate lambda on averaged statistics
    /// matches raw sums at rate lambda / P, so only the time axis rescales.
    #[serde(default = "default_true")]
    pub normalize: bool,
    pub task: TaskSpec,
    #[serde(default)]
    pub mode_curves: Option<ModeCurvesSettings>,
    #[serde(default)]
    pub sweep: Option<SweepSettings>,
    #[serde(default)]
    pub init_compare: Option<InitCompareSettings>,
    #[serde(default)]
    pub pretrain: Option<PretrainSettings>,
    #[serde(default)]
    pub spectra: Option<SpectraSettings>,
    #[serde(default)]
    pub chaos: Option<ChaosSettings>,
    #[serde(default)]
    pub isometry: Option<IsometrySettings>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let TaskSpec::Idx { images, labels, .. } = &self.task {
            for path in [images, labels] {
                if !path.exists() {
                    return Err(CliError::Config(format!(
                        "referenced file does not exist: {}",
                        path.display()
                    )));
                }
            }
        }
        for sweep in self
            .sweep
            .iter()
            .chain(self.init_compare.iter().map(|c| &c.sweep))
        {
            if sweep.rate_grid.count < 1 {
                return Err(CliError::Config("rate grid needs count >= 1".into()));
            }
            if sweep.rate_grid.log10_lo >= sweep.rate_grid.log10_hi && sweep.rate_grid.count > 1 {
                return Err(CliError::Config(
                    "rate grid needs log10_lo < log10_hi".into(),
                ));
            }
            if sweep.depths.iter().any(|&d| d < 3) {
                return Err(CliError::Config("sweep depths must be >= 3".into()));
            }
        }
        Ok(())
    }

    /// Stable content hash of the configuration (output directory excluded).
    pub fn content_hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.out_dir = None;
        let canonical = serde_json::to_string(&hashed).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..16])
    }

    /// Built-in configuration for an experiment at the requested scale.
    pub fn default_for(kind: ExperimentKind, scale: ScaleKind) -> ExperimentConfig {
        let desk = matches!(scale, ScaleKind::Desk);
        let tree = TaskSpec::Tree(TreeTaskConfig {
            levels: 5,
            flip_prob: 0.1,
            num_features: if desk { 200 } else { 1000 },
            seed: 7,
        });
        let mut config = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: kind,
            scale,
            seed: 1,
            out_dir: None,
            normalize: true,
            task: tree,
            mode_curves: None,
            sweep: None,
            init_compare: None,
            pretrain: None,
            spectra: None,
            chaos: None,
            isometry: None,
        };
        match kind {
            ExperimentKind::ModeCurves => {
                config.mode_curves = Some(ModeCurvesSettings {
                    learning_rate: 0.5e-3,
                    u0: 1e-6,
                    random_sigma: 2e-4,
                    hidden: 32,
                    max_iters: if desk { 26_000 } else { 40_000 },
                    record_every: 25,
                    modes: vec![1, 2, 3, 5, 12, 18, 31],
                    tanh: TanhSettings {
                        hidden: 32,
                        learning_rate: 0.5e-3,
                        init_scale: 2e-4,
                        max_iters: if desk { 9_000 } else { 20_000 },
                    },
                });
            }
            ExperimentKind::DepthSweep => {
                config.task = TaskSpec::Synthetic {
                    n_in: 8,
                    n_out: 8,
                    singular_values: geometric_spectrum(8, 1.0, 0.5),
                    seed: 3,
                    aligned: false,
                };
                config.normalize = false;
                config.sweep = Some(SweepSettings {
                    depths: if desk {
                        vec![3, 5, 8, 14, 20, 32]
                    } else {
                        vec![3, 5, 8, 10, 14, 20, 28, 36, 44, 54, 64, 74, 84, 94, 100]
                    },
                    hidden: if desk { 100 } else { 1000 },
                    u0: 0.001,
                    rate_grid: RateGrid {
                        count: if desk { 10 } else { 20 },
                        log10_lo: -2.2,
                        log10_hi: -0.1,
                    },
                    threshold_fraction: 0.02,
                    max_iters: 4000,
                });
            }
            ExperimentKind::InitCompare => {
                config.task = TaskSpec::Synthetic {
                    n_in: 10,
                    n_out: 10,
                    singular_values: geometric_spectrum(10, 2.0, 1.0),
                    seed: 5,
                    aligned: true,
                };
                config.normalize = false;
                config.init_compare = Some(InitCompareSettings {
                    sweep: SweepSettings {
                        depths: if desk {
                            vec![3, 8, 16, 32]
                        } else {
                            vec![3, 5, 8, 14, 20, 32, 64, 100]
                        },
                        hidden: if desk { 32 } else { 1000 },
                        u0: 0.001,
                        rate_grid: RateGrid {
                            count: 12,
                            log10_lo: -3.0,
                            log10_hi: -1.35,
                        },
                        threshold_fraction: 1e-13,
                        max_iters: 60_000,
                    },
                    pretrain_delta: 0.005,
                    gaussian_sigma_scale: true,
                });
            }
            ExperimentKind::PretrainVsRandom => {
                config.normalize = false;
                config.pretrain = Some(PretrainSettings {
                    depth: 5,
                    hidden: 200,
                    random_sigma: 0.01,
                    learning_rate: 4e-4,
                    threshold_fraction: 0.02,
                    max_iters: 60_000,
                    record_every: 50,
                    pretrain_loss_ratio: 2.5e-3,
                    pretrain_max_epochs: 20_000,
                    consistency_floor: 0.9,
                });
            }
            ExperimentKind::Spectra => {
                config.spectra = Some(SpectraSettings {
                    width: if desk { 512 } else { 1000 },
                    depths: vec![1, 5, 30],
                    ensembles: vec![
                        dld_core::spectra::Ensemble::Gaussian,
                        dld_core::spectra::Ensemble::Orthogonal,
                    ],
                    realizations: if desk { 3 } else { 500 },
                    band: (0.3, 3.0),
                });
            }
            ExperimentKind::Chaos => {
                config.chaos = Some(ChaosSettings {
                    theory_gain_lo: 0.5,
                    theory_gain_hi: 2.0,
                    theory_gain_step: 0.05,
                    sim_gains: vec![0.8, 0.9, 1.0, 1.1, 1.25, 1.5],
                    sim_width: 1000,
                    sim_depth: 30,
                    q1: 1.0,
                    tolerance: 1e-10,
                });
            }
            ExperimentKind::IsometryGrid => {
                config.isometry = Some(IsometrySettings {
                    gains: vec![0.9, 0.95, 1.0, 1.05, 1.1],
                    q_values: vec![1.0, 64.0],
                    width: if desk { 200 } else { 1000 },
                    depth: 100,
                    band: (0.3, 3.0),
                    emit_values: true,
                });
            }
            ExperimentKind::Consistency => {}
        }
        config
    }
}

/// Log-spaced spectrum from `hi` down to `lo`.
pub fn geometric_spectrum(count: usize, hi: f64, lo: f64) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            hi * (lo / hi).powf(t)
        })
        .collect()
}
