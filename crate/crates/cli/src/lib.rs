//! Library side of the `dld` experiment runner: configuration schema,
//! deterministic output writing, and the experiment implementations.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, ScaleKind, TaskSpec};
pub use error::{CliError, Result};
pub use experiments::{run, RunStatus};
