//! Deterministic CSV emission with JSON sidecars carrying the config hash.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Writes experiment outputs into one directory, tagging every CSV with a
/// `<name>.meta.json` sidecar.
pub struct RunWriter {
    dir: PathBuf,
    config: ExperimentConfig,
    config_hash: String,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    experiment: &'a str,
    config_hash: &'a str,
    columns: &'a str,
    params: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    schema_version: u32,
    experiment: &'a str,
    config_hash: &'a str,
    seed: u64,
    outputs: &'a [String],
    wall_ms: u128,
}

impl RunWriter {
    pub fn new(dir: &Path, config: &ExperimentConfig) -> Result<RunWriter> {
        std::fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            config_hash: config.content_hash(),
            config: config.clone(),
            outputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    /// Writes `<name>.csv` with the given header and rows, plus its sidecar.
    pub fn csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(format!("{name}.csv"));
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(file, "{header}")?;
        for row in rows {
            writeln!(file, "{row}")?;
        }
        file.flush()?;

        let sidecar = Sidecar {
            schema_version: crate::config::SCHEMA_VERSION,
            experiment: self.config.experiment.name(),
            config_hash: &self.config_hash,
            columns: header,
            params: &self.config,
        };
        let meta_path = self.dir.join(format!("{name}.meta.json"));
        std::fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?)?;
        self.outputs.push(format!("{name}.csv"));
        Ok(path)
    }

    /// Writes an arbitrary JSON document alongside the CSVs.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
        self.outputs.push(format!("{name}.json"));
        Ok(path)
    }

    /// Finalizes the run record (wall-clock time lives only here, so the
    /// data files stay byte-identical across reruns).
    pub fn finish(self, wall_ms: u128) -> Result<()> {
        let record = RunRecord {
            schema_version: crate::config::SCHEMA_VERSION,
            experiment: self.config.experiment.name(),
            config_hash: &self.config_hash,
            seed: self.config.seed,
            outputs: &self.outputs,
            wall_ms,
        };
        std::fs::write(
            self.dir.join("run.json"),
            serde_json::to_string_pretty(&record)?,
        )?;
        Ok(())
    }
}

/// Formats a float with Rust's shortest round-trip representation, which is
/// deterministic across runs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
