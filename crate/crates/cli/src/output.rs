use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bplab::groundstates::DISTRIBUTION_TAG;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

/// Output directory of one invocation. Warnings are collected in memory and
/// written to `<name>.log` at the end so the log is deterministic as well.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    config: ExperimentConfig,
    warnings: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, command: &'static str, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), command, config: config.clone(), warnings: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Write `rel` as CSV and `rel` with a `.json` extension as its sidecar.
    pub fn write_table(&self, rel: &str, header: &[&str], rows: &[Vec<String>], extra: Value) -> Result<PathBuf> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.write_sidecar(&path, header, extra)?;
        Ok(path)
    }

    pub fn write_sidecar(&self, data_path: &Path, columns: &[&str], extra: Value) -> Result<()> {
        let sidecar = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.config.seed,
            "config": self.config,
            "columns": columns,
            "distributions": {
                "init_angles": "uniform [0, 2pi)",
                "hamiltonian": DISTRIBUTION_TAG,
                "sample_seed": "derive_seed(seed, \"sample\", i)",
            },
            "float_format": "17 significant digits",
            "details": extra,
        });
        let path = data_path.with_extension("json");
        fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn finish(self) -> Result<()> {
        let path = self.dir.join(format!("{}.log", self.config.name));
        let mut text = String::new();
        for w in &self.warnings {
            text.push_str("WARN ");
            text.push_str(w);
            text.push('\n');
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
