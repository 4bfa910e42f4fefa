//! Output plumbing: every data file embeds the resolved configuration
//! (JSON field or `#` comment header); timestamps go to a sidecar log
//! only, so reruns with the same config are byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// Which tabular formats to emit. Reports that exist only as JSON are
/// written regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatChoice {
    Csv,
    Json,
    Both,
}

impl FormatChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(FormatChoice::Csv),
            "json" => Some(FormatChoice::Json),
            "both" => Some(FormatChoice::Both),
            _ => None,
        }
    }

    fn csv(&self) -> bool {
        matches!(self, FormatChoice::Csv | FormatChoice::Both)
    }

    fn json(&self) -> bool {
        matches!(self, FormatChoice::Json | FormatChoice::Both)
    }
}

pub struct OutputDir {
    dir: PathBuf,
    format: FormatChoice,
}

impl OutputDir {
    pub fn create(dir: &Path, format: FormatChoice) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// CSV body prefixed with the resolved config as a comment line.
    /// Skipped (returns None) under `--format json`.
    pub fn write_csv(
        &self,
        name: &str,
        config: &ExperimentConfig,
        body: &str,
    ) -> std::io::Result<Option<PathBuf>> {
        if !self.format.csv() {
            return Ok(None);
        }
        let path = self.path(name);
        let mut text = String::new();
        text.push_str("# config: ");
        text.push_str(&config.to_json_line());
        text.push('\n');
        text.push_str(body);
        std::fs::write(&path, text)?;
        Ok(Some(path))
    }

    /// JSON twin of a CSV table; skipped under `--format csv`.
    pub fn write_json_paired(
        &self,
        name: &str,
        config: &ExperimentConfig,
        result: serde_json::Value,
    ) -> std::io::Result<Option<PathBuf>> {
        if !self.format.json() {
            return Ok(None);
        }
        self.write_json(name, config, result).map(Some)
    }

    /// JSON report wrapped as {"config": ..., "result": ...}; always
    /// written.
    pub fn write_json(
        &self,
        name: &str,
        config: &ExperimentConfig,
        result: serde_json::Value,
    ) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        let doc = serde_json::json!({
            "config": serde_json::to_value(config).expect("config serializes"),
            "result": result,
        });
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&doc).expect("serializes"),
        )?;
        Ok(path)
    }

    /// Appends a timestamped line to the sidecar log.
    pub fn log_run(&self, command: &str) -> std::io::Result<()> {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.path("run.log"))?;
        writeln!(f, "{stamp} {command}")?;
        Ok(())
    }
}
