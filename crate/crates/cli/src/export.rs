use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Version string in `git describe` style, fixed at build time.
pub const VERSION: &str = env!("LINMTL_VERSION");

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `prefix_1, …, prefix_k`.
pub fn indexed_names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| to_cli(path, e))?;
    writer.write_record(header).map_err(|e| to_cli(path, e))?;
    for row in rows {
        writer.write_record(row).map_err(|e| to_cli(path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

fn to_cli(path: &Path, err: csv::Error) -> CliError {
    match err.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Run record written next to a command's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: Option<&'a ExperimentConfig>,
    pub parameters: P,
    pub outputs: Vec<String>,
}

impl<'a, P: Serialize> Manifest<'a, P> {
    pub fn new(command: &'a str, seed: Option<u64>, config: Option<&'a ExperimentConfig>, parameters: P) -> Self {
        Self {
            tool: "linmtl",
            version: VERSION,
            command,
            seed,
            config,
            parameters,
            outputs: Vec::new(),
        }
    }

    /// Writes `<command>.manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}
