use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// How per-task losses are normalized after loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossScale {
    /// Mean squared error: the data are divided by `√n`.
    Mean,
    /// Raw sum of squared residuals.
    Sum,
}

/// Everything an experiment needs besides the subcommand itself.
///
/// Column indices are 0-based positions in the CSV. An empty `features`
/// list selects every column that is not a task column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub tasks: Vec<usize>,
    pub features: Vec<usize>,
    pub standardize: bool,
    pub add_bias: bool,
    pub loss_scale: LossScale,
    pub q: usize,
    pub seed: u64,
    pub count: usize,
    pub epochs: usize,
    pub lr: f64,
    pub stop_tol: f64,
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            tasks: Vec::new(),
            features: Vec::new(),
            standardize: true,
            add_bias: true,
            loss_scale: LossScale::Mean,
            q: 1,
            seed: 0,
            count: 100_000,
            epochs: linmtl_core::smto::DEFAULT_EPOCHS,
            lr: linmtl_core::smto::DEFAULT_LR,
            stop_tol: linmtl_core::smto::DEFAULT_STOP_TOL,
            tolerance: linmtl_core::surfaces::DEFAULT_MEMBERSHIP_TOL,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if config.dataset.is_relative() && !config.dataset.as_os_str().is_empty() {
            if let Some(dir) = path.parent() {
                config.dataset = dir.join(&config.dataset);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dataset.as_os_str().is_empty() {
            return Err(CliError::Config("no dataset given".into()));
        }
        if self.tasks.is_empty() {
            return Err(CliError::Config("at least one task column is required".into()));
        }
        if let Some(c) = self.tasks.iter().find(|c| self.features.contains(c)) {
            return Err(CliError::Config(format!(
                "column {c} is listed both as a task and as a feature"
            )));
        }
        for (name, list) in [("task", &self.tasks), ("feature", &self.features)] {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(CliError::Config(format!("duplicate {name} column")));
            }
        }
        if self.count == 0 || self.epochs == 0 {
            return Err(CliError::Config("counts must be at least 1".into()));
        }
        if self.q == 0 {
            return Err(CliError::Config("q must be at least 1".into()));
        }
        if !(self.lr > 0.0) || !(self.stop_tol > 0.0) || !(self.tolerance > 0.0) {
            return Err(CliError::Config(
                "learning rate and tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}
