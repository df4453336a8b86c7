use std::path::Path;

use linmtl_core::{DMatrix, TaskDataset};

use crate::config::{ExperimentConfig, LossScale};
use crate::error::{CliError, CliResult};

/// Standard deviations below this are treated as constant columns.
pub const MIN_STD_DEV: f64 = 1e-12;

/// A numeric CSV table with its header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub values: DMatrix<f64>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Reads a comma-separated file with exactly one header line and numeric
/// cells.
pub fn read_numeric_csv(path: &Path) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut cells = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(rows + 2, |p| p.line() as usize);
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                row: line,
                column: j + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            cells.push(value);
        }
        rows += 1;
    }
    let values = DMatrix::from_row_slice(rows, header.len(), &cells);
    Ok(Table { header, values })
}

fn csv_error(path: &Path, err: csv::Error) -> CliError {
    let row = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => CliError::Parse {
            path: path.to_path_buf(),
            row,
            column: len.min(expected_len) as usize + 1,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => CliError::Parse {
            path: path.to_path_buf(),
            row,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Shifts and scales every column to mean 0 and population variance 1.
///
/// On failure returns the position of the first constant column and its
/// standard deviation.
pub fn standardize_columns(m: &mut DMatrix<f64>) -> Result<(), (usize, f64)> {
    let n = m.nrows() as f64;
    for (j, mut col) in m.column_iter_mut().enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if !(sd >= MIN_STD_DEV) {
            return Err((j, sd));
        }
        col.apply(|v| *v = (*v - mean) / sd);
    }
    Ok(())
}

/// Loads the configured columns, standardizes them if requested and
/// appends the all-ones bias feature afterwards.
///
/// Losses are left as raw sums; see [`prepare_dataset`] for the scaled
/// version the subcommands use.
pub fn load_dataset(config: &ExperimentConfig) -> CliResult<TaskDataset> {
    config.validate()?;
    let table = read_numeric_csv(&config.dataset)?;
    let width = table.values.ncols();
    if let Some(c) = config.tasks.iter().chain(&config.features).find(|c| **c >= width) {
        return Err(CliError::Config(format!(
            "column {c} out of range: the file has {width} columns"
        )));
    }
    let features: Vec<usize> = if config.features.is_empty() {
        (0..width).filter(|c| !config.tasks.contains(c)).collect()
    } else {
        config.features.clone()
    };
    if features.is_empty() && !config.add_bias {
        return Err(CliError::Config("no feature columns selected".into()));
    }
    let mut x = table.values.select_columns(&features);
    let mut y = table.values.select_columns(&config.tasks);
    if config.standardize {
        standardize_columns(&mut x).map_err(|(j, std_dev)| CliError::ConstantColumn {
            column: features[j],
            std_dev,
        })?;
        standardize_columns(&mut y).map_err(|(j, std_dev)| CliError::ConstantColumn {
            column: config.tasks[j],
            std_dev,
        })?;
    }
    if config.add_bias {
        let p = x.ncols();
        x = x.insert_column(p, 1.0);
    }
    Ok(TaskDataset::new(x, y)?)
}

/// [`load_dataset`] followed by the configured loss scaling.
pub fn prepare_dataset(config: &ExperimentConfig) -> CliResult<TaskDataset> {
    let data = load_dataset(config)?;
    Ok(match config.loss_scale {
        LossScale::Mean => data.mean_scaled(),
        LossScale::Sum => data,
    })
}
