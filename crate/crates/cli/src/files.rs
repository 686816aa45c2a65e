//! Small file helpers shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(daevs::Error::from)?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// `path` relative to the directory of `anchor` (a config file), unless absolute.
pub fn resolve(anchor: Option<&Path>, path: &Path) -> PathBuf {
    match anchor.and_then(Path::parent) {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Numeric CSV with a header row.
pub fn read_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let width = reader.headers().map_err(|e| CliError::csv(path, e))?.len();
    let mut flat = Vec::new();
    let mut rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        for cell in record.iter() {
            let v: f64 = cell.trim().parse().map_err(|_| daevs::Error::Parse {
                path: path.to_path_buf(),
                line: row + 2,
                message: format!("`{cell}` is not a number"),
            })?;
            flat.push(v);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, width), flat)
        .map_err(|e| daevs::Error::Dimension(format!("{}: {e}", path.display())).into())
}

pub fn write_matrix(path: &Path, header: &[String], values: &Array2<f64>) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    writer.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for row in values.rows() {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| CliError::csv(path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

/// Header plus string rows.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    writer.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| CliError::csv(path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}
