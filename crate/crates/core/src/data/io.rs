use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureRole};
use crate::error::{Error, Result};
use crate::labeling::Label;

/// Column roles for a dense CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    pub common_columns: Vec<String>,
    #[serde(default)]
    pub extra_columns: Vec<String>,
}

/// Feature indices (1-based, as in the sparse file) produced by one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorBlock {
    pub sensor: String,
    pub indices: Vec<usize>,
}

/// Sensor-to-feature mapping for `label idx:val` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseManifest {
    pub sensor_blocks: Vec<SensorBlock>,
    pub common_sensors: Vec<String>,
    #[serde(default)]
    pub extra_sensors: Vec<String>,
    /// Keep only rows whose label is listed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_filter: Option<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Manifest {
    Csv(CsvManifest),
    Sparse(SparseManifest),
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

/// Dense CSV with a header row. Columns are reordered as common then extra.
pub fn load_csv(path: impl AsRef<Path>, manifest: &CsvManifest) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let lookup = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    };

    let mut picks = Vec::new();
    let mut roles = Vec::new();
    for name in &manifest.common_columns {
        picks.push(lookup(name)?);
        roles.push(FeatureRole::Common);
    }
    for name in &manifest.extra_columns {
        picks.push(lookup(name)?);
        roles.push(FeatureRole::Extra);
    }
    let label_idx = manifest.label_column.as_deref().map(lookup).transpose()?;

    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        for &k in &picks {
            let cell = &record[k];
            if is_missing(cell) {
                return Err(Error::MissingValue {
                    row,
                    column: header[k].clone(),
                });
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column `{}`: `{cell}` is not a number", header[k]),
            })?;
            flat.push(v);
        }
        if let Some(k) = label_idx {
            let cell = &record[k];
            if is_missing(cell) {
                return Err(Error::MissingValue {
                    row,
                    column: header[k].clone(),
                });
            }
            labels.push(parse_label(cell).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("label `{cell}` is not an integer class"),
            })?);
        }
        n += 1;
    }
    let features = Array2::from_shape_vec((n, picks.len()), flat)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let columns = picks.iter().map(|&k| header[k].clone()).collect();
    Dataset::with_columns(
        dataset_name(path),
        features,
        label_idx.map(|_| labels),
        roles,
        columns,
    )
}

fn parse_label(cell: &str) -> Option<Label> {
    let t = cell.trim();
    if let Ok(v) = t.parse::<Label>() {
        return Some(v);
    }
    // tolerate integral floats such as "1.0"
    let v: f64 = t.parse().ok()?;
    (v.fract() == 0.0 && v.abs() < 1e15).then_some(v as Label)
}

/// Writes the dataset as CSV (`label` column first when labelled) and
/// returns the matching manifest.
pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<CsvManifest> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidParameter(format!("{other:?}")),
    })?;
    let mut header = Vec::new();
    if dataset.labels.is_some() {
        header.push("label".to_string());
    }
    header.extend(dataset.columns.iter().cloned());
    writer.write_record(&header)?;
    for (i, row) in dataset.features.rows().into_iter().enumerate() {
        let mut record = Vec::with_capacity(header.len());
        if let Some(labels) = &dataset.labels {
            record.push(labels[i].to_string());
        }
        record.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;

    let names = |role| {
        dataset
            .indices(role)
            .into_iter()
            .map(|k| dataset.columns[k].clone())
            .collect()
    };
    Ok(CsvManifest {
        label_column: dataset.labels.as_ref().map(|_| "label".to_string()),
        common_columns: names(FeatureRole::Common),
        extra_columns: names(FeatureRole::Extra),
    })
}

/// Single-column `label` CSV.
pub fn write_labels_csv(labels: &[Label], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("label\n");
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads the `label` column (or the only column) of a CSV file.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<Label>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers()?.clone();
    let k = match header.iter().position(|h| h.trim() == "label") {
        Some(k) => k,
        None if header.len() == 1 => 0,
        None => return Err(Error::UnknownColumn("label".into())),
    };
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = &record[k];
        out.push(parse_label(cell).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: row + 2,
            message: format!("label `{cell}` is not an integer class"),
        })?);
    }
    Ok(out)
}

/// Writes a labelled dataset as sparse `label idx:val` text, omitting zeros,
/// and returns a manifest with one `common` and one `extra` block.
pub fn save_sparse_index(dataset: &Dataset, path: impl AsRef<Path>) -> Result<SparseManifest> {
    let path = path.as_ref();
    let labels = dataset
        .labels()
        .ok_or_else(|| Error::Label(format!("dataset `{}` has no labels for the sparse format", dataset.name)))?;
    let mut text = String::new();
    for (row, label) in dataset.features.rows().into_iter().zip(labels) {
        text.push_str(&label.to_string());
        for (k, v) in row.iter().enumerate() {
            if *v != 0.0 {
                text.push_str(&format!(" {}:{v}", k + 1));
            }
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))?;

    let block = |role, name: &str| SensorBlock {
        sensor: name.to_string(),
        indices: dataset.indices(role).into_iter().map(|k| k + 1).collect(),
    };
    let has_extra = dataset.n_extra() > 0;
    let mut sensor_blocks = vec![block(FeatureRole::Common, "common")];
    if has_extra {
        sensor_blocks.push(block(FeatureRole::Extra, "extra"));
    }
    Ok(SparseManifest {
        sensor_blocks,
        common_sensors: vec!["common".into()],
        extra_sensors: if has_extra { vec!["extra".into()] } else { Vec::new() },
        label_filter: None,
    })
}

/// Sparse `label idx:val ...` text (1-based, strictly increasing indices).
/// A label token of the form `class;extra` keeps only `class`.
pub fn load_sparse_index(path: impl AsRef<Path>, manifest: &SparseManifest) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let block = |name: &String| {
        manifest
            .sensor_blocks
            .iter()
            .find(|b| &b.sensor == name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))
    };
    let mut picks = Vec::new();
    let mut roles = Vec::new();
    for (names, role) in [
        (&manifest.common_sensors, FeatureRole::Common),
        (&manifest.extra_sensors, FeatureRole::Extra),
    ] {
        for name in names {
            for &idx in &block(name)?.indices {
                if idx == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "sensor `{name}`: feature indices are 1-based"
                    )));
                }
                picks.push(idx);
                roles.push(role);
            }
        }
    }
    let width = manifest
        .sensor_blocks
        .iter()
        .flat_map(|b| b.indices.iter().copied())
        .chain(picks.iter().copied())
        .max()
        .unwrap_or(0);

    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut dense = vec![0.0; width];
    for (row, raw) in text.lines().enumerate() {
        let line = row + 1;
        let mut tokens = raw.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let class = label_tok.split(';').next().unwrap_or_default();
        let label = parse_label(class)
            .ok_or_else(|| parse_err(line, format!("bad label `{label_tok}`")))?;

        dense.iter_mut().for_each(|v| *v = 0.0);
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line, format!("token `{tok}` is not idx:value")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line, format!("bad index in `{tok}`")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(line, format!("bad value in `{tok}`")))?;
            if idx == 0 {
                return Err(parse_err(line, format!("index 0 in `{tok}` (indices are 1-based)")));
            }
            if idx == last {
                return Err(parse_err(line, format!("duplicate index {idx}")));
            }
            if idx < last {
                return Err(parse_err(line, format!("index {idx} after {last}")));
            }
            if !val.is_finite() {
                return Err(parse_err(line, format!("non-finite value in `{tok}`")));
            }
            last = idx;
            if idx <= width {
                dense[idx - 1] = val;
            }
        }
        if let Some(filter) = &manifest.label_filter {
            if !filter.contains(&label) {
                continue;
            }
        }
        flat.extend(picks.iter().map(|&k| dense[k - 1]));
        labels.push(label);
    }

    let n = labels.len();
    let features = Array2::from_shape_vec((n, picks.len()), flat)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let columns = picks.iter().map(|k| format!("f{k}")).collect();
    Dataset::with_columns(dataset_name(path), features, Some(labels), roles, columns)
}
