//! Synthetic data written as CSV files plus a batch manifest that `adapt`
//! can consume directly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use daevs::data::{generate as synthesize, save_csv, write_labels_csv, SyntheticSpec};
use serde::Serialize;

use crate::config::BatchSpec;
use crate::error::CliResult;
use crate::files::{create_dir, write_json};

pub const SOURCE_FILE: &str = "source.csv";
pub const SOURCE_FULL_FILE: &str = "source_full.csv";
pub const TARGET_FILE: &str = "target.csv";
pub const TRUTH_FILE: &str = "target_truth.csv";
pub const COLUMNS_FILE: &str = "columns.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct GenerateReport {
    pub config: SyntheticSpec,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub n_source: usize,
    pub n_target: usize,
}

/// Writes the observed source (common feature only), the source with its
/// hidden extra (for the ideal baseline), the unlabelled target, its true
/// labels, the column manifest and a batch manifest pairing source→target.
pub fn generate(spec: &SyntheticSpec, out: &Path) -> CliResult<GenerateReport> {
    let data = synthesize(spec)?;
    create_dir(out)?;
    save_csv(&data.source, out.join(SOURCE_FILE))?;
    let columns = save_csv(&data.source_full(), out.join(SOURCE_FULL_FILE))?;
    save_csv(&data.target, out.join(TARGET_FILE))?;
    write_labels_csv(&data.target_truth, out.join(TRUTH_FILE))?;
    write_json(&out.join(COLUMNS_FILE), &columns)?;
    let batches = BatchSpec {
        manifest: COLUMNS_FILE.into(),
        batches: BTreeMap::from([
            ("source".to_string(), SOURCE_FULL_FILE.into()),
            ("target".to_string(), TARGET_FILE.into()),
        ]),
        truth: BTreeMap::from([("target".to_string(), TRUTH_FILE.into())]),
        pairs: vec![("source".into(), "target".into())],
    };
    write_json(&out.join(MANIFEST_FILE), &batches)?;
    Ok(GenerateReport {
        config: spec.clone(),
        output_dir: out.to_path_buf(),
        files: [SOURCE_FILE, SOURCE_FULL_FILE, TARGET_FILE, TRUTH_FILE, COLUMNS_FILE, MANIFEST_FILE]
            .map(String::from)
            .to_vec(),
        n_source: data.source.n_samples(),
        n_target: data.target.n_samples(),
    })
}
