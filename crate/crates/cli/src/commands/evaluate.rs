//! Accuracy of predicted labels and, given the target features, the
//! Wasserstein gap between the estimated and the true labelled target.

use std::path::{Path, PathBuf};

use daevs::costs::CostParams;
use daevs::data::{load_csv, read_labels_csv, Dataset, Manifest};
use daevs::diagnostics::{accuracy_report, wasserstein_estimate, AccuracyReport};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::files::read_json;

#[derive(Debug, Serialize)]
pub struct EvaluateConfig {
    pub predicted: PathBuf,
    pub truth: PathBuf,
    pub target: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub cost_params: CostParams,
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    pub config: EvaluateConfig,
    pub accuracy: AccuracyReport,
    pub wasserstein: Option<f64>,
}

fn with_labels(target: &Dataset, labels: Vec<i64>) -> Dataset {
    Dataset {
        labels: Some(labels),
        ..target.clone()
    }
}

pub fn evaluate(config: EvaluateConfig) -> CliResult<EvaluateReport> {
    let predicted = read_labels_csv(&config.predicted)?;
    let truth = read_labels_csv(&config.truth)?;
    let accuracy = accuracy_report(&predicted, &truth)?;
    let wasserstein = match (&config.target, &config.manifest) {
        (Some(target), Some(manifest)) => {
            let target = load_target(target, manifest)?;
            let estimated = with_labels(&target, predicted);
            let actual = with_labels(&target, truth);
            Some(wasserstein_estimate(&estimated, &actual, &config.cost_params)?)
        }
        (None, None) => None,
        _ => return Err(CliError::Usage("--target and --manifest go together".into())),
    };
    Ok(EvaluateReport {
        config,
        accuracy,
        wasserstein,
    })
}

fn load_target(path: &Path, manifest: &Path) -> CliResult<Dataset> {
    match read_json::<Manifest>(manifest)? {
        Manifest::Csv(m) => Ok(load_csv(path, &m)?),
        Manifest::Sparse(_) => Err(CliError::Usage(
            "evaluate reads the target as CSV; convert sparse batches first".into(),
        )),
    }
}
