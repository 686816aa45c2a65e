//! Experiment configuration: one JSON document, with command-line flags
//! applied on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use daevs::adapt::{RunConfig, Variant};
use daevs::data::{
    load_csv, load_manifest, load_sparse_index, read_labels_csv, CsvManifest, Dataset, Manifest, SyntheticSpec,
};
use daevs::labeling::Label;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::files::{read_json, resolve};

pub const DEFAULT_REPEAT: usize = 10;
pub const DEFAULT_OUTPUT_DIR: &str = "daevs-out";

/// Named data files sharing one manifest, and the source→target pairs to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    pub manifest: PathBuf,
    pub batches: BTreeMap<String, PathBuf>,
    /// Label files for targets whose data file carries no labels.
    #[serde(default)]
    pub truth: BTreeMap<String, PathBuf>,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Fresh data per repeat, with the repeat's seed.
    Synthetic(SyntheticSpec),
    Batches(BatchSpec),
    /// A [`BatchSpec`] in its own file; its paths are relative to that file.
    BatchFile(PathBuf),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticSpec::default())
    }
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Proposed, Variant::JdotNoExtra, Variant::JdotIdeal]
}

fn default_repeat() -> usize {
    DEFAULT_REPEAT
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub data: DataSource,
    /// Per-run settings; `run.seed` is the first of `repeat` consecutive seeds.
    /// When omitted, synthetic data uses the synthetic benchmark preset and
    /// file data uses the library defaults.
    #[serde(default)]
    pub run: Option<RunConfig>,
    /// Variants for synthetic data; file data always reports the fixed
    /// baseline / no-extra / proposed / ideal set.
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_repeat")]
    pub repeat: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSource::default(),
            run: None,
            variants: default_variants(),
            repeat: DEFAULT_REPEAT,
            output_dir: default_output_dir(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut config: ExperimentConfig = read_json(path)?;
        // make every path independent of the working directory
        config.output_dir = resolve(Some(path), &config.output_dir);
        match &mut config.data {
            DataSource::Batches(spec) => spec.resolve_paths(Some(path)),
            DataSource::BatchFile(file) => *file = resolve(Some(path), file),
            DataSource::Synthetic(_) => {}
        }
        Ok(config)
    }

    /// The run settings actually used, with presets filled in.
    pub fn resolved_run(&self) -> RunConfig {
        match (&self.run, &self.data) {
            (Some(run), _) => run.clone(),
            (None, DataSource::Synthetic(_)) => RunConfig::synthetic(Variant::Proposed, 0),
            (None, _) => RunConfig::default(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.repeat == 0 {
            return Err(CliError::Usage("repeat must be >= 1".into()));
        }
        if self.variants.is_empty() {
            return Err(CliError::Usage("at least one variant is required".into()));
        }
        self.resolved_run().validate()?;
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        Ok(())
    }
}

impl BatchSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut spec: BatchSpec = read_json(path)?;
        spec.resolve_paths(Some(path));
        Ok(spec)
    }

    fn resolve_paths(&mut self, anchor: Option<&Path>) {
        self.manifest = resolve(anchor, &self.manifest);
        for p in self.batches.values_mut().chain(self.truth.values_mut()) {
            *p = resolve(anchor, p);
        }
    }

    fn path_of(&self, name: &str) -> CliResult<&Path> {
        self.batches
            .get(name)
            .map(PathBuf::as_path)
            .ok_or_else(|| CliError::Usage(format!("pair names unknown batch `{name}`")))
    }

    /// Loads a batch, named after its key, in the manifest's format. With
    /// `labels_optional`, a CSV batch lacking the label column loads unlabelled.
    fn load_with(&self, name: &str, labels_optional: bool) -> CliResult<Dataset> {
        let path = self.path_of(name)?;
        let mut data = match load_manifest(&self.manifest)? {
            Manifest::Csv(m) => match load_csv(path, &m) {
                Err(daevs::Error::UnknownColumn(col)) if labels_optional && m.label_column.as_ref() == Some(&col) => {
                    load_csv(path, &CsvManifest { label_column: None, ..m })?
                }
                other => other?,
            },
            Manifest::Sparse(m) => load_sparse_index(path, &m)?,
        };
        data.name = name.to_string();
        Ok(data)
    }

    pub fn load_batch(&self, name: &str) -> CliResult<Dataset> {
        self.load_with(name, false)
    }

    /// A target batch without labels, and its true labels.
    pub fn load_target(&self, name: &str) -> CliResult<(Dataset, Vec<Label>)> {
        let data = self.load_with(name, self.truth.contains_key(name))?;
        let truth = match (self.truth.get(name), data.labels()) {
            (Some(file), _) => read_labels_csv(file)?,
            (None, Some(labels)) => labels.to_vec(),
            (None, None) => {
                return Err(CliError::Usage(format!(
                    "target batch `{name}` has no labels and no truth file"
                )))
            }
        };
        if truth.len() != data.n_samples() {
            return Err(daevs::Error::Dimension(format!(
                "batch `{name}`: {} truth labels for {} samples",
                truth.len(),
                data.n_samples()
            ))
            .into());
        }
        Ok((Dataset { labels: None, ..data }, truth))
    }
}

/// Comma-separated variant names; `fillup:<gamma>` selects the fill-up run.
pub fn parse_variants(text: &str) -> CliResult<Vec<Variant>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| match name {
            "proposed" => Ok(Variant::Proposed),
            "jdot-no-extra" => Ok(Variant::JdotNoExtra),
            "jdot-ideal" => Ok(Variant::JdotIdeal),
            other => match other.strip_prefix("fillup:").map(str::parse::<f64>) {
                Some(Ok(gamma)) => Ok(Variant::Fillup { gamma }),
                _ => Err(CliError::Usage(format!(
                    "unknown variant `{other}` (expected proposed, jdot-no-extra, jdot-ideal or fillup:<gamma>)"
                ))),
            },
        })
        .collect()
}
