//! Repeated adaptation runs over seeds and variants, summarised as a
//! per-method table (synthetic data) or a per-domain-pair table (files).

use std::path::{Path, PathBuf};

use daevs::adapt::{baseline_predictions, run, FeatureMap, IterationRecord, PairReport, RunConfig, RunResult, Variant};
use daevs::data::{generate, save_csv, write_labels_csv, CsvManifest, Dataset, SyntheticSpec};
use daevs::diagnostics::accuracy_report;
use daevs::labeling::Label;
use daevs::models::Classifier;
use daevs::report::{render_method_table, render_pair_table, summarize, MethodSummary};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BatchSpec, DataSource, ExperimentConfig};
use crate::error::CliResult;
use crate::files::{create_dir, write_json, write_text};

/// Everything `plotdata` and later inspection need from one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredRun {
    pub variant: String,
    pub seed: u64,
    pub config: RunConfig,
    pub transfer_accuracy: Option<f64>,
    pub model_accuracy: Option<f64>,
    pub stopped_early: bool,
    pub final_objective: f64,
    pub trace: Vec<IterationRecord>,
    pub model: Classifier,
    pub feature_map: FeatureMap,
    /// Manifest of `target.csv` in the same directory.
    pub target_manifest: CsvManifest,
}

pub const RESULT_FILE: &str = "result.json";
pub const TARGET_FILE: &str = "target.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

#[derive(Debug, Clone, Serialize)]
pub struct RunLine {
    pub variant: String,
    pub seed: u64,
    pub transfer_accuracy: Option<f64>,
    pub model_accuracy: Option<f64>,
    pub iterations: usize,
    pub stopped_early: bool,
    pub directory: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summary {
    Methods(Vec<MethodSummary>),
    Pairs(Vec<PairReport>),
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptReport {
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub table: String,
    pub runs: Vec<RunLine>,
}

struct Job<'a> {
    source: &'a Dataset,
    target: &'a Dataset,
    truth: &'a [Label],
    config: RunConfig,
    directory: PathBuf,
}

fn execute(job: &Job<'_>, root: &Path) -> CliResult<(RunResult, RunLine)> {
    let result = run(job.source, job.target, &job.config, Some(job.truth))?;
    let dir = root.join(&job.directory);
    create_dir(&dir)?;
    let labelled_target = Dataset {
        labels: Some(job.truth.to_vec()),
        ..job.target.clone()
    };
    let target_manifest = save_csv(&labelled_target, dir.join(TARGET_FILE))?;
    write_labels_csv(&result.transferred_labels, dir.join(LABELS_FILE))?;
    write_labels_csv(&result.predictions, dir.join(PREDICTIONS_FILE))?;
    let stored = StoredRun {
        variant: job.config.variant.name(),
        seed: job.config.seed,
        config: job.config.clone(),
        transfer_accuracy: result.transfer_accuracy(),
        model_accuracy: result.model_accuracy(),
        stopped_early: result.stopped_early,
        final_objective: result.plan.objective,
        trace: result.trace.clone(),
        model: result.model.clone(),
        feature_map: result.feature_map.clone(),
        target_manifest,
    };
    write_json(&dir.join(RESULT_FILE), &stored)?;
    let line = RunLine {
        variant: stored.variant,
        seed: stored.seed,
        transfer_accuracy: stored.transfer_accuracy,
        model_accuracy: stored.model_accuracy,
        iterations: result.trace.len(),
        stopped_early: result.stopped_early,
        directory: job.directory.clone(),
    };
    Ok((result, line))
}

fn seeds(config: &ExperimentConfig) -> Vec<u64> {
    let base = config.resolved_run().seed;
    (0..config.repeat as u64).map(|r| base + r).collect()
}

fn run_dir(variant: Variant, seed: u64) -> PathBuf {
    PathBuf::from(variant.name()).join(format!("seed-{seed}"))
}

fn synthetic(config: &ExperimentConfig, spec: &SyntheticSpec) -> CliResult<AdaptReport> {
    let base = config.resolved_run();
    let root = config.output_dir.join("runs");
    let data = seeds(config)
        .into_par_iter()
        .map(|seed| {
            let data = generate(&SyntheticSpec { seed, ..spec.clone() })?;
            let full = data.source_full();
            Ok((seed, data, full))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for variant in &config.variants {
        for (seed, d, full) in &data {
            jobs.push(Job {
                source: if *variant == Variant::JdotIdeal { full } else { &d.source },
                target: &d.target,
                truth: &d.target_truth,
                config: RunConfig {
                    variant: *variant,
                    seed: *seed,
                    ..base.clone()
                },
                directory: run_dir(*variant, *seed),
            });
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|job| execute(job, &root))
        .collect::<CliResult<Vec<_>>>()?;

    let mut summaries = Vec::new();
    for variant in &config.variants {
        let runs: Vec<RunResult> = outcomes
            .iter()
            .filter(|(r, _)| r.config.variant == *variant)
            .map(|(r, _)| r.clone())
            .collect();
        summaries.push(summarize(&variant.name(), &runs)?);
    }
    Ok(AdaptReport {
        config: config.clone(),
        table: render_method_table(&summaries),
        summary: Summary::Methods(summaries),
        runs: outcomes.into_iter().map(|(_, line)| line).collect(),
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn batches(config: &ExperimentConfig, spec: &BatchSpec) -> CliResult<AdaptReport> {
    let base = config.resolved_run();
    let root = config.output_dir.join("runs");
    let seeds = seeds(config);
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (s, t) in &spec.pairs {
        let source = spec.load_batch(s)?;
        let (target, truth) = spec.load_target(t)?;
        let mut variants = vec![Variant::JdotNoExtra, Variant::Proposed];
        let ideal = target.n_extra() > 0 && source.n_extra() == target.n_extra();
        if ideal {
            variants.push(Variant::JdotIdeal);
        }
        let pair_dir = PathBuf::from(format!("{s}-{t}"));
        let jobs: Vec<Job> = variants
            .iter()
            .flat_map(|&variant| {
                seeds.iter().map(move |&seed| (variant, seed))
            })
            .map(|(variant, seed)| Job {
                source: &source,
                target: &target,
                truth: &truth,
                config: RunConfig {
                    variant,
                    seed,
                    ..base.clone()
                },
                directory: pair_dir.join(run_dir(variant, seed)),
            })
            .collect();
        let outcomes = jobs
            .par_iter()
            .map(|job| execute(job, &root))
            .collect::<CliResult<Vec<_>>>()?;
        let baseline = seeds
            .par_iter()
            .map(|&seed| {
                let predicted = baseline_predictions(&source, &target, &RunConfig { seed, ..base.clone() })?;
                Ok(accuracy_report(&predicted, &truth)?.accuracy)
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let model_mean = |variant: Variant| {
            let acc: Vec<f64> = outcomes
                .iter()
                .filter(|(r, _)| r.config.variant == variant)
                .filter_map(|(r, _)| r.model_accuracy())
                .collect();
            mean(&acc)
        };
        rows.push(PairReport {
            source: s.clone(),
            target: t.clone(),
            baseline: mean(&baseline),
            jdot_no_extra: model_mean(Variant::JdotNoExtra),
            proposed: model_mean(Variant::Proposed),
            jdot_ideal: ideal.then(|| model_mean(Variant::JdotIdeal)),
        });
        lines.extend(outcomes.into_iter().map(|(_, line)| line));
    }
    Ok(AdaptReport {
        config: config.clone(),
        table: render_pair_table(&rows),
        summary: Summary::Pairs(rows),
        runs: lines,
    })
}

/// Runs the experiment and writes `report.json`, `report.txt` and one
/// directory per run under `runs/`.
pub fn adapt(config: &ExperimentConfig) -> CliResult<AdaptReport> {
    config.validate()?;
    let echo = ExperimentConfig {
        run: Some(config.resolved_run()),
        ..config.clone()
    };
    create_dir(&echo.output_dir)?;
    let report = match &echo.data {
        DataSource::Synthetic(spec) => synthetic(&echo, spec)?,
        DataSource::Batches(spec) => batches(&echo, spec)?,
        DataSource::BatchFile(path) => batches(&echo, &BatchSpec::load(path)?)?,
    };
    write_json(&echo.output_dir.join("report.json"), &report)?;
    write_text(&echo.output_dir.join("report.txt"), &report.table)?;
    Ok(report)
}
