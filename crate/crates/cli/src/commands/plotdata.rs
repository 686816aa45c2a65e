//! Decision values of a stored run's final model on a regular grid over the
//! target's two features, plus the transferred labels of the target points.

use std::path::{Path, PathBuf};

use daevs::data::{load_csv, read_labels_csv, Dataset};
use daevs::models::{decision_values, predict};
use ndarray::Array2;
use serde::Serialize;

use super::adapt::{StoredRun, LABELS_FILE, PREDICTIONS_FILE, RESULT_FILE, TARGET_FILE};
use crate::error::{CliError, CliResult};
use crate::files::{create_dir, read_json, write_rows};

pub const GRID_FILE: &str = "grid.csv";
pub const SCATTER_FILE: &str = "scatter.csv";

#[derive(Debug, Serialize)]
pub struct PlotReport {
    pub run: PathBuf,
    pub output_dir: PathBuf,
    pub resolution: usize,
    pub columns: Vec<String>,
    /// `[min, max]` per axis.
    pub bounds: Vec<[f64; 2]>,
    pub grid_points: usize,
    pub scatter_points: usize,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

pub fn plotdata(run: &Path, out: Option<&Path>, resolution: usize) -> CliResult<PlotReport> {
    if resolution < 2 {
        return Err(CliError::Usage("resolution must be >= 2".into()));
    }
    let stored: StoredRun = read_json(&run.join(RESULT_FILE))?;
    let target = load_csv(run.join(TARGET_FILE), &stored.target_manifest)?;
    if target.features.ncols() != 2 {
        return Err(CliError::Usage(format!(
            "plotdata is only valid for 2-D feature spaces; the target has {} features",
            target.features.ncols()
        )));
    }
    let out = out.unwrap_or(run);
    create_dir(out)?;

    let bounds: Vec<[f64; 2]> = target
        .features
        .columns()
        .into_iter()
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                [lo, hi]
            } else {
                [lo - 0.5, hi + 0.5]
            }
        })
        .collect();
    let (xs, ys) = (
        axis(bounds[0][0], bounds[0][1], resolution),
        axis(bounds[1][0], bounds[1][1], resolution),
    );
    let points = Array2::from_shape_fn((resolution * resolution, 2), |(r, k)| {
        if k == 0 {
            xs[r / resolution]
        } else {
            ys[r % resolution]
        }
    });
    let grid = Dataset::with_columns("grid", points, None, target.roles.clone(), target.columns.clone())?;
    let mapped = stored.feature_map.apply(&grid)?;
    let decision = decision_values(&stored.model, &mapped)?;
    let classes = predict(&stored.model, &mapped)?;
    let header = [target.columns[0].as_str(), target.columns[1].as_str(), "decision", "class"];
    write_rows(
        &out.join(GRID_FILE),
        &header,
        grid.features
            .rows()
            .into_iter()
            .zip(decision.iter().zip(&classes))
            .map(|(p, (f, c))| vec![p[0].to_string(), p[1].to_string(), f.to_string(), c.to_string()]),
    )?;

    let transferred = read_labels_csv(run.join(LABELS_FILE))?;
    let predicted = read_labels_csv(run.join(PREDICTIONS_FILE))?;
    let truth = target.labels().map(<[i64]>::to_vec).unwrap_or_default();
    let header = [
        target.columns[0].as_str(),
        target.columns[1].as_str(),
        "transferred",
        "predicted",
        "truth",
    ];
    write_rows(
        &out.join(SCATTER_FILE),
        &header,
        target.features.rows().into_iter().enumerate().map(|(i, p)| {
            vec![
                p[0].to_string(),
                p[1].to_string(),
                transferred[i].to_string(),
                predicted[i].to_string(),
                truth.get(i).map(|t| t.to_string()).unwrap_or_default(),
            ]
        }),
    )?;
    Ok(PlotReport {
        run: run.to_path_buf(),
        output_dir: out.to_path_buf(),
        resolution,
        columns: target.columns.clone(),
        bounds,
        grid_points: resolution * resolution,
        scatter_points: target.n_samples(),
    })
}
