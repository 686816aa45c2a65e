//! Datasets with common/extra feature roles, plus loaders and generators.

mod io;
mod synthetic;
mod window;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::Label;

pub use io::{
    load_csv, load_manifest, load_sparse_index, read_labels_csv, save_csv, save_sparse_index, write_labels_csv,
    CsvManifest, Manifest, SensorBlock, SparseManifest,
};
pub use synthetic::{cosine_boundary, generate, Geometry, SyntheticData, SyntheticSpec};
pub use window::{window_features, window_features_labeled, STATS_PER_CHANNEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRole {
    Common,
    Extra,
}

/// Tabular samples, each column tagged as a common or an extra feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Option<Vec<Label>>,
    pub roles: Vec<FeatureRole>,
    pub columns: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Option<Vec<Label>>,
        roles: Vec<FeatureRole>,
    ) -> Result<Self> {
        let columns = (0..roles.len()).map(|k| format!("x{k}")).collect();
        Self::with_columns(name, features, labels, roles, columns)
    }

    pub fn with_columns(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Option<Vec<Label>>,
        roles: Vec<FeatureRole>,
        columns: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if features.ncols() != roles.len() || columns.len() != roles.len() {
            return Err(Error::Dimension(format!(
                "{name}: {} feature columns, {} roles, {} names",
                features.ncols(),
                roles.len(),
                columns.len()
            )));
        }
        if !roles.contains(&FeatureRole::Common) {
            return Err(Error::Dimension(format!("{name}: no common feature")));
        }
        if let Some(labels) = &labels {
            if labels.len() != features.nrows() {
                return Err(Error::Dimension(format!(
                    "{name}: {} labels for {} samples",
                    labels.len(),
                    features.nrows()
                )));
            }
        }
        if let Some(((r, c), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{name} row {r} column {c}")));
        }
        Ok(Dataset {
            name,
            features,
            labels,
            roles,
            columns,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn indices(&self, role: FeatureRole) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == role)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn n_common(&self) -> usize {
        self.indices(FeatureRole::Common).len()
    }

    pub fn n_extra(&self) -> usize {
        self.indices(FeatureRole::Extra).len()
    }

    pub fn common(&self) -> Array2<f64> {
        self.features.select(Axis(1), &self.indices(FeatureRole::Common))
    }

    pub fn extra(&self) -> Array2<f64> {
        self.features.select(Axis(1), &self.indices(FeatureRole::Extra))
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Copy keeping only the common columns.
    pub fn common_only(&self) -> Dataset {
        let idx = self.indices(FeatureRole::Common);
        Dataset {
            name: self.name.clone(),
            features: self.features.select(Axis(1), &idx),
            labels: self.labels.clone(),
            roles: vec![FeatureRole::Common; idx.len()],
            columns: idx.iter().map(|&k| self.columns[k].clone()).collect(),
        }
    }
}

/// Per-feature affine map to zero mean and unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fit on the rows of every block in `pool` (all must share a width).
    pub fn fit(pool: &[&Array2<f64>]) -> Result<Self> {
        let width = pool.first().map_or(0, |m| m.ncols());
        if pool.iter().any(|m| m.ncols() != width) {
            return Err(Error::Dimension("standardizer pool widths differ".into()));
        }
        let n: usize = pool.iter().map(|m| m.nrows()).sum();
        if n == 0 {
            return Ok(Standardizer {
                mean: vec![0.0; width],
                scale: vec![1.0; width],
            });
        }
        let mut mean = Array1::<f64>::zeros(width);
        for m in pool {
            mean += &m.sum_axis(Axis(0));
        }
        mean /= n as f64;
        let mut var = Array1::<f64>::zeros(width);
        for m in pool {
            for row in m.rows() {
                let d = &row - &mean;
                var += &(&d * &d);
            }
        }
        var /= n as f64;
        let scale = var
            .iter()
            .map(|&v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Ok(Standardizer {
            mean: mean.to_vec(),
            scale,
        })
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "standardizer fitted on {} features, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (k, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| (v - self.mean[k]) / self.scale[k]);
        }
        Ok(out)
    }

    pub fn transform_value(&self, k: usize, v: f64) -> f64 {
        (v - self.mean[k]) / self.scale[k]
    }
}
