//! Label transfer through a transport plan: barycentric soft labels, then
//! hard labels by argmax with seeded tie-breaking.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::row_rng;
use crate::transport::TransportPlan;

pub type Label = i64;
pub type LabelVector = Vec<Label>;

/// Probabilities within this distance of the row maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `N_t x K` class probabilities, one row per target sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabelMatrix {
    pub values: Array2<f64>,
    pub class_ids: Vec<Label>,
}

/// Sorted distinct labels.
pub fn class_ids(labels: &[Label]) -> Vec<Label> {
    let mut ids = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Row `j` is column `j` of `planᵀ Y_s` (one-hot `Y_s`) divided by the column mass.
pub fn soft_transfer(
    plan: &TransportPlan,
    source_labels: &[Label],
    class_ids: &[Label],
) -> Result<SoftLabelMatrix> {
    let (m, n) = plan.values.dim();
    if source_labels.len() != m {
        return Err(Error::Dimension(format!(
            "plan has {m} source rows but {} labels were given",
            source_labels.len()
        )));
    }
    let class_of: Vec<usize> = source_labels
        .iter()
        .map(|l| {
            class_ids
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| Error::Label(format!("label {l} not among class ids {class_ids:?}")))
        })
        .collect::<Result<_>>()?;

    let k = class_ids.len();
    let mut values = Array2::zeros((n, k));
    for (i, &c) in class_of.iter().enumerate() {
        for j in 0..n {
            let p = plan.values[(i, j)];
            if p != 0.0 {
                values[(j, c)] += p;
            }
        }
    }
    for (j, mut row) in values.rows_mut().into_iter().enumerate() {
        let mass = row.sum();
        if mass <= 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        row /= mass;
    }
    Ok(SoftLabelMatrix {
        values,
        class_ids: class_ids.to_vec(),
    })
}

/// Argmax class per row; rows whose maximum is shared by several classes
/// pick one of them uniformly with a generator derived from `(seed, row)`.
pub fn hard_labels(soft: &SoftLabelMatrix, seed: u64) -> LabelVector {
    soft.values
        .rows()
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &p)| p >= max - TIE_TOLERANCE)
                .map(|(k, _)| k)
                .collect();
            let pick = if tied.len() == 1 {
                tied[0]
            } else {
                tied[row_rng(seed, j).gen_range(0..tied.len())]
            };
            soft.class_ids[pick]
        })
        .collect()
}
