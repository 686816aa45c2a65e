//! Accuracy metrics, the Wasserstein gap between an estimated and the true
//! labelled target, and the terms of the target-error upper bound.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::costs::{ideal_cost, CostParams, LabelLoss, PseudoLabels};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::labeling::{class_ids, Label};
use crate::transport::solve_ot;

/// Fraction of equal entries; callers guarantee equal lengths.
pub(crate) fn accuracy(predicted: &[Label], truth: &[Label]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCount {
    pub truth: Label,
    pub predicted: Label,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub accuracy: f64,
    pub n: usize,
    pub correct: usize,
    /// Non-zero cells of the confusion matrix, ordered by (truth, predicted).
    pub confusion: Vec<ConfusionCount>,
}

pub fn accuracy_report(predicted: &[Label], truth: &[Label]) -> Result<AccuracyReport> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut cells: BTreeMap<(Label, Label), usize> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        *cells.entry((t, p)).or_default() += 1;
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(AccuracyReport {
        accuracy: accuracy(predicted, truth),
        n: truth.len(),
        correct,
        confusion: cells
            .into_iter()
            .map(|((truth, predicted), count)| ConfusionCount { truth, predicted, count })
            .collect(),
    })
}

/// Mean and unbiased sample variance of repeated measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    /// Zero for a single measurement.
    pub variance: f64,
    pub n: usize,
}

pub fn spread(values: &[f64]) -> Result<Spread> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("no values to summarise".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = if n < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    };
    Ok(Spread { mean, variance, n })
}

/// Optimal transport cost between two labelled samples under the joint
/// feature-plus-label cost. For the hinge loss, binary classes are mapped to
/// `±1` (larger class id positive) and the label acts as the decision value.
pub fn wasserstein_estimate(estimated: &Dataset, truth: &Dataset, params: &CostParams) -> Result<f64> {
    if estimated.features.ncols() != truth.features.ncols() {
        return Err(Error::Dimension(format!(
            "estimated target has {} features, true target has {}",
            estimated.features.ncols(),
            truth.features.ncols()
        )));
    }
    let labels = |d: &Dataset| {
        d.labels()
            .map(<[Label]>::to_vec)
            .ok_or_else(|| Error::Label(format!("dataset `{}` has no labels", d.name)))
    };
    let (mut ye, mut yt) = (labels(estimated)?, labels(truth)?);
    let cost = if params.label_loss == LabelLoss::HingeOnDecisionValue {
        let mut all = ye.clone();
        all.extend_from_slice(&yt);
        let classes = class_ids(&all);
        if classes.len() > 2 {
            return Err(Error::Label(format!("hinge loss needs binary labels, got {classes:?}")));
        }
        let positive = *classes.last().expect("non-empty datasets");
        let sign = |y: &mut Label| *y = if *y == positive { 1 } else { -1 };
        ye.iter_mut().for_each(sign);
        yt.iter_mut().for_each(sign);
        let f: Vec<f64> = yt.iter().map(|&y| y as f64).collect();
        ideal_cost(&estimated.features, &ye, &truth.features, PseudoLabels::DecisionValues(&f), params)?
    } else {
        ideal_cost(&estimated.features, &ye, &truth.features, PseudoLabels::Classes(&yt), params)?
    };
    Ok(solve_ot(&cost).objective)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub empirical_error: f64,
    /// Lipschitz constant of the loss.
    pub k: f64,
    /// Radius of the hypothesis ball.
    pub a: f64,
    /// Kernel bound `sup K(x, x)`.
    pub lambda_k: f64,
    pub n_target: usize,
    pub delta: f64,
    pub wasserstein: f64,
    /// `sup L(0, y)`; defaults to 1 (zero-one loss).
    #[serde(default = "default_l0")]
    pub l0: f64,
    #[serde(default)]
    pub err_f0: Option<f64>,
    #[serde(default)]
    pub m_bound: Option<f64>,
    #[serde(default)]
    pub phi_lambda: Option<f64>,
}

fn default_l0() -> f64 {
    1.0
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.n_target == 0 {
            return Err(Error::InvalidParameter("n_target must be positive".into()));
        }
        let named = [
            ("empirical_error", Some(self.empirical_error)),
            ("k", Some(self.k)),
            ("a", Some(self.a)),
            ("lambda_k", Some(self.lambda_k)),
            ("wasserstein", Some(self.wasserstein)),
            ("l0", Some(self.l0)),
            ("err_f0", self.err_f0),
            ("m_bound", self.m_bound),
            ("phi_lambda", self.phi_lambda),
        ];
        for (name, v) in named {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::NonFinite(name.into()));
                }
                if v < 0.0 {
                    return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
                }
            }
        }
        if self.empirical_error > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "empirical_error must lie in [0, 1], got {}",
                self.empirical_error
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical_error: f64,
    pub rademacher_term: f64,
    pub confidence_term: f64,
    pub wasserstein_term: f64,
    /// `2 err(f0) + k M phi`; only when all three inputs are given.
    pub constant_terms: Option<f64>,
    pub total_upper_bound: Option<f64>,
    /// Sum of the computed terms, excluding the constants.
    pub partial_total: f64,
    /// True when the constants were omitted and the total is not a bound.
    pub partial: bool,
}

pub fn bound_report(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let n = inputs.n_target as f64;
    let kal = inputs.k * inputs.a * inputs.lambda_k;
    let rademacher_term = 2.0 * kal / n.sqrt();
    let confidence_term = (inputs.l0 + kal) * ((1.0 / inputs.delta).ln() / n).sqrt();
    let constant_terms = match (inputs.err_f0, inputs.m_bound, inputs.phi_lambda) {
        (Some(e), Some(m), Some(phi)) => Some(2.0 * e + inputs.k * m * phi),
        _ => None,
    };
    let partial_total = inputs.empirical_error + rademacher_term + confidence_term + inputs.wasserstein;
    Ok(BoundReport {
        empirical_error: inputs.empirical_error,
        rademacher_term,
        confidence_term,
        wasserstein_term: inputs.wasserstein,
        constant_terms,
        total_upper_bound: constant_terms.map(|c| partial_total + c),
        partial_total,
        partial: constant_terms.is_none(),
    })
}
