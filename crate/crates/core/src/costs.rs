//! Transport costs between source and target samples.
//!
//! * [`initial_cost`]: feature distance only, used before any model exists.
//! * [`joint_cost`]: `alpha * d(common) + loss(y_s, pseudo_t)`; target extra
//!   features never enter it directly.
//! * [`ideal_cost`]: same form over the full (common + extra) features, for
//!   the ideal baseline, the fill-up strategy and the Wasserstein diagnostic.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::Label;
use crate::transport::CostMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Metric {
    SquaredEuclidean,
    /// `sum_k |a_k - b_k|^p`
    LpPower { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelLoss {
    ZeroOne,
    /// `max(0, 1 - y_s * f_t)` on the classifier decision value.
    HingeOnDecisionValue,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub alpha: f64,
    pub metric: Metric,
    pub label_loss: LabelLoss,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            alpha: 1.0,
            metric: Metric::SquaredEuclidean,
            label_loss: LabelLoss::HingeOnDecisionValue,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if let Metric::LpPower { p } = self.metric {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!("lp-power needs p >= 1, got {p}")));
            }
        }
        Ok(())
    }
}

/// Target-side labels entering the label term.
#[derive(Debug, Clone, Copy)]
pub enum PseudoLabels<'a> {
    DecisionValues(&'a [f64]),
    Classes(&'a [Label]),
}

impl PseudoLabels<'_> {
    pub fn len(&self) -> usize {
        match self {
            PseudoLabels::DecisionValues(v) => v.len(),
            PseudoLabels::Classes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Metric {
    pub fn distance(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            Metric::SquaredEuclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Metric::LpPower { p } => a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum(),
        }
    }
}

fn is_binary(y: Label) -> bool {
    y == 1 || y == -1
}

impl LabelLoss {
    /// Loss between two class labels. Hinge treats `b` as a `±1` decision value.
    pub fn between_classes(&self, a: Label, b: Label) -> Result<f64> {
        match self {
            LabelLoss::ZeroOne => Ok(if a == b { 0.0 } else { 1.0 }),
            LabelLoss::Squared => Ok(if is_binary(a) && is_binary(b) {
                ((a - b) * (a - b)) as f64
            } else if a == b {
                // one-hot encoding: ||e_a - e_b||^2
                0.0
            } else {
                2.0
            }),
            LabelLoss::HingeOnDecisionValue => {
                if !is_binary(b) {
                    return Err(Error::Label(format!("hinge loss needs ±1 labels, got {b}")));
                }
                self.against_decision(a, b as f64)
            }
        }
    }

    pub fn against_decision(&self, y: Label, f: f64) -> Result<f64> {
        match self {
            LabelLoss::HingeOnDecisionValue => {
                if !is_binary(y) {
                    return Err(Error::Label(format!("hinge loss needs ±1 labels, got {y}")));
                }
                Ok((1.0 - y as f64 * f).max(0.0))
            }
            other => Err(Error::Label(format!(
                "{other:?} loss expects class predictions, got decision values"
            ))),
        }
    }
}

fn check_finite(what: &str, x: &Array2<f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn check_pair(source: &Array2<f64>, target: &Array2<f64>) -> Result<()> {
    if source.ncols() != target.ncols() {
        return Err(Error::Dimension(format!(
            "source has {} features, target has {}",
            source.ncols(),
            target.ncols()
        )));
    }
    check_finite("source features", source)?;
    check_finite("target features", target)
}

/// `d(x_i, x'_j)` for every source row `i` and target row `j`.
pub fn pairwise_distances(metric: Metric, source: &Array2<f64>, target: &Array2<f64>) -> Result<Array2<f64>> {
    check_pair(source, target)?;
    let mut out = Array2::zeros((source.nrows(), target.nrows()));
    for (i, xs) in source.rows().into_iter().enumerate() {
        for (j, xt) in target.rows().into_iter().enumerate() {
            out[(i, j)] = metric.distance(xs, xt);
        }
    }
    Ok(out)
}

pub fn initial_cost(
    source_common: &Array2<f64>,
    target_common: &Array2<f64>,
    params: &CostParams,
) -> Result<CostMatrix> {
    params.validate()?;
    CostMatrix::new(pairwise_distances(params.metric, source_common, target_common)?)
}

fn label_term(
    source_labels: &[Label],
    target_pseudo: PseudoLabels<'_>,
    loss: LabelLoss,
) -> Result<Array2<f64>> {
    let n = target_pseudo.len();
    let mut out = Array2::zeros((source_labels.len(), n));
    match target_pseudo {
        PseudoLabels::DecisionValues(f) => {
            if loss != LabelLoss::HingeOnDecisionValue {
                return Err(Error::Label(format!(
                    "{loss:?} loss expects class predictions, got decision values"
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("decision values".into()));
            }
            for (i, &y) in source_labels.iter().enumerate() {
                for (j, &fj) in f.iter().enumerate() {
                    out[(i, j)] = loss.against_decision(y, fj)?;
                }
            }
        }
        PseudoLabels::Classes(c) => {
            if loss == LabelLoss::HingeOnDecisionValue {
                return Err(Error::Label(
                    "hinge loss expects decision values, got class predictions".into(),
                ));
            }
            for (i, &y) in source_labels.iter().enumerate() {
                for (j, &cj) in c.iter().enumerate() {
                    out[(i, j)] = loss.between_classes(y, cj)?;
                }
            }
        }
    }
    Ok(out)
}

fn labelled_cost(
    source: &Array2<f64>,
    source_labels: &[Label],
    target: &Array2<f64>,
    target_pseudo: PseudoLabels<'_>,
    params: &CostParams,
) -> Result<CostMatrix> {
    params.validate()?;
    if source_labels.len() != source.nrows() {
        return Err(Error::Dimension(format!(
            "{} source labels for {} source samples",
            source_labels.len(),
            source.nrows()
        )));
    }
    if target_pseudo.len() != target.nrows() {
        return Err(Error::Dimension(format!(
            "{} pseudo-labels for {} target samples",
            target_pseudo.len(),
            target.nrows()
        )));
    }
    let mut cost = pairwise_distances(params.metric, source, target)?;
    cost *= params.alpha;
    cost += &label_term(source_labels, target_pseudo, params.label_loss)?;
    CostMatrix::new(cost)
}

pub fn joint_cost(
    source_common: &Array2<f64>,
    source_labels: &[Label],
    target_common: &Array2<f64>,
    target_pseudo: PseudoLabels<'_>,
    params: &CostParams,
) -> Result<CostMatrix> {
    labelled_cost(source_common, source_labels, target_common, target_pseudo, params)
}

pub fn ideal_cost(
    source_full: &Array2<f64>,
    source_labels: &[Label],
    target_full: &Array2<f64>,
    target_pseudo: PseudoLabels<'_>,
    params: &CostParams,
) -> Result<CostMatrix> {
    labelled_cost(source_full, source_labels, target_full, target_pseudo, params)
}

/// Source common features followed by `n_extra` columns filled with `gamma`.
pub fn fill_up(source_common: &Array2<f64>, n_extra: usize, gamma: f64) -> Array2<f64> {
    let (n, c) = source_common.dim();
    Array2::from_shape_fn((n, c + n_extra), |(i, k)| {
        if k < c {
            source_common[(i, k)]
        } else {
            gamma
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, concatenate, Axis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_one(alpha: f64) -> CostParams {
        CostParams {
            alpha,
            metric: Metric::SquaredEuclidean,
            label_loss: LabelLoss::ZeroOne,
        }
    }

    #[test]
    fn initial_cost_hand_values() {
        let p = CostParams::default();
        let c = initial_cost(&array![[0.0, 0.0]], &array![[0.0, 0.0]], &p).unwrap();
        assert_eq!(c.values(), &array![[0.0]]);
        let c = initial_cost(&array![[1.0, 2.0]], &array![[0.0, 2.0]], &p).unwrap();
        assert_eq!(c.values(), &array![[1.0]]);
        // no alpha factor
        let p = CostParams { alpha: 5.0, ..p };
        let c = initial_cost(&array![[1.0, 2.0]], &array![[0.0, 2.0]], &p).unwrap();
        assert_eq!(c.values(), &array![[1.0]]);
    }

    #[test]
    fn initial_cost_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = Array2::from_shape_fn((2, 3), |_| rng.gen_range(-3.0..3.0));
        let t = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-3.0..3.0));
        for metric in [Metric::SquaredEuclidean, Metric::LpPower { p: 1.5 }] {
            let p = CostParams { metric, ..Default::default() };
            let c = initial_cost(&s, &t, &p).unwrap();
            let pw = match metric {
                Metric::LpPower { p } => p,
                Metric::SquaredEuclidean => 2.0,
            };
            for i in 0..2 {
                for j in 0..3 {
                    let mut d = 0.0;
                    for k in 0..3 {
                        d += f64::abs(s[[i, k]] - t[[j, k]]).powf(pw);
                    }
                    assert_abs_diff_eq!(c.values()[[i, j]], d, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn initial_cost_errors() {
        let p = CostParams::default();
        assert!(matches!(
            initial_cost(&array![[1.0]], &array![[1.0, 2.0]], &p),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            initial_cost(&array![[f64::NAN]], &array![[1.0]], &p),
            Err(Error::NonFinite(_))
        ));
        let bad = CostParams {
            metric: Metric::LpPower { p: 0.5 },
            ..p
        };
        assert!(initial_cost(&array![[1.0]], &array![[1.0]], &bad).is_err());
    }

    #[test]
    fn joint_cost_hand_values() {
        let c = joint_cost(&array![[0.3]], &[1], &array![[0.3]], PseudoLabels::Classes(&[1]), &zero_one(1.0)).unwrap();
        assert_eq!(c.values()[[0, 0]], 0.0);

        let c = joint_cost(&array![[0.0]], &[1], &array![[1.0]], PseudoLabels::Classes(&[-1]), &zero_one(1.0)).unwrap();
        assert_eq!(c.values()[[0, 0]], 2.0);

        let hinge = CostParams {
            alpha: 0.5,
            ..Default::default()
        };
        let c = joint_cost(&array![[0.0]], &[1], &array![[2.0]], PseudoLabels::DecisionValues(&[0.3]), &hinge).unwrap();
        assert_abs_diff_eq!(c.values()[[0, 0]], 2.7, epsilon = 1e-12);
    }

    #[test]
    fn loss_kind_must_match_pseudo_labels() {
        let s = array![[0.0]];
        assert!(joint_cost(&s, &[1], &s, PseudoLabels::Classes(&[1]), &CostParams::default()).is_err());
        assert!(joint_cost(&s, &[1], &s, PseudoLabels::DecisionValues(&[0.2]), &zero_one(1.0)).is_err());
        assert!(joint_cost(&s, &[2], &s, PseudoLabels::DecisionValues(&[0.2]), &CostParams::default()).is_err());
        assert!(joint_cost(&s, &[1, 1], &s, PseudoLabels::Classes(&[1]), &zero_one(1.0)).is_err());
    }

    #[test]
    fn squared_loss_encodings() {
        assert_eq!(LabelLoss::Squared.between_classes(1, -1).unwrap(), 4.0);
        assert_eq!(LabelLoss::Squared.between_classes(2, 3).unwrap(), 2.0);
        assert_eq!(LabelLoss::Squared.between_classes(3, 3).unwrap(), 0.0);
    }

    #[test]
    fn ideal_cost_hand_values() {
        let x = array![[0.5, -1.0]];
        let c = ideal_cost(&x, &[1], &x, PseudoLabels::Classes(&[1]), &zero_one(1.0)).unwrap();
        assert_eq!(c.values()[[0, 0]], 0.0);
        let c = ideal_cost(&x, &[1], &array![[0.5, 1.0]], PseudoLabels::Classes(&[1]), &zero_one(1.0)).unwrap();
        assert_eq!(c.values()[[0, 0]], 4.0);
    }

    #[test]
    fn fill_up_decomposes_into_joint_plus_column_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sc = Array2::from_shape_fn((5, 2), |_| rng.gen_range(-2.0..2.0));
        let tc = Array2::from_shape_fn((4, 2), |_| rng.gen_range(-2.0..2.0));
        let te = Array2::from_shape_fn((4, 3), |_| rng.gen_range(-2.0..2.0));
        let ys = [1, -1, 1, 1, -1];
        let f = [0.4, -1.2, 2.0, 0.0];
        for &(p, gamma) in &[(2.0, 0.0), (1.0, 1.5), (3.0, -0.7)] {
            let params = CostParams {
                alpha: 0.8,
                metric: Metric::LpPower { p },
                label_loss: LabelLoss::HingeOnDecisionValue,
            };
            let tf = concatenate(Axis(1), &[tc.view(), te.view()]).unwrap();
            let ideal = ideal_cost(&fill_up(&sc, 3, gamma), &ys, &tf, PseudoLabels::DecisionValues(&f), &params).unwrap();
            let joint = joint_cost(&sc, &ys, &tc, PseudoLabels::DecisionValues(&f), &params).unwrap();
            for i in 0..5 {
                for j in 0..4 {
                    let mut shift = 0.0;
                    for k in 0..3 {
                        shift += f64::abs(gamma - te[[j, k]]).powf(p);
                    }
                    let want = joint.values()[[i, j]] + 0.8 * shift;
                    assert_abs_diff_eq!(ideal.values()[[i, j]], want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_under_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0));
        let b = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0));
        let ya = [1, -1, 1];
        let yb = [-1, -1, 1];
        for loss in [LabelLoss::ZeroOne, LabelLoss::Squared] {
            let p = CostParams {
                alpha: 0.7,
                metric: Metric::SquaredEuclidean,
                label_loss: loss,
            };
            let ab = joint_cost(&a, &ya, &b, PseudoLabels::Classes(&yb), &p).unwrap();
            let ba = joint_cost(&b, &yb, &a, PseudoLabels::Classes(&ya), &p).unwrap();
            assert_eq!(ab.values(), &ba.values().t());
        }
    }
}
