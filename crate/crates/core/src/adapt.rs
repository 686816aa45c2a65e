//! Alternating optimal transport and model training for targets that carry
//! extra features, plus the baseline variants that share the same loop.
//!
//! Each iteration solves an exact OT problem between the labelled source and
//! the target, transfers labels through the plan (argmax of the barycentric
//! soft labels), and retrains the classifier from scratch on the target with
//! those labels. The first iteration uses the feature distance alone; later
//! ones add the label loss of the current model's pseudo-labels.

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::costs::{fill_up, ideal_cost, initial_cost, joint_cost, CostParams, LabelLoss, PseudoLabels};
use crate::data::{Dataset, FeatureRole, Standardizer};
use crate::diagnostics::{accuracy, accuracy_report};
use crate::error::{Error, Result};
use crate::labeling::{class_ids, hard_labels, soft_transfer, Label};
use crate::models::{decision_values, kkt_violation, predict, train, Classifier, ModelSpec};
use crate::rng::{stream, substream};
use crate::transport::{solve_ot, CostMatrix, TransportPlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// OT on common features and pseudo-labels; model on common + extra.
    Proposed,
    /// Extra features ignored everywhere.
    JdotNoExtra,
    /// OT on the full features, using the true source extras.
    JdotIdeal,
    /// OT on the full features with every source extra set to `gamma`.
    Fillup { gamma: f64 },
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Proposed => "proposed".into(),
            Variant::JdotNoExtra => "jdot-no-extra".into(),
            Variant::JdotIdeal => "jdot-ideal".into(),
            Variant::Fillup { gamma } => format!("fillup({gamma})"),
        }
    }
}

pub const DEFAULT_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_iterations: usize,
    pub cost_params: CostParams,
    pub model_spec: ModelSpec,
    pub seed: u64,
    pub variant: Variant,
    /// Stop as soon as the transferred labels repeat.
    pub early_stop: bool,
    /// Standardize features before computing costs and training.
    pub standardize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_iterations: DEFAULT_ITERATIONS,
            cost_params: CostParams::default(),
            model_spec: ModelSpec::default(),
            seed: 0,
            variant: Variant::Proposed,
            early_stop: false,
            standardize: true,
        }
    }
}

/// Box constraint used for the synthetic benchmark. Costs and models work on
/// standardized features, and with `c_reg = 1` the hinge term of the cost
/// outweighs `alpha = 1` times the common-feature distance often enough to let
/// early pseudo-labels drift; halving it keeps decision values, and hence the
/// label term, on the scale of the distances.
pub const SYNTHETIC_C_REG: f64 = 0.5;

impl RunConfig {
    /// Configuration for the synthetic cosine benchmark: `alpha = 1`, RBF SVM
    /// with [`SYNTHETIC_C_REG`], default bandwidth, ten iterations.
    pub fn synthetic(variant: Variant, seed: u64) -> Self {
        RunConfig {
            variant,
            seed,
            model_spec: ModelSpec {
                c_reg: SYNTHETIC_C_REG,
                ..ModelSpec::default()
            },
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::InvalidParameter("n_iterations must be >= 1".into()));
        }
        if let Variant::Fillup { gamma } = self.variant {
            if !gamma.is_finite() {
                return Err(Error::InvalidParameter("fill-up gamma must be finite".into()));
            }
        }
        self.cost_params.validate()?;
        self.model_spec.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    /// Labels that differ from the previous iteration (`None` on the first).
    pub label_changes: Option<usize>,
    pub transfer_accuracy: Option<f64>,
    pub model_accuracy: Option<f64>,
    /// Largest KKT violation of the iteration's model on its training labels.
    pub kkt_violation: f64,
    pub converged: bool,
    pub labels: Vec<Label>,
}

/// How raw target features become the model's inputs: the fitted
/// standardization of each role, and whether the extras are used at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub common: Option<Standardizer>,
    pub extra: Option<Standardizer>,
    pub use_extra: bool,
}

impl FeatureMap {
    pub fn apply(&self, target: &Dataset) -> Result<Array2<f64>> {
        let apply = |s: &Option<Standardizer>, x: Array2<f64>| match s {
            Some(s) => s.transform(&x),
            None => Ok(x),
        };
        let tc = apply(&self.common, target.common())?;
        if !self.use_extra {
            return Ok(tc);
        }
        let te = apply(&self.extra, target.extra())?;
        Ok(concatenate(Axis(1), &[tc.view(), te.view()]).expect("same row count"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub plan: TransportPlan,
    pub transferred_labels: Vec<Label>,
    pub model: Classifier,
    pub predictions: Vec<Label>,
    pub trace: Vec<IterationRecord>,
    pub stopped_early: bool,
    pub feature_map: FeatureMap,
}

impl RunResult {
    pub fn transfer_accuracy(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.transfer_accuracy)
    }

    pub fn model_accuracy(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.model_accuracy)
    }

    /// Decision values of the final model on raw target-domain samples.
    pub fn decision_values(&self, target: &Dataset) -> Result<Vec<f64>> {
        decision_values(&self.model, &self.feature_map.apply(target)?)
    }

    /// Final-model classes, in the source's class ids, for raw target samples.
    pub fn predict(&self, target: &Dataset) -> Result<Vec<Label>> {
        predict(&self.model, &self.feature_map.apply(target)?)
    }
}

/// What an observer sees after each OT solve.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub cost: &'a CostMatrix,
    pub plan: &'a TransportPlan,
    pub labels: &'a [Label],
}

/// True when the last two iterations transferred identical labels.
pub fn early_stop_check(trace: &[IterationRecord]) -> bool {
    match trace {
        [.., prev, last] => prev.labels == last.labels,
        _ => false,
    }
}

pub fn run(source: &Dataset, target: &Dataset, config: &RunConfig, truth: Option<&[Label]>) -> Result<RunResult> {
    run_observed(source, target, config, truth, |_| {})
}

struct Prepared {
    /// OT features on each side.
    ot_source: Array2<f64>,
    ot_target: Array2<f64>,
    /// Target features the model is trained on.
    train_target: Array2<f64>,
    train_roles: Vec<FeatureRole>,
    /// OT costs over the common features only (the label term is added on top).
    common_only: bool,
    feature_map: FeatureMap,
}

fn prepare(source: &Dataset, target: &Dataset, config: &RunConfig) -> Result<Prepared> {
    let (sc, tc) = (source.common(), target.common());
    if sc.ncols() != tc.ncols() {
        return Err(Error::Dimension(format!(
            "source has {} common features, target has {}",
            sc.ncols(),
            tc.ncols()
        )));
    }
    let te = target.extra();
    let n_extra = te.ncols();

    let (common, extra) = if config.standardize {
        (Some(Standardizer::fit(&[&sc, &tc])?), Some(Standardizer::fit(&[&te])?))
    } else {
        (None, None)
    };
    let apply = |s: &Option<Standardizer>, x: Array2<f64>| match s {
        Some(s) => s.transform(&x),
        None => Ok(x),
    };
    let se = if config.variant == Variant::JdotIdeal {
        Some(apply(&extra, source.extra())?)
    } else {
        None
    };
    let (sc, tc, te) = (apply(&common, sc)?, apply(&common, tc)?, apply(&extra, te)?);
    let feature_map = FeatureMap {
        common,
        extra,
        use_extra: config.variant != Variant::JdotNoExtra,
    };

    let target_full = concatenate(Axis(1), &[tc.view(), te.view()]).expect("same row count");
    let full_roles: Vec<FeatureRole> = std::iter::repeat(FeatureRole::Common)
        .take(tc.ncols())
        .chain(std::iter::repeat(FeatureRole::Extra).take(n_extra))
        .collect();

    let prepared = match config.variant {
        Variant::Proposed => Prepared {
            ot_source: sc,
            ot_target: tc,
            train_target: target_full,
            train_roles: full_roles,
            common_only: true,
            feature_map: feature_map.clone(),
        },
        Variant::JdotNoExtra => Prepared {
            ot_source: sc,
            train_target: tc.clone(),
            train_roles: vec![FeatureRole::Common; tc.ncols()],
            ot_target: tc,
            common_only: true,
            feature_map: feature_map.clone(),
        },
        Variant::JdotIdeal => {
            let se = se.expect("computed for the ideal variant");
            if se.ncols() != n_extra {
                return Err(Error::Dimension(format!(
                    "jdot-ideal needs the source extras: source has {} extra features, target has {n_extra}",
                    se.ncols()
                )));
            }
            Prepared {
                ot_source: concatenate(Axis(1), &[sc.view(), se.view()]).expect("same row count"),
                ot_target: target_full.clone(),
                train_target: target_full,
                train_roles: full_roles,
                common_only: false,
                feature_map: feature_map.clone(),
            }
        }
        Variant::Fillup { gamma } => {
            // the constant lives in raw units; map it like the target extras
            let gamma: Vec<f64> = match &feature_map.extra {
                Some(extra) => (0..n_extra).map(|k| extra.transform_value(k, gamma)).collect(),
                None => vec![gamma; n_extra],
            };
            let mut filled = fill_up(&sc, n_extra, 0.0);
            for (k, g) in gamma.iter().enumerate() {
                filled.column_mut(sc.ncols() + k).fill(*g);
            }
            Prepared {
                ot_source: filled,
                ot_target: target_full.clone(),
                train_target: target_full,
                train_roles: full_roles,
                common_only: false,
                feature_map: feature_map.clone(),
            }
        }
    };
    Ok(prepared)
}

pub fn run_observed<F>(
    source: &Dataset,
    target: &Dataset,
    config: &RunConfig,
    truth: Option<&[Label]>,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(&IterationView<'_>),
{
    config.validate()?;
    let source_labels = source
        .labels()
        .ok_or_else(|| Error::Label(format!("source dataset `{}` has no labels", source.name)))?;
    let classes = class_ids(source_labels);
    if classes.len() > 2 {
        return Err(Error::Label(format!(
            "binary adaptation only; source has classes {classes:?}"
        )));
    }
    if let Some(t) = truth {
        if t.len() != target.n_samples() {
            return Err(Error::Dimension(format!(
                "{} truth labels for {} target samples",
                t.len(),
                target.n_samples()
            )));
        }
    }

    // internal ±1 encoding: the larger class id is positive
    let positive = *classes.last().expect("non-empty");
    let encode = |l: &Label| if *l == positive { 1 } else { -1 };
    let decode = |s: Label| if s > 0 { positive } else { classes[0] };
    let ys: Vec<Label> = source_labels.iter().map(encode).collect();
    let signs = [-1, 1];

    let prep = prepare(source, target, config)?;
    let params = &config.cost_params;

    let mut trace: Vec<IterationRecord> = Vec::with_capacity(config.n_iterations);
    let mut model: Option<Classifier> = None;
    let mut last_plan = None;
    let mut stopped_early = false;

    // the same seeds every iteration, so repeated labels give a true fixed point
    let tie_seed = substream(config.seed, stream::TIE_BREAK, 0);
    let smo_seed = substream(config.seed, stream::SMO, 0);
    for iteration in 1..=config.n_iterations {
        let cost = match &model {
            None => initial_cost(&prep.ot_source, &prep.ot_target, params)?,
            Some(m) => {
                let f = decision_values(m, &prep.train_target)?;
                let classes_pred: Vec<Label>;
                let pseudo = if params.label_loss == LabelLoss::HingeOnDecisionValue {
                    PseudoLabels::DecisionValues(&f)
                } else {
                    classes_pred = predict(m, &prep.train_target)?.into_iter().map(|l| if l > 0 { 1 } else { -1 }).collect();
                    PseudoLabels::Classes(&classes_pred)
                };
                if prep.common_only {
                    joint_cost(&prep.ot_source, &ys, &prep.ot_target, pseudo, params)?
                } else {
                    ideal_cost(&prep.ot_source, &ys, &prep.ot_target, pseudo, params)?
                }
            }
        };
        let plan = solve_ot(&cost);
        let soft = soft_transfer(&plan, &ys, &signs)?;
        let hard = hard_labels(&soft, tie_seed);
        observe(&IterationView {
            iteration,
            cost: &cost,
            plan: &plan,
            labels: &hard,
        });

        let m = train(
            &prep.train_target,
            &prep.train_roles,
            &hard,
            &config.model_spec,
            smo_seed,
        )?;
        // degenerate single-class models keep the ±1 encoding meaningful for hinge
        let labels: Vec<Label> = hard.iter().map(|&s| decode(s)).collect();
        let predictions: Vec<Label> = predict(&m, &prep.train_target)?.into_iter().map(decode).collect();
        let label_changes = trace
            .last()
            .map(|prev| prev.labels.iter().zip(&labels).filter(|(a, b)| a != b).count());
        trace.push(IterationRecord {
            iteration,
            objective: plan.objective,
            label_changes,
            transfer_accuracy: truth.map(|t| accuracy(&labels, t)),
            model_accuracy: truth.map(|t| accuracy(&predictions, t)),
            kkt_violation: kkt_violation(&m, &prep.train_target, &hard)?,
            converged: m.converged,
            labels,
        });
        model = Some(m);
        last_plan = Some(plan);
        if config.early_stop && early_stop_check(&trace) {
            stopped_early = iteration < config.n_iterations;
            break;
        }
    }

    let mut model = model.expect("at least one iteration");
    // report the model in the caller's class ids
    model.class_ids = model.class_ids.iter().map(|&s| decode(s)).collect();
    let predictions = predict(&model, &prep.train_target)?;
    let transferred_labels = trace.last().expect("non-empty").labels.clone();
    Ok(RunResult {
        config: config.clone(),
        plan: last_plan.expect("at least one iteration"),
        transferred_labels,
        model,
        predictions,
        trace,
        stopped_early,
        feature_map: prep.feature_map,
    })
}

/// Source-only model on the common features, evaluated on the target:
/// the no-adaptation reference.
pub fn baseline_predictions(source: &Dataset, target: &Dataset, config: &RunConfig) -> Result<Vec<Label>> {
    config.validate()?;
    let labels = source
        .labels()
        .ok_or_else(|| Error::Label(format!("source dataset `{}` has no labels", source.name)))?;
    let (sc, tc) = (source.common(), target.common());
    if sc.ncols() != tc.ncols() {
        return Err(Error::Dimension(format!(
            "source has {} common features, target has {}",
            sc.ncols(),
            tc.ncols()
        )));
    }
    let (sc, tc) = if config.standardize {
        let common = Standardizer::fit(&[&sc, &tc])?;
        (common.transform(&sc)?, common.transform(&tc)?)
    } else {
        (sc, tc)
    };
    let roles = vec![FeatureRole::Common; sc.ncols()];
    let model = train(&sc, &roles, labels, &config.model_spec, substream(config.seed, stream::SMO, 0))?;
    predict(&model, &tc)
}

/// Model accuracies of every method on one source/target pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub source: String,
    pub target: String,
    pub baseline: f64,
    pub jdot_no_extra: f64,
    pub proposed: f64,
    /// Only when the source carries the same extra features as the target.
    pub jdot_ideal: Option<f64>,
}

/// Runs the baseline and the adaptation variants with `config` (its variant
/// is overridden) and scores the final models against `truth`.
pub fn compare_pair(source: &Dataset, target: &Dataset, truth: &[Label], config: &RunConfig) -> Result<PairReport> {
    let score = |variant: Variant| -> Result<f64> {
        let cfg = RunConfig {
            variant,
            ..config.clone()
        };
        let r = run(source, target, &cfg, Some(truth))?;
        Ok(r.model_accuracy().expect("truth was given"))
    };
    let baseline = accuracy_report(&baseline_predictions(source, target, config)?, truth)?.accuracy;
    let ideal_possible = target.n_extra() > 0 && source.n_extra() == target.n_extra();
    Ok(PairReport {
        source: source.name.clone(),
        target: target.name.clone(),
        baseline,
        jdot_no_extra: score(Variant::JdotNoExtra)?,
        proposed: score(Variant::Proposed)?,
        jdot_ideal: if ideal_possible { Some(score(Variant::JdotIdeal)?) } else { None },
    })
}
