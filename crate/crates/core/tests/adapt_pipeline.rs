//! End-to-end behaviour of the alternating OT / training loop.

use daevs::adapt::{early_stop_check, run, run_observed, RunConfig, Variant};
use daevs::costs::{fill_up, ideal_cost, joint_cost, CostParams, PseudoLabels};
use daevs::data::{generate, Dataset, FeatureRole, SyntheticSpec};
use daevs::labeling::Label;
use daevs::transport::{oracle_ot, solve_ot};
use ndarray::{concatenate, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT: f64 = 1e-9;

struct Instance {
    source: Dataset,
    target: Dataset,
    truth: Vec<Label>,
}

/// Small random problem with one common and one extra feature.
fn instance(seed: u64, n_source: usize, n_target: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = |i: usize| if i % 2 == 0 { 1 } else { -1 };
    let xs = Array2::from_shape_fn((n_source, 1), |(i, _)| label(i) as f64 * 0.8 + rng.gen_range(-1.0..1.0));
    let ys: Vec<Label> = (0..n_source).map(label).collect();
    let xt = Array2::from_shape_fn((n_target, 2), |(i, k)| {
        let y = label(i) as f64;
        if k == 0 {
            y * 0.8 + rng.gen_range(-1.0..1.0) + 0.3
        } else {
            -y * 0.5 + rng.gen_range(-0.6..0.6)
        }
    });
    Instance {
        source: Dataset::new("s", xs, Some(ys), vec![FeatureRole::Common]).unwrap(),
        target: Dataset::new("t", xt, None, vec![FeatureRole::Common, FeatureRole::Extra]).unwrap(),
        truth: (0..n_target).map(label).collect(),
    }
}

#[test]
fn recorded_objectives_are_exact_optima() {
    for seed in 0..10 {
        let inst = instance(seed, 4, 2);
        let config = RunConfig {
            n_iterations: 4,
            seed,
            ..Default::default()
        };
        let mut checked = 0;
        let result = run_observed(&inst.source, &inst.target, &config, Some(&inst.truth), |view| {
            let oracle = oracle_ot(view.cost).unwrap();
            assert!((view.plan.objective - oracle.objective).abs() <= EXACT);
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, result.trace.len());
    }
}

#[test]
fn fill_up_and_cutoff_plans_have_equal_joint_cost() {
    let params = CostParams::default();
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (ns, nt) = (rng.gen_range(2..12), rng.gen_range(2..8));
        let sc = Array2::from_shape_fn((ns, 1), |_| rng.gen_range(-2.0..2.0));
        let tc = Array2::from_shape_fn((nt, 1), |_| rng.gen_range(-2.0..2.0));
        let te = Array2::from_shape_fn((nt, 2), |_| rng.gen_range(-2.0..2.0));
        let ys: Vec<Label> = (0..ns).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let f: Vec<f64> = (0..nt).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let cutoff = joint_cost(&sc, &ys, &tc, PseudoLabels::DecisionValues(&f), &params).unwrap();
        let cut_plan = solve_ot(&cutoff);
        let target_full = concatenate(Axis(1), &[tc.view(), te.view()]).unwrap();
        for gamma in [-10.0, 0.0, 1.0, 17.3] {
            let filled = fill_up(&sc, 2, gamma);
            let full = ideal_cost(&filled, &ys, &target_full, PseudoLabels::DecisionValues(&f), &params).unwrap();
            let fill_plan = solve_ot(&full);
            let a = cutoff.objective(&cut_plan.values);
            let b = cutoff.objective(&fill_plan.values);
            assert!((a - b).abs() <= EXACT, "seed {seed} gamma {gamma}: {a} vs {b}");
        }
    }
}

#[test]
fn fill_up_runs_transfer_the_same_labels_as_proposed() {
    for seed in 0..50 {
        let inst = instance(seed, 20, 10);
        let base = RunConfig {
            n_iterations: 4,
            seed,
            ..Default::default()
        };
        let proposed = run(&inst.source, &inst.target, &base, None).unwrap();
        for gamma in [-10.0, 0.0, 1.0, 17.3] {
            let config = RunConfig {
                variant: Variant::Fillup { gamma },
                ..base.clone()
            };
            let filled = run(&inst.source, &inst.target, &config, None).unwrap();
            for (a, b) in proposed.trace.iter().zip(&filled.trace) {
                assert_eq!(a.labels, b.labels, "seed {seed} gamma {gamma} iteration {}", a.iteration);
            }
        }
    }
}

#[test]
fn no_extra_baseline_equals_proposed_without_extras() {
    let data = generate(&SyntheticSpec {
        n_source: 200,
        n_target: 40,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let target = data.target.common_only();
    let a = run(&data.source, &target, &RunConfig::synthetic(Variant::Proposed, 3), None).unwrap();
    let b = run(&data.source, &target, &RunConfig::synthetic(Variant::JdotNoExtra, 3), None).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.predictions, b.predictions);
}

#[test]
fn early_stop_reaches_the_fixed_point_of_the_full_run() {
    let data = generate(&SyntheticSpec {
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let fixed = RunConfig::synthetic(Variant::Proposed, 5);
    let early = RunConfig {
        early_stop: true,
        ..fixed.clone()
    };
    let a = run(&data.source, &data.target, &fixed, Some(&data.target_truth)).unwrap();
    let b = run(&data.source, &data.target, &early, Some(&data.target_truth)).unwrap();
    assert!(early_stop_check(&b.trace));
    let stop = b.trace.len();
    assert!(!early_stop_check(&a.trace[..stop - 1]));
    assert_eq!(a.transfer_accuracy(), b.transfer_accuracy());
    assert_eq!(a.model_accuracy(), b.model_accuracy());
}

#[test]
fn runs_are_deterministic_per_seed() {
    let data = generate(&SyntheticSpec {
        n_source: 300,
        n_target: 30,
        seed: 11,
        ..Default::default()
    })
    .unwrap();
    let config = RunConfig::synthetic(Variant::Proposed, 11);
    let a = run(&data.source, &data.target, &config, Some(&data.target_truth)).unwrap();
    let b = run(&data.source, &data.target, &config, Some(&data.target_truth)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trace_reports_label_changes_and_accuracies() {
    let inst = instance(4, 30, 10);
    let r = run(&inst.source, &inst.target, &RunConfig::default(), Some(&inst.truth)).unwrap();
    assert_eq!(r.trace.len(), 10);
    assert_eq!(r.trace[0].label_changes, None);
    for w in r.trace.windows(2) {
        let changed = w[0].labels.iter().zip(&w[1].labels).filter(|(a, b)| a != b).count();
        assert_eq!(w[1].label_changes, Some(changed));
    }
    for rec in &r.trace {
        assert!(rec.transfer_accuracy.is_some() && rec.model_accuracy.is_some());
    }
    assert!(r.plan.marginal_error() <= EXACT);
    assert_eq!(r.transferred_labels, r.trace.last().unwrap().labels);
}

#[test]
fn stored_feature_map_reproduces_predictions() {
    let data = generate(&SyntheticSpec {
        n_source: 200,
        n_target: 50,
        seed: 9,
        ..Default::default()
    })
    .unwrap();
    for (source, variant) in [
        (&data.source, Variant::Proposed),
        (&data.source, Variant::JdotNoExtra),
        (&data.source_full(), Variant::JdotIdeal),
    ] {
        let r = run(source, &data.target, &RunConfig::synthetic(variant, 9), None).unwrap();
        assert_eq!(r.predict(&data.target).unwrap(), r.predictions, "{}", variant.name());
        let back: daevs::adapt::RunResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.decision_values(&data.target).unwrap(), r.decision_values(&data.target).unwrap());
    }
}

#[test]
fn original_class_ids_are_preserved() {
    let inst = instance(8, 12, 6);
    let relabel = |y: &Label| if *y == 1 { 7 } else { 3 };
    let labels: Vec<Label> = inst.source.labels().unwrap().iter().map(relabel).collect();
    let source = Dataset::new("s", inst.source.features.clone(), Some(labels), vec![FeatureRole::Common]).unwrap();
    let r = run(&source, &inst.target, &RunConfig::default(), None).unwrap();
    assert!(r.transferred_labels.iter().all(|l| *l == 3 || *l == 7));
    assert!(r.predictions.iter().all(|l| *l == 3 || *l == 7));
    assert_eq!(r.model.class_ids, vec![3, 7]);
}

#[test]
fn zero_one_and_squared_losses_run() {
    use daevs::costs::LabelLoss;
    let inst = instance(2, 20, 10);
    for loss in [LabelLoss::ZeroOne, LabelLoss::Squared] {
        let config = RunConfig {
            cost_params: CostParams {
                label_loss: loss,
                ..Default::default()
            },
            n_iterations: 3,
            ..Default::default()
        };
        let r = run(&inst.source, &inst.target, &config, Some(&inst.truth)).unwrap();
        assert_eq!(r.trace.len(), 3);
    }
}

#[test]
fn pair_report_scores_every_method() {
    use daevs::adapt::compare_pair;
    let data = generate(&SyntheticSpec {
        n_source: 150,
        n_target: 40,
        seed: 6,
        ..Default::default()
    })
    .unwrap();
    let config = RunConfig::synthetic(Variant::Proposed, 6);
    let full = compare_pair(&data.source_full(), &data.target, &data.target_truth, &config).unwrap();
    let common = compare_pair(&data.source, &data.target, &data.target_truth, &config).unwrap();
    assert!(full.jdot_ideal.is_some());
    assert_eq!(common.jdot_ideal, None);
    assert_eq!((full.baseline, full.proposed), (common.baseline, common.proposed));
    let proposed = run(&data.source, &data.target, &config, Some(&data.target_truth)).unwrap();
    assert_eq!(Some(full.proposed), proposed.model_accuracy());
    assert!(compare_pair(&data.source, &data.target, &data.target_truth[1..], &config).is_err());
}
