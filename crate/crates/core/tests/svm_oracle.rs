//! The SMO solver checked against a dense projected-gradient solution of the
//! same dual problem on small fixtures.

use daevs::data::FeatureRole;
use daevs::labeling::Label;
use daevs::models::{decision_values, kkt_violation, predict, train, ModelKind, ModelSpec};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{dual_oracle, gram};

const DUAL_TOLERANCE: f64 = 1e-6;

fn check(x: &Array2<f64>, labels: &[Label], spec: ModelSpec) {
    let tight = ModelSpec { tol: 1e-9, ..spec };
    let roles = vec![FeatureRole::Common; x.ncols()];
    let model = train(x, &roles, labels, &tight, 7).unwrap();
    assert!(model.converged);
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let expected = dual_oracle(&gram(x, labels, spec.kind, model.spec.gamma.unwrap_or(1.0)), &y, spec.c_reg);
    let got = model.dual_objective();
    assert!(
        (got - expected).abs() <= DUAL_TOLERANCE,
        "dual objective {got} vs oracle {expected}"
    );
}

#[test]
fn xor_matches_oracle_and_separates() {
    let x = array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
    let y = vec![1, -1, -1, 1];
    let spec = ModelSpec {
        gamma: Some(1.0),
        c_reg: 10.0,
        ..Default::default()
    };
    check(&x, &y, spec);
    let model = train(&x, &[FeatureRole::Common; 2], &y, &spec, 0).unwrap();
    assert_eq!(predict(&model, &x).unwrap(), y);
    let f = decision_values(&model, &x).unwrap();
    assert!(f[0] > 0.0 && f[1] < 0.0 && f[2] < 0.0 && f[3] > 0.0);
}

#[test]
fn random_small_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=3);
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let mut y: Vec<Label> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        y[0] = 1;
        y[1] = -1;
        let kind = if case % 3 == 0 { ModelKind::SvmLinear } else { ModelKind::SvmRbf };
        let spec = ModelSpec {
            kind,
            c_reg: [0.1, 1.0, 10.0][case % 3],
            gamma: Some(rng.gen_range(0.2..2.0)),
            ..Default::default()
        };
        check(&x, &y, spec);
    }
}

#[test]
fn kkt_holds_at_default_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 60;
    let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
    let y: Vec<Label> = x.rows().into_iter().map(|r| if r[0] + 0.3 * r[1] > 0.0 { 1 } else { -1 }).collect();
    let spec = ModelSpec::default();
    let model = train(&x, &[FeatureRole::Common; 2], &y, &spec, 3).unwrap();
    assert!(model.converged);
    assert!(kkt_violation(&model, &x, &y).unwrap() <= spec.tol);
    for (a, _) in model.alphas.iter().zip(&model.support_signs) {
        assert!(*a >= 0.0 && *a <= spec.c_reg);
    }
}

#[test]
fn prediction_invariant_to_sample_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 40;
    let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-2.0..2.0));
    let y: Vec<Label> = x.rows().into_iter().map(|r| if r[0] * r[1] > 0.0 { 1 } else { -1 }).collect();
    let spec = ModelSpec {
        gamma: Some(1.0),
        c_reg: 10.0,
        tol: 1e-6,
        ..Default::default()
    };
    let roles = [FeatureRole::Common; 2];
    let base = train(&x, &roles, &y, &spec, 1).unwrap();
    let order: Vec<usize> = (0..n).rev().collect();
    let xr = x.select(ndarray::Axis(0), &order);
    let yr: Vec<Label> = order.iter().map(|&i| y[i]).collect();
    let rev = train(&xr, &roles, &yr, &spec, 1).unwrap();
    let grid = Array2::from_shape_fn((200, 2), |_| rng.gen_range(-2.0..2.0));
    let (fa, fb) = (decision_values(&base, &grid).unwrap(), decision_values(&rev, &grid).unwrap());
    for (a, b) in fa.iter().zip(&fb) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn separable_set_has_zero_hinge_loss_at_large_c() {
    let x = array![[0.0, 0.0], [0.2, 0.1], [2.0, 2.0], [2.2, 1.9], [0.1, 0.3], [1.9, 2.2]];
    let y = vec![-1, -1, 1, 1, -1, 1];
    let spec = ModelSpec {
        kind: ModelKind::SvmLinear,
        c_reg: 1e6,
        tol: 1e-8,
        ..Default::default()
    };
    let model = train(&x, &[FeatureRole::Common; 2], &y, &spec, 0).unwrap();
    let f = decision_values(&model, &x).unwrap();
    for (fi, yi) in f.iter().zip(&y) {
        assert!((1.0 - *yi as f64 * fi).max(0.0) < 1e-6);
    }
}
