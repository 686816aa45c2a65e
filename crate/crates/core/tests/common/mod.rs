//! Brute-force reference solutions shared by the integration tests.

#![allow(dead_code)]

use daevs::labeling::Label;
use daevs::models::ModelKind;
use ndarray::Array2;

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp()
}

pub fn linear(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean projection onto `{0 <= a <= c, yᵀa = 0}` by bisection on the
/// multiplier of the equality constraint.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g is non-increasing in mu
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximises `sum a - 1/2 aᵀQa` over the SVM dual feasible set.
pub fn dual_oracle(q: &Array2<f64>, y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let lipschitz = q.rows().into_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(1e-12, f64::max);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; n];
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q[(i, j)];
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    for _ in 0..200_000 {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[(i, j)] * a[j]).sum::<f64>()).collect();
        let next = project(&a.iter().zip(&grad).map(|(ai, gi)| ai + step * gi).collect::<Vec<_>>(), y, c);
        let moved = next.iter().zip(&a).map(|(x, z)| (x - z).abs()).fold(0.0, f64::max);
        a = next;
        if moved < 1e-13 {
            break;
        }
    }
    objective(&a)
}

pub fn gram(x: &Array2<f64>, labels: &[Label], kind: ModelKind, gamma: f64) -> Array2<f64> {
    let n = x.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let (a, b) = (x.row(i).to_vec(), x.row(j).to_vec());
        let k = match kind {
            ModelKind::SvmRbf => rbf(&a, &b, gamma),
            ModelKind::SvmLinear => linear(&a, &b),
        };
        (labels[i] * labels[j]) as f64 * k
    })
}

/// Minimum of `(1/n) sum_i cost[i, perm(i)]` over all permutations. For equal
/// sample sizes with uniform weights an optimal coupling is a permutation
/// (Birkhoff), so this is the exact OT value.
pub fn assignment_oracle(cost: &Array2<f64>) -> f64 {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment oracle needs a square cost");
    assert!(n <= 8, "assignment oracle is exponential");
    fn search(cost: &Array2<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        let n = cost.nrows();
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                search(cost, row + 1, used, acc + cost[(row, j)], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    search(cost, 0, &mut vec![false; n], 0.0, &mut best);
    best / n as f64
}

/// `alpha |a - b|^2 + hinge` for `±1` labels, where the second label plays the
/// decision value: the label term is 0 on agreement and 2 otherwise.
pub fn joint_hinge_cost(a: &Array2<f64>, ya: &[Label], b: &Array2<f64>, yb: &[Label], alpha: f64) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
        let d: f64 = a.row(i).iter().zip(b.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
        let hinge = (1.0 - (ya[i] * yb[j]) as f64).max(0.0);
        alpha * d + hinge
    })
}
