//! Binary kernel SVM trained by sequential minimal optimization.
//!
//! The solver works on the dual
//!
//! ```text
//! min_a  1/2 aᵀQa - 1ᵀa   s.t.  0 <= a_i <= C,  yᵀa = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! picking at every step the maximal violating pair (first-order working set
//! selection) and stopping once the violation gap drops below `tol`.

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::FeatureRole;
use crate::error::{Error, Result};
use crate::labeling::{class_ids, Label};
use crate::rng::{rng_for, stream};

pub const MODEL_FORMAT: &str = "daevs-classifier";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SvmRbf,
    SvmLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub c_reg: f64,
    /// RBF bandwidth; `None` means `1 / (n_features * var(features))`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Update budget, in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::SvmRbf,
            c_reg: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_reg > 0.0 && self.c_reg.is_finite()) {
            return Err(Error::InvalidParameter(format!("c_reg must be > 0, got {}", self.c_reg)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!("gamma must be > 0, got {g}")));
            }
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidParameter("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// `sup_x K(x, x)`; the RBF kernel is bounded by 1, the linear one is not.
pub fn kernel_bound(kind: ModelKind) -> Option<f64> {
    match kind {
        ModelKind::SvmRbf => Some(1.0),
        ModelKind::SvmLinear => None,
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Rbf(f64),
    Linear,
}

impl Kernel {
    fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            Kernel::Rbf(gamma) => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => a.dot(&b),
        }
    }
}

/// Trained decision function `f(x) = sum_i a_i y_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub format: String,
    pub version: u32,
    /// Spec with `gamma` resolved.
    pub spec: ModelSpec,
    /// `[negative, positive]`, or a single class when degenerate.
    pub class_ids: Vec<Label>,
    pub feature_roles: Vec<FeatureRole>,
    pub support_vectors: Array2<f64>,
    /// Training-set row of each support vector.
    pub support_indices: Vec<usize>,
    /// Dual variables in `[0, c_reg]`.
    pub alphas: Vec<f64>,
    /// `±1` encoding of each support vector's class.
    pub support_signs: Vec<f64>,
    pub bias: f64,
    pub degenerate: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl Classifier {
    fn kernel(&self) -> Kernel {
        match self.spec.kind {
            ModelKind::SvmRbf => Kernel::Rbf(self.spec.gamma.unwrap_or(1.0)),
            ModelKind::SvmLinear => Kernel::Linear,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_roles.len()
    }

    /// Dual objective `sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij` (maximisation form).
    pub fn dual_objective(&self) -> f64 {
        let k = self.kernel();
        let coef: Vec<f64> = self.alphas.iter().zip(&self.support_signs).map(|(a, y)| a * y).collect();
        let mut quad = 0.0;
        for (i, xi) in self.support_vectors.rows().into_iter().enumerate() {
            for (j, xj) in self.support_vectors.rows().into_iter().enumerate() {
                quad += coef[i] * coef[j] * k.eval(xi, xj);
            }
        }
        self.alphas.iter().sum::<f64>() - 0.5 * quad
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Classifier = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model document {} v{}",
                model.format, model.version
            )));
        }
        Ok(model)
    }
}

fn check_features(features: &Array2<f64>) -> Result<()> {
    if let Some(((r, c), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("training features row {r} column {c}")));
    }
    Ok(())
}

/// `1 / (d * var)` with the variance taken over every feature entry.
pub fn default_gamma(features: &Array2<f64>) -> f64 {
    let n = features.len() as f64;
    if n == 0.0 {
        return 1.0;
    }
    let mean = features.sum() / n;
    let var = features.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let d = features.ncols().max(1) as f64;
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0 / d
    }
}

pub fn train(
    features: &Array2<f64>,
    roles: &[FeatureRole],
    labels: &[Label],
    spec: &ModelSpec,
    seed: u64,
) -> Result<Classifier> {
    spec.validate()?;
    let (n, d) = features.dim();
    if roles.len() != d {
        return Err(Error::Dimension(format!("{d} feature columns but {} roles", roles.len())));
    }
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} samples", labels.len())));
    }
    if n == 0 {
        return Err(Error::Dimension("empty training set".into()));
    }
    check_features(features)?;

    let mut resolved = *spec;
    if resolved.kind == ModelKind::SvmRbf && resolved.gamma.is_none() {
        resolved.gamma = Some(default_gamma(features));
    }
    let classes = class_ids(labels);
    let base = Classifier {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        spec: resolved,
        class_ids: classes.clone(),
        feature_roles: roles.to_vec(),
        support_vectors: Array2::zeros((0, d)),
        support_indices: Vec::new(),
        alphas: Vec::new(),
        support_signs: Vec::new(),
        bias: 1.0,
        degenerate: true,
        converged: true,
        iterations: 0,
    };
    match classes.len() {
        1 => return Ok(base),
        2 => {}
        k => {
            return Err(Error::Label(format!(
                "binary classifier got {k} classes {classes:?}"
            )))
        }
    }

    let y: Vec<f64> = labels
        .iter()
        .map(|l| if *l == classes[1] { 1.0 } else { -1.0 })
        .collect();
    let kernel = match resolved.kind {
        ModelKind::SvmRbf => Kernel::Rbf(resolved.gamma.unwrap_or(1.0)),
        ModelKind::SvmLinear => Kernel::Linear,
    };
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = y[i] * y[j] * kernel.eval(features.row(i), features.row(j));
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, stream::SMO, 0));
    let max_iter = resolved.max_passes.saturating_mul(n.max(100));
    let sol = smo(&q, &y, resolved.c_reg, resolved.tol, max_iter, &order);

    let support_indices: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(Classifier {
        support_vectors: features.select(Axis(0), &support_indices),
        alphas: support_indices.iter().map(|&i| sol.alpha[i]).collect(),
        support_signs: support_indices.iter().map(|&i| y[i]).collect(),
        support_indices,
        bias: -sol.rho,
        degenerate: false,
        converged: sol.converged,
        iterations: sol.iterations,
        ..base
    })
}

struct SmoSolution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
}

fn smo(q: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize, order: &[usize]) -> SmoSolution {
    const TAU: f64 = 1e-12;
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // maximal violating pair; first hit in the seeded order wins ties
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for &t in order {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qi = &q[i * n..(i + 1) * n];
        let qj = &q[j * n..(j + 1) * n];
        if y[i] != y[j] {
            let quad = (qi[i] + qj[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qi[i] + qj[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for k in 0..n {
            grad[k] += qi[k] * di + qj[k] * dj;
        }
    }

    // offset: average over free variables, else the middle of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    SmoSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

pub fn decision_values(model: &Classifier, features: &Array2<f64>) -> Result<Vec<f64>> {
    if features.ncols() != model.n_features() {
        return Err(Error::Dimension(format!(
            "model trained on {} features, got {}",
            model.n_features(),
            features.ncols()
        )));
    }
    if model.degenerate {
        return Ok(vec![model.bias; features.nrows()]);
    }
    let kernel = model.kernel();
    let coef: Vec<f64> = model
        .alphas
        .iter()
        .zip(&model.support_signs)
        .map(|(a, y)| a * y)
        .collect();
    Ok(features
        .rows()
        .into_iter()
        .map(|x| {
            model
                .support_vectors
                .rows()
                .into_iter()
                .zip(&coef)
                .map(|(sv, c)| c * kernel.eval(sv, x))
                .sum::<f64>()
                + model.bias
        })
        .collect())
}

/// Sign of the decision value mapped to a class; zero goes to the positive class.
pub fn predict(model: &Classifier, features: &Array2<f64>) -> Result<Vec<Label>> {
    let f = decision_values(model, features)?;
    Ok(f.into_iter()
        .map(|v| {
            if model.degenerate {
                model.class_ids[0]
            } else if v >= 0.0 {
                model.class_ids[1]
            } else {
                model.class_ids[0]
            }
        })
        .collect())
}

/// Largest KKT violation of `model` on its own training set, measured on
/// `y_i f(x_i)` against the margin conditions for zero, free and bounded duals.
pub fn kkt_violation(model: &Classifier, features: &Array2<f64>, labels: &[Label]) -> Result<f64> {
    if model.degenerate {
        return Ok(0.0);
    }
    let f = decision_values(model, features)?;
    let mut alpha = vec![0.0; features.nrows()];
    for (&i, &a) in model.support_indices.iter().zip(&model.alphas) {
        alpha[i] = a;
    }
    let c = model.spec.c_reg;
    let mut worst: f64 = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        let y = if l == model.class_ids[1] { 1.0 } else { -1.0 };
        let margin = y * f[i];
        let v = if alpha[i] <= 0.0 {
            1.0 - margin
        } else if alpha[i] >= c {
            margin - 1.0
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
