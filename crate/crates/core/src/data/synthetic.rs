//! Two-domain synthetic problems with one common and one extra feature.
//!
//! `Cosine`: the labelling function is `F(x_c, x_e) = cos(x_c) - x_e`. The
//! common feature of each class is Gaussian, the two class means `separation`
//! apart around `center`, so the classes overlap on the common axis. The extra
//! feature sits `margin` away from the curve on the class side, plus Gaussian
//! noise. The target domain moves each class along the common axis by
//! `class_shift` before the extra feature is drawn, so both domains share the
//! labelling function.
//!
//! `Spiral`: two interleaved arcs whose separating curve is not linear in the
//! extra feature. It uses only `class_shift` and `noise_scale`.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureRole};
use crate::error::{Error, Result};
use crate::labeling::Label;
use crate::rng::{rng_for, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Cosine,
    Spiral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub geometry: Geometry,
    pub n_source: usize,
    pub n_target: usize,
    /// Target-domain offset on the common axis, `[negative, positive]`.
    pub class_shift: Vec<f64>,
    pub noise_scale: f64,
    /// Distance of the class means from the decision curve.
    pub margin: f64,
    /// Midpoint of the two class means on the common axis.
    pub center: f64,
    /// Distance between the class means on the common axis (positive left).
    pub separation: f64,
    /// Standard deviation of the common feature within a class.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            geometry: Geometry::Cosine,
            n_source: 1000,
            n_target: 100,
            class_shift: vec![0.0, 0.5],
            noise_scale: 0.1,
            margin: 0.4,
            center: PI,
            separation: 1.8,
            spread: 0.8,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn spiral() -> Self {
        SyntheticSpec {
            geometry: Geometry::Spiral,
            class_shift: vec![0.0, 0.3],
            noise_scale: 0.1,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_source == 0 || self.n_target == 0 {
            return Err(Error::InvalidParameter(format!(
                "sample counts must be positive (source {}, target {})",
                self.n_source, self.n_target
            )));
        }
        if self.n_source % 2 != 0 || self.n_target % 2 != 0 {
            return Err(Error::InvalidParameter(
                "sample counts must be even so both classes are balanced".into(),
            ));
        }
        if self.class_shift.len() != 2 || self.class_shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "class_shift needs two finite entries [negative, positive]".into(),
            ));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidParameter("noise_scale must be >= 0".into()));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidParameter("margin must be >= 0".into()));
        }
        if !(self.center.is_finite() && self.separation.is_finite()) {
            return Err(Error::InvalidParameter("center and separation must be finite".into()));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidParameter("spread must be >= 0".into()));
        }
        Ok(())
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Common feature and labels.
    pub source: Dataset,
    /// Common and extra features, unlabelled.
    pub target: Dataset,
    pub target_truth: Vec<Label>,
    /// The unobserved source extra feature, for the ideal baseline.
    pub source_extra: Array2<f64>,
}

impl SyntheticData {
    /// Source with its (normally hidden) extra feature attached.
    pub fn source_full(&self) -> Dataset {
        let n = self.source.n_samples();
        let features = Array2::from_shape_fn((n, 2), |(i, k)| {
            if k == 0 {
                self.source.features[(i, 0)]
            } else {
                self.source_extra[(i, 0)]
            }
        });
        Dataset::with_columns(
            self.source.name.clone(),
            features,
            self.source.labels.clone(),
            vec![FeatureRole::Common, FeatureRole::Extra],
            vec!["xc".into(), "xe".into()],
        )
        .expect("generated features are finite")
    }
}

/// The cosine labelling function `cos(x_c) - x_e`.
pub fn cosine_boundary(common: f64, extra: f64) -> f64 {
    common.cos() - extra
}

/// Start and end angle of the spiral arms.
const SPIRAL_TURNS: (f64, f64) = (0.5 * PI, 3.0 * PI);

struct Sampler<'a> {
    spec: &'a SyntheticSpec,
    noise: Normal<f64>,
    standard: Normal<f64>,
}

impl Sampler<'_> {
    fn cosine(&self, rng: &mut ChaCha8Rng, positive: bool, shift: f64) -> (f64, f64) {
        let half = 0.5 * self.spec.separation;
        let mean = if positive { self.spec.center - half } else { self.spec.center + half };
        let xc = mean + self.spec.spread * self.standard.sample(rng) + shift;
        let side = if positive { -1.0 } else { 1.0 };
        let xe = xc.cos() + side * self.spec.margin + self.noise.sample(rng);
        (xc, xe)
    }

    fn spiral(&self, rng: &mut ChaCha8Rng, positive: bool, shift: f64) -> (f64, f64) {
        let (lo, hi) = SPIRAL_TURNS;
        let t = rng.gen_range(lo..hi);
        let sign = if positive { 1.0 } else { -1.0 };
        let r = t / hi * 3.0;
        let xc = sign * r * t.cos() + shift + self.noise.sample(rng);
        let xe = sign * r * t.sin() + self.noise.sample(rng);
        (xc, xe)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n: usize, shift: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<Label>) {
        let mut xc = Vec::with_capacity(n);
        let mut xe = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for k in 0..n {
            // alternate classes so counts are exactly balanced
            let positive = k % 2 == 0;
            let s = shift[usize::from(positive)];
            let (c, e) = match self.spec.geometry {
                Geometry::Cosine => self.cosine(rng, positive, s),
                Geometry::Spiral => self.spiral(rng, positive, s),
            };
            xc.push(c);
            xe.push(e);
            y.push(if positive { 1 } else { -1 });
        }
        (xc, xe, y)
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.noise_scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let sampler = Sampler {
        spec,
        noise,
        standard: Normal::new(0.0, 1.0).expect("unit normal"),
    };
    let mut rng = rng_for(spec.seed, stream::GENERATOR, 0);

    let (sc, se, sy) = sampler.draw(&mut rng, spec.n_source, &[0.0, 0.0]);
    let (tc, te, ty) = sampler.draw(&mut rng, spec.n_target, &spec.class_shift);

    let source = Dataset::with_columns(
        "source",
        Array2::from_shape_vec((spec.n_source, 1), sc).expect("shape"),
        Some(sy),
        vec![FeatureRole::Common],
        vec!["xc".into()],
    )?;
    let target_features = Array2::from_shape_fn((spec.n_target, 2), |(i, k)| if k == 0 { tc[i] } else { te[i] });
    let target = Dataset::with_columns(
        "target",
        target_features,
        None,
        vec![FeatureRole::Common, FeatureRole::Extra],
        vec!["xc".into(), "xe".into()],
    )?;
    Ok(SyntheticData {
        source,
        target,
        target_truth: ty,
        source_extra: Array2::from_shape_vec((spec.n_source, 1), se).expect("shape"),
    })
}
