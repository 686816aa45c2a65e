//! Sliding-window summary statistics for multichannel time series.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::labeling::Label;

/// mean, std, max, min, mean-crossing rate
pub const STATS_PER_CHANNEL: usize = 5;

fn window_bounds(len: usize, window_s: f64, overlap_s: f64, rate_hz: f64) -> Result<Vec<(usize, usize)>> {
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate_hz must be positive, got {rate_hz}")));
    }
    if !(overlap_s >= 0.0 && overlap_s < window_s) {
        return Err(Error::InvalidParameter(format!(
            "overlap {overlap_s} s must lie in [0, window {window_s} s)"
        )));
    }
    let width = (window_s * rate_hz).round() as usize;
    let step = ((window_s - overlap_s) * rate_hz).round() as usize;
    if width < 2 {
        return Err(Error::InvalidParameter(format!(
            "window of {window_s} s at {rate_hz} Hz has {width} samples; need at least 2"
        )));
    }
    if step == 0 {
        return Err(Error::InvalidParameter("window step rounds to zero samples".into()));
    }
    if width > len {
        return Err(Error::InvalidParameter(format!(
            "window of {width} samples is longer than the series ({len})"
        )));
    }
    Ok((0..=len - width).step_by(step).map(|s| (s, s + width)).collect())
}

fn channel_stats(x: ArrayView1<f64>, out: &mut Vec<f64>) {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let crossings = x
        .windows(2)
        .into_iter()
        .filter(|w| (w[0] - mean) * (w[1] - mean) < 0.0)
        .count();
    out.extend([mean, var.sqrt(), max, min, crossings as f64 / n]);
}

/// One row per window of `series` (channels x time); each channel
/// contributes [`STATS_PER_CHANNEL`] consecutive columns.
pub fn window_features(
    series: &Array2<f64>,
    window_s: f64,
    overlap_s: f64,
    rate_hz: f64,
) -> Result<Array2<f64>> {
    let bounds = window_bounds(series.ncols(), window_s, overlap_s, rate_hz)?;
    let width = series.nrows() * STATS_PER_CHANNEL;
    let mut flat = Vec::with_capacity(bounds.len() * width);
    for &(a, b) in &bounds {
        for ch in series.rows() {
            channel_stats(ch.slice(ndarray::s![a..b]), &mut flat);
        }
    }
    Array2::from_shape_vec((bounds.len(), width), flat).map_err(|e| Error::Dimension(e.to_string()))
}

/// Like [`window_features`], with a per-sample label track (`None` where no
/// activity is annotated). Windows without any annotated sample are dropped;
/// the rest take their majority label (smallest label on ties).
pub fn window_features_labeled(
    series: &Array2<f64>,
    labels: &[Option<Label>],
    window_s: f64,
    overlap_s: f64,
    rate_hz: f64,
) -> Result<(Array2<f64>, Vec<Label>)> {
    if labels.len() != series.ncols() {
        return Err(Error::Dimension(format!(
            "{} labels for a series of length {}",
            labels.len(),
            series.ncols()
        )));
    }
    let bounds = window_bounds(series.ncols(), window_s, overlap_s, rate_hz)?;
    let width = series.nrows() * STATS_PER_CHANNEL;
    let mut flat = Vec::new();
    let mut out_labels = Vec::new();
    for &(a, b) in &bounds {
        let mut votes: BTreeMap<Label, usize> = BTreeMap::new();
        for l in labels[a..b].iter().flatten() {
            *votes.entry(*l).or_default() += 1;
        }
        let Some((&label, _)) = votes.iter().rev().max_by_key(|(_, &c)| c) else {
            continue;
        };
        for ch in series.rows() {
            channel_stats(ch.slice(ndarray::s![a..b]), &mut flat);
        }
        out_labels.push(label);
    }
    let features = Array2::from_shape_vec((out_labels.len(), width), flat)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    Ok((features, out_labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_channel() {
        let series = Array2::from_elem((1, 20), 3.5);
        let f = window_features(&series, 6.0, 2.0, 1.0).unwrap();
        // windows start at 0, 4, 8, 12
        assert_eq!(f.nrows(), 4);
        for row in f.rows() {
            assert_eq!(row.to_vec(), vec![3.5, 0.0, 3.5, 3.5, 0.0]);
        }
    }

    #[test]
    fn alternating_channel_crosses_every_step() {
        let series = Array2::from_shape_fn((1, 24), |(_, t)| if t % 2 == 0 { 1.0 } else { -1.0 });
        let f = window_features(&series, 6.0, 2.0, 2.0).unwrap();
        let w = 12.0;
        for row in f.rows() {
            assert_eq!(row[0], 0.0);
            assert_eq!(row[1], 1.0);
            assert_eq!(row[4], (w - 1.0) / w);
        }
    }

    #[test]
    fn matches_naive_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rate = 5.0;
        let series = Array2::from_shape_fn((3, 173), |_| rng.gen_range(-2.0..2.0));
        let f = window_features(&series, 6.0, 2.0, rate).unwrap();
        let (w, step) = (30usize, 20usize);
        let mut start = 0;
        let mut row = 0;
        while start + w <= 173 {
            for ch in 0..3 {
                let xs: Vec<f64> = (start..start + w).map(|t| series[(ch, t)]).collect();
                let mean = xs.iter().sum::<f64>() / w as f64;
                let std = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / w as f64).sqrt();
                let mut mx = xs[0];
                let mut mn = xs[0];
                let mut cross = 0;
                for t in 0..w {
                    mx = mx.max(xs[t]);
                    mn = mn.min(xs[t]);
                    if t > 0 && ((xs[t - 1] > mean) != (xs[t] > mean)) {
                        cross += 1;
                    }
                }
                let got = &f.row(row).to_vec()[ch * 5..ch * 5 + 5];
                let want = [mean, std, mx, mn, cross as f64 / w as f64];
                for (g, e) in got.iter().zip(want) {
                    assert!((g - e).abs() < 1e-12, "{g} vs {e}");
                }
            }
            start += step;
            row += 1;
        }
        assert_eq!(row, f.nrows());
    }

    #[test]
    fn unlabelled_windows_are_dropped() {
        let series = Array2::from_shape_fn((2, 12), |(c, t)| (c * t) as f64);
        let mut labels = vec![None; 12];
        labels[1] = Some(4);
        labels[2] = Some(4);
        labels[3] = Some(7);
        let (f, l) = window_features_labeled(&series, &labels, 4.0, 2.0, 1.0).unwrap();
        // windows [0,4) [2,6) [4,8) [6,10) [8,12): only the first two carry labels
        assert_eq!(l, vec![4, 4]);
        assert_eq!(f.nrows(), 2);
    }

    #[test]
    fn window_longer_than_series() {
        let series = Array2::zeros((1, 5));
        assert!(window_features(&series, 6.0, 2.0, 1.0).is_err());
        assert!(window_features(&series, 1.0, 0.0, 1.0).is_err());
        assert!(window_features(&series, 2.0, 0.0, 0.0).is_err());
    }
}
