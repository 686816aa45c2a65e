//! Summary tables over repeated runs: per-method accuracy mean and variance
//! across seeds, and per-domain-pair model accuracy of every method.

use serde::{Deserialize, Serialize};

use crate::adapt::{PairReport, RunResult};
use crate::diagnostics::{spread, Spread};
use crate::error::{Error, Result};

/// Accuracy of one method over repeated runs (fractions in `[0, 1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub transfer: Spread,
    pub model: Spread,
}

/// Summarises final-iteration accuracies; every run must have been given
/// the true target labels.
pub fn summarize(method: &str, runs: &[RunResult]) -> Result<MethodSummary> {
    let pick = |f: fn(&RunResult) -> Option<f64>| -> Result<Vec<f64>> {
        runs.iter()
            .map(|r| f(r).ok_or_else(|| Error::Label(format!("{method}: run without target truth"))))
            .collect()
    };
    Ok(MethodSummary {
        method: method.to_string(),
        transfer: spread(&pick(RunResult::transfer_accuracy)?)?,
        model: spread(&pick(RunResult::model_accuracy)?)?,
    })
}

fn cell(s: &Spread) -> String {
    format!("{:.1} ({:.2e})", 100.0 * s.mean, s.variance)
}

/// Methods as columns, `transfer` and `model` as rows; each cell is the mean
/// accuracy in percent followed by the variance of the fractional accuracy.
pub fn render_method_table(summaries: &[MethodSummary]) -> String {
    let width = summaries
        .iter()
        .flat_map(|s| [s.method.len(), cell(&s.transfer).len(), cell(&s.model).len()])
        .max()
        .unwrap_or(0);
    let mut out = format!("{:<10}", "");
    for s in summaries {
        out.push_str(&format!(" | {:<width$}", s.method));
    }
    out.push('\n');
    for (name, get) in [
        ("transfer", (|s: &MethodSummary| s.transfer) as fn(&MethodSummary) -> Spread),
        ("model", |s: &MethodSummary| s.model),
    ] {
        out.push_str(&format!("{name:<10}"));
        for s in summaries {
            out.push_str(&format!(" | {:<width$}", cell(&get(s))));
        }
        out.push('\n');
    }
    out
}

pub const PAIR_COLUMNS: [&str; 5] = ["domains", "baseline", "jdot-no-extra", "proposed", "jdot-ideal"];

/// One row per source→target pair with model accuracies in percent.
pub fn render_pair_table(rows: &[PairReport]) -> String {
    let domains: Vec<String> = rows.iter().map(|r| format!("{}→{}", r.source, r.target)).collect();
    let first = domains
        .iter()
        .map(|d| d.chars().count())
        .chain([PAIR_COLUMNS[0].len()])
        .max()
        .unwrap_or(0);
    let pct = |v: f64| format!("{:.2}", 100.0 * v);
    let mut out = format!("{:<first$}", PAIR_COLUMNS[0]);
    for c in &PAIR_COLUMNS[1..] {
        out.push_str(&format!(" | {c:>13}"));
    }
    out.push('\n');
    for (r, d) in rows.iter().zip(&domains) {
        let pad = first - d.chars().count();
        out.push_str(&format!("{d}{}", " ".repeat(pad)));
        let ideal = r.jdot_ideal.map(pct).unwrap_or_else(|| "-".into());
        for v in [pct(r.baseline), pct(r.jdot_no_extra), pct(r.proposed), ideal] {
            out.push_str(&format!(" | {v:>13}"));
        }
        out.push('\n');
    }
    out
}
