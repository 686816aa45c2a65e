//! Terms of the target-error upper bound from user-supplied constants.

use daevs::diagnostics::{bound_report, BoundInputs, BoundReport};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct BoundOutput {
    pub config: BoundInputs,
    pub report: BoundReport,
    /// Which pieces were not computed by the tool.
    pub notes: Vec<String>,
}

pub fn bound(inputs: BoundInputs) -> CliResult<BoundOutput> {
    let report = bound_report(&inputs)?;
    let mut notes = vec!["err(f0), M and phi(lambda) are pass-through constants, never estimated".to_string()];
    if report.partial {
        notes.push("constants missing: partial_total is not an upper bound".into());
    }
    Ok(BoundOutput {
        config: inputs,
        report,
        notes,
    })
}
