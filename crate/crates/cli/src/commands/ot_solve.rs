//! Exact OT between uniform marginals for a cost matrix given as CSV.

use std::path::{Path, PathBuf};

use daevs::transport::{solve_ot, CostMatrix};
use serde::Serialize;

use crate::error::CliResult;
use crate::files::{read_matrix, write_matrix};

#[derive(Debug, Serialize)]
pub struct OtReport {
    pub cost: PathBuf,
    pub output: PathBuf,
    pub n_source: usize,
    pub n_target: usize,
    pub objective: f64,
    pub marginal_error: f64,
}

pub fn ot_solve(cost_path: &Path, output: &Path) -> CliResult<OtReport> {
    let cost = CostMatrix::new(read_matrix(cost_path)?)?;
    let plan = solve_ot(&cost);
    let header: Vec<String> = (0..plan.n_target()).map(|j| format!("t{j}")).collect();
    write_matrix(output, &header, &plan.values)?;
    Ok(OtReport {
        cost: cost_path.to_path_buf(),
        output: output.to_path_buf(),
        n_source: plan.n_source(),
        n_target: plan.n_target(),
        objective: plan.objective,
        marginal_error: plan.marginal_error(),
    })
}
