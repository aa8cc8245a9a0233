//! Parameter sweeps: one run per value, in parallel, plus a comparison table.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::metrics::METRIC_KEYS;
use crate::run::{run_scenario, RunArtifact, Table};
use crate::scenario::Scenario;
use crate::CliError;

pub const COMPARISON_CSV: &str = "comparison.csv";

#[derive(Debug, Clone)]
pub struct SweepArtifact {
    pub dir: PathBuf,
    pub parameter: String,
    pub values: Vec<f64>,
    /// In sweep order.
    pub runs: Vec<RunArtifact>,
}

/// Checks every sweep value, then runs them all under `out_root/<name>/`.
/// Nothing is written if any value violates a design constraint.
pub fn run_sweep(scenario: &Scenario, out_root: &Path) -> Result<SweepArtifact, CliError> {
    let runs = scenario.expand_sweep()?;
    let (parameter, values) = scenario.sweep.clone().expect("expand_sweep checked the block");
    let dir = out_root.join(&scenario.name);
    let results: Vec<Result<RunArtifact, CliError>> =
        runs.par_iter().map(|s| run_scenario(s, &dir)).collect();
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut header = vec!["index".to_string(), "value".to_string()];
    header.extend(METRIC_KEYS.iter().map(|k| k.to_string()));
    let rows = runs
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (r, &v))| {
            let mut row = vec![i as f64, v];
            row.extend(r.metrics.values());
            row
        })
        .collect();
    let table = Table { header, rows };
    let path = dir.join(COMPARISON_CSV);
    fs::write(&path, table.to_csv()?).map_err(|e| CliError::io(&path, e))?;
    Ok(SweepArtifact {
        dir,
        parameter,
        values,
        runs,
    })
}
