//! Reads an artifact tree and scores the acceptance criteria it covers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::criteria::{self, Outcome, Status, SweepRow};
use crate::run::{read_metrics, Manifest, MANIFEST, METRICS_CSV, TRAJECTORY_CSV};
use crate::CliError;

/// Scenario names whose artifacts feed the artifact-based criteria.
pub const LIFT: &str = "fig02_iwp_lift";
pub const GAIN_SWEEP: &str = "fig03_iwp_k_sweep";
pub const IC_SWEEP: &str = "fig04_iwp_ic_sweep";
pub const POLE_SWEEP: &str = "fig05_iwp_pole_sweep";
pub const CARTPEND_LIN: &str = "fig07_cartpend_lin";
pub const CARTPEND_NL: &str = "fig09_cartpend_nl";
pub const DCAC: &str = "dcac_steady_state";

#[derive(Debug, Clone)]
pub struct Found {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Every run directory (one holding a manifest) below `root`, sorted by path.
pub fn find_runs(root: &Path) -> Result<Vec<Found>, CliError> {
    let mut out = vec![];
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == MANIFEST) {
                out.push(Found {
                    dir: dir.clone(),
                    manifest: Manifest::load(&path)?,
                });
            }
        }
    }
    out.sort_by(|a, b| a.dir.cmp(&b.dir));
    Ok(out)
}

fn single<'a>(runs: &'a [Found], name: &str) -> Option<&'a Found> {
    runs.iter().find(|r| r.manifest.scenario_name == name && r.manifest.group.is_none())
}

fn sweep_rows(runs: &[Found], group: &str) -> Result<Option<Vec<SweepRow>>, CliError> {
    let members: Vec<&Found> = runs
        .iter()
        .filter(|r| r.manifest.group.as_deref() == Some(group))
        .collect();
    if members.is_empty() {
        return Ok(None);
    }
    let mut rows = vec![];
    for r in members {
        rows.push(SweepRow {
            params: r.manifest.params.clone(),
            x0: r.manifest.x0.clone(),
            metrics: read_metrics(&r.dir.join(METRICS_CSV))?,
        });
    }
    Ok(Some(rows))
}

fn with_metrics(
    runs: &[Found],
    id: u8,
    name: &str,
    eval: impl Fn(&crate::metrics::Metrics, &Manifest) -> Outcome,
) -> Outcome {
    match single(runs, name) {
        None => criteria::skipped(id, format!("no `{name}` artifact")),
        Some(f) => match read_metrics(&f.dir.join(METRICS_CSV)) {
            Ok(m) => eval(&m, &f.manifest),
            Err(e) => criteria::skipped(id, format!("`{name}`: {e}")),
        },
    }
}

/// Two or more runs of the lift scenario with the same scenario hash must have
/// identical trajectory files.
fn determinism(runs: &[Found]) -> Result<Outcome, CliError> {
    let mut by_hash: BTreeMap<&str, Vec<&Found>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.manifest.scenario_name == LIFT) {
        if r.manifest.files.contains_key(TRAJECTORY_CSV) {
            by_hash.entry(&r.manifest.scenario_hash).or_default().push(r);
        }
    }
    let Some(pair) = by_hash.values().find(|v| v.len() >= 2) else {
        return Ok(criteria::skipped(12, format!("needs two `{LIFT}` runs with trajectory output")));
    };
    let read = |f: &Found| {
        let p = f.dir.join(TRAJECTORY_CSV);
        fs::read(&p).map_err(|e| CliError::io(&p, e))
    };
    Ok(criteria::determinism(&read(pair[0])?, &read(pair[1])?))
}

/// Scores all twelve criteria. Library checks run only when `library` is set;
/// otherwise they are reported as skipped.
pub fn evaluate(root: &Path, library: bool) -> Result<Vec<Outcome>, CliError> {
    let runs = find_runs(root)?;
    let lib = |id: u8, f: fn() -> Outcome| {
        if library {
            f()
        } else {
            criteria::skipped(id, "library check (pass --library)")
        }
    };
    let param = |m: &Manifest, k: &str| m.params.get(k).copied().unwrap_or(f64::NAN);
    Ok(vec![
        lib(1, criteria::identities),
        lib(2, criteria::lti_spectrum),
        lib(3, criteria::pseudoinverse),
        with_metrics(&runs, 4, LIFT, |m, _| criteria::iwp_lift(m)),
        criteria::iwp_sweeps(
            sweep_rows(&runs, GAIN_SWEEP)?.as_deref(),
            sweep_rows(&runs, IC_SWEEP)?.as_deref(),
            sweep_rows(&runs, POLE_SWEEP)?.as_deref(),
        ),
        with_metrics(&runs, 6, CARTPEND_LIN, |m, _| criteria::cartpend_linear(m)),
        with_metrics(&runs, 7, CARTPEND_NL, |m, man| criteria::cartpend_nonlinear(m, man.t_span[1])),
        with_metrics(&runs, 8, DCAC, |m, man| {
            criteria::dcac(m, param(man, "amplitude"), param(man, "omega"))
        }),
        lib(9, criteria::lemma1),
        lib(10, criteria::lemma2),
        lib(11, criteria::integrators),
        determinism(&runs)?,
    ])
}

pub fn to_csv(outcomes: &[Outcome]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Parse(e.to_string());
    w.write_record(["criterion", "title", "status", "detail"]).map_err(err)?;
    for o in outcomes {
        w.write_record([o.id.to_string(), o.title.to_string(), o.status.to_string(), o.detail.clone()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Parse(e.to_string()))
}

pub fn summary(outcomes: &[Outcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let _ = writeln!(s, "{o}");
    }
    let count = |st: Status| outcomes.iter().filter(|o| o.status == st).count();
    let _ = writeln!(
        s,
        "{} passed, {} failed, {} skipped",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skipped)
    );
    s
}

/// 0 when something passed and nothing failed, 1 otherwise.
pub fn exit_code(outcomes: &[Outcome]) -> i32 {
    let any_pass = outcomes.iter().any(|o| o.status == Status::Pass);
    let any_fail = outcomes.iter().any(|o| o.status == Status::Fail);
    if any_pass && !any_fail {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_tree_skips_everything() {
        let dir = tempfile::tempdir().unwrap();
        let out = evaluate(dir.path(), false).unwrap();
        assert_eq!(out.len(), 12);
        assert!(out.iter().all(|o| o.status == Status::Skipped));
        assert_eq!(exit_code(&out), 1);
        let csv = String::from_utf8(to_csv(&out).unwrap()).unwrap();
        assert_eq!(csv.lines().count(), 13);
    }
}
