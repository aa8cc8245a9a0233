//! The twelve acceptance criteria. Prints one line
//! `criterion NN [PASS|FAIL] ...` per criterion and exits nonzero unless all pass.
//!
//! Criteria that need artifacts run the shipped scenario files into a
//! temporary directory.

use std::path::{Path, PathBuf};

use iandi_cli::criteria::{self, Outcome, Status, SweepRow};
use iandi_cli::run::{run_scenario, RunArtifact, TRAJECTORY_CSV};
use iandi_cli::sweep::run_sweep;
use iandi_cli::{report, Scenario};

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(name: &str, root: &Path) -> RunArtifact {
    run_scenario(&scenario(name), root).unwrap()
}

fn sweep_rows(name: &str, root: &Path) -> Vec<SweepRow> {
    run_sweep(&scenario(name), root)
        .unwrap()
        .runs
        .into_iter()
        .map(|r| SweepRow {
            params: r.manifest.params,
            x0: r.manifest.x0,
            metrics: r.metrics,
        })
        .collect()
}

type Check = fn() -> Outcome;

fn identities() -> Outcome {
    criteria::identities()
}

fn linear_spectrum_and_solution() -> Outcome {
    criteria::lti_spectrum()
}

fn pseudoinverse_matches_closed_forms() -> Outcome {
    criteria::pseudoinverse()
}

fn wheel_pendulum_lift() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    criteria::iwp_lift(&run(report::LIFT, dir.path()).metrics)
}

fn wheel_pendulum_sweeps() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let k = sweep_rows(report::GAIN_SWEEP, dir.path());
    let ic = sweep_rows(report::IC_SWEEP, dir.path());
    let pole = sweep_rows(report::POLE_SWEEP, dir.path());
    criteria::iwp_sweeps(Some(&k), Some(&ic), Some(&pole))
}

fn cartpend_linear() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    criteria::cartpend_linear(&run(report::CARTPEND_LIN, dir.path()).metrics)
}

fn cartpend_nonlinear() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let art = run(report::CARTPEND_NL, dir.path());
    criteria::cartpend_nonlinear(&art.metrics, art.manifest.t_span[1])
}

fn dcac_steady_state() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let art = run(report::DCAC, dir.path());
    let p = &art.manifest.params;
    criteria::dcac(&art.metrics, p["amplitude"], p["omega"])
}

fn repeat_run_is_byte_identical() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(report::LIFT, a.path());
    let second = run(report::LIFT, b.path());
    let read = |art: &RunArtifact| std::fs::read(art.dir.join(TRAJECTORY_CSV)).unwrap();
    criteria::determinism(&read(&first), &read(&second))
}

const CHECKS: [Check; 12] = [
    identities,
    linear_spectrum_and_solution,
    pseudoinverse_matches_closed_forms,
    wheel_pendulum_lift,
    wheel_pendulum_sweeps,
    cartpend_linear,
    cartpend_nonlinear,
    dcac_steady_state,
    criteria::lemma1,
    criteria::lemma2,
    criteria::integrators,
    repeat_run_is_byte_identical,
];

fn main() {
    let handles: Vec<_> = CHECKS.iter().map(|&c| std::thread::spawn(c)).collect();
    let mut failed = 0;
    for (i, h) in handles.into_iter().enumerate() {
        let outcome = h.join().unwrap_or_else(|_| Outcome {
            id: i as u8 + 1,
            title: criteria::TITLES[i],
            status: Status::Fail,
            detail: "check panicked".into(),
        });
        if outcome.status != Status::Pass {
            failed += 1;
        }
        println!("{outcome}");
    }
    println!("acceptance: {} of {} criteria passed", CHECKS.len() - failed, CHECKS.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
