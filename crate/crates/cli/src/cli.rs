//! Argument parsing and the five verbs.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use iandi::design::validate_bundle;
use iandi::plants::presets;

use crate::params::set_param;
use crate::report;
use crate::run::run_scenario;
use crate::scenario::{parse_assignment, Scenario};
use crate::sweep::run_sweep;
use crate::{CliError, OUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "iandi", version, about = "Orbital stabilization by immersion and invariance")]
struct Args {
    /// Artifact root (default: $IANDI_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the design identities of a preset or scenario file on a random grid.
    Validate {
        /// Preset name or path to a scenario file.
        target: String,
        /// Override a parameter, e.g. `--set k=-1.8`.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
        /// Grid seed (default: the scenario's, or 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Points drawn from each sample box.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Simulate a scenario and write its artifacts.
    Run {
        scenario: PathBuf,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Run every value of a scenario's [sweep] block and tabulate the results.
    Sweep {
        scenario: PathBuf,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Score the acceptance criteria against an artifact directory.
    Report {
        dir: PathBuf,
        /// Also run the checks that need no artifacts.
        #[arg(long)]
        library: bool,
        /// Where to write the pass/fail table (default: <dir>/acceptance.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the built-in parameter sets.
    ListPresets,
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_with_sets(path: &Path, sets: &[String]) -> Result<Scenario, CliError> {
    let mut s = Scenario::load(path)?;
    for text in sets {
        let (name, v) = parse_assignment(text)?;
        s.set(&name, v)?;
    }
    Ok(s)
}

fn validate(target: &str, sets: &[String], seed: Option<u64>, grid: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let looks_like_file = target.ends_with(".toml") || Path::new(target).is_file();
    let (bundle, seed) = if looks_like_file {
        let s = load_with_sets(Path::new(target), sets)?;
        (s.bundle()?, seed.unwrap_or(s.seed))
    } else {
        let mut kind = presets::lookup(target).ok_or_else(|| {
            CliError::Config(format!(
                "`{target}` is neither a preset ({}) nor a scenario file",
                presets::NAMES.join(", ")
            ))
        })?;
        for text in sets {
            let (name, v) = parse_assignment(text)?;
            set_param(&mut kind, &name, v)?;
        }
        (kind.build().map_err(CliError::Design)?, seed.unwrap_or(42))
    };
    let rep = validate_bundle(&bundle, grid, seed);
    let _ = write!(out, "{}", rep.to_kv_text());
    Ok(if rep.passes() { 0 } else { 1 })
}

fn dispatch(args: Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let root = out_root(args.out);
    match args.command {
        Command::Validate { target, sets, seed, grid } => validate(&target, &sets, seed, grid, out),
        Command::Run { scenario, sets } => {
            let s = load_with_sets(&scenario, &sets)?;
            let art = run_scenario(&s, &root)?;
            let _ = writeln!(out, "wrote {}", art.dir.display());
            for (name, digest) in &art.manifest.files {
                let _ = writeln!(out, "  {name}  sha256={digest}");
            }
            let m = &art.metrics;
            let _ = writeln!(
                out,
                "period_est = {:e}\ndecay_rate = {:e}\norbital_dist_tail_max = {:e}\nu_abs_max = {:e}",
                m.period_est, m.decay_rate, m.orbital_dist_tail_max, m.u_abs_max
            );
            if let (Some(t), Some(why)) = (art.manifest.abort_time, &art.manifest.abort_reason) {
                let _ = writeln!(out, "aborted at t = {t}: {why}");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Sweep { scenario, sets } => {
            let s = load_with_sets(&scenario, &sets)?;
            let art = run_sweep(&s, &root)?;
            let _ = writeln!(out, "wrote {} ({} runs over {})", art.dir.display(), art.runs.len(), art.parameter);
            let _ = writeln!(out, "{:>14} {:>14} {:>14} {:>14}", art.parameter, "period_est", "amplitude", "decay_rate");
            for (v, r) in art.values.iter().zip(&art.runs) {
                let m = &r.metrics;
                let _ = writeln!(out, "{v:>14.6} {:>14.6} {:>14.6} {:>14.6}", m.period_est, m.amplitude_tail, m.decay_rate);
            }
            Ok(if art.runs.iter().any(|r| r.manifest.aborted) { 1 } else { 0 })
        }
        Command::Report { dir, library, csv } => {
            if !dir.is_dir() {
                return Err(CliError::Config(format!("{} is not a directory", dir.display())));
            }
            let outcomes = report::evaluate(&dir, library)?;
            let path = csv.unwrap_or_else(|| dir.join("acceptance.csv"));
            std::fs::write(&path, report::to_csv(&outcomes)?).map_err(|e| CliError::io(&path, e))?;
            let _ = write!(out, "{}", report::summary(&outcomes));
            Ok(report::exit_code(&outcomes))
        }
        Command::ListPresets => {
            for name in presets::NAMES {
                let _ = writeln!(out, "{name:<20} {}", presets::describe(name).unwrap_or(""));
            }
            Ok(0)
        }
    }
}

/// Parses `args` (program name first), runs the verb and returns the exit code:
/// 0 success, 1 failed check or constraint violation, 2 usage or parse error.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
