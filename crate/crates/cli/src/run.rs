//! Executing one scenario and writing its artifact directory.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use iandi::analysis::{simulate, wrap_angle};
use iandi::odesim::Trajectory;
use iandi::IandIBundle;
use serde::{Deserialize, Serialize};

use crate::metrics::{Metrics, METRIC_KEYS};
use crate::params::{get_param, param_names};
use crate::plot::{self, Series};
use crate::scenario::{hex_digest, OutputSpec, Scenario};
use crate::CliError;

pub const MANIFEST: &str = "manifest.toml";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const METRICS_CSV: &str = "metrics.csv";

/// Written next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario_name: String,
    pub scenario_hash: String,
    pub group: Option<String>,
    pub plant: String,
    pub params: BTreeMap<String, f64>,
    pub x0: Vec<f64>,
    pub t_span: [f64; 2],
    pub aborted: bool,
    pub abort_time: Option<f64>,
    pub abort_reason: Option<String>,
    /// Output file name to SHA-256.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

/// Simulation result before anything touches the disk.
pub struct RunOutcome {
    pub bundle: IandIBundle,
    pub trajectory: Trajectory,
    pub metrics: Metrics,
    pub abort: Option<(f64, String)>,
}

/// Integrates the scenario. A run stopped by a singularity or a non-finite
/// state keeps the part computed so far and records where it stopped.
pub fn execute(scenario: &Scenario) -> Result<RunOutcome, CliError> {
    let bundle = scenario.bundle()?;
    bundle
        .plant
        .admissible(&scenario.x0)
        .map_err(|why| CliError::Config(format!("x0 is inadmissible: {why}")))?;
    let z0 = bundle.off_manifold(&scenario.x0);
    bundle
        .controller
        .admissible(&scenario.x0, z0.as_slice())
        .map_err(|why| CliError::Config(format!("x0 is inadmissible: {why}")))?;
    let (trajectory, abort) = match simulate(&bundle, &scenario.x0, scenario.t0, scenario.t1, &scenario.integrator) {
        Ok(t) => (t, None),
        Err(e) => {
            let reason = e.to_string();
            let time = e.abort_time();
            match (e.into_partial(), time) {
                (Some(partial), Some(time)) => (partial, Some((time, reason))),
                _ => return Err(CliError::Config(reason)),
            }
        }
    };
    let metrics = Metrics::compute(&bundle, &trajectory, abort.as_ref().map(|a| a.0));
    Ok(RunOutcome {
        bundle,
        trajectory,
        metrics,
        abort,
    })
}

/// Trajectory in the CSV layout: `t, x1..xn, z1..z{n-p}, u1..um`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_run(bundle: &IandIBundle, traj: &Trajectory, stride: usize) -> Table {
        let (n, nz, m) = (bundle.n(), bundle.n() - bundle.p(), bundle.m());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=nz).map(|i| format!("z{i}")));
        header.extend((1..=m).map(|i| format!("u{i}")));
        let mut idx: Vec<usize> = (0..traj.len()).step_by(stride.max(1)).collect();
        if idx.last() != Some(&(traj.len().saturating_sub(1))) && !traj.is_empty() {
            idx.push(traj.len() - 1);
        }
        let rows = idx
            .into_iter()
            .map(|i| {
                let x = traj.state(i);
                let mut row = Vec::with_capacity(1 + n + nz + m);
                row.push(traj.time(i));
                row.extend_from_slice(x);
                row.extend(bundle.off_manifold(x).iter());
                row.extend(bundle.control(x).iter());
                row
            })
            .collect();
        Table { header, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Parse(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Table, CliError> {
        let mut r = csv::Reader::from_reader(bytes);
        let err = |e: csv::Error| CliError::Parse(e.to_string());
        let header = r.headers().map_err(err)?.iter().map(String::from).collect();
        let mut rows = vec![];
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| CliError::Parse(format!("`{s}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

pub fn metrics_csv(m: &Metrics) -> Result<Vec<u8>, CliError> {
    let table = Table {
        header: METRIC_KEYS.iter().map(|s| s.to_string()).collect(),
        rows: vec![m.values().to_vec()],
    };
    table.to_csv()
}

pub fn read_metrics(path: &Path) -> Result<Metrics, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let t = Table::from_csv(&bytes)?;
    let values: Option<Vec<f64>> = METRIC_KEYS.iter().map(|k| t.column(k).and_then(|c| c.first().copied())).collect();
    values
        .and_then(|v| Metrics::from_values(&v))
        .ok_or_else(|| CliError::Parse(format!("{}: missing metric columns", path.display())))
}

fn plot_series(table: &Table, bundle: &IandIBundle, name: &str) -> Result<(Vec<f64>, Option<f64>), CliError> {
    let col = table
        .column(name)
        .ok_or_else(|| CliError::Config(format!("no column `{name}` (have {})", table.header.join(", "))))?;
    let is_angle = name
        .strip_prefix('x')
        .and_then(|i| i.parse::<usize>().ok())
        .is_some_and(|i| bundle.meta.angle_coords.contains(&(i - 1)));
    if is_angle {
        Ok((col.into_iter().map(wrap_angle).collect(), Some(PI)))
    } else {
        Ok((col, None))
    }
}

fn render_output(out: &OutputSpec, table: &Table, bundle: &IandIBundle, title: &str) -> Result<Option<(String, Vec<u8>)>, CliError> {
    match out {
        OutputSpec::PhasePlot { coords } => {
            let (x, gx) = plot_series(table, bundle, &coords[0])?;
            let (y, gy) = plot_series(table, bundle, &coords[1])?;
            let label = format!("{} vs {}", coords[1], coords[0]);
            let svg = plot::render(title, &coords[0], &coords[1], &[Series {
                label: &label,
                x: &x,
                y: &y,
                break_gap: gx.or(gy),
            }]);
            Ok(Some((format!("phase_{}_{}.svg", coords[0], coords[1]), svg.into_bytes())))
        }
        OutputSpec::TimeseriesPlot { coords } => {
            let t = table.column("t").unwrap();
            let cols = coords
                .iter()
                .map(|c| plot_series(table, bundle, c))
                .collect::<Result<Vec<_>, _>>()?;
            let series: Vec<Series> = coords
                .iter()
                .zip(&cols)
                .map(|(c, (y, g))| Series {
                    label: c,
                    x: &t,
                    y,
                    break_gap: *g,
                })
                .collect();
            let svg = plot::render(title, "t", &coords.join(", "), &series);
            Ok(Some((format!("series_{}.svg", coords.join("_")), svg.into_bytes())))
        }
        _ => Ok(None),
    }
}

/// Run artifact on disk.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub metrics: Metrics,
}

/// Runs `scenario` and writes its outputs under `out_root/<name>/`.
pub fn run_scenario(scenario: &Scenario, out_root: &Path) -> Result<RunArtifact, CliError> {
    let outcome = execute(scenario)?;
    write_artifact(scenario, &outcome, &out_root.join(&scenario.name))
}

pub fn write_artifact(scenario: &Scenario, outcome: &RunOutcome, dir: &Path) -> Result<RunArtifact, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let stride = scenario
        .outputs
        .iter()
        .find_map(|o| match o {
            OutputSpec::TrajectoryCsv { stride } => Some(*stride),
            _ => None,
        })
        .unwrap_or(1);
    let table = Table::from_run(&outcome.bundle, &outcome.trajectory, stride);
    let mut files: Vec<(String, Vec<u8>)> = vec![];
    for out in &scenario.outputs {
        match out {
            OutputSpec::TrajectoryCsv { .. } => files.push((TRAJECTORY_CSV.into(), table.to_csv()?)),
            OutputSpec::MetricsCsv => files.push((METRICS_CSV.into(), metrics_csv(&outcome.metrics)?)),
            other => {
                if let Some(f) = render_output(other, &table, &outcome.bundle, &scenario.name)? {
                    files.push(f);
                }
            }
        }
    }
    let mut digests = BTreeMap::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        digests.insert(name.clone(), hex_digest(bytes));
    }
    let params = param_names(&scenario.kind)
        .iter()
        .filter_map(|n| Some((n.to_string(), get_param(&scenario.kind, n)?)))
        .collect();
    let manifest = Manifest {
        scenario_name: scenario.name.clone(),
        scenario_hash: scenario.hash(),
        group: scenario.group.clone(),
        plant: scenario.kind.label().to_string(),
        params,
        x0: scenario.x0.clone(),
        t_span: [scenario.t0, scenario.t1],
        aborted: outcome.abort.is_some(),
        abort_time: outcome.abort.as_ref().map(|a| a.0),
        abort_reason: outcome.abort.as_ref().map(|a| a.1.clone()),
        files: digests,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Parse(e.to_string()))?;
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(RunArtifact {
        dir: dir.to_path_buf(),
        manifest,
        metrics: outcome.metrics.clone(),
    })
}
