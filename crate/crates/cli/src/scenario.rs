//! Scenario files: which design to run, from where, for how long, and what to write.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "fig02_iwp_lift"        # artifact directory name
//! description = "free text"
//! preset = "iwp-paper"           # or `plant = "iwp"` with every parameter under [params]
//! x0 = ["pi", "pi/3", 0, 0]      # numbers or arithmetic strings using `pi`
//! t_span = [0, 200]
//! seed = 42                      # validation grid seed
//! controller_scale = 1.0         # multiplies the feedback; != 1 corrupts the design
//!
//! [params]                       # overrides applied on top of the preset
//! k = -1.6
//!
//! [integrator]
//! method = "rk4"                 # or "dopri5" with optional rtol / atol
//! dt = 1e-3
//!
//! [[outputs]]
//! kind = "trajectory_csv"        # optional `stride = 10` keeps every 10th sample
//! [[outputs]]
//! kind = "metrics_csv"
//! [[outputs]]
//! kind = "phase_plot"
//! coords = ["x1", "x3"]
//! [[outputs]]
//! kind = "timeseries_plot"
//! coords = ["z1", "z2"]
//!
//! [sweep]                        # only read by `sweep`
//! parameter = "k"                # a plant parameter, `pole`, or `x0.<i>`
//! values = [-1.4, -1.6, -1.8, -2.0]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use iandi::design::Controller;
use iandi::odesim::{AdaptiveOptions, Integrator};
use iandi::plants::{presets, PlantKind};
use iandi::IandIBundle;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::params::{param_names, set_param};
use crate::{expr, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Expr(String),
}

impl Value {
    pub fn eval(&self) -> Result<f64, CliError> {
        match self {
            Value::Num(v) => Ok(*v),
            Value::Expr(s) => expr::eval(s).map_err(CliError::Config),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum IntegratorSpec {
    Rk4 { dt: f64 },
    Dopri5 { rtol: Option<f64>, atol: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputSpec {
    TrajectoryCsv {
        #[serde(default = "one")]
        stride: usize,
    },
    MetricsCsv,
    PhasePlot { coords: [String; 2] },
    TimeseriesPlot { coords: Vec<String> },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<Value>,
}

/// A scenario file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub preset: Option<String>,
    pub plant: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub x0: Vec<Value>,
    pub t_span: [Value; 2],
    pub integrator: IntegratorSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub controller_scale: Option<f64>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
    pub sweep: Option<SweepSpec>,
}

fn default_seed() -> u64 {
    42
}

/// A scenario with every value evaluated and every override applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub kind: PlantKind,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub integrator: Integrator,
    pub seed: u64,
    pub controller_scale: f64,
    pub outputs: Vec<OutputSpec>,
    pub sweep: Option<(String, Vec<f64>)>,
    /// Name of the sweep this run belongs to.
    pub group: Option<String>,
}

fn default_kind(label: &str) -> Option<PlantKind> {
    let preset = match label {
        "lti" => presets::LTI_IDENTITY,
        "iwp" => presets::IWP_PAPER,
        "cartpend-linear" => presets::CARTPEND_LIN_PAPER,
        "cartpend-nonlinear" => presets::CARTPEND_NL_PAPER,
        "dcac" => presets::DCAC_DEFAULT,
        _ => return None,
    };
    presets::lookup(preset)
}

/// Splits `name=value` and evaluates the value.
pub fn parse_assignment(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected name=value, got `{text}`")))?;
    let v = expr::eval(value.trim()).map_err(CliError::Config)?;
    Ok((name.trim().to_string(), v))
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, CliError> {
        let mut kind = match (&file.preset, &file.plant) {
            (Some(name), None) => presets::lookup(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset `{name}` (known: {})",
                    presets::NAMES.join(", ")
                ))
            })?,
            (None, Some(label)) => {
                let kind = default_kind(label).ok_or_else(|| {
                    CliError::Config(format!("unknown plant `{label}`"))
                })?;
                let missing: Vec<_> = param_names(&kind)
                    .iter()
                    .filter(|n| !file.params.contains_key(**n))
                    .collect();
                if !missing.is_empty() {
                    return Err(CliError::Config(format!(
                        "inline plant `{label}` needs every parameter; missing {missing:?}"
                    )));
                }
                kind
            }
            _ => {
                return Err(CliError::Config(
                    "give exactly one of `preset` or `plant`".into(),
                ))
            }
        };
        for (name, value) in &file.params {
            set_param(&mut kind, name, value.eval()?)?;
        }
        let x0 = file.x0.iter().map(Value::eval).collect::<Result<Vec<_>, _>>()?;
        let integrator = match file.integrator {
            IntegratorSpec::Rk4 { dt } => Integrator::Fixed { dt },
            IntegratorSpec::Dopri5 { rtol, atol } => {
                let d = AdaptiveOptions::default();
                Integrator::Adaptive(AdaptiveOptions::new(rtol.unwrap_or(d.rtol), atol.unwrap_or(d.atol)))
            }
        };
        let sweep = match file.sweep {
            Some(s) => Some((
                s.parameter,
                s.values.iter().map(Value::eval).collect::<Result<Vec<_>, _>>()?,
            )),
            None => None,
        };
        let scenario = Scenario {
            name: file.name,
            description: file.description,
            kind,
            x0,
            t0: file.t_span[0].eval()?,
            t1: file.t_span[1].eval()?,
            integrator,
            seed: file.seed,
            controller_scale: file.controller_scale.unwrap_or(1.0),
            outputs: file.outputs,
            sweep,
            group: None,
        };
        scenario.check_shape()?;
        Ok(scenario)
    }

    /// Scenario that runs a preset from `x0` with default outputs.
    pub fn for_preset(preset: &str, x0: Vec<f64>, t1: f64, dt: f64) -> Result<Self, CliError> {
        let kind = presets::lookup(preset)
            .ok_or_else(|| CliError::Config(format!("unknown preset `{preset}`")))?;
        Ok(Scenario {
            name: preset.to_string(),
            description: String::new(),
            kind,
            x0,
            t0: 0.0,
            t1,
            integrator: Integrator::Fixed { dt },
            seed: default_seed(),
            controller_scale: 1.0,
            outputs: vec![OutputSpec::TrajectoryCsv { stride: 1 }, OutputSpec::MetricsCsv],
            sweep: None,
            group: None,
        })
    }

    fn check_shape(&self) -> Result<(), CliError> {
        if !(self.t1 > self.t0) {
            return Err(CliError::Config(format!(
                "t_span must increase, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        for o in &self.outputs {
            if let OutputSpec::TrajectoryCsv { stride: 0 } = o {
                return Err(CliError::Config("trajectory stride must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Applies `name = value`: a plant parameter, `pole`, `x0.<i>` (1-based),
    /// `t1` or `seed`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        if let Some(idx) = name.strip_prefix("x0.") {
            let i: usize = idx
                .parse()
                .map_err(|_| CliError::Config(format!("bad state index in `{name}`")))?;
            if i == 0 || i > self.x0.len() {
                return Err(CliError::Config(format!(
                    "`{name}` is out of range for a {}-dimensional state",
                    self.x0.len()
                )));
            }
            self.x0[i - 1] = value;
            return Ok(());
        }
        match name {
            "t1" => self.t1 = value,
            "seed" => self.seed = value as u64,
            _ => set_param(&mut self.kind, name, value)?,
        }
        self.check_shape()
    }

    /// Builds the design, checking parameter constraints and the state dimension.
    pub fn bundle(&self) -> Result<IandIBundle, CliError> {
        let mut b = self.kind.build().map_err(CliError::Design)?;
        if b.n() != self.x0.len() {
            return Err(CliError::Config(format!(
                "x0 has {} entries but the {} state has {}",
                self.x0.len(),
                self.kind.label(),
                b.n()
            )));
        }
        if self.controller_scale != 1.0 {
            b.controller = Arc::new(Scaled {
                inner: b.controller.clone(),
                scale: self.controller_scale,
            });
        }
        Ok(b)
    }

    /// Copies of this scenario, one per sweep value, each named
    /// `<index>_<parameter>=<value>`. Every copy is built once so that an
    /// invalid value is reported before anything runs.
    pub fn expand_sweep(&self) -> Result<Vec<Scenario>, CliError> {
        let Some((param, values)) = &self.sweep else {
            return Err(CliError::Config(format!("scenario `{}` has no [sweep] block", self.name)));
        };
        if values.is_empty() {
            return Err(CliError::Config("sweep has no values".into()));
        }
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut s = self.clone();
                s.sweep = None;
                s.group = Some(self.name.clone());
                s.set(param, v)?;
                s.name = format!("{i:02}_{param}={v}");
                s.bundle().map_err(|e| match e {
                    CliError::Design(d) => CliError::SweepValue {
                        parameter: param.clone(),
                        value: v,
                        source: d,
                    },
                    other => other,
                })?;
                Ok(s)
            })
            .collect()
    }

    /// Stable text rendering of every field that affects a run.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name={}", self.name);
        let _ = writeln!(s, "kind={:?}", self.kind);
        let _ = writeln!(s, "x0={:?}", self.x0);
        let _ = writeln!(s, "t_span=[{:?}, {:?}]", self.t0, self.t1);
        let _ = writeln!(s, "integrator={:?}", self.integrator);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "controller_scale={:?}", self.controller_scale);
        let _ = writeln!(s, "outputs={:?}", self.outputs);
        let _ = writeln!(s, "sweep={:?}", self.sweep);
        let _ = writeln!(s, "group={:?}", self.group);
        s
    }

    /// SHA-256 of [`Scenario::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

struct Scaled {
    inner: Arc<dyn Controller>,
    scale: f64,
}

impl Controller for Scaled {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        self.inner.control(x, z) * self.scale
    }
    fn admissible(&self, x: &[f64], z: &[f64]) -> Result<(), String> {
        self.inner.admissible(x, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const FIG2: &str = r#"
name = "lift"
preset = "iwp-paper"
x0 = ["pi", "pi/3", 0, 0]
t_span = [0, 200]

[params]
k = -1.6

[integrator]
method = "rk4"
dt = 1e-3

[[outputs]]
kind = "phase_plot"
coords = ["x1", "x3"]

[sweep]
parameter = "k"
values = [-1.4, "-2"]
"#;

    #[test]
    fn parses_annotated_form() {
        let s = Scenario::from_toml(FIG2).unwrap();
        assert_eq!(s.x0, vec![PI, PI / 3.0, 0.0, 0.0]);
        assert_eq!((s.t0, s.t1), (0.0, 200.0));
        assert_eq!(s.integrator, Integrator::Fixed { dt: 1e-3 });
        assert_eq!(s.seed, 42);
        assert_eq!(s.sweep, Some(("k".into(), vec![-1.4, -2.0])));
        assert!(s.bundle().is_ok());
        let runs = s.expand_sweep().unwrap();
        assert_eq!(runs[1].name, "01_k=-2");
    }

    #[test]
    fn hash_follows_content() {
        let a = Scenario::from_toml(FIG2).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.set("k", -1.8).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn bad_documents_are_parse_errors() {
        assert!(matches!(Scenario::from_toml("name = "), Err(CliError::Parse(_))));
        let extra = FIG2.replace("seed", "x").replace("t_span", "t_spam");
        assert!(matches!(Scenario::from_toml(&extra), Err(CliError::Parse(_))));
    }

    #[test]
    fn wrong_state_size_is_reported() {
        let s = Scenario::from_toml(&FIG2.replace("x0 = [\"pi\", \"pi/3\", 0, 0]", "x0 = [1, 2, 3]")).unwrap();
        assert!(matches!(s.bundle(), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_sweep_value_names_inequality() {
        let s = Scenario::from_toml(&FIG2.replace("\"-2\"", "-0.05")).unwrap();
        let err = s.expand_sweep().unwrap_err();
        assert!(err.to_string().contains("k < -1/b"), "{err}");
    }

    #[test]
    fn inline_plant_needs_all_parameters() {
        let inline = FIG2.replace("preset = \"iwp-paper\"", "plant = \"iwp\"");
        assert!(Scenario::from_toml(&inline).is_err());
        let full = inline.replace(
            "k = -1.6",
            "k = -1.6\nm = 1.962\nb = 10\ngamma1 = 2\ngamma2 = 1",
        );
        assert_eq!(Scenario::from_toml(&full).unwrap().kind, Scenario::from_toml(FIG2).unwrap().kind);
    }

    #[test]
    fn overrides_reach_state_and_plant() {
        let mut s = Scenario::from_toml(FIG2).unwrap();
        s.set("x0.2", 0.5).unwrap();
        assert_eq!(s.x0[1], 0.5);
        assert!(s.set("x0.9", 0.5).is_err());
        assert!(s.set("t1", -1.0).is_err());
        let (name, v) = parse_assignment("k=-2*1.5").unwrap();
        assert_eq!((name.as_str(), v), ("k", -3.0));
    }
}
