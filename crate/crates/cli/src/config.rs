//! TOML run configuration: `[problem]`, `[schedule]` and `[run]` sections.
//!
//! Each section starts from a named preset and overrides individual fields.
//!
//! ```toml
//! [problem]
//! preset = "paper-example"
//! map = 1.0                 # S = identity
//!
//! [schedule]
//! lambda = 0.015625
//!
//! [run]
//! x1 = 5.0
//! anchor = 1.0
//! max_iters = 20000
//! ```

use std::fmt;
use std::path::Path;

use bregman_ep::schedule::AlphaRest;
use bregman_ep::{
    Bifunction, ConvexSet, LegendreKind, LegendreSpec, LinearMap, ParamSchedule, Preset, ProblemBundle,
    QuadraticBifunction, RunConfig, Sequence, Solver, Vector, Wiring,
};
use serde::Deserialize;

/// Anything that keeps a configuration from being turned into a solver.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<bregman_ep::Error> for ConfigError {
    fn from(e: bregman_ep::Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub preset: Option<String>,
    pub legendre: Option<LegendreKind>,
    pub set: Option<ConvexSet>,
    pub g: Option<BifunctionConfig>,
    pub phi: Option<BifunctionConfig>,
    pub map: Option<MapConfig>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub wiring: Option<WiringName>,
}

/// `"zero"` or the matrices of `yᵀQy + xᵀRy + xᵀPx`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BifunctionConfig {
    Named(String),
    Quadratic {
        q: Vec<Vec<f64>>,
        r: Vec<Vec<f64>>,
        p: Vec<Vec<f64>>,
    },
}

/// `"identity"`, a scale factor, or a matrix.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MapConfig {
    Named(String),
    Scale(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WiringName {
    Resolvent,
    Projection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub preset: Option<String>,
    pub alpha1: Option<Sequence>,
    pub alpha_rest: Option<AlphaRest>,
    pub gamma: Option<[Sequence; 3]>,
    pub beta: Option<Sequence>,
    pub delta: Option<Sequence>,
    pub lambda: Option<Sequence>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub x1: Option<Point>,
    pub anchor: Option<Point>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub target: Option<Point>,
}

/// A scalar stands for a one-dimensional point.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Scalar(f64),
    Coords(Vec<f64>),
}

impl Point {
    pub fn to_vector(&self) -> Result<Vector, ConfigError> {
        Ok(match self {
            Point::Scalar(v) => Vector::scalar(*v)?,
            Point::Coords(v) => Vector::new(v.clone())?,
        })
    }
}

/// Parses `"0.7"` or `"1,2.5"`.
pub fn parse_point(text: &str) -> Result<Vector, String> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Vector::new(coords).map_err(|e| e.to_string())
}

/// Everything a command needs, resolved from a file.
pub struct Loaded {
    /// The file exactly as read.
    pub text: String,
    pub solver: Solver,
    pub run: RunConfig,
}

/// Problem presets plus `paper-literal`, which is the worked example with the
/// schedule exactly as printed.
fn problem_preset(name: &str) -> Result<(Preset, &'static str), ConfigError> {
    match name {
        "paper-literal" => Ok((Preset::PaperExample, "paper-literal")),
        _ => {
            let preset: Preset = name.parse()?;
            let schedule = match preset {
                Preset::MultiOmega => "multi-omega",
                _ => "paper-example",
            };
            Ok((preset, schedule))
        }
    }
}

fn schedule_preset(name: &str) -> Result<ParamSchedule, ConfigError> {
    match name {
        "paper-example" | "projection-only" => Ok(ParamSchedule::paper_example()),
        "paper-literal" => Ok(ParamSchedule::paper_literal()),
        "multi-omega" => Ok(ParamSchedule::multi_omega()),
        other => Err(ConfigError(format!("unknown schedule preset '{other}'"))),
    }
}

fn bifunction(config: &BifunctionConfig) -> Result<Bifunction, ConfigError> {
    match config {
        BifunctionConfig::Named(name) if name == "zero" => Ok(Bifunction::Zero),
        BifunctionConfig::Named(name) => Err(ConfigError(format!(
            "unknown bifunction '{name}' (use \"zero\" or a table with q, r, p)"
        ))),
        BifunctionConfig::Quadratic { q, r, p } => Ok(QuadraticBifunction::from_rows(q, r, p)?.into()),
    }
}

fn linear_map(config: &MapConfig, dim: usize) -> Result<LinearMap, ConfigError> {
    match config {
        MapConfig::Named(name) if name == "identity" => Ok(LinearMap::identity(dim)),
        MapConfig::Named(name) => Err(ConfigError(format!(
            "unknown map '{name}' (use \"identity\", a factor or a matrix)"
        ))),
        MapConfig::Scale(factor) => Ok(LinearMap::scaling(dim, *factor)?),
        MapConfig::Matrix(rows) => Ok(LinearMap::from_rows(rows)?),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn resolve(&self) -> Result<(Solver, RunConfig), ConfigError> {
        let p = &self.problem;
        let (preset, schedule_name) = problem_preset(p.preset.as_deref().unwrap_or("paper-example"))?;
        let base = preset.problem();

        let set = match &p.set {
            Some(set) => set.clone().validated()?,
            None => base.set.clone(),
        };
        let dim = set.dim();
        let kind = p.legendre.unwrap_or(base.spec.kind);
        let problem = ProblemBundle::new(
            LegendreSpec::new(kind, dim)?,
            set,
            p.g.as_ref().map(bifunction).transpose()?.unwrap_or(base.g.clone()),
            p.phi.as_ref().map(bifunction).transpose()?.unwrap_or(base.phi.clone()),
            p.map.as_ref().map(|m| linear_map(m, dim)).transpose()?.unwrap_or(base.map.clone()),
            p.c1.unwrap_or(base.c1),
            p.c2.unwrap_or(base.c2),
        )?;

        let s = &self.schedule;
        let mut schedule = schedule_preset(s.preset.as_deref().unwrap_or(schedule_name))?;
        if let Some(v) = s.alpha1 {
            schedule.alpha1 = v;
        }
        if let Some(v) = s.alpha_rest {
            schedule.alpha_rest = v;
        }
        if let Some(v) = s.gamma {
            schedule.gamma = v;
        }
        if let Some(v) = s.beta {
            schedule.beta = v;
        }
        if let Some(v) = s.delta {
            schedule.delta = v;
        }
        if let Some(v) = s.lambda {
            schedule.lambda = v;
        }

        let wiring = match p.wiring {
            Some(WiringName::Resolvent) => Wiring::Resolvent,
            Some(WiringName::Projection) => Wiring::Projection,
            None => preset.wiring(),
        };
        let solver = Solver::new(problem, schedule).with_wiring(wiring);

        let defaults = preset.run_config();
        let r = &self.run;
        let x1 = r.x1.as_ref().map(Point::to_vector).transpose()?.unwrap_or(defaults.x1.clone());
        // presets whose anchor is the start point keep it tied to an overridden start
        let anchor = match &r.anchor {
            Some(a) => a.to_vector()?,
            None if defaults.anchor == defaults.x1 => x1.clone(),
            None => defaults.anchor.clone(),
        };
        let mut run = RunConfig::new(x1, anchor)
            .with_max_iters(r.max_iters.unwrap_or(defaults.max_iters))
            .with_tol(r.tol.unwrap_or(defaults.residual_tol));
        run.target = match &r.target {
            Some(t) => Some(t.to_vector()?),
            None => defaults.target.clone().filter(|t| t.dim() == dim),
        };
        Ok((solver, run))
    }
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let (solver, run) = ConfigFile::parse(&text)?.resolve()?;
    Ok(Loaded { text, solver, run })
}
