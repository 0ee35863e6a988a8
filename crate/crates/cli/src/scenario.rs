//! JSON scenario schema and builders for systems and data.

use std::fmt;
use std::path::Path;

use bdry_fronts::front_tracking::{Datum, Domain, Segment, TrackingConfig};
use bdry_fronts::system::{burgers, lagrangian_euler, linear, p_system, PSystemViscosity, SystemDef};
use bdry_fronts::viscous::ViscousConfig;
use bdry_fronts::boundary::TraceRelation;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// Malformed JSON or schema mismatch; the message carries line and column.
    Parse(String),
    Invalid(String),
    Io(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(m) => write!(f, "scenario parse error: {m}"),
            ScenarioError::Invalid(m) => write!(f, "invalid scenario: {m}"),
            ScenarioError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Linear,
    Burgers,
    PSystem,
    LagrangianEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViscosityKind {
    Artificial,
    NavierStokes,
}

/// System selector plus parameters, e.g.
/// `{"system": "p-system", "gamma": 2.0, "viscosity": "navier-stokes"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub system: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Linear flux matrix, row-major rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// Linear viscosity matrix, row-major rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    /// Burgers shift `a` in `f(u) = (u − a)²/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viscosity: Option<ViscosityKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_char: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, ScenarioError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ScenarioError::Invalid(format!("`{what}` must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl SystemSpec {
    pub fn kind(system: SystemKind) -> Self {
        SystemSpec {
            system,
            label: None,
            a: None,
            d: None,
            shift: None,
            gamma: None,
            viscosity: None,
            mu: None,
            reference: None,
            radius: None,
            tol_char: None,
            s_max: None,
        }
    }

    /// Named presets accepted by `--system`.
    pub fn preset(name: &str) -> Option<Self> {
        let mut s = match name {
            "linear" | "gisclon" => SystemSpec {
                a: Some(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]),
                d: Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
                reference: Some(vec![0.5, 0.5]),
                radius: Some(2.0),
                ..Self::kind(SystemKind::Linear)
            },
            "gisclon-coupled" => SystemSpec {
                a: Some(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]),
                d: Some(vec![vec![1.0, 0.0], vec![1.0, 1.0]]),
                reference: Some(vec![0.5, 0.5]),
                radius: Some(2.0),
                ..Self::kind(SystemKind::Linear)
            },
            "burgers" => Self::kind(SystemKind::Burgers),
            "burgers-shifted" => SystemSpec { shift: Some(0.5), ..Self::kind(SystemKind::Burgers) },
            "p-system" => Self::kind(SystemKind::PSystem),
            "p-system-ns" => SystemSpec { viscosity: Some(ViscosityKind::NavierStokes), ..Self::kind(SystemKind::PSystem) },
            "euler" | "lagrangian-euler" => Self::kind(SystemKind::LagrangianEuler),
            _ => return None,
        };
        s.label = Some(name.to_string());
        Some(s)
    }

    /// Parses a preset name, inline JSON object, or path to a JSON file.
    pub fn resolve(arg: &str) -> Result<Self, ScenarioError> {
        if let Some(s) = Self::preset(arg) {
            return Ok(s);
        }
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else if Path::new(arg).is_file() {
            std::fs::read_to_string(arg).map_err(|e| ScenarioError::Io(format!("{arg}: {e}")))?
        } else {
            return Err(ScenarioError::Invalid(format!("unknown system `{arg}`")));
        };
        serde_json::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            serde_json::to_value(self.system).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        })
    }

    pub fn build(&self) -> Result<SystemDef, ScenarioError> {
        let reference = self.reference.as_ref().map(|r| DVector::from_vec(r.clone()));
        let gamma = self.gamma;
        let mut sys = match self.system {
            SystemKind::Linear => {
                let a = matrix(self.a.as_ref().ok_or_else(|| ScenarioError::Invalid("linear system needs `a`".into()))?, "a")?;
                let d = match &self.d {
                    Some(d) => matrix(d, "d")?,
                    None => DMatrix::identity(a.nrows(), a.nrows()),
                };
                linear(a, d, reference, self.radius)
            }
            SystemKind::Burgers => {
                let r = match &self.reference {
                    Some(r) if r.len() == 1 => Some(r[0]),
                    Some(_) => return Err(ScenarioError::Invalid("Burgers reference must have one entry".into())),
                    None => None,
                };
                burgers(self.shift.unwrap_or(0.0), r, self.radius)
            }
            SystemKind::PSystem => {
                let visc = match self.viscosity.unwrap_or(ViscosityKind::Artificial) {
                    ViscosityKind::Artificial => PSystemViscosity::Artificial,
                    ViscosityKind::NavierStokes => PSystemViscosity::NavierStokes { mu: self.mu.unwrap_or(1.0) },
                };
                p_system(gamma.unwrap_or(2.0), visc, reference, self.radius)
            }
            SystemKind::LagrangianEuler => lagrangian_euler(gamma.unwrap_or(1.4), reference, self.radius),
        }
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if let Some(t) = self.tol_char {
            sys.tol_char = t;
        }
        if let Some(s) = self.s_max {
            sys.s_max = s;
        }
        if let Some(l) = &self.label {
            sys.name = l.clone();
        }
        Ok(sys)
    }

    /// This spec with the keys of `patch` replaced.
    pub fn patched(&self, patch: &Map<String, Value>) -> Result<Self, ScenarioError> {
        let mut v = serde_json::to_value(self).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if let Value::Object(m) = &mut v {
            for (k, x) in patch {
                m.insert(k.clone(), x.clone());
            }
        }
        serde_json::from_value(v).map_err(|e| ScenarioError::Invalid(format!("viscosity variant: {e}")))
    }
}

/// Initial or boundary datum. For the boundary datum the abscissa is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatumSpec {
    Constant(Vec<f64>),
    Steps { breaks: Vec<f64>, values: Vec<Vec<f64>> },
    Riemann {
        left: Vec<f64>,
        right: Vec<f64>,
        #[serde(default)]
        at: f64,
    },
    /// Piecewise linear: see `Segment`.
    Segments(Vec<Segment>),
}

impl DatumSpec {
    pub fn build(&self, dim: usize) -> Result<Datum, ScenarioError> {
        let st = |v: &Vec<f64>| DVector::from_vec(v.clone());
        let d = match self {
            DatumSpec::Constant(c) => Ok(Datum::constant(&st(c))),
            DatumSpec::Steps { breaks, values } => {
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ScenarioError::Invalid("step breakpoints must increase".into()));
                }
                Datum::steps(breaks, &values.iter().map(st).collect::<Vec<_>>())
            }
            DatumSpec::Riemann { left, right, at } => Datum::steps(&[*at], &[st(left), st(right)]),
            DatumSpec::Segments(s) => Ok(Datum { segments: s.clone() }),
        }
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        d.validate(dim).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FrontTrack,
    Viscous,
    Compare,
}

/// Viscous options shared by every `ε` of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViscousOptions {
    /// Grid spacing as a multiple of `ε`.
    pub dx_per_epsilon: f64,
    pub length: f64,
    pub safety: f64,
    pub window_factor: f64,
    /// Each viscous run lasts at least this many `ε`, so the trace window
    /// lies behind the fastest outgoing wave.
    pub min_time_per_epsilon: f64,
}

impl Default for ViscousOptions {
    fn default() -> Self {
        ViscousOptions { dx_per_epsilon: 0.2, length: 1.0, safety: 0.4, window_factor: 20.0, min_time_per_epsilon: 120.0 }
    }
}

/// Tolerances and calibration constants, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max-norm agreement of viscous traces with the inviscid trace.
    pub trace: f64,
    /// Max-norm agreement across viscosities for the Cauchy variant.
    pub cauchy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { trace: 5e-2, cauchy: 5e-2 }
    }
}

fn default_deltas() -> Vec<f64> {
    vec![1e-2]
}

fn default_t_end() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub system: SystemSpec,
    /// Patches of `system` (typically `d`, `viscosity`, `mu`), each with a
    /// `label`; used by `compare`.
    #[serde(default)]
    pub viscosities: Vec<Map<String, Value>>,
    pub initial: DatumSpec,
    pub boundary: DatumSpec,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_domain")]
    pub domain: Domain,
    #[serde(default = "default_relation")]
    pub relation: TraceRelation,
    #[serde(default)]
    pub tasks: Vec<Task>,
    /// Remaining front-tracking settings (`delta`, `t_end`, `domain`,
    /// `relation` and `sample_times` come from the scenario).
    #[serde(default)]
    pub tracking: TrackingConfig,
    #[serde(default)]
    pub viscous: ViscousOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_domain() -> Domain {
    Domain::HalfLine
}

fn default_relation() -> TraceRelation {
    TraceRelation::SimD
}

/// A validated scenario with its systems and data built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    /// `(label, spec, system)`; the base system when no variants are given.
    pub variants: Vec<(String, SystemSpec, SystemDef)>,
    pub initial: Datum,
    pub boundary: Datum,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            ScenarioError::Parse(m) => ScenarioError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn tasks(&self) -> Vec<Task> {
        if !self.tasks.is_empty() {
            return self.tasks.clone();
        }
        let mut t = vec![Task::FrontTrack];
        if self.viscosities.len() >= 2 {
            t.push(Task::Compare);
        } else if !self.epsilons.is_empty() {
            t.push(Task::Viscous);
        }
        t
    }

    pub fn tracking_config(&self, delta: f64) -> TrackingConfig {
        TrackingConfig {
            delta,
            t_end: self.t_end,
            domain: self.domain,
            relation: self.relation,
            sample_times: self.sample_times.clone(),
            ..self.tracking.clone()
        }
    }

    pub fn viscous_config(&self, epsilon: f64) -> ViscousConfig {
        let o = &self.viscous;
        let mut samples = self.sample_times.clone();
        let t_end = self.t_end.max(o.min_time_per_epsilon * epsilon);
        samples.retain(|&t| t <= t_end);
        ViscousConfig {
            epsilon,
            dx: o.dx_per_epsilon * epsilon * o.length,
            length: o.length,
            t_end,
            domain: self.domain,
            safety: o.safety,
            sample_times: samples,
            window_factor: o.window_factor,
        }
    }

    pub fn resolve(self) -> Result<Resolved, ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        if self.deltas.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return bad("every delta must be positive");
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("every epsilon must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and non-negative");
        }
        if self.sample_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return bad("sample times must lie in [0, t_end]");
        }
        let mut variants = Vec::new();
        if self.viscosities.is_empty() {
            let sys = self.system.build()?;
            variants.push((self.system.display_label(), self.system.clone(), sys));
        } else {
            for (i, patch) in self.viscosities.iter().enumerate() {
                let spec = self.system.patched(patch)?;
                let label = patch.get("label").and_then(Value::as_str).map_or_else(|| format!("variant-{i}"), String::from);
                let sys = spec.build()?;
                variants.push((label, spec, sys));
            }
        }
        let dim = variants[0].2.dim();
        let initial = self.initial.build(dim)?;
        let boundary = self.boundary.build(dim)?;
        for (name, d) in [("initial", &initial), ("boundary", &boundary)] {
            if !d.total_variation().is_finite() {
                return Err(ScenarioError::Invalid(format!("{name} datum has infinite variation")));
            }
        }
        if self.tasks().contains(&Task::Compare) && variants.len() < 2 {
            return bad("compare needs at least two viscosities");
        }
        Ok(Resolved { scenario: self, variants, initial, boundary })
    }
}
