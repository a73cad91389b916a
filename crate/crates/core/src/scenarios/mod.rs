//! Scenario registry: the worked families, their checks, and backend comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Backend, CoverParams};

mod custom;
mod expected;
mod registry;
mod report;

pub use custom::CustomScenario;
pub use expected::{surface_curvature, surface_lambda, torus_curvature, torus_lambda};
pub use report::{Check, CheckKind, Environment, FormTable, VerificationReport, REPORT_SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ScenarioId {
    /// `T² × ℝ²`, `B = z1 dx1 + z2 dx2`, `Q = ξ²`.
    Ex71,
    /// The same family restricted to the unit circle.
    Ex71S1,
    /// Genus-`g` surface fibres.
    Ex75 { g: usize },
    /// `T^k × ℝ^k`, `Q = ξ^k`.
    Ex78 { k: usize },
    /// Pushforward of the Poincaré bundle; only `k = 1`.
    Ex715 { k: usize },
    /// `∫_T ω^k` for the Poincaré curvature on `T^k × T̂^k`.
    Ex715Curvature { k: usize },
    GvFormal,
    Custom(PathBuf),
}

impl ScenarioId {
    /// Every built-in scenario with its default parameter.
    pub fn builtin() -> Vec<ScenarioId> {
        use ScenarioId::*;
        vec![Ex71, Ex71S1, Ex75 { g: 2 }, Ex78 { k: 3 }, Ex715 { k: 1 }, Ex715Curvature { k: 2 }, GvFormal]
    }

    pub fn supported(&self) -> Vec<Backend> {
        use Backend::*;
        match self {
            ScenarioId::Ex71 => vec![Classical, Formal, ChartShuffle, ChartShuffleNumeric],
            ScenarioId::Ex71S1 => vec![Classical, Formal],
            ScenarioId::Ex75 { .. } => vec![Formal],
            ScenarioId::Ex78 { k } if *k <= 2 => vec![Classical, Formal, ChartShuffle, ChartShuffleNumeric],
            ScenarioId::Ex78 { .. } => vec![Classical, Formal],
            ScenarioId::Ex715 { .. } => vec![ChartShuffle],
            ScenarioId::Ex715Curvature { .. } | ScenarioId::GvFormal => vec![Classical],
            ScenarioId::Custom(_) => vec![Classical, Formal, ChartShuffle, ChartShuffleNumeric],
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioId::Ex71 => write!(f, "ex7_1"),
            ScenarioId::Ex71S1 => write!(f, "ex7_1_s1"),
            ScenarioId::Ex75 { g } => write!(f, "ex7_5(g={g})"),
            ScenarioId::Ex78 { k } => write!(f, "ex7_8(k={k})"),
            ScenarioId::Ex715 { k } => write!(f, "ex7_15(k={k})"),
            ScenarioId::Ex715Curvature { k } => write!(f, "ex7_15_curvature(k={k})"),
            ScenarioId::GvFormal => write!(f, "gv_formal"),
            ScenarioId::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    /// Accepts `name`, `name(v)` and `name(p=v)`; a path ending in `.json`
    /// or prefixed by `custom:` names a custom scenario file.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_prefix("custom:") {
            return Ok(ScenarioId::Custom(PathBuf::from(p)));
        }
        if s.ends_with(".json") {
            return Ok(ScenarioId::Custom(PathBuf::from(s)));
        }
        let (name, arg) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
                (&s[..i], Some(inner))
            }
            None => (s, None),
        };
        let param = |key: &str, default: usize| -> Result<usize> {
            let Some(a) = arg else { return Ok(default) };
            let v = match a.split_once('=') {
                Some((k, v)) if k.trim() == key => v,
                Some((k, _)) => return Err(Error::Config(format!("`{name}` takes `{key}`, not `{}`", k.trim()))),
                None => a,
            };
            v.trim().parse().map_err(|_| Error::Config(format!("`{key}` must be a positive integer in `{s}`")))
        };
        let no_arg = |id: ScenarioId| match arg {
            Some(_) => Err(Error::Config(format!("`{name}` takes no parameter"))),
            None => Ok(id),
        };
        let id = match name {
            "ex7_1" => no_arg(ScenarioId::Ex71)?,
            "ex7_1_s1" => no_arg(ScenarioId::Ex71S1)?,
            "gv_formal" => no_arg(ScenarioId::GvFormal)?,
            "ex7_5" => ScenarioId::Ex75 { g: param("g", 2)? },
            "ex7_8" => ScenarioId::Ex78 { k: param("k", 2)? },
            "ex7_15" => ScenarioId::Ex715 { k: param("k", 1)? },
            "ex7_15_curvature" => ScenarioId::Ex715Curvature { k: param("k", 2)? },
            _ => {
                let known: Vec<String> = ScenarioId::builtin().iter().map(ToString::to_string).collect();
                return Err(Error::Config(format!("unknown scenario `{s}`; known: {}, or a .json file", known.join(", "))));
            }
        };
        match id {
            ScenarioId::Ex75 { g: 0 } | ScenarioId::Ex78 { k: 0 } | ScenarioId::Ex715Curvature { k: 0 } => {
                Err(Error::Config(format!("`{s}`: the parameter must be at least 1")))
            }
            ScenarioId::Ex715 { k } if k != 1 => {
                Err(Error::Config(format!("`{s}`: the pushforward is implemented for k = 1; use ex7_15_curvature(k={k}) for the curvature")))
            }
            id => Ok(id),
        }
    }
}

impl From<ScenarioId> for String {
    fn from(id: ScenarioId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for ScenarioId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendSelection {
    /// Classical integration and the exact chart-shuffle integrator.
    Exact,
    Numeric,
    Formal,
    All,
}

impl FromStr for BackendSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BackendSelection::Exact),
            "numeric" => Ok(BackendSelection::Numeric),
            "formal" => Ok(BackendSelection::Formal),
            "all" => Ok(BackendSelection::All),
            _ => Err(Error::Config(format!("unknown backend `{s}`; expected exact, numeric, formal or all"))),
        }
    }
}

impl BackendSelection {
    fn backends(self) -> &'static [Backend] {
        use Backend::*;
        match self {
            BackendSelection::Exact => &[Classical, ChartShuffle],
            BackendSelection::Numeric => &[ChartShuffleNumeric],
            BackendSelection::Formal => &[Formal],
            BackendSelection::All => &[Classical, Formal, ChartShuffle, ChartShuffleNumeric],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub backend: BackendSelection,
    /// Tolerance for numeric checks; exact checks always require equality.
    pub tolerance: f64,
    pub cover: CoverParams,
    #[serde(default)]
    pub timings: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioId) -> Self {
        ScenarioConfig { scenario, backend: BackendSelection::All, tolerance: 1e-7, cover: CoverParams::default(), timings: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.cover.arcs < 3 {
            return Err(Error::Config(format!("at least 3 cover arcs are needed, got {}", self.cover.arcs)));
        }
        if self.cover.quad_order == 0 {
            return Err(Error::Config("quadrature order must be positive".into()));
        }
        if let ScenarioId::Custom(p) = &self.scenario {
            if !p.exists() {
                return Err(Error::Config(format!("custom scenario file {} does not exist", p.display())));
            }
        }
        self.backends().map(|_| ())
    }

    /// Selected backends the scenario supports, in a fixed order.
    pub fn backends(&self) -> Result<Vec<Backend>> {
        let supported = self.scenario.supported();
        let chosen: Vec<Backend> = self.backend.backends().iter().copied().filter(|b| supported.contains(b)).collect();
        if chosen.is_empty() {
            return Err(Error::Config(format!(
                "scenario {} does not support backend {:?}; it supports {:?}",
                self.scenario, self.backend, supported
            )));
        }
        Ok(chosen)
    }
}

/// Optional overrides read from a config file; unset fields keep their defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub scenario: Option<ScenarioId>,
    pub backend: Option<BackendSelection>,
    pub tolerance: Option<f64>,
    pub cover_arcs: Option<usize>,
    pub quad_order: Option<usize>,
    pub timings: Option<bool>,
}

impl ConfigOverrides {
    /// `self` takes precedence over `lower`.
    pub fn over(self, lower: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            scenario: self.scenario.or(lower.scenario),
            backend: self.backend.or(lower.backend),
            tolerance: self.tolerance.or(lower.tolerance),
            cover_arcs: self.cover_arcs.or(lower.cover_arcs),
            quad_order: self.quad_order.or(lower.quad_order),
            timings: self.timings.or(lower.timings),
        }
    }

    pub fn into_config(self) -> Result<ScenarioConfig> {
        let scenario = self.scenario.ok_or_else(|| Error::Config("no scenario given; pass --scenario <id>".into()))?;
        let mut cfg = ScenarioConfig::new(scenario);
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(a) = self.cover_arcs {
            cfg.cover.arcs = a;
        }
        if let Some(o) = self.quad_order {
            cfg.cover.quad_order = o;
        }
        cfg.timings = self.timings.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Stage timer feeding the optional timings table.
pub(crate) struct Timer {
    start: Instant,
    pub(crate) table: BTreeMap<String, u128>,
}

impl Timer {
    pub(crate) fn new() -> Self {
        Timer { start: Instant::now(), table: BTreeMap::new() }
    }

    pub(crate) fn lap(&mut self, stage: &str) {
        self.table.insert(stage.into(), self.start.elapsed().as_millis());
        self.start = Instant::now();
    }
}

pub(crate) struct Outcome {
    pub(crate) checks: Vec<Check>,
    pub(crate) tables: Vec<FormTable>,
}

fn assemble(cfg: &ScenarioConfig, outcome: Outcome, timer: Timer) -> VerificationReport {
    VerificationReport {
        scenario: cfg.scenario.to_string(),
        config: serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null),
        environment: Environment::for_config(cfg),
        checks: outcome.checks,
        timings_ms: cfg.timings.then_some(timer.table),
        tables: outcome.tables,
    }
}

/// Run every check of the configured scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut timer = Timer::new();
    let outcome = registry::run(cfg, &mut timer)?;
    Ok(assemble(cfg, outcome, timer))
}

/// Only the cross-backend deltas of the configured scenario.
pub fn compare_backends(cfg: &ScenarioConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut timer = Timer::new();
    let outcome = registry::compare(cfg, &mut timer)?;
    Ok(assemble(cfg, outcome, timer))
}
