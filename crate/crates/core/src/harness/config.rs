use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::policies::{PolicyKind, DEFAULT_MU};
use crate::scenario::{read_scenario, GridParams, Scenario, ServiceClass, SliceCapacities};
use crate::{Error, Result};

/// The swept parameter. Capacity axes take multipliers of the base slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ServiceCount,
    Alpha,
    CpuCapacity,
    StorageCapacity,
    Fronthaul,
    Backhaul,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::ServiceCount,
        Axis::Alpha,
        Axis::CpuCapacity,
        Axis::StorageCapacity,
        Axis::Fronthaul,
        Axis::Backhaul,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::ServiceCount => "service_count",
            Axis::Alpha => "alpha",
            Axis::CpuCapacity => "cpu_capacity",
            Axis::StorageCapacity => "storage_capacity",
            Axis::Fronthaul => "fronthaul",
            Axis::Backhaul => "backhaul",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 160 m x 160 m, 4 hosts, 120 terminals.
    PaperDesk,
    /// 400 m x 400 m, 12 hosts, 1200 terminals.
    Paper,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperDesk => "paper-desk",
            Preset::Paper => "paper",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Preset::PaperDesk, Preset::Paper].into_iter().find(|p| p.name() == name)
    }

    /// Grid parameters with `slice` as the per-host slice. With
    /// `mesh_backhaul` the desk preset rescales the per-link backhaul to its
    /// smaller mesh; otherwise the slice is used verbatim.
    pub fn params(self, slice: SliceCapacities, mesh_backhaul: bool) -> GridParams {
        match self {
            Preset::Paper => GridParams::paper().with_slice(slice),
            Preset::PaperDesk if mesh_backhaul => GridParams::desk_with(slice),
            Preset::PaperDesk => GridParams::desk_with(slice.clone()).with_slice(slice),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceName {
    ScenA,
    ScenB,
}

/// A named slice or explicit capacities in canonical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SliceSpec {
    Named(SliceName),
    Custom(SliceCapacities),
}

impl SliceSpec {
    pub fn capacities(&self) -> SliceCapacities {
        match self {
            SliceSpec::Named(SliceName::ScenA) => SliceCapacities::scen_a(),
            SliceSpec::Named(SliceName::ScenB) => SliceCapacities::scen_b(),
            SliceSpec::Custom(c) => c.clone(),
        }
    }
}

/// A request template: `"VR"`, `"AC"` or a full class table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassSpec {
    Named(String),
    Custom(ServiceClass),
}

impl ClassSpec {
    pub fn resolve(&self) -> Result<ServiceClass> {
        match self {
            ClassSpec::Named(n) if n == "VR" => Ok(ServiceClass::vr()),
            ClassSpec::Named(n) if n == "AC" => Ok(ServiceClass::ac()),
            ClassSpec::Named(n) => Err(Error::Config(format!("unknown service class `{n}` (expected VR or AC)"))),
            ClassSpec::Custom(c) => Ok(c.clone()),
        }
    }
}

/// Where instances come from: a generated preset or a fixed scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Per-host slice of a preset; Scen A when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceSpec>,
    #[serde(default = "yes")]
    pub mesh_backhaul: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: Some(Preset::PaperDesk),
            file: None,
            slice: None,
            mesh_backhaul: true,
        }
    }
}

impl ScenarioConfig {
    pub fn base_slice(&self) -> SliceCapacities {
        self.slice.as_ref().map_or_else(SliceCapacities::scen_a, SliceSpec::capacities)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestConfig {
    pub service_count: usize,
    #[serde(default)]
    pub alpha: f64,
    /// Request `r` uses class `r mod classes.len()`.
    #[serde(default = "default_classes")]
    pub classes: Vec<ClassSpec>,
    /// Points of interest as fractions of the area side.
    #[serde(default = "default_pois")]
    pub pois: Vec<[f64; 2]>,
}

impl Default for RequestConfig {
    fn default() -> Self {
        RequestConfig {
            service_count: 20,
            alpha: 0.0,
            classes: default_classes(),
            pois: default_pois(),
        }
    }
}

/// One sweep: for every axis value and replication an instance is drawn and
/// every listed policy runs on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Wall-clock budget of one exact run, seconds.
    #[serde(default = "default_budget")]
    pub exact_budget_s: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub requests: RequestConfig,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn default_budget() -> f64 {
    60.0
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn default_classes() -> Vec<ClassSpec> {
    vec![ClassSpec::Named("VR".into())]
}

fn default_pois() -> Vec<[f64; 2]> {
    vec![[0.25, 0.25], [0.75, 0.75]]
}

impl ExperimentConfig {
    /// A desk sweep with default requests and seeds.
    pub fn new(axis: Axis, values: Vec<f64>, policies: Vec<PolicyKind>) -> Self {
        ExperimentConfig {
            axis,
            values,
            policies,
            replications: 1,
            base_seed: 0,
            exact_budget_s: default_budget(),
            mu: DEFAULT_MU,
            scenario: ScenarioConfig::default(),
            requests: RequestConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative scenario file is resolved against the
    /// config's directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.scenario.file, path.parent()) {
            if f.is_relative() {
                cfg.scenario.file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization is infallible")
    }

    pub fn exact_budget(&self) -> Duration {
        Duration::from_secs_f64(self.exact_budget_s)
    }

    pub fn classes(&self) -> Result<Vec<ServiceClass>> {
        self.requests.classes.iter().map(ClassSpec::resolve).collect()
    }

    /// The fixed scenario of a file-based sweep.
    pub fn load_base_scenario(&self) -> Result<Option<Scenario>> {
        self.scenario.file.as_ref().map(|f| read_scenario(f).map(|(s, _)| s)).transpose()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications < 1 {
            return bad("replications must be >= 1".into());
        }
        if self.values.is_empty() {
            return bad("values must not be empty".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("values must be strictly increasing".into());
        }
        match self.axis {
            Axis::ServiceCount => {
                if self.values.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                    return bad("service_count values must be whole numbers >= 0".into());
                }
            }
            _ => {
                if self.values.iter().any(|&v| v < 0.0) {
                    return bad(format!("{} values must be >= 0", self.axis.name()));
                }
            }
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        if self.policies.iter().collect::<BTreeSet<_>>().len() != self.policies.len() {
            return bad("policies must not repeat".into());
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1], got {}", self.mu));
        }
        if self.policies.contains(&PolicyKind::Exact) && !(self.exact_budget_s > 0.0 && self.exact_budget_s.is_finite()) {
            return bad("the exact policy needs a finite exact_budget_s > 0".into());
        }
        let sc = &self.scenario;
        match (&sc.preset, &sc.file) {
            (Some(_), Some(_)) => return bad("scenario takes either `preset` or `file`, not both".into()),
            (None, None) => return bad("scenario needs a `preset` or a `file`".into()),
            (None, Some(_)) if sc.slice.is_some() => return bad("`slice` applies to presets only".into()),
            _ => {}
        }
        let r = &self.requests;
        if !(r.alpha >= 0.0) {
            return bad("alpha must be >= 0".into());
        }
        if r.classes.is_empty() {
            return bad("at least one request class is required".into());
        }
        if r.pois.is_empty() {
            return bad("at least one point of interest is required".into());
        }
        self.classes()?;
        Ok(())
    }
}
