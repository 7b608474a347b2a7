//! Run configuration: a JSON document naming a scenario and its inputs.
//!
//! Everything except `scenario` and `aggregate` has a default. Loading
//! resolves the defaults, so serializing a loaded config gives the complete
//! set of parameters a run used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregateSpec;
use crate::bath::BathSpec;
use crate::coincidence::{reference_panel, DetectorPair};
use crate::error::{Error, Result};
use crate::excitation::ExcitationOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ModelInfo,
    Jsa,
    Excite,
    ExciteScan,
    Propagate,
    Coincidence,
    PanelStudy,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::ModelInfo,
        Scenario::Jsa,
        Scenario::Excite,
        Scenario::ExciteScan,
        Scenario::Propagate,
        Scenario::Coincidence,
        Scenario::PanelStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ModelInfo => "model-info",
            Scenario::Jsa => "jsa",
            Scenario::Excite => "excite",
            Scenario::ExciteScan => "excite-scan",
            Scenario::Propagate => "propagate",
            Scenario::Coincidence => "coincidence",
            Scenario::PanelStudy => "panel-study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    #[default]
    Entangled,
    Coherent,
}

/// Driving field. Either `target` (a two-exciton state, numbered from 1,
/// hit with degenerate photons at half its energy) or both `omega1` and
/// `omega2` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default)]
    pub mode: SourceMode,
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub omega1: Option<f64>,
    #[serde(default)]
    pub omega2: Option<f64>,
    /// Defaults to omega1 + omega2.
    #[serde(default)]
    pub pump_center: Option<f64>,
    #[serde(default = "default_tau0")]
    pub tau0: f64,
    #[serde(default)]
    pub t1: f64,
    #[serde(default = "default_t2")]
    pub t2: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub e0: f64,
    /// Gaussian width of each coherent pulse, cm⁻¹. Defaults to the width
    /// matched to the entangled pump.
    #[serde(default)]
    pub coherent_width: Option<f64>,
}

fn default_tau0() -> f64 {
    150.0
}
fn default_t2() -> f64 {
    10.0
}
fn one() -> f64 {
    1.0
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mode: SourceMode::Entangled,
            target: None,
            omega1: None,
            omega2: None,
            pump_center: None,
            tau0: default_tau0(),
            t1: 0.0,
            t2: default_t2(),
            alpha: 1.0,
            e0: 1.0,
            coherent_width: None,
        }
    }
}

/// Evenly spaced axis, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        crate::coincidence::linspace(self.start, self.stop, self.n)
    }
}

/// Where the two-exciton population comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Prepared by the configured source.
    #[default]
    Excite,
    /// All population in one two-exciton state, numbered from 1.
    State(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    #[default]
    Degenerate,
    Mediated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub mode: ScanMode,
    /// Two-exciton targets numbered from 1; every state when omitted.
    #[serde(default)]
    pub targets: Option<Vec<usize>>,
    /// One-exciton pairs numbered from 1, for mediated scans.
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
}

fn default_times() -> Vec<f64> {
    vec![50.0, 100.0, 250.0, 1000.0]
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            initial: InitialState::Excite,
            times: default_times(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoincidenceConfig {
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_detectors")]
    pub detectors: DetectorPair,
    #[serde(default)]
    pub tw1: f64,
    #[serde(default = "default_tw2")]
    pub tw2: f64,
    /// Centers of the first-photon (f → e) gate; spans the bright
    /// transitions when omitted.
    #[serde(default)]
    pub fe_axis: Option<Axis>,
    /// Centers of the second-photon (e → g) gate.
    #[serde(default)]
    pub eg_axis: Option<Axis>,
    /// Points per automatic axis.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_detectors() -> DetectorPair {
    reference_panel().detectors
}
fn default_tw2() -> f64 {
    100.0
}
fn default_points() -> usize {
    128
}

impl Default for CoincidenceConfig {
    fn default() -> Self {
        Self {
            initial: InitialState::Excite,
            detectors: default_detectors(),
            tw1: 0.0,
            tw2: default_tw2(),
            fe_axis: None,
            eg_axis: None,
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaConfig {
    /// Signal frequencies; centered on omega1 when omitted.
    #[serde(default)]
    pub axis_a: Option<Axis>,
    #[serde(default)]
    pub axis_b: Option<Axis>,
    #[serde(default = "default_jsa_points")]
    pub points: usize,
}

fn default_jsa_points() -> usize {
    101
}

impl Default for JsaConfig {
    fn default() -> Self {
        Self {
            axis_a: None,
            axis_b: None,
            points: default_jsa_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Path to an aggregate JSON file (relative to the config file), or
    /// `"bundled"`.
    pub aggregate: String,
    /// Bundled bath when omitted.
    #[serde(default)]
    pub bath: Option<BathSpec>,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub excitation: ExcitationOptions,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub propagate: PropagateConfig,
    #[serde(default)]
    pub coincidence: CoincidenceConfig,
    #[serde(default)]
    pub jsa: JsaConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Worker threads; all cores when omitted.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Reserved; no scenario draws random numbers.
    #[serde(default)]
    pub seed: u64,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// A config for `scenario` on the bundled inputs with every default.
    pub fn bundled(scenario: Scenario) -> Self {
        let mut cfg: RunConfig = serde_json::from_value(serde_json::json!({
            "scenario": scenario,
            "aggregate": "bundled",
        }))
        .expect("default config is valid");
        cfg.resolve_defaults();
        cfg
    }

    fn resolve_defaults(&mut self) {
        if self.bath.is_none() {
            self.bath = Some(BathSpec::bundled());
        }
    }

    pub fn bath(&self) -> BathSpec {
        self.bath.clone().unwrap_or_else(BathSpec::bundled)
    }

    pub fn aggregate_path(&self) -> Option<PathBuf> {
        if self.aggregate == "bundled" {
            None
        } else {
            Some(self.base_dir.join(&self.aggregate))
        }
    }

    pub fn load_aggregate(&self) -> Result<AggregateSpec> {
        match self.aggregate_path() {
            None => Ok(AggregateSpec::bundled()),
            Some(p) => AggregateSpec::from_file(&p),
        }
    }

    /// Output directory, relative paths taken from the working directory.
    pub fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    /// Every problem with the config, one message per field.
    pub fn problems(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                bad.push(msg);
            }
        };

        match self.aggregate_path() {
            Some(p) => check(p.is_file(), format!("aggregate: file {} does not exist", p.display())),
            None => {}
        }
        if let Some(b) = &self.bath {
            if let Err(e) = b.validate() {
                check(false, format!("bath: {e}"));
            }
        }

        let s = &self.source;
        let needs_source = match self.scenario {
            Scenario::Jsa | Scenario::Excite => true,
            Scenario::Propagate => self.propagate.initial == InitialState::Excite,
            Scenario::Coincidence | Scenario::PanelStudy => self.coincidence.initial == InitialState::Excite,
            Scenario::ModelInfo | Scenario::ExciteScan => false,
        };
        if needs_source && s.target.is_none() && (s.omega1.is_none() || s.omega2.is_none()) {
            check(false, "source: give either target or both omega1 and omega2".into());
        }
        if s.target.is_some() && (s.omega1.is_some() || s.omega2.is_some()) {
            check(false, "source: target and omega1/omega2 are mutually exclusive".into());
        }
        check(s.target != Some(0), "source.target: states are numbered from 1".into());
        for (name, v) in [("omega1", s.omega1), ("omega2", s.omega2), ("pump_center", s.pump_center)] {
            if let Some(v) = v {
                check(v > 0.0 && v < 1e6, format!("source.{name}: {v} outside (0, 1e6) cm^-1"));
            }
        }
        check(s.tau0 > 0.0 && s.tau0 <= 1e4, format!("source.tau0: {} outside (0, 1e4] fs", s.tau0));
        check(s.t1 >= 0.0 && s.t1 <= 1e3, format!("source.t1: {} outside [0, 1e3] fs", s.t1));
        check(
            s.t2 >= s.t1 && s.t2 <= 1e3,
            format!("source.t2: {} must lie in [t1, 1e3] fs", s.t2),
        );
        check(s.alpha > 0.0 && s.alpha.is_finite(), format!("source.alpha: {} must be > 0", s.alpha));
        check(s.e0.is_finite(), "source.e0: must be finite".into());
        if let Some(w) = s.coherent_width {
            check(w > 0.0 && w < 1e5, format!("source.coherent_width: {w} outside (0, 1e5) cm^-1"));
        }
        if s.mode == SourceMode::Coherent && self.scenario == Scenario::ExciteScan {
            check(false, "source.mode: excite-scan drives with entangled pairs only".into());
        }

        if let Err(e) = self.excitation.validate() {
            check(false, format!("excitation: {e}"));
        }

        if let Some(t) = &self.scan.targets {
            check(!t.is_empty(), "scan.targets: empty list".into());
            check(!t.contains(&0), "scan.targets: states are numbered from 1".into());
        }
        if self.scan.mode == ScanMode::Mediated && self.scenario == Scenario::ExciteScan {
            check(!self.scan.pairs.is_empty(), "scan.pairs: required for a mediated scan".into());
        }
        check(
            self.scan.pairs.iter().all(|p| p[0] > 0 && p[1] > 0),
            "scan.pairs: states are numbered from 1".into(),
        );

        for (name, init) in [("propagate", self.propagate.initial), ("coincidence", self.coincidence.initial)] {
            check(init != InitialState::State(0), format!("{name}.initial: states are numbered from 1"));
        }
        let times = &self.propagate.times;
        check(!times.is_empty(), "propagate.times: empty list".into());
        check(
            times.iter().all(|t| t.is_finite() && *t >= 0.0 && *t <= 1e6),
            "propagate.times: every time must lie in [0, 1e6] fs".into(),
        );
        check(
            times.windows(2).all(|w| w[1] >= w[0]),
            "propagate.times: must be non-decreasing".into(),
        );

        let c = &self.coincidence;
        for (name, f) in [("fe", &c.detectors.fe), ("eg", &c.detectors.eg)] {
            if let Err(e) = f.validate() {
                check(false, format!("coincidence.detectors.{name}: {e}"));
            }
            check(
                f.sigma_omega <= 1e4 && f.sigma_t <= 1e4,
                format!("coincidence.detectors.{name}: widths above 1e4 cm^-1"),
            );
        }
        for (name, t) in [("tw1", c.tw1), ("tw2", c.tw2)] {
            check(t.is_finite() && (0.0..=1e6).contains(&t), format!("coincidence.{name}: {t} outside [0, 1e6] fs"));
        }
        check((1..=4096).contains(&c.points), format!("coincidence.points: {} outside 1..=4096", c.points));
        check((1..=4096).contains(&self.jsa.points), format!("jsa.points: {} outside 1..=4096", self.jsa.points));
        let axes = [
            ("coincidence.fe_axis", c.fe_axis),
            ("coincidence.eg_axis", c.eg_axis),
            ("jsa.axis_a", self.jsa.axis_a),
            ("jsa.axis_b", self.jsa.axis_b),
        ];
        for (name, axis) in axes {
            if let Some(a) = axis {
                check(
                    a.start.is_finite() && a.stop.is_finite() && (1..=4096).contains(&a.n),
                    format!("{name}: needs finite ends and 1..=4096 points"),
                );
            }
        }
        if let Some(n) = self.threads {
            check(n >= 1, "threads: must be >= 1".into());
        }
        bad
    }
}

/// Reads, defaults and validates a config, reporting every problem found.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_config_as(path, None)
}

/// As [`load_config`], with `scenario` (when given) replacing the file's
/// scenario, which may then be omitted.
pub fn load_config_as(path: &Path, scenario: Option<Scenario>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_as(&text, &base, scenario)
}

/// As [`load_config`], from text, with relative paths taken from `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    parse_config_as(text, base_dir, None)
}

pub fn parse_config_as(text: &str, base_dir: &Path, scenario: Option<Scenario>) -> Result<RunConfig> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("not valid JSON: {e}")]))?;
    let Some(obj) = value.as_object_mut() else {
        return Err(Error::Config(vec!["config must be a JSON object".into()]));
    };
    if let Some(s) = scenario {
        obj.insert("scenario".into(), serde_json::to_value(s)?);
    }
    let obj = &*obj;
    let missing: Vec<String> = ["scenario", "aggregate"]
        .iter()
        .filter(|k| !obj.contains_key(**k))
        .map(|k| format!("{k}: required field is missing"))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(missing));
    }
    // deserialize each block on its own so one bad block does not hide others
    let mut bad = Vec::new();
    for (key, v) in obj {
        let r = match key.as_str() {
            "source" => serde_json::from_value::<SourceConfig>(v.clone()).err(),
            "bath" => serde_json::from_value::<BathSpec>(v.clone()).err(),
            "excitation" => serde_json::from_value::<ExcitationOptions>(v.clone()).err(),
            "scan" => serde_json::from_value::<ScanConfig>(v.clone()).err(),
            "propagate" => serde_json::from_value::<PropagateConfig>(v.clone()).err(),
            "coincidence" => serde_json::from_value::<CoincidenceConfig>(v.clone()).err(),
            "jsa" => serde_json::from_value::<JsaConfig>(v.clone()).err(),
            "scenario" => serde_json::from_value::<Scenario>(v.clone()).err(),
            _ => None,
        };
        if let Some(e) = r {
            bad.push(format!("{key}: {e}"));
        }
    }
    if !bad.is_empty() {
        return Err(Error::Config(bad));
    }
    let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(vec![e.to_string()]))?;
    cfg.base_dir = base_dir.to_path_buf();
    cfg.resolve_defaults();
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(problems))
    }
}

/// The resolved config as pretty JSON.
pub fn echo_config(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}
