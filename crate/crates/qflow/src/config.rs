//! Scenario configuration files.
//!
//! A config is a TOML document. `scenario` picks the preset whose values
//! fill every key the file leaves out:
//!
//! ```toml
//! scenario = "two_slit"
//! seed = 42
//! output_dir = "out/two_slit"
//!
//! [constants]
//! hbar = 1.0
//! mass = 1.0
//!
//! [model]          # keys depend on the scenario
//! d = 4.0
//! sigma0 = 0.5
//!
//! [grid]           # carpet / continuity grid
//! x_range = [-12.0, 12.0]
//! nx = 481
//! t_range = [0.0, 2.0]
//! nt = 81
//!
//! [ensemble]
//! n_traj = 200
//! sampling = "uniform_support"   # or "density_weighted"
//! support = [-3.5, 3.5]
//!
//! [integrator]     # save times: save_points equally spaced over grid.t_range
//! rtol = 1e-8
//! atol = 1e-10
//! max_step = inf
//! density_floor = 1e-10
//! save_points = 81
//! ```
//!
//! Unknown keys are rejected with the closest known key as a suggestion.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use qflow_core::carpets::GridSpec;
use qflow_core::trajectories::{EnsembleSpec, IntegratorConfig, Sampling};
use qflow_core::PhysicalConstants;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    TwoSlit,
    CounterPropagating,
    HarmonicTwoLevel,
    Talbot,
    NslitLadder,
    BoxDiffraction,
    Fractal,
    Toymodel,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::TwoSlit,
        Scenario::CounterPropagating,
        Scenario::HarmonicTwoLevel,
        Scenario::Talbot,
        Scenario::NslitLadder,
        Scenario::BoxDiffraction,
        Scenario::Fractal,
        Scenario::Toymodel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoSlit => "two_slit",
            Scenario::CounterPropagating => "counter_propagating",
            Scenario::HarmonicTwoLevel => "harmonic_two_level",
            Scenario::Talbot => "talbot",
            Scenario::NslitLadder => "nslit_ladder",
            Scenario::BoxDiffraction => "box_diffraction",
            Scenario::Fractal => "fractal",
            Scenario::Toymodel => "toymodel",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::TwoSlit => "two Gaussian slits at rest: trajectories, carpet, non-crossing and transport checks",
            Scenario::CounterPropagating => "two packets moving toward each other: velocity and spread exchange",
            Scenario::HarmonicTwoLevel => "two-level harmonic oscillator state: breathing density and its period",
            Scenario::Talbot => "periodic grating: Talbot carpet, recurrences, unit-cell channeling",
            Scenario::NslitLadder => "N-slit gratings in the far field: quantized momentum ladder",
            Scenario::BoxDiffraction => "Gaussian in an infinite well: carpet and recurrence",
            Scenario::Fractal => "square wave in a well: curve-length scaling and fractal dimension",
            Scenario::Toymodel => "effective wall-plus-well potential for the four speed regimes",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_range: [f64; 2],
    pub nx: usize,
    pub t_range: [f64; 2],
    pub nt: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingName {
    DensityWeighted,
    UniformSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_traj: usize,
    pub sampling: SamplingName,
    pub support: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub density_floor: f64,
    pub save_points: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY, density_floor: 1e-10, save_points: 81 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSlitModel {
    pub d: f64,
    pub sigma0: f64,
    /// Density-weighted paths for the transport histogram (0 skips it).
    pub transport_paths: usize,
    pub transport_bins: usize,
    /// Random space-time points for the two-wave decomposition check.
    pub two_wave_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterModel {
    pub d: f64,
    pub sigma_left: f64,
    pub sigma_right: f64,
    pub v: f64,
    pub populations: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicModel {
    pub omega: f64,
    pub levels: [usize; 2],
    pub amplitudes: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TalbotModel {
    pub d: f64,
    pub sigma0: f64,
    /// Highest order kept; the 1e-16 weight rule when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderModel {
    pub d: f64,
    pub sigma0: f64,
    pub slits: Vec<usize>,
    /// Far time as a multiple of the order separation time of the largest
    /// grating, unless `t_far` is given.
    pub separation_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_far: Option<f64>,
    /// Sampled momentum window, in diffraction orders.
    pub orders: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxModel {
    pub d: f64,
    pub sigma0: f64,
    pub n_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalModel {
    pub length: f64,
    pub width: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub k_count: usize,
    /// Snapshot time; τ_r/√2 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Grid points; 32·k_max + 1 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    /// Width of the smooth Gaussian control state.
    pub smooth_sigma0: f64,
    pub trajectory_x0: Vec<f64>,
    pub trajectory_n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyModelCfg {
    pub presets: Vec<String>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelConfig {
    TwoSlit(TwoSlitModel),
    Counter(CounterModel),
    Harmonic(HarmonicModel),
    Talbot(TalbotModel),
    Ladder(LadderModel),
    Box(BoxModel),
    Fractal(FractalModel),
    Toy(ToyModelCfg),
}

impl ModelConfig {
    fn fields(scenario: Scenario) -> &'static [&'static str] {
        match scenario {
            Scenario::TwoSlit => &["d", "sigma0", "transport_paths", "transport_bins", "two_wave_points"],
            Scenario::CounterPropagating => &["d", "sigma_left", "sigma_right", "v", "populations"],
            Scenario::HarmonicTwoLevel => &["omega", "levels", "amplitudes"],
            Scenario::Talbot => &["d", "sigma0", "nmax"],
            Scenario::NslitLadder => &["d", "sigma0", "slits", "separation_factor", "t_far", "orders", "points"],
            Scenario::BoxDiffraction => &["d", "sigma0", "n_terms"],
            Scenario::Fractal => &[
                "length",
                "width",
                "k_min",
                "k_max",
                "k_count",
                "t",
                "nx",
                "smooth_sigma0",
                "trajectory_x0",
                "trajectory_n",
            ],
            Scenario::Toymodel => &["presets", "samples"],
        }
    }

    fn to_value(&self) -> Value {
        let v = match self {
            ModelConfig::TwoSlit(m) => Value::try_from(m),
            ModelConfig::Counter(m) => Value::try_from(m),
            ModelConfig::Harmonic(m) => Value::try_from(m),
            ModelConfig::Talbot(m) => Value::try_from(m),
            ModelConfig::Ladder(m) => Value::try_from(m),
            ModelConfig::Box(m) => Value::try_from(m),
            ModelConfig::Fractal(m) => Value::try_from(m),
            ModelConfig::Toy(m) => Value::try_from(m),
        };
        v.expect("model sections serialize")
    }

    fn from_table(scenario: Scenario, table: Table) -> Result<Self, String> {
        let v = Value::Table(table);
        let r = match scenario {
            Scenario::TwoSlit => v.try_into().map(ModelConfig::TwoSlit),
            Scenario::CounterPropagating => v.try_into().map(ModelConfig::Counter),
            Scenario::HarmonicTwoLevel => v.try_into().map(ModelConfig::Harmonic),
            Scenario::Talbot => v.try_into().map(ModelConfig::Talbot),
            Scenario::NslitLadder => v.try_into().map(ModelConfig::Ladder),
            Scenario::BoxDiffraction => v.try_into().map(ModelConfig::Box),
            Scenario::Fractal => v.try_into().map(ModelConfig::Fractal),
            Scenario::Toymodel => v.try_into().map(ModelConfig::Toy),
        };
        r.map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub constants: ConstantsSection,
    pub model: ModelConfig,
    pub grid: GridSection,
    pub ensemble: EnsembleSection,
    pub integrator: IntegratorSection,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{}parse error: {message}", location(*line, *column))]
    Parse { line: Option<usize>, column: Option<usize>, message: String },

    #[error("{}invalid `{key}`: {message}{}", location(*line, None), suggestion_text(suggestion))]
    Validation { key: String, line: Option<usize>, message: String, suggestion: Option<String> },
}

impl ConfigError {
    /// Dotted key of a validation error.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { key, .. } => Some(key),
            ConfigError::Parse { .. } => None,
        }
    }

    pub fn suggestion(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { suggestion, .. } => suggestion.as_deref(),
            ConfigError::Parse { .. } => None,
        }
    }
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!("line {l}, column {c}: "),
        (Some(l), None) => format!("line {l}: "),
        _ => String::new(),
    }
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default()
}

const TOP_LEVEL: [&str; 8] = ["scenario", "seed", "output_dir", "constants", "model", "grid", "ensemble", "integrator"];
const CONSTANTS_FIELDS: [&str; 2] = ["hbar", "mass"];
const GRID_FIELDS: [&str; 4] = ["x_range", "nx", "t_range", "nt"];
const ENSEMBLE_FIELDS: [&str; 3] = ["n_traj", "sampling", "support"];
const INTEGRATOR_FIELDS: [&str; 5] = ["rtol", "atol", "max_step", "density_floor", "save_points"];

/// Closest candidate by normalized Levenshtein similarity.
fn nearest(key: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::normalized_levenshtein(key, c), *c))
        .filter(|(s, _)| *s >= 0.3)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}

/// 1-based line of `key` inside `[section]` (or the top level).
fn find_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = Some(rest.trim_end_matches(']').trim().to_string());
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    None
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn invalid(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        let dotted = match section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        let line = find_line(self.text, section, key).or_else(|| section.and_then(|s| self.section_line(s)));
        ConfigError::Validation { key: dotted, line, message: message.into(), suggestion: None }
    }

    fn section_line(&self, section: &str) -> Option<usize> {
        self.text.lines().position(|l| l.trim() == format!("[{section}]")).map(|i| i + 1)
    }

    fn unknown(&self, section: Option<&str>, key: &str, known: &[&str]) -> ConfigError {
        let mut e = self.invalid(section, key, "unknown key");
        if let ConfigError::Validation { suggestion, .. } = &mut e {
            *suggestion = nearest(key, known);
        }
        e
    }

    /// Overlays the keys of `user` on `defaults` and deserializes. Type
    /// errors name the first offending key.
    fn merge<T>(
        &self,
        section: &str,
        defaults: Value,
        user: Option<&Value>,
        known: &[&str],
        build: impl Fn(Table) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        let Value::Table(mut base) = defaults else { unreachable!("sections serialize to tables") };
        let Some(user) = user else {
            return build(base).map_err(|m| self.invalid(Some(section), section, m));
        };
        let Value::Table(user) = user else {
            return Err(self.invalid(None, section, "expected a table"));
        };
        for key in user.keys() {
            if !known.contains(&key.as_str()) {
                return Err(self.unknown(Some(section), key, known));
            }
        }
        for (key, value) in user {
            let mut probe = base.clone();
            probe.insert(key.clone(), value.clone());
            if let Err(m) = build(probe) {
                return Err(self.invalid(Some(section), key, m));
            }
            base.insert(key.clone(), value.clone());
        }
        build(base).map_err(|m| self.invalid(Some(section), section, m))
    }
}

fn typed<T: DeserializeOwned>(t: Table) -> Result<T, String> {
    Value::Table(t).try_into().map_err(|e: toml::de::Error| e.to_string())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

impl ScenarioConfig {
    /// Full default configuration of a scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let name = scenario.name();
        let base = |model, grid, ensemble, integrator| Self {
            scenario,
            seed: 42,
            output_dir: PathBuf::from(format!("out/{name}")),
            constants: ConstantsSection::default(),
            model,
            grid,
            ensemble,
            integrator,
        };
        let uniform = |n_traj, lo, hi| EnsembleSection { n_traj, sampling: SamplingName::UniformSupport, support: [lo, hi] };
        let grid = |x: [f64; 2], nx, t: [f64; 2], nt| GridSection { x_range: x, nx, t_range: t, nt };
        let integ = |save_points| IntegratorSection { save_points, ..Default::default() };
        match scenario {
            Scenario::TwoSlit => base(
                ModelConfig::TwoSlit(TwoSlitModel {
                    d: 4.0,
                    sigma0: 0.5,
                    transport_paths: 20000,
                    transport_bins: 50,
                    two_wave_points: 200,
                }),
                grid([-12.0, 12.0], 481, [0.0, 2.0], 81),
                uniform(200, -3.5, 3.5),
                integ(81),
            ),
            Scenario::CounterPropagating => base(
                ModelConfig::Counter(CounterModel {
                    d: 10.0,
                    sigma_left: 1.0,
                    sigma_right: 1.0,
                    v: 2.0,
                    populations: [0.5, 0.5],
                }),
                grid([-25.0, 25.0], 501, [0.0, 10.0], 101),
                EnsembleSection { n_traj: 400, sampling: SamplingName::DensityWeighted, support: [-12.0, 12.0] },
                integ(101),
            ),
            Scenario::HarmonicTwoLevel => base(
                ModelConfig::Harmonic(HarmonicModel { omega: 1.0, levels: [0, 3], amplitudes: [1.0, 1.0] }),
                grid([-5.0, 5.0], 201, [0.0, 4.0 * std::f64::consts::PI / 3.0], 121),
                uniform(40, -2.0, 2.0),
                integ(121),
            ),
            Scenario::Talbot => base(
                ModelConfig::Talbot(TalbotModel { d: 1.0, sigma0: 0.1, nmax: None }),
                grid([-1.5, 1.5], 301, [0.0, 2.0 / std::f64::consts::PI], 201),
                uniform(58, -1.45, 1.45),
                integ(201),
            ),
            Scenario::NslitLadder => base(
                ModelConfig::Ladder(LadderModel {
                    d: 1.0,
                    sigma0: 0.1,
                    slits: vec![3, 11, 51],
                    separation_factor: 1.4,
                    t_far: None,
                    orders: 2.5,
                    points: 2001,
                }),
                grid([-40.0, 40.0], 401, [0.0, 12.0], 121),
                uniform(101, -25.0, 25.0),
                integ(121),
            ),
            Scenario::BoxDiffraction => base(
                ModelConfig::Box(BoxModel { d: 1.0, sigma0: 0.08, n_terms: 30 }),
                grid([-0.5, 0.5], 201, [0.0, 1.0 / std::f64::consts::PI], 201),
                uniform(41, -0.3, 0.3),
                integ(201),
            ),
            Scenario::Fractal => base(
                ModelConfig::Fractal(FractalModel {
                    length: 1.0,
                    width: 0.25,
                    k_min: 16,
                    k_max: 4096,
                    k_count: 9,
                    t: None,
                    nx: None,
                    smooth_sigma0: 0.1,
                    trajectory_x0: vec![0.4, 0.45],
                    trajectory_n: vec![4, 8, 16, 32, 64, 128],
                }),
                grid([0.0, 1.0], 401, [0.0, 1.0 / (2.0 * std::f64::consts::PI)], 101),
                uniform(21, 0.4, 0.6),
                integ(2001),
            ),
            Scenario::Toymodel => base(
                ModelConfig::Toy(ToyModelCfg {
                    presets: ["young", "slow", "fast", "ballistic"].map(String::from).to_vec(),
                    samples: 2001,
                }),
                grid([-20.0, 1.0], 211, [0.0, 1.0], 2),
                uniform(1, -1.0, 0.0),
                integ(2),
            ),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = toml::from_str(text).map_err(|e: toml::de::Error| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let (l, c) = line_col(text, span.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })?;
        let ctx = Ctx { text };

        for key in table.keys() {
            if !TOP_LEVEL.contains(&key.as_str()) {
                return Err(ctx.unknown(None, key, &TOP_LEVEL));
            }
        }
        let scenario = match table.get("scenario") {
            Some(Value::String(s)) => Scenario::from_name(s).ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                let mut e = ctx.invalid(None, "scenario", format!("unknown scenario {s:?}"));
                if let ConfigError::Validation { suggestion, .. } = &mut e {
                    *suggestion = nearest(s, &names);
                }
                e
            })?,
            Some(_) => return Err(ctx.invalid(None, "scenario", "expected a string")),
            None => return Err(ctx.invalid(None, "scenario", "missing; one of the preset names is required")),
        };
        let mut cfg = Self::preset(scenario);

        match table.get("seed") {
            Some(Value::Integer(s)) if *s >= 0 => cfg.seed = *s as u64,
            Some(_) => return Err(ctx.invalid(None, "seed", "expected a non-negative integer")),
            None => {}
        }
        match table.get("output_dir") {
            Some(Value::String(s)) if !s.is_empty() => cfg.output_dir = PathBuf::from(s),
            Some(_) => return Err(ctx.invalid(None, "output_dir", "expected a nonempty string")),
            None => {}
        }

        cfg.constants = ctx.merge(
            "constants",
            Value::try_from(cfg.constants).unwrap(),
            table.get("constants"),
            &CONSTANTS_FIELDS,
            typed,
        )?;
        cfg.grid = ctx.merge("grid", Value::try_from(cfg.grid).unwrap(), table.get("grid"), &GRID_FIELDS, typed)?;
        cfg.ensemble =
            ctx.merge("ensemble", Value::try_from(cfg.ensemble).unwrap(), table.get("ensemble"), &ENSEMBLE_FIELDS, typed)?;
        cfg.integrator = ctx.merge(
            "integrator",
            Value::try_from(cfg.integrator).unwrap(),
            table.get("integrator"),
            &INTEGRATOR_FIELDS,
            typed,
        )?;
        cfg.model = ctx.merge("model", cfg.model.to_value(), table.get("model"), ModelConfig::fields(scenario), |t| {
            ModelConfig::from_table(scenario, t)
        })?;

        cfg.validate_with(&ctx)?;
        Ok(cfg)
    }

    /// Checks semantic constraints; errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(&Ctx { text: "" })
    }

    fn validate_with(&self, ctx: &Ctx<'_>) -> Result<(), ConfigError> {
        let err = |section: &str, key: &str, msg: &str| Err(ctx.invalid(Some(section), key, msg));
        let positive = |section: &str, key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                err(section, key, "must be positive and finite")
            }
        };
        if self.seed > i64::MAX as u64 {
            return Err(ctx.invalid(None, "seed", "must fit in a signed 64-bit integer"));
        }
        positive("constants", "hbar", self.constants.hbar)?;
        positive("constants", "mass", self.constants.mass)?;

        let g = &self.grid;
        if !(g.x_range[0] < g.x_range[1]) || !g.x_range.iter().all(|v| v.is_finite()) {
            return err("grid", "x_range", "needs finite xmin < xmax");
        }
        if !(g.t_range[0] < g.t_range[1]) || !g.t_range.iter().all(|v| v.is_finite()) {
            return err("grid", "t_range", "needs finite tmin < tmax");
        }
        if g.nx < 2 {
            return err("grid", "nx", "needs at least 2 points");
        }
        if g.nt < 2 {
            return err("grid", "nt", "needs at least 2 points");
        }
        let e = &self.ensemble;
        if e.n_traj == 0 {
            return err("ensemble", "n_traj", "needs at least one trajectory");
        }
        if !(e.support[0] < e.support[1]) || !e.support.iter().all(|v| v.is_finite()) {
            return err("ensemble", "support", "needs finite xmin < xmax");
        }
        let i = &self.integrator;
        positive("integrator", "rtol", i.rtol)?;
        positive("integrator", "atol", i.atol)?;
        if !(i.max_step > 0.0) {
            return err("integrator", "max_step", "must be positive");
        }
        positive("integrator", "density_floor", i.density_floor)?;
        if i.save_points < 2 {
            return err("integrator", "save_points", "needs at least 2 points");
        }

        match &self.model {
            ModelConfig::TwoSlit(m) => {
                positive("model", "d", m.d)?;
                positive("model", "sigma0", m.sigma0)?;
                if m.transport_bins == 0 {
                    return err("model", "transport_bins", "needs at least one bin");
                }
            }
            ModelConfig::Counter(m) => {
                positive("model", "d", m.d)?;
                positive("model", "sigma_left", m.sigma_left)?;
                positive("model", "sigma_right", m.sigma_right)?;
                positive("model", "v", m.v)?;
                if !m.populations.iter().all(|p| *p > 0.0 && p.is_finite()) {
                    return err("model", "populations", "must be positive");
                }
            }
            ModelConfig::Harmonic(m) => {
                positive("model", "omega", m.omega)?;
                if m.levels[0] == m.levels[1] {
                    return err("model", "levels", "must be two distinct levels");
                }
                if !m.amplitudes.iter().all(|a| a.is_finite()) || m.amplitudes.iter().all(|a| *a == 0.0) {
                    return err("model", "amplitudes", "must be finite and not all zero");
                }
            }
            ModelConfig::Talbot(m) => {
                positive("model", "d", m.d)?;
                positive("model", "sigma0", m.sigma0)?;
            }
            ModelConfig::Ladder(m) => {
                positive("model", "d", m.d)?;
                positive("model", "sigma0", m.sigma0)?;
                if m.slits.is_empty() || m.slits.contains(&0) {
                    return err("model", "slits", "needs at least one positive slit count");
                }
                positive("model", "separation_factor", m.separation_factor)?;
                if let Some(t) = m.t_far {
                    positive("model", "t_far", t)?;
                }
                positive("model", "orders", m.orders)?;
                if m.points < 3 {
                    return err("model", "points", "needs at least 3 points");
                }
            }
            ModelConfig::Box(m) => {
                positive("model", "d", m.d)?;
                positive("model", "sigma0", m.sigma0)?;
                if m.n_terms == 0 {
                    return err("model", "n_terms", "needs at least one term");
                }
            }
            ModelConfig::Fractal(m) => {
                positive("model", "length", m.length)?;
                positive("model", "width", m.width)?;
                if m.width > m.length {
                    return err("model", "width", "must not exceed length");
                }
                if m.k_min == 0 || m.k_min >= m.k_max {
                    return err("model", "k_min", "needs 0 < k_min < k_max");
                }
                if m.k_count < 4 {
                    return err("model", "k_count", "the dimension fit needs at least 4 values");
                }
                if let Some(t) = m.t {
                    if !(t >= 0.0 && t.is_finite()) {
                        return err("model", "t", "must be finite and non-negative");
                    }
                }
                if m.nx.is_some_and(|n| n < 2) {
                    return err("model", "nx", "needs at least 2 points");
                }
                positive("model", "smooth_sigma0", m.smooth_sigma0)?;
                if m.trajectory_x0.iter().any(|x| !(*x > 0.0 && *x < m.length)) {
                    return err("model", "trajectory_x0", "must lie strictly inside the well");
                }
                if m.trajectory_n.windows(2).any(|w| w[1] <= w[0]) || m.trajectory_n.contains(&0) {
                    return err("model", "trajectory_n", "must be positive and strictly increasing");
                }
            }
            ModelConfig::Toy(m) => {
                if m.presets.is_empty() {
                    return err("model", "presets", "needs at least one preset");
                }
                for p in &m.presets {
                    if qflow_core::toymodel::ToyPreset::by_name(p).is_none() {
                        let names: Vec<&str> = qflow_core::toymodel::TOY_PRESETS.iter().map(|p| p.name).collect();
                        let mut e = ctx.invalid(Some("model"), "presets", format!("unknown toy preset {p:?}"));
                        if let ConfigError::Validation { suggestion, .. } = &mut e {
                            *suggestion = nearest(p, &names);
                        }
                        return Err(e);
                    }
                }
                if m.samples < 2 {
                    return err("model", "samples", "needs at least 2 samples");
                }
            }
        }
        Ok(())
    }

    /// TOML text that parses back to an equal config.
    pub fn to_toml_string(&self) -> String {
        let mut t = Table::new();
        t.insert("scenario".into(), Value::String(self.scenario.name().into()));
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert("output_dir".into(), Value::String(self.output_dir.to_string_lossy().into_owned()));
        t.insert("constants".into(), Value::try_from(self.constants).unwrap());
        t.insert("model".into(), self.model.to_value());
        t.insert("grid".into(), Value::try_from(self.grid).unwrap());
        t.insert("ensemble".into(), Value::try_from(self.ensemble).unwrap());
        t.insert("integrator".into(), Value::try_from(self.integrator).unwrap());
        toml::to_string(&t).expect("config serializes")
    }

    pub fn physical_constants(&self) -> PhysicalConstants {
        PhysicalConstants { hbar: self.constants.hbar, mass: self.constants.mass }
    }

    pub fn grid_spec(&self) -> GridSpec {
        let g = &self.grid;
        GridSpec { x_range: (g.x_range[0], g.x_range[1]), nx: g.nx, t_range: (g.t_range[0], g.t_range[1]), nt: g.nt }
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            n_traj: self.ensemble.n_traj,
            sampling: match self.ensemble.sampling {
                SamplingName::DensityWeighted => Sampling::DensityWeighted,
                SamplingName::UniformSupport => Sampling::UniformSupport,
            },
            support: (self.ensemble.support[0], self.ensemble.support[1]),
            seed: self.seed,
        }
    }

    /// Integrator settings with save times spread over `t_range`.
    pub fn integrator_config(&self, t_range: (f64, f64)) -> IntegratorConfig {
        let i = &self.integrator;
        IntegratorConfig {
            rtol: i.rtol,
            atol: i.atol,
            max_step: i.max_step,
            density_floor: i.density_floor,
            reference_density: None,
            save_times: qflow_core::carpets::linspace(t_range.0, t_range.1, i.save_points),
        }
    }
}
