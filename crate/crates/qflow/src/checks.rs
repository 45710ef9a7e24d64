//! Invariant results gathered during a run, serialized to checks.json.

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity.
    pub value: f64,
    /// Threshold the value was compared with, if any.
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    /// Passes when `value < limit`.
    pub fn below(name: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value < limit, value, limit: Some(limit), detail: detail.into() }
    }

    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit: Some(limit), detail: detail.into() }
    }

    /// Passes when `value > limit`.
    pub fn above(name: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value > limit, value, limit: Some(limit), detail: detail.into() }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value >= limit, value, limit: Some(limit), detail: detail.into() }
    }

    /// Passes when `lo <= value <= hi`; the limit recorded is `hi`.
    pub fn within(name: &str, value: f64, lo: f64, hi: f64, detail: impl Into<String>) -> Self {
        let detail = format!("expected [{lo}, {hi}]; {}", detail.into());
        Self { name: name.into(), passed: lo <= value && value <= hi, value, limit: Some(hi), detail }
    }

    pub fn flag(name: &str, passed: bool, value: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value, limit: None, detail: detail.into() }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "status": status(self.passed),
            "value": finite_or_null(self.value),
            "limit": self.limit.map(finite_or_null),
            "detail": self.detail,
        })
    }
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Node-abort accounting for one trajectory ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct AbortTally {
    pub ensemble: String,
    pub paths: usize,
    pub aborted: usize,
}

/// Ensembles with more aborted paths than this fraction fail the run.
pub const MAX_ABORT_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub aborts: Vec<AbortTally>,
}

impl CheckReport {
    pub fn new(scenario: &str) -> Self {
        Self { scenario: scenario.into(), ..Default::default() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Records an ensemble's aborts and adds the abort-fraction check.
    pub fn tally(&mut self, ensemble: &str, paths: usize, aborted: usize) {
        self.aborts.push(AbortTally { ensemble: ensemble.into(), paths, aborted });
        let frac = if paths == 0 { 0.0 } else { aborted as f64 / paths as f64 };
        self.checks.push(Check {
            name: format!("{ensemble}_abort_fraction"),
            passed: frac <= MAX_ABORT_FRACTION,
            value: frac,
            limit: Some(MAX_ABORT_FRACTION),
            detail: format!("{aborted} of {paths} paths stopped at a node or failed"),
        });
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut summary = Map::new();
        for c in &self.checks {
            summary.insert(c.name.clone(), json!(status(c.passed)));
        }
        json!({
            "scenario": self.scenario,
            "passed": self.all_passed(),
            "summary": summary,
            "details": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "node_aborts": self.aborts.iter().map(|a| json!({
                "ensemble": a.ensemble,
                "paths": a.paths,
                "aborted": a.aborted,
            })).collect::<Vec<_>>(),
        })
    }
}
