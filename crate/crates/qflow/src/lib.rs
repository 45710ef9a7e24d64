//! Scenario runner for the `qflow-core` models: TOML configs, parallel
//! drivers, CSV/JSON artifacts with a digest manifest, and plot scripts.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod io;
pub mod plots;
pub mod runner;

pub use checks::{Check, CheckReport};
pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use io::RunManifest;
pub use plots::{emit_plots, PlotError};
pub use runner::{execute, run_scenario, RunError, RunOutcome, RunOutput};

/// Process exit codes of the `qflow` binary.
pub mod exit {
    pub const OK: i32 = 0;
    /// A check failed or the run stopped with an error.
    pub const FAILURE: i32 = 1;
    /// The config could not be read, parsed or validated.
    pub const CONFIG: i32 = 2;
}
