use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qflow::config::{ConfigError, Scenario, ScenarioConfig};
use qflow::{emit_plots, exit, run_scenario, RunError};

#[derive(Parser, Debug)]
#[command(name = "qflow", version, about = "Bohmian interference scenarios: trajectories, carpets, fractal scaling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// List or print the built-in scenario presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand, Debug)]
enum PresetAction {
    /// Scenario names with a one-line description.
    List,
    /// Full default config of one scenario, as TOML.
    Show { name: String },
}

fn load(path: &Path) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ScenarioConfig::parse(&text).map_err(|e: ConfigError| format!("{}: {e}", path.display()))
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({})", config.display(), cfg.scenario);
                code(exit::OK)
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(exit::CONFIG)
            }
        },
        Command::Presets { action: PresetAction::List } => {
            for s in Scenario::ALL {
                println!("{:<20} {}", s.name(), s.description());
            }
            code(exit::OK)
        }
        Command::Presets { action: PresetAction::Show { name } } => match Scenario::from_name(&name) {
            Some(s) => {
                print!("{}", ScenarioConfig::preset(s).to_toml_string());
                code(exit::OK)
            }
            None => {
                eprintln!("error: unknown scenario {name:?}; see `qflow presets list`");
                code(exit::CONFIG)
            }
        },
        Command::Run { config, seed, out } => {
            let mut cfg = match load(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return code(exit::CONFIG);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Err(e) = cfg.validate() {
                eprintln!("error: {e}");
                return code(exit::CONFIG);
            }
            let outcome = match run_scenario(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    let c = if matches!(e, RunError::Threads(_)) { exit::CONFIG } else { exit::FAILURE };
                    return code(c);
                }
            };
            if let Err(e) = emit_plots(&outcome.manifest) {
                eprintln!("error: {e}");
                return code(exit::FAILURE);
            }
            for c in &outcome.report.checks {
                println!("{:<4} {:<28} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            println!(
                "{} artifacts in {} ({:.1} s)",
                outcome.manifest.artifacts.len() + 1,
                cfg.output_dir.display(),
                outcome.manifest.duration_seconds
            );
            if outcome.report.all_passed() {
                code(exit::OK)
            } else {
                code(exit::FAILURE)
            }
        }
    }
}
