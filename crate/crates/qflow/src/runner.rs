//! Scenario execution: builds the model, runs the numerics, gathers
//! checks and writes artifacts.
//!
//! Paths, carpet rows and truncations are computed in parallel and
//! collected in input order, so results do not depend on the thread count.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use qflow_core::carpets::{
    self, box_recurrence_report, density_minima, ladder_half_width, ladder_spikes, linspace, momentum_ladder,
    order_separation_time, plateau_fraction, talbot_recurrence_report, GridSpec, PLATEAU_HALF_WIDTH,
};
use qflow_core::fractal::{
    self, default_grid_points, default_snapshot_time, density_length, fractal_dimension, geometric_ks,
    trajectory_length_series, BoxFamily, LengthSeries, CONVERGENCE_TOLERANCE,
};
use qflow_core::hydro::{self, continuity_residual, hydro_fields, two_wave_velocity};
use qflow_core::toymodel::{self, ToyPreset};
use qflow_core::trajectories::{
    ensemble_config, exchange_diagnostics, integrate, ordering_check, path_uniform, sample_initial, side_changes,
    talbot_velocity_double_sum, velocity_at, EnsembleSpec, IntegratorConfig, PathStatus, Sampling, Trajectory,
    TrajectoryEnsemble,
};
use qflow_core::wavemodel::{
    box_recurrence_time, critical_speed, eval_gaussian, harmonic_relative_frequency, talbot_scales, BoxSpec,
    GaussianSpec, GlobalPhase, HarmonicSpec, SuperpositionSpec, TalbotSpec,
};
use qflow_core::{Complex64, Error, ModelSpec, PhysicalConstants, WaveFunction};

use crate::checks::{Check, CheckReport};
use crate::config::{
    BoxModel, CounterModel, FractalModel, HarmonicModel, LadderModel, ModelConfig, ScenarioConfig, TalbotModel,
    ToyModelCfg, TwoSlitModel,
};
use crate::io::{write_artifacts, Artifact, CsvWriter, RunManifest, MANIFEST_FILE};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: Error,
    },
    #[error("writing to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("QFLOW_THREADS must be a positive integer, got {0:?}")]
    Threads(String),
}

trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, RunError>;
}

impl<T> Context<T> for qflow_core::Result<T> {
    fn ctx(self, context: &str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Model { context: context.into(), source })
    }
}

/// Artifacts and checks of one scenario, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub report: CheckReport,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub report: CheckReport,
}

pub const THREADS_ENV: &str = "QFLOW_THREADS";

/// Worker cap from `QFLOW_THREADS`; `None` lets rayon decide.
pub fn thread_cap() -> Result<Option<usize>, RunError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Threads(s)),
        },
    }
}

/// Runs the scenario, writes its artifacts and manifest to
/// `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Threads(e.to_string()))?;
    let out = pool.install(|| execute(cfg))?;
    let dir = cfg.output_dir.clone();
    let io_err = |source| RunError::Io { path: dir.clone(), source };
    let entries = write_artifacts(&dir, &out.artifacts).map_err(io_err)?;
    let manifest = RunManifest {
        toolkit: "qflow".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: cfg.scenario.name().into(),
        seed: cfg.seed,
        config: cfg.to_toml_string(),
        output_dir: dir.clone(),
        artifacts: entries,
        checks_passed: out.report.all_passed(),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), text).map_err(io_err)?;
    Ok(RunOutcome { manifest, report: out.report })
}

/// Computes every artifact of the scenario in memory. The last artifact is
/// always checks.json.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let mut run = Run { cfg, c: cfg.physical_constants(), artifacts: Vec::new(), report: CheckReport::new(cfg.scenario.name()) };
    match &cfg.model {
        ModelConfig::TwoSlit(m) => run.two_slit(m)?,
        ModelConfig::Counter(m) => run.counter(m)?,
        ModelConfig::Harmonic(m) => run.harmonic(m)?,
        ModelConfig::Talbot(m) => run.talbot(m)?,
        ModelConfig::Ladder(m) => run.ladder(m)?,
        ModelConfig::Box(m) => run.box_diffraction(m)?,
        ModelConfig::Fractal(m) => run.fractal(m)?,
        ModelConfig::Toy(m) => run.toymodel(m)?,
    }
    run.artifacts.push(Artifact::json("checks.json", &run.report.to_json()));
    Ok(RunOutput { artifacts: run.artifacts, report: run.report })
}

/// Integrates each start in parallel. A start below the node floor counts
/// as an abort at t0.
pub fn par_paths<W: WaveFunction + Sync>(
    wave: &W,
    x0s: &[f64],
    cfg: &IntegratorConfig,
) -> qflow_core::Result<TrajectoryEnsemble> {
    let paths = x0s
        .par_iter()
        .map(|&x0| match integrate(wave, x0, cfg) {
            Err(Error::Node { .. }) => Ok(Trajectory {
                x0,
                positions: vec![f64::NAN; cfg.save_times.len()],
                status: PathStatus::NodeAbort { time: cfg.start() },
            }),
            other => other,
        })
        .collect::<qflow_core::Result<Vec<_>>>()?;
    Ok(TrajectoryEnsemble::from_trajectories(cfg.save_times.clone(), paths))
}

/// Samples the ensemble and integrates it in parallel. Returns the
/// effective integrator settings and the initial positions as well.
pub fn par_ensemble<W: WaveFunction + Sync>(
    wave: &W,
    spec: &EnsembleSpec,
    cfg: &IntegratorConfig,
) -> qflow_core::Result<(IntegratorConfig, Vec<f64>, TrajectoryEnsemble)> {
    let cfg = ensemble_config(wave, spec, cfg)?;
    let x0s = sample_initial(spec, wave, cfg.start())?;
    let e = par_paths(wave, &x0s, &cfg)?;
    Ok((cfg, x0s, e))
}

pub fn par_carpet<W: WaveFunction + Sync>(wave: &W, grid: &GridSpec) -> qflow_core::Result<Vec<Vec<f64>>> {
    let xs = grid.xs();
    grid.ts().par_iter().map(|&t| carpets::density_row(wave, &xs, t)).collect()
}

pub fn trajectories_csv(e: &TrajectoryEnsemble) -> Artifact {
    let mut header = vec!["t".to_string()];
    header.extend((0..e.len()).map(|i| format!("path_{i}")));
    let mut w = CsvWriter::new(&header);
    let mut row = Vec::with_capacity(e.len() + 1);
    for (k, &t) in e.times.iter().enumerate() {
        row.clear();
        row.push(t);
        row.extend(e.paths.iter().map(|p| p[k]));
        w.row(&row);
    }
    w.finish("trajectories.csv")
}

/// Row-major ρ(x, t): header "t/x" then the x values, one row per time.
pub fn carpet_csv(grid: &GridSpec, rows: &[Vec<f64>]) -> Artifact {
    let xs = grid.xs();
    let mut header = vec!["t/x".to_string()];
    header.extend(xs.iter().map(|x| crate::io::fmt_f64(*x)));
    let mut w = CsvWriter::new(&header);
    let mut line = Vec::with_capacity(xs.len() + 1);
    for (t, row) in grid.ts().iter().zip(rows) {
        line.clear();
        line.push(*t);
        line.extend_from_slice(row);
        w.row(&line);
    }
    w.finish("carpet.csv")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    c: PhysicalConstants,
    artifacts: Vec<Artifact>,
    report: CheckReport,
}

impl Run<'_> {
    fn t_range(&self) -> (f64, f64) {
        (self.cfg.grid.t_range[0], self.cfg.grid.t_range[1])
    }

    fn grid(&self) -> Result<GridSpec, RunError> {
        let g = self.cfg.grid_spec();
        GridSpec::new(g.x_range, g.nx, g.t_range, g.nt).ctx("grid")
    }

    fn carpet<W: WaveFunction + Sync>(&mut self, wave: &W) -> Result<(), RunError> {
        let grid = self.grid()?;
        let rows = par_carpet(wave, &grid).ctx("density carpet")?;
        self.artifacts.push(carpet_csv(&grid, &rows));
        Ok(())
    }

    /// Runs the configured ensemble, records aborts and ordering, and
    /// writes trajectories.csv.
    fn ensemble<W: WaveFunction + Sync>(
        &mut self,
        wave: &W,
    ) -> Result<(IntegratorConfig, Vec<f64>, TrajectoryEnsemble), RunError> {
        let icfg = self.cfg.integrator_config(self.t_range());
        let (icfg, x0s, e) = par_ensemble(wave, &self.cfg.ensemble_spec(), &icfg).ctx("trajectory ensemble")?;
        self.report.tally("trajectories", e.len(), e.aborted());
        let violation = ordering_check(&e);
        self.report.push(Check::flag(
            "ordering",
            violation.is_none(),
            violation.map_or(0.0, |v| v.time),
            match violation {
                None => "paths keep their initial order at every saved time".to_string(),
                Some(v) => format!("paths {} and {} swap by t = {}", v.pair.0, v.pair.1, v.time),
            },
        ));
        self.artifacts.push(trajectories_csv(&e));
        Ok((icfg, x0s, e))
    }

    fn two_slit(&mut self, m: &TwoSlitModel) -> Result<(), RunError> {
        let c = self.c;
        let spec = SuperpositionSpec::two_slit(m.d, m.sigma0).ctx("two-slit model")?;
        let model = ModelSpec::Superposition(spec.clone());
        let wave = model.bind(c);
        let single = ModelSpec::Superposition(SuperpositionSpec::single(
            GaussianSpec::at_rest(0.0, m.sigma0).ctx("single packet")?,
        ));

        let (icfg, x0s, e) = self.ensemble(&wave)?;
        let changes = side_changes(&e, 0.0);
        self.report.push(Check::flag(
            "non_crossing",
            changes == 0,
            changes as f64,
            format!("{changes} completed paths change sign of x"),
        ));

        // global phases: 20 constant offsets and e^{it³}
        let picks: Vec<usize> = {
            let live: Vec<usize> = (0..e.len()).filter(|&i| e.status[i].is_completed()).collect();
            let n = live.len().min(8);
            (0..n).map(|k| live[k * live.len() / n.max(1)]).collect()
        };
        let starts: Vec<f64> = picks.iter().map(|&i| x0s[i]).collect();
        let mut worst: f64 = 0.0;
        for k in 0..21 {
            let shifted = if k == 20 {
                par_paths(&GlobalPhase { inner: wave, phase: |t: f64| t * t * t }, &starts, &icfg)
            } else {
                let alpha = 2.0 * PI * path_uniform(self.cfg.seed ^ 0x5a5a_0001, k);
                par_paths(&GlobalPhase { inner: wave, phase: move |_| alpha }, &starts, &icfg)
            }
            .ctx("phase-shifted paths")?;
            for (j, &i) in picks.iter().enumerate() {
                for (a, b) in e.paths[i].iter().zip(&shifted.paths[j]) {
                    worst = worst.max((a - b).abs() / (icfg.atol + icfg.rtol * a.abs()));
                }
            }
        }
        self.report.push(Check::at_most(
            "phase_invariance",
            worst,
            10.0,
            format!("largest path difference is {worst:.3e} integrator tolerances over {} paths", picks.len()),
        ));

        self.two_wave_oracle(&spec, m)?;

        for (name, mdl) in [("continuity_order_two_slit", &model), ("continuity_order_single", &single)] {
            let grid = self.grid()?;
            let coarse = continuity_residual(&mdl.bind(c), &grid).ctx("continuity")?;
            let fine = continuity_residual(&mdl.bind(c), &grid.refined()).ctx("continuity")?;
            let order = (coarse / fine).log2();
            self.report.push(Check::at_least(
                name,
                order,
                1.8,
                format!("residual {coarse:.3e} on the grid, {fine:.3e} with halved steps"),
            ));
        }

        if m.transport_paths > 0 {
            for (name, mdl) in [("transport_two_slit", &model), ("transport_single", &single)] {
                let mismatch = self.transport(name, &mdl.bind(c), m.transport_paths, m.transport_bins)?;
                self.report.push(Check::below(
                    name,
                    mismatch,
                    0.03,
                    format!("{} density-weighted paths, {} bins", m.transport_paths, m.transport_bins),
                ));
            }
        }
        self.carpet(&wave)
    }

    /// Sup-norm of histogram vs ∫ρ bin masses at the end time.
    fn transport<W: WaveFunction + Sync>(
        &mut self,
        name: &str,
        wave: &W,
        n: usize,
        bins: usize,
    ) -> Result<f64, RunError> {
        let (t0, t1) = self.t_range();
        let range = (self.cfg.grid.x_range[0], self.cfg.grid.x_range[1]);
        let mut icfg = self.cfg.integrator_config((t0, t1));
        icfg.save_times = vec![t0, t1];
        let spec = EnsembleSpec { n_traj: n, sampling: Sampling::DensityWeighted, support: range, seed: self.cfg.seed };
        let (_, _, e) = par_ensemble(wave, &spec, &icfg).ctx("transport ensemble")?;
        self.report.tally(name, e.len(), e.aborted());
        qflow_core::trajectories::transport_mismatch(&e, wave, range, bins).ctx("transport histogram")
    }

    fn two_wave_oracle(&mut self, spec: &SuperpositionSpec, m: &TwoSlitModel) -> Result<(), RunError> {
        let c = self.c;
        let (g1, g2) = (spec.components()[0], spec.components()[1]);
        let (t0, t1) = self.t_range();
        let reach = 0.5 * m.d + 4.0 * g1.width(&c, t1);
        let vel_scale = c.hbar / (c.mass * m.sigma0);
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for k in 0..m.two_wave_points {
            let x = -reach + 2.0 * reach * path_uniform(self.cfg.seed ^ 0x2a_e0c1, 2 * k);
            let t = t0 + (t1 - t0) * path_uniform(self.cfg.seed ^ 0x2a_e0c1, 2 * k + 1);
            let (w1, w2) = (eval_gaussian(&g1, &c, x, t), eval_gaussian(&g2, &c, x, t));
            if w1.density() <= 1e-12 || w2.density() <= 1e-12 {
                continue;
            }
            let direct = hydro_fields(&(w1 + w2), &c, hydro::DEFAULT_DENSITY_FLOOR).ctx("direct fields")?;
            let split = two_wave_velocity(&w1, &w2, &c, hydro::DEFAULT_DENSITY_FLOOR).ctx("two-wave fields")?;
            worst = worst
                .max(rel(split.rho, direct.rho))
                .max((split.j - direct.j).abs() / (direct.j.abs() + direct.rho * vel_scale))
                .max((split.v - direct.v).abs() / (direct.v.abs() + vel_scale));
            used += 1;
        }
        self.report.push(Check::below(
            "two_wave_oracle",
            worst,
            1e-9,
            format!("{used} of {} points with both partial densities above 1e-12", m.two_wave_points),
        ));
        Ok(())
    }

    fn counter(&mut self, m: &CounterModel) -> Result<(), RunError> {
        let c = self.c;
        let spec = SuperpositionSpec::counter_propagating(m.d, m.sigma_left, m.sigma_right, m.v, m.populations)
            .ctx("counter-propagating model")?;
        let model = ModelSpec::Superposition(spec.clone());
        let wave = model.bind(c);
        let (_, _, e) = self.ensemble(&wave)?;
        let r = exchange_diagnostics(&e, &spec, &c).ctx("exchange diagnostics")?;

        let balanced = m.populations[0] == m.populations[1];
        let same_width = m.sigma_left == m.sigma_right;
        if balanced && same_width {
            let err = rel(r.left.mean_final_velocity, r.left.other_velocity)
                .max(rel(r.right.mean_final_velocity, r.right.other_velocity));
            self.report.push(Check::below(
                "velocity_exchange",
                err,
                0.05,
                format!(
                    "mean final velocity left {:.6}, right {:.6}; packets {:.6}, {:.6}",
                    r.left.mean_final_velocity, r.right.mean_final_velocity, r.left.own_velocity, r.right.own_velocity
                ),
            ));
        }
        if !same_width {
            let err = rel(r.left.final_spread, r.left.other_width).max(rel(r.right.final_spread, r.right.other_width));
            self.report.push(Check::below(
                "spread_exchange",
                err,
                0.1,
                format!(
                    "final spread left {:.6} vs {:.6}, right {:.6} vs {:.6}",
                    r.left.final_spread, r.left.other_width, r.right.final_spread, r.right.other_width
                ),
            ));
        }
        // x = 0 is a no-crossing line only for the mirror-symmetric pair.
        if balanced && same_width {
            self.report.push(Check::flag(
                "no_migration",
                r.crossings() == 0,
                r.crossings() as f64,
                "paths crossing the symmetry line",
            ));
        } else if !balanced {
            self.report.push(Check::at_least(
                "migration",
                r.crossings() as f64,
                1.0,
                format!("{} left-side and {} right-side paths cross the symmetry line", r.left.crossed, r.right.crossed),
            ));
        }
        self.critical_speed_check();

        let side = |s: &qflow_core::trajectories::SideReport| {
            json!({
                "paths": s.paths,
                "mean_final_velocity": s.mean_final_velocity,
                "own_velocity": s.own_velocity,
                "other_velocity": s.other_velocity,
                "crossed": s.crossed,
                "initial_spread": s.initial_spread,
                "final_spread": s.final_spread,
                "other_width": s.other_width,
            })
        };
        let cs = critical_speed(m.d, m.sigma_left.min(m.sigma_right), &c);
        self.artifacts.push(Artifact::json(
            "exchange.json",
            &json!({
                "symmetry_line": r.symmetry_line,
                "time": r.time,
                "left": side(&r.left),
                "right": side(&r.right),
                "critical_speed": cs.v,
                "critical_speed_over_spreading": cs.v_over_vs,
            }),
        ));
        self.carpet(&wave)
    }

    fn critical_speed_check(&mut self) {
        let ratio = critical_speed(1.0, 1.0 / 20.0, &self.c).v_over_vs;
        self.report.push(Check::flag(
            "critical_speed_ratio",
            ratio == 44.0,
            ratio,
            "v/v_s for sigma0 = d/20 must be 44",
        ));
    }

    fn harmonic(&mut self, m: &HarmonicModel) -> Result<(), RunError> {
        let c = self.c;
        let spec = HarmonicSpec::new(
            m.omega,
            vec![(m.levels[0], Complex64::new(m.amplitudes[0], 0.0)), (m.levels[1], Complex64::new(m.amplitudes[1], 0.0))],
        )
        .ctx("harmonic model")?;
        let w_rel = harmonic_relative_frequency(&spec).ctx("relative frequency")?;
        let expected = m.levels[0].abs_diff(m.levels[1]) as f64 * m.omega;
        self.report.push(Check::below(
            "relative_frequency",
            rel(w_rel, expected),
            1e-12,
            format!("omega_rel = {w_rel}"),
        ));
        let model = ModelSpec::Harmonic(spec);
        let wave = model.bind(c);
        let period = 2.0 * PI / w_rel;

        let xs = self.grid()?.xs();
        let mut worst: f64 = 0.0;
        for frac in [0.0, 0.21, 0.5, 0.83] {
            let t = frac * period;
            let a = carpets::density_row(&wave, &xs, t).ctx("density")?;
            let b = carpets::density_row(&wave, &xs, t + period).ctx("density")?;
            worst = a.iter().zip(&b).fold(worst, |w, (p, q)| w.max((p - q).abs()));
        }
        self.report.push(Check::below(
            "density_period",
            worst,
            1e-10,
            format!("sup |rho(x, t + T) - rho(x, t)| with T = {period}"),
        ));

        let (icfg, x0s, _) = self.ensemble(&wave)?;
        let mut once = icfg.clone();
        once.save_times = vec![icfg.start(), icfg.start() + period];
        let back = par_paths(&wave, &x0s, &once).ctx("one-period paths")?;
        let drift = back
            .paths
            .iter()
            .zip(&x0s)
            .zip(&back.status)
            .filter(|(_, s)| s.is_completed())
            .map(|((p, x0), _)| (p[1] - x0).abs())
            .fold(0.0, f64::max);
        self.report.tally("period_paths", back.len(), back.aborted());
        let length = (c.hbar / (c.mass * m.omega)).sqrt();
        self.report.push(Check::below(
            "trajectory_period",
            drift / length,
            1e-4,
            "largest |x(T) - x(0)| in oscillator lengths",
        ));
        self.carpet(&wave)
    }

    fn talbot(&mut self, m: &TalbotModel) -> Result<(), RunError> {
        let c = self.c;
        let spec = match m.nmax {
            Some(n) => TalbotSpec::new(m.d, m.sigma0, n),
            None => TalbotSpec::with_default_truncation(m.d, m.sigma0),
        }
        .ctx("Talbot model")?;
        for r in talbot_recurrence_report(&spec, &c).ctx("Talbot recurrences")? {
            self.report.push(Check::below(
                r.label,
                r.mismatch,
                1e-8,
                format!("sup density mismatch, period {}, shift {}", r.period, r.shift),
            ));
        }
        let model = ModelSpec::Talbot(spec);
        let wave = model.bind(c);

        let tau = talbot_scales(m.d, None, &c).time;
        let vel_scale = c.hbar / (c.mass * m.sigma0);
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let x = m.d * (path_uniform(self.cfg.seed ^ 0x7a1b, 2 * k) - 0.5);
            let t = tau * path_uniform(self.cfg.seed ^ 0x7a1b, 2 * k + 1);
            let Ok(v) = velocity_at(&wave, x, t, hydro::DEFAULT_DENSITY_FLOOR) else { continue };
            let dual = talbot_velocity_double_sum(&spec, &c, x, t);
            worst = worst.max((v - dual).abs() / (v.abs() + vel_scale));
        }
        self.report.push(Check::below("double_sum_velocity", worst, 1e-9, "Im(psi'/psi) vs the double-sum form"));

        let (_, x0s, e) = self.ensemble(&wave)?;
        let mut escapes = 0;
        for (i, path) in e.paths.iter().enumerate() {
            if !e.status[i].is_completed() {
                continue;
            }
            let centre = (x0s[i] / m.d).round() * m.d;
            if path.iter().any(|x| (x - centre).abs() > 0.5 * m.d) {
                escapes += 1;
            }
        }
        self.report.push(Check::flag(
            "unit_cell_channeling",
            escapes == 0,
            escapes as f64,
            format!("paths leaving their unit cell over [{}, {}]", self.t_range().0, self.t_range().1),
        ));
        self.carpet(&wave)
    }

    fn ladder(&mut self, m: &LadderModel) -> Result<(), RunError> {
        let c = self.c;
        let mut slits = m.slits.clone();
        slits.sort_unstable();
        slits.dedup();
        let n_max = *slits.last().expect("validated nonempty");
        let t_far = m.t_far.unwrap_or_else(|| order_separation_time(n_max, m.d, m.separation_factor, &c));
        let half = ladder_half_width(m.orders, t_far, m.d, &c);
        let xs = linspace(-half, half, m.points);

        let models = slits
            .iter()
            .map(|&n| SuperpositionSpec::n_slit(n, m.d, m.sigma0).map(ModelSpec::Superposition))
            .collect::<qflow_core::Result<Vec<_>>>()
            .ctx("grating model")?;
        let ladders = models
            .par_iter()
            .map(|mdl| momentum_ladder(&mdl.bind(c), &xs, t_far, m.d))
            .collect::<qflow_core::Result<Vec<_>>>()
            .ctx("momentum ladder")?;

        let fractions: Vec<f64> = ladders.iter().map(|l| plateau_fraction(l, PLATEAU_HALF_WIDTH)).collect();
        let last = *fractions.last().unwrap();
        self.report.push(Check::at_least(
            "plateau_fraction",
            last,
            0.6,
            format!("{n_max} slits at t = {t_far}"),
        ));
        if fractions.len() > 1 {
            let monotone = fractions.windows(2).all(|w| w[1] >= w[0]);
            self.report.push(Check::flag(
                "plateau_monotone",
                monotone,
                last - fractions[0],
                format!("fractions {fractions:?} for slits {slits:?}"),
            ));
        }
        let spikes = ladder_spikes(&ladders[0], PLATEAU_HALF_WIDTH);
        let minima = density_minima(&ladders[0]);
        let off = spikes.iter().filter(|&&s| !minima.iter().any(|&q| q.abs_diff(s) <= 1)).count();
        self.report.push(Check::flag(
            "spikes_at_minima",
            off == 0,
            off as f64,
            format!("{} of {} spikes off a density minimum for {} slits", off, spikes.len(), slits[0]),
        ));

        let mut header = vec!["x".to_string()];
        for n in &slits {
            header.push(format!("rho_{n}"));
            header.push(format!("p_normalized_{n}"));
        }
        let mut w = CsvWriter::new(&header);
        let mut row = Vec::with_capacity(header.len());
        for (i, &x) in xs.iter().enumerate() {
            row.clear();
            row.push(x);
            for l in &ladders {
                row.push(l[i].rho);
                row.push(l[i].p_normalized.unwrap_or(f64::NAN));
            }
            w.row(&row);
        }
        self.artifacts.push(w.finish("ladder.csv"));
        self.artifacts.push(Artifact::json(
            "ladder.json",
            &json!({
                "t_far": t_far,
                "half_width": half,
                "plateau_half_width": PLATEAU_HALF_WIDTH,
                "slits": slits,
                "plateau_fractions": fractions,
                "spikes": spikes.iter().map(|&s| xs[s]).collect::<Vec<_>>(),
            }),
        ));

        let wave = models.last().unwrap().bind(c);
        self.ensemble(&wave)?;
        self.carpet(&wave)
    }

    fn box_diffraction(&mut self, m: &BoxModel) -> Result<(), RunError> {
        let c = self.c;
        let spec = BoxSpec::gaussian_in_well(m.d, m.sigma0, m.n_terms).ctx("box model")?;
        let r = box_recurrence_report(&spec, &c).ctx("box recurrence")?;
        self.report.push(Check::below(r.label, r.mismatch, 1e-8, format!("sup density mismatch at tau_r = {}", r.period)));
        let tau_r = box_recurrence_time(m.d, &c);
        let tau_t = talbot_scales(m.d, None, &c).time;
        self.report.push(Check::at_most(
            "recurrence_is_half_talbot",
            rel(tau_r, 0.5 * tau_t),
            1e-15,
            format!("tau_r = {tau_r}, tau_T = {tau_t}"),
        ));
        self.report.push(Check::flag(
            "truncation_validity",
            spec.validity_warning().is_none(),
            0.0,
            spec.validity_warning().unwrap_or("Gaussian negligible at the walls"),
        ));
        let model = ModelSpec::Box(spec);
        let wave = model.bind(c);
        let (_, _, e) = self.ensemble(&wave)?;
        let outside = e
            .paths
            .iter()
            .zip(&e.status)
            .filter(|(p, s)| s.is_completed() && p.iter().any(|x| x.abs() >= 0.5 * m.d))
            .count();
        self.report.push(Check::flag("confined", outside == 0, outside as f64, "paths reaching a wall"));
        self.carpet(&wave)
    }

    fn fractal(&mut self, m: &FractalModel) -> Result<(), RunError> {
        let c = self.c;
        let square = BoxFamily::SquareWave { length: m.length, width: m.width };
        let smooth = BoxFamily::GaussianInWell { d: m.length, sigma0: m.smooth_sigma0 };
        let ks = geometric_ks(m.k_min, m.k_max, m.k_count);
        let t = m.t.unwrap_or_else(|| default_snapshot_time(&square, &c));
        let nx = m.nx.unwrap_or_else(|| default_grid_points(m.k_max));

        let series = |family: &BoxFamily| -> Result<LengthSeries, RunError> {
            let lengths = ks
                .par_iter()
                .map(|&k| density_length(family, k, t, nx, &c))
                .collect::<qflow_core::Result<Vec<_>>>()
                .ctx("curve lengths")?;
            LengthSeries::from_lengths(&lengths).ctx("scaling series")
        };
        let sq = series(&square)?;
        let sm = series(&smooth)?;
        let d_sq = fractal_dimension(&sq.series).ctx("dimension fit")?;
        let d_sm = fractal_dimension(&sm.series).ctx("dimension fit")?;
        self.report.push(Check::within("fractal_dimension", d_sq.d_f, 1.4, 1.6, format!("square wave, K = {ks:?}")));
        self.report.push(Check::above("fit_r_squared", d_sq.r_squared, 0.98, "log L against log K"));
        self.report.push(Check::within("smooth_dimension", d_sm.d_f, 0.95, 1.05, "Gaussian in the well"));
        let worst_change = sq.series.entries().iter().zip(sq.refined.entries()).map(|(a, b)| rel(b.1, a.1)).fold(0.0, f64::max);
        self.report.push(Check::at_most(
            "grid_convergence",
            worst_change,
            CONVERGENCE_TOLERANCE,
            format!("largest relative change of L under grid halving: {worst_change:.3e}; {} warnings", sq.warnings.len()),
        ));

        let mut w = CsvWriter::new(&["K", "L", "L_refined", "L_smooth"]);
        for ((a, b), s) in sq.series.entries().iter().zip(sq.refined.entries()).zip(sm.series.entries()) {
            w.row(&[a.0 as f64, a.1, b.1, s.1]);
        }
        self.artifacts.push(w.finish("scaling.csv"));

        // trajectories under successive truncations
        let icfg = self.cfg.integrator_config(self.t_range());
        let runs = m
            .trajectory_x0
            .par_iter()
            .map(|&x0| trajectory_length_series(&square, x0, &m.trajectory_n, &icfg, &c))
            .collect::<qflow_core::Result<Vec<_>>>()
            .ctx("trajectory lengths")?;
        let mut tw = CsvWriter::new(&["x0", "N", "length"]);
        let mut traj_json = Vec::new();
        let mut aborted = 0;
        let mut grows = true;
        for (&x0, run) in m.trajectory_x0.iter().zip(&runs) {
            let e = run.series.entries();
            for &(n, l) in e {
                tw.row(&[x0, n as f64, l]);
            }
            aborted += run.aborted.len();
            if let (Some(first), Some(last)) = (e.first(), e.last()) {
                grows &= last.1 > first.1;
            }
            let fit = fractal::fit_power_law(e).ok();
            traj_json.push(json!({
                "x0": x0,
                "lengths": e.iter().map(|&(n, l)| json!([n, l])).collect::<Vec<_>>(),
                "aborted": run.aborted.iter().map(|&(n, t)| json!([n, t])).collect::<Vec<_>>(),
                "d_f": fit.map(|f| f.d_f),
                "r_squared": fit.map(|f| f.r_squared),
            }));
        }
        let total = m.trajectory_x0.len() * m.trajectory_n.len();
        self.report.tally("truncation_paths", total, aborted);
        if !m.trajectory_x0.is_empty() {
            self.report.push(Check::flag(
                "trajectory_length_growth",
                grows,
                0.0,
                "path length increases from the fewest to the most modes",
            ));
        }
        self.artifacts.push(tw.finish("trajectory_scaling.csv"));

        let estimate = |d: &fractal::DimensionEstimate| {
            json!({"d_f": d.d_f, "slope_stderr": d.slope_stderr, "r_squared": d.r_squared, "points": d.points})
        };
        self.artifacts.push(Artifact::json(
            "dimension.json",
            &json!({
                "d_f": d_sq.d_f,
                "r_squared": d_sq.r_squared,
                "snapshot_time": t,
                "grid_points": nx,
                "ks": ks,
                "square_wave": estimate(&d_sq),
                "smooth": estimate(&d_sm),
                "warnings": sq.warnings.iter().map(|w| json!({"k": w.k, "relative_change": w.relative_change()})).collect::<Vec<_>>(),
                "trajectories": traj_json,
            }),
        ));
        Ok(())
    }

    fn toymodel(&mut self, m: &ToyModelCfg) -> Result<(), RunError> {
        let c = self.c;
        let mut csv = CsvWriter::new(&["preset", "t", "x_min", "V0"]);
        let mut profile = CsvWriter::new(&["preset", "x", "V"]);
        let mut summaries = Vec::new();
        let mut initial_err: f64 = 0.0;
        let mut identity_err: f64 = 0.0;
        let mut forms_err: f64 = 0.0;
        let depth_scale = 2.0 * c.hbar * c.hbar / c.mass;
        for name in &m.presets {
            let preset = ToyPreset::by_name(name).expect("validated preset name");
            let params = preset.params(c);
            let history = toymodel::well_history(&params, m.samples).ctx("well history")?;
            let expected = PI * c.hbar / (2.0 * params.p);
            initial_err = initial_err.max(rel(history[0].1.x_min.abs(), expected));
            for (t, g) in &history {
                csv.labeled_row(name, &[*t, g.x_min, g.v0]);
                identity_err = identity_err.max(rel(g.v0 * g.x_min * g.x_min, depth_scale));
                let (a, b) = toymodel::well_width_forms(&params, *t);
                forms_err = forms_err.max(rel(a, b));
            }
            let x_min0 = history[0].1.x_min;
            for x in linspace(1.5 * x_min0, -0.5 * x_min0, 201) {
                profile.labeled_row(name, &[x, toymodel::potential_profile(&params, x, 0.0).ctx("profile")?]);
            }
            let s = toymodel::regime_summary(&params, m.samples).ctx("regime summary")?;
            summaries.push((name.clone(), preset, s, params));
        }
        self.report.push(Check::below("x_min_initial", initial_err, 1e-12, "|x_min(0)| against pi hbar / 2p"));
        self.report.push(Check::below("depth_width_identity", identity_err, 1e-12, "V0 x_min^2 against 2 hbar^2 / m"));
        self.report.push(Check::below("width_forms_agree", forms_err, 1e-10, "both width formulas over the history"));
        let find = |n: &str| summaries.iter().find(|s| s.0 == n).map(|s| s.2);
        if let (Some(young), Some(fast)) = (find("young"), find("fast")) {
            self.report.push(Check::flag(
                "regime_ordering",
                young.min_width > fast.min_width && young.max_depth < fast.max_depth,
                young.min_width / fast.min_width,
                format!(
                    "young: width {:.4}, depth {:.4}; fast: width {:.4}, depth {:.4}",
                    young.min_width, young.max_depth, fast.min_width, fast.max_depth
                ),
            ));
        }
        self.critical_speed_check();
        self.artifacts.push(csv.finish("toymodel.csv"));
        self.artifacts.push(profile.finish("toymodel_profile.csv"));
        let regimes: Vec<Value> = summaries
            .iter()
            .map(|(name, preset, s, params)| {
                json!({
                    "preset": name,
                    "v_over_vs": preset.v_over_vs,
                    "p": params.p,
                    "round_trip_time": params.round_trip_time(),
                    "min_width": s.min_width,
                    "max_depth": s.max_depth,
                })
            })
            .collect();
        self.artifacts.push(Artifact::json("toymodel.json", &json!({ "regimes": regimes })));
        Ok(())
    }
}
