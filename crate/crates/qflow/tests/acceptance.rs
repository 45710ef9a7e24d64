//! Acceptance gate: every criterion runs, prints one PASS/FAIL line, and
//! the process fails if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use qflow::config::{ModelConfig, Scenario, ScenarioConfig};
use qflow::runner::{execute, par_ensemble, par_paths, run_scenario};
use qflow_core::carpets::{
    box_recurrence_report, ladder_half_width, linspace, momentum_ladder, order_separation_time, plateau_fraction,
    talbot_recurrence_report, GridSpec, PLATEAU_HALF_WIDTH,
};
use qflow_core::fractal::{default_snapshot_time, density_length_series, fractal_dimension, geometric_ks, BoxFamily};
use qflow_core::hydro::{continuity_residual, hydro_fields, two_wave_velocity, DEFAULT_DENSITY_FLOOR};
use qflow_core::toymodel::{regime_summary, well_geometry, well_history, ToyPreset};
use qflow_core::trajectories::{
    exchange_diagnostics, ordering_check, path_uniform, side_changes, transport_mismatch, EnsembleSpec,
    IntegratorConfig, Sampling,
};
use qflow_core::wavemodel::{
    box_recurrence_time, critical_speed, eval_gaussian, spreading_ratio, talbot_scales, BoxSpec, GaussianSpec,
    GlobalPhase, SuperpositionSpec, TalbotSpec,
};
use qflow_core::{ModelSpec, PhysicalConstants};

const C: PhysicalConstants = PhysicalConstants { hbar: 1.0, mass: 1.0 };

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn two_slit_preset() -> (ScenarioConfig, f64, f64) {
    let cfg = ScenarioConfig::preset(Scenario::TwoSlit);
    let ModelConfig::TwoSlit(m) = &cfg.model else { unreachable!() };
    (cfg.clone(), m.d, m.sigma0)
}

/// Two-wave fields against direct evaluation of ψ1 + ψ2.
fn two_wave_oracle() -> Outcome {
    let start = Instant::now();
    let (d, sigma0) = (4.0, 0.5);
    let pair = SuperpositionSpec::two_slit(d, sigma0).map_err(|e| e.to_string())?;
    let [g1, g2] = [pair.components()[0], pair.components()[1]];
    let v_scale = C.hbar / (C.mass * sigma0);
    let (mut worst, mut used) = (0.0f64, 0);
    for k in 0..200 {
        let x = -6.0 + 12.0 * path_uniform(77, 2 * k);
        let t = 2.0 * path_uniform(77, 2 * k + 1);
        let (w1, w2) = (eval_gaussian(&g1, &C, x, t), eval_gaussian(&g2, &C, x, t));
        if w1.density() <= 1e-12 || w2.density() <= 1e-12 {
            continue;
        }
        let direct = hydro_fields(&(w1 + w2), &C, DEFAULT_DENSITY_FLOOR).map_err(|e| e.to_string())?;
        let split = two_wave_velocity(&w1, &w2, &C, DEFAULT_DENSITY_FLOOR).map_err(|e| e.to_string())?;
        worst = worst
            .max(rel(split.rho, direct.rho))
            .max((split.j - direct.j).abs() / (direct.j.abs() + direct.rho * v_scale))
            .max((split.v - direct.v).abs() / (direct.v.abs() + v_scale));
        used += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst < 1e-9 && used >= 100 && secs < 1.0,
        format!("max relative error {worst:.2e} over {used} of 200 points, {secs:.3} s"),
    )
}

fn non_crossing() -> Outcome {
    let start = Instant::now();
    let (cfg, d, sigma0) = two_slit_preset();
    let t_end = 8.0 * C.mass * sigma0 * sigma0 / C.hbar;
    let model = ModelSpec::Superposition(SuperpositionSpec::two_slit(d, sigma0).unwrap());
    let icfg = IntegratorConfig::uniform(0.0, t_end, 201).unwrap();
    let (_, _, e) = par_ensemble(&model.bind(C), &cfg.ensemble_spec(), &icfg).map_err(|e| e.to_string())?;
    let changes = side_changes(&e, 0.0);
    let order = ordering_check(&e);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        e.len() == 200 && changes == 0 && order.is_none() && e.abort_fraction() < 0.01 && secs < 30.0,
        format!(
            "{} paths to t = {t_end}: {changes} sign changes, ordering {:?}, {} aborts, {secs:.2} s",
            e.len(),
            order,
            e.aborted()
        ),
    )
}

fn phase_symmetry() -> Outcome {
    let (cfg, d, sigma0) = two_slit_preset();
    let model = ModelSpec::Superposition(SuperpositionSpec::two_slit(d, sigma0).unwrap());
    let wave = model.bind(C);
    let icfg = cfg.integrator_config((0.0, 2.0));
    let (icfg, x0s, base) = par_ensemble(&wave, &cfg.ensemble_spec(), &icfg).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 0..21 {
        let other = if k == 20 {
            par_paths(&GlobalPhase { inner: wave, phase: |t: f64| t.powi(3) }, &x0s, &icfg)
        } else {
            let alpha = 2.0 * PI * path_uniform(1234, k);
            par_paths(&GlobalPhase { inner: wave, phase: move |_| alpha }, &x0s, &icfg)
        }
        .map_err(|e| e.to_string())?;
        for (p, q) in base.paths.iter().zip(&other.paths) {
            for (a, b) in p.iter().zip(q) {
                worst = worst.max((a - b).abs() / (icfg.atol + icfg.rtol * a.abs()));
            }
        }
    }
    ensure(
        worst <= 10.0,
        format!("{} paths, 20 constant phases and e^(i t^3): max difference {worst:.2e} tolerances", x0s.len()),
    )
}

fn talbot() -> Outcome {
    let start = Instant::now();
    let spec = TalbotSpec::with_default_truncation(1.0, 0.1).unwrap();
    let [full, half] = talbot_recurrence_report(&spec, &C).map_err(|e| e.to_string())?;
    let tau = C.mass / (PI * C.hbar);
    let model = ModelSpec::Talbot(spec);
    let cfg = ScenarioConfig::preset(Scenario::Talbot);
    let icfg = IntegratorConfig::uniform(0.0, 2.0 * tau, 201).unwrap();
    let (_, x0s, e) = par_ensemble(&model.bind(C), &cfg.ensemble_spec(), &icfg).map_err(|e| e.to_string())?;
    let escapes = e
        .paths
        .iter()
        .zip(&x0s)
        .filter(|(p, x0)| p.iter().any(|x| !x.is_finite() || (x - x0.round()).abs() > 0.5))
        .count();
    let secs = start.elapsed().as_secs_f64();
    ensure(
        full.mismatch < 1e-8 && half.mismatch < 1e-8 && escapes == 0 && secs < 60.0,
        format!(
            "mismatch {:.1e} at tau_T, {:.1e} shifted at tau_T/2 (nmax {}); {escapes} of {} paths leave their cell; {secs:.2} s",
            full.mismatch,
            half.mismatch,
            spec.nmax,
            e.len()
        ),
    )
}

fn box_recurrence() -> Outcome {
    let (d, m, hbar) = (1.0, 1.0, 1.0);
    let spec = BoxSpec::gaussian_in_well(d, 0.08, 30).unwrap();
    let r = box_recurrence_report(&spec, &C).map_err(|e| e.to_string())?;
    let tau_r = m * d * d / (2.0 * PI * hbar);
    let arith = rel(box_recurrence_time(d, &C), tau_r).max(rel(box_recurrence_time(d, &C), 0.5 * talbot_scales(d, None, &C).time));
    let c2 = PhysicalConstants::new(0.37, 2.9).unwrap();
    let arith2 = rel(box_recurrence_time(1.7, &c2), 0.5 * talbot_scales(1.7, None, &c2).time);
    ensure(
        r.mismatch < 1e-8 && arith <= 1e-15 && arith2 <= 1e-15,
        format!("mismatch {:.1e} at tau_r; tau_r vs tau_T/2 relative {arith:.1e}, {arith2:.1e}", r.mismatch),
    )
}

fn critical_speed_number() -> Outcome {
    let ratios: Vec<f64> = [1.0, 4.0, 10.0].iter().map(|&d| critical_speed(d, d / 20.0, &C).v_over_vs).collect();
    ensure(ratios.iter().all(|&r| r == 44.0), format!("v/v_s = {ratios:?} for sigma0 = d/20"))
}

fn momentum_ladder_check() -> Outcome {
    let start = Instant::now();
    let (d, sigma0) = (1.0, 0.1);
    let t = order_separation_time(51, d, 1.4, &C);
    let xs = linspace(-ladder_half_width(2.5, t, d, &C), ladder_half_width(2.5, t, d, &C), 2001);
    let mut fractions = Vec::new();
    for n in [3, 11, 51] {
        let model = ModelSpec::Superposition(SuperpositionSpec::n_slit(n, d, sigma0).unwrap());
        let ladder = momentum_ladder(&model.bind(C), &xs, t, d).map_err(|e| e.to_string())?;
        fractions.push(plateau_fraction(&ladder, PLATEAU_HALF_WIDTH));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        fractions[2] >= 0.6 && fractions.windows(2).all(|w| w[1] >= w[0]) && secs < 60.0,
        format!("plateau fractions {fractions:.3?} for N = 3, 11, 51 at t = {t:.3}; {secs:.2} s"),
    )
}

fn fractal(dir: &Path) -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::preset(Scenario::Fractal);
    cfg.output_dir = dir.join("fractal");
    let outcome = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let dim: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg.output_dir.join("dimension.json")).unwrap()).unwrap();
    let d_f = dim["square_wave"]["d_f"].as_f64().unwrap();
    let r2 = dim["square_wave"]["r_squared"].as_f64().unwrap();
    let smooth = dim["smooth"]["d_f"].as_f64().unwrap();

    // same fit straight from the core, without the runner
    let sq = BoxFamily::SquareWave { length: 1.0, width: 0.25 };
    let ks = geometric_ks(16, 4096, 9);
    let direct = density_length_series(&sq, &ks[..6], default_snapshot_time(&sq, &C), Some(32 * 4096 + 1), &C)
        .map_err(|e| e.to_string())?;
    let agree = dim["ks"].as_array().unwrap().len() == 9
        && direct.series.entries().iter().zip(
            std::fs::read_to_string(cfg.output_dir.join("scaling.csv")).unwrap().lines().skip(1),
        ).all(|(&(k, l), line)| {
            let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            f[0] == k as f64 && f[1] == l
        });
    let smooth_direct = fractal_dimension(
        &density_length_series(&BoxFamily::GaussianInWell { d: 1.0, sigma0: 0.1 }, &ks, default_snapshot_time(&sq, &C), None, &C)
            .map_err(|e| e.to_string())?
            .series,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        (1.4..=1.6).contains(&d_f)
            && r2 > 0.98
            && (0.95..=1.05).contains(&smooth)
            && (smooth_direct.d_f - smooth).abs() < 1e-12
            && agree
            && outcome.report.all_passed()
            && secs < 120.0,
        format!("D_f = {d_f:.4} (r^2 = {r2:.5}), smooth D_f = {smooth:.4}, K = {ks:?}; scenario run {secs:.1} s"),
    )
}

fn continuity() -> Outcome {
    let sigma0 = 0.5;
    let single = ModelSpec::Superposition(SuperpositionSpec::single(GaussianSpec::at_rest(0.0, sigma0).unwrap()));
    let pair = ModelSpec::Superposition(SuperpositionSpec::two_slit(4.0, sigma0).unwrap());
    let half = 2.0 + 6.0 * sigma0 * spreading_ratio(sigma0, 2.0, &C);
    let grid = GridSpec::new((-half, half), 241, (0.0, 2.0), 81).unwrap();
    let mut orders = Vec::new();
    for m in [&single, &pair] {
        let coarse = continuity_residual(&m.bind(C), &grid).map_err(|e| e.to_string())?;
        let fine = continuity_residual(&m.bind(C), &grid.refined()).map_err(|e| e.to_string())?;
        orders.push((coarse / fine).log2());
    }
    ensure(orders.iter().all(|&o| o >= 1.8), format!("observed orders {orders:.3?} (single, two-slit)"))
}

fn transport() -> Outcome {
    let mut out = Vec::new();
    for (name, spec) in [
        ("single", SuperpositionSpec::single(GaussianSpec::at_rest(0.0, 0.5).unwrap())),
        ("two-slit", SuperpositionSpec::two_slit(4.0, 0.5).unwrap()),
    ] {
        let model = ModelSpec::Superposition(spec);
        let wave = model.bind(C);
        let ens = EnsembleSpec { n_traj: 20000, sampling: Sampling::DensityWeighted, support: (-12.0, 12.0), seed: 42 };
        let icfg = IntegratorConfig::new(vec![0.0, 2.0]).unwrap();
        let (_, _, e) = par_ensemble(&wave, &ens, &icfg).map_err(|e| e.to_string())?;
        let dev = transport_mismatch(&e, &wave, (-12.0, 12.0), 50).map_err(|e| e.to_string())?;
        out.push((name, dev, e.aborted()));
    }
    ensure(out.iter().all(|o| o.1 < 0.03 && o.2 == 0), format!("sup-norm bin mismatch {out:.4?}"))
}

fn exchange() -> Outcome {
    let run = |sl: f64, sr: f64, pops: [f64; 2]| {
        let spec = SuperpositionSpec::counter_propagating(10.0, sl, sr, 2.0, pops).unwrap();
        let model = ModelSpec::Superposition(spec.clone());
        let ens = EnsembleSpec { n_traj: 400, sampling: Sampling::DensityWeighted, support: (-12.0, 12.0), seed: 42 };
        let icfg = IntegratorConfig::uniform(0.0, 10.0, 101).unwrap();
        let (_, _, e) = par_ensemble(&model.bind(C), &ens, &icfg).unwrap();
        exchange_diagnostics(&e, &spec, &C).unwrap()
    };
    let eq = run(1.0, 1.0, [0.5, 0.5]);
    let v_err = rel(eq.left.mean_final_velocity, eq.left.other_velocity).max(rel(eq.right.mean_final_velocity, eq.right.other_velocity));
    let w = run(1.0, 1.0, [0.8, 0.2]);
    let s = run(0.8, 1.6, [0.5, 0.5]);
    let s_err = rel(s.left.final_spread, s.left.other_width).max(rel(s.right.final_spread, s.right.other_width));

    // the runner reports the same on the shipped configs
    let mut runner_ok = true;
    for text in [
        "scenario = \"counter_propagating\"\n",
        "scenario = \"counter_propagating\"\n[model]\npopulations = [0.8, 0.2]\n",
        "scenario = \"counter_propagating\"\n[model]\nsigma_left = 0.8\nsigma_right = 1.6\n",
    ] {
        runner_ok &= execute(&ScenarioConfig::parse(text).unwrap()).unwrap().report.all_passed();
    }
    ensure(
        v_err < 0.05 && w.crossings() > 0 && s_err < 0.1 && runner_ok,
        format!(
            "velocity exchange error {v_err:.4}; {} paths migrate at 0.8/0.2; spread swap error {s_err:.4}",
            w.crossings()
        ),
    )
}

fn toy_model() -> Outcome {
    let mut x_err = 0.0f64;
    let mut v_err = 0.0f64;
    for preset in qflow_core::toymodel::TOY_PRESETS {
        let p = preset.params(C);
        let g = well_geometry(&p, 0.0).map_err(|e| e.to_string())?;
        x_err = x_err.max(rel(g.x_min.abs(), PI * C.hbar / (2.0 * p.p)));
        for (_, g) in well_history(&p, 501).map_err(|e| e.to_string())? {
            v_err = v_err.max(rel(g.v0 * g.x_min * g.x_min, 2.0 * C.hbar * C.hbar / C.mass));
        }
    }
    let young = regime_summary(&ToyPreset::by_name("young").unwrap().params(C), 2001).map_err(|e| e.to_string())?;
    let fast = regime_summary(&ToyPreset::by_name("fast").unwrap().params(C), 2001).map_err(|e| e.to_string())?;
    let ordered = young.min_width > fast.min_width && young.max_depth < fast.max_depth;
    ensure(
        x_err < 1e-12 && v_err < 1e-12 && ordered,
        format!(
            "x_min(0) error {x_err:.1e}, V0 x_min^2 error {v_err:.1e}; young width {:.3} depth {:.3}, fast width {:.3} depth {:.3}",
            young.min_width, young.max_depth, fast.min_width, fast.max_depth
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for s in Scenario::ALL {
        let mut cfg = ScenarioConfig::preset(s);
        let first = dir.join(s.name());
        if s != Scenario::Fractal {
            cfg.output_dir = first.clone();
            run_scenario(&cfg).map_err(|e| e.to_string())?;
        }
        // second run on one thread, compared in memory
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let again = pool.install(|| execute(&cfg)).map_err(|e| e.to_string())?;
        for a in &again.artifacts {
            let on_disk = std::fs::read(first.join(&a.name)).map_err(|e| e.to_string())?;
            compared += 1;
            if on_disk != a.bytes {
                mismatched.push(format!("{s}/{}", a.name));
            }
        }
    }
    ensure(
        mismatched.is_empty(),
        format!("{compared} artifacts across {} presets; differing: {mismatched:?}", Scenario::ALL.len()),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let criteria: Vec<Criterion<'_>> = vec![
        ("two-wave oracle equivalence", Box::new(two_wave_oracle)),
        ("non-crossing and mirror confinement", Box::new(non_crossing)),
        ("phase-symmetry invariance", Box::new(phase_symmetry)),
        ("Talbot recurrences and unit-cell channeling", Box::new(talbot)),
        ("box recurrence", Box::new(box_recurrence)),
        ("critical-speed number", Box::new(critical_speed_number)),
        ("momentum ladder", Box::new(momentum_ladder_check)),
        ("fractal dimension", Box::new(|| fractal(dir))),
        ("continuity order", Box::new(continuity)),
        ("density transport", Box::new(transport)),
        ("exchange diagnostics", Box::new(exchange)),
        ("toy model identities and ordering", Box::new(toy_model)),
        ("determinism", Box::new(|| determinism(dir))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
