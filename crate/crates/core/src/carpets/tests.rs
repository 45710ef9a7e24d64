use super::*;
use crate::wavemodel::{GaussianSpec, SuperpositionSpec};

const C: PhysicalConstants = PhysicalConstants { hbar: 1.0, mass: 1.0 };

fn slits(n: usize) -> ModelSpec {
    ModelSpec::Superposition(SuperpositionSpec::n_slit(n, 1.0, 0.1).unwrap())
}

fn far_ladder(n: usize, t: f64) -> Vec<LadderPoint> {
    let model = slits(n);
    let half = ladder_half_width(2.5, t, 1.0, &C);
    momentum_ladder(&model.bind(C), &linspace(-half, half, 2001), t, 1.0).unwrap()
}

// common far time for the slit-count comparison: orders of the widest
// grating have separated
fn ladder_time() -> f64 {
    order_separation_time(51, 1.0, 1.4, &C)
}

#[test]
fn grid_validation() {
    assert!(GridSpec::new((0.0, 0.0), 10, (0.0, 1.0), 10).is_err());
    assert!(GridSpec::new((0.0, 1.0), 1, (0.0, 1.0), 10).is_err());
    let g = GridSpec::new((-1.0, 1.0), 5, (0.0, 2.0), 3).unwrap();
    assert_eq!(g.xs(), [-1.0, -0.5, 0.0, 0.5, 1.0]);
    assert_eq!(g.ts(), [0.0, 1.0, 2.0]);
    assert_eq!(g.refined().nx, 9);
}

#[test]
fn gaussian_rows_spread_as_expected() {
    let sigma0 = 0.5;
    let model = ModelSpec::Superposition(SuperpositionSpec::single(GaussianSpec::at_rest(0.0, sigma0).unwrap()));
    let grid = GridSpec::new((-40.0, 40.0), 8001, (0.0, 3.0), 7).unwrap();
    let field = density_carpet(&model.bind(C), &grid, Normalization::Raw).unwrap();
    for (k, t) in grid.ts().into_iter().enumerate() {
        let row = field.row(k);
        let xs = grid.xs();
        let mass: f64 = row.iter().sum();
        let var: f64 = row.iter().zip(&xs).map(|(r, x)| r * x * x).sum::<f64>() / mass;
        let tau = C.hbar * t / (2.0 * C.mass * sigma0 * sigma0);
        let expected = sigma0 * (1.0 + tau * tau).sqrt();
        assert!((var.sqrt() - expected).abs() < 1e-8 * expected, "t = {t}: {} vs {expected}", var.sqrt());
    }
}

#[test]
fn talbot_rows_repeat_after_talbot_time() {
    let spec = TalbotSpec::with_default_truncation(1.0, 0.1).unwrap();
    let tau = talbot_scales(1.0, None, &C).time;
    let model = ModelSpec::Talbot(spec);
    let grid = GridSpec::new((-1.0, 1.0), 401, (0.0, tau), 2).unwrap();
    let field = density_carpet(&model.bind(C), &grid, Normalization::Raw).unwrap();
    let worst = field.row(0).iter().zip(field.row(1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn per_row_normalization() {
    let spec = TalbotSpec::with_default_truncation(1.0, 0.15).unwrap();
    let model = ModelSpec::Talbot(spec);
    let grid = GridSpec::new((-1.0, 1.0), 101, (0.0, 0.3), 9).unwrap();
    let mut field = density_carpet(&model.bind(C), &grid, Normalization::PerRowMax).unwrap();
    for k in 0..grid.nt {
        assert_eq!(field.row(k).iter().cloned().fold(0.0, f64::max), 1.0);
    }
    let once = field.values.clone();
    field.normalize_rows();
    assert_eq!(once, field.values);

    let mut zeros = CarpetField { grid, values: alloc::vec![0.0; 101 * 9], normalization: Normalization::Raw };
    zeros.normalize_rows();
    assert!(zeros.values.iter().all(|&v| v == 0.0));
}

#[test]
fn carpets_of_symmetric_models_are_mirror_symmetric() {
    let models = [
        slits(2),
        slits(5),
        ModelSpec::Talbot(TalbotSpec::with_default_truncation(1.0, 0.1).unwrap()),
        ModelSpec::Box(BoxSpec::gaussian_in_well(2.0, 0.2, 40).unwrap()),
    ];
    let grid = GridSpec::new((-0.9, 0.9), 181, (0.0, 0.7), 8).unwrap();
    for model in &models {
        let field = density_carpet(&model.bind(C), &grid, Normalization::Raw).unwrap();
        for k in 0..grid.nt {
            let row = field.row(k);
            let scale = row.iter().cloned().fold(0.0, f64::max);
            for i in 0..grid.nx {
                let diff = (row[i] - row[grid.nx - 1 - i]).abs();
                assert!(diff <= 1e-10 * scale.max(1.0), "{model:?} row {k} col {i}: {diff}");
            }
        }
    }
}

#[test]
fn talbot_recurrences() {
    for sigma0 in [0.05, 0.1, 0.2] {
        let spec = TalbotSpec::with_default_truncation(1.0, sigma0).unwrap();
        let [full, half] = talbot_recurrence_report(&spec, &C).unwrap();
        assert!(full.mismatch < 1e-8, "{full:?}");
        assert!(half.mismatch < 1e-8, "{half:?}");
        assert_eq!(half.shift, 0.5);
    }
    // a shifted replica is not a plain recurrence
    let spec = TalbotSpec::with_default_truncation(1.0, 0.1).unwrap();
    let wave = ModelSpec::Talbot(spec);
    let xs = linspace(-0.5, 0.5, 65);
    let tau = talbot_scales(1.0, None, &C).time;
    assert!(density_mismatch(&wave.bind(C), &xs, 0.5 * tau, 0.0).unwrap() > 1.0);
}

#[test]
fn box_recurrence() {
    let well = BoxSpec::gaussian_in_well(1.0, 0.08, 30).unwrap();
    assert!(box_recurrence_report(&well, &C).unwrap().mismatch < 1e-8);
    let square = square_wave_box(1.0, 0.5, 60);
    let check = box_recurrence_report(&square, &C).unwrap();
    assert!(check.mismatch < 1e-8, "{check:?}");
    assert!((check.period - 1.0 / (2.0 * PI)).abs() < 1e-15);
}

fn square_wave_box(length: f64, w: f64, k: usize) -> BoxSpec {
    let coeffs = crate::wavemodel::square_wave_coefficients(length, w, k).unwrap();
    BoxSpec::explicit(length, coeffs.into_iter().map(|c| crate::Complex64::new(c, 0.0)).collect()).unwrap()
}

#[test]
fn many_slit_ladder_has_plateaus() {
    let fraction = plateau_fraction(&far_ladder(51, ladder_time()), PLATEAU_HALF_WIDTH);
    assert!(fraction >= 0.6, "{fraction}");
}

#[test]
fn plateau_fraction_grows_with_slit_count() {
    let t = ladder_time();
    let f: Vec<f64> = [3, 11, 51].iter().map(|&n| plateau_fraction(&far_ladder(n, t), PLATEAU_HALF_WIDTH)).collect();
    assert!(f[0] <= f[1] && f[1] <= f[2], "{f:?}");
}

#[test]
fn few_slit_spikes_sit_on_density_minima() {
    let ladder = far_ladder(3, ladder_time());
    let spikes = ladder_spikes(&ladder, 0.05);
    let minima = density_minima(&ladder);
    assert!(spikes.len() >= 4, "{spikes:?}");
    for s in spikes {
        assert!(minima.iter().any(|&m| m.abs_diff(s) <= 1), "spike at {} off any minimum", ladder[s].x);
    }
}

#[test]
fn single_gaussian_gives_linear_ramp() {
    let sigma0 = 0.3;
    let model = ModelSpec::Superposition(SuperpositionSpec::single(GaussianSpec::at_rest(0.0, sigma0).unwrap()));
    let t = 4.0;
    let xs = linspace(-10.0, 10.0, 201);
    let ladder = momentum_ladder(&model.bind(C), &xs, t, 1.0).unwrap();
    let t0 = 2.0 * C.mass * sigma0 * sigma0 / C.hbar;
    let slope = C.mass * t / (t * t + t0 * t0) / (2.0 * PI * C.hbar);
    for p in &ladder {
        let got = p.p_normalized.unwrap();
        assert!((got - slope * p.x).abs() < 1e-10, "x = {}", p.x);
    }
    assert!(ladder_spikes(&ladder, 1e-6).is_empty());
}

#[test]
fn ladder_skips_points_below_floor() {
    let model = slits(1);
    let xs = linspace(0.0, 20.0, 11);
    let ladder = momentum_ladder(&model.bind(C), &xs, 0.0, 1.0).unwrap();
    assert!(ladder[0].p_normalized.is_some());
    assert!(ladder[10].p_normalized.is_none());
}

#[test]
fn far_field_time_reaches_target_width() {
    let t = far_field_time(0.1, 1.0, 10.0, &C);
    let g = GaussianSpec::at_rest(0.0, 0.1).unwrap();
    assert!((g.width(&C, t) - 10.0).abs() < 1e-9);
    assert_eq!(far_field_time(0.5, 1.0, 0.1, &C), 0.0);
}
