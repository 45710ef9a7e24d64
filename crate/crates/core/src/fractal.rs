//! Curve-length scaling L(K) ∝ K^(D_f − 1) for truncated eigenstate
//! expansions in a box, for the density and for single trajectories.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::carpets::linspace;
use crate::error::{Error, Result};
use crate::trajectories::{integrate, IntegratorConfig, PathStatus};
use crate::wavemodel::{box_recurrence_time, square_wave_coefficients, BoxSpec, ModelSpec, PhysicalConstants};

/// Polyline length through (xs[i], ys[i]).
pub fn curve_length(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Arity { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::Domain("curve needs at least two samples"));
    }
    let mut length = 0.0;
    for i in 1..xs.len() {
        let dx = xs[i] - xs[i - 1];
        if !(dx > 0.0) {
            return Err(Error::Domain("curve abscissae must be strictly increasing"));
        }
        length += dx.hypot(ys[i] - ys[i - 1]);
    }
    Ok(length)
}

/// (K, L) pairs with K strictly increasing and L > 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalingSeries {
    entries: Vec<(usize, f64)>,
}

impl ScalingSeries {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("scaling series K must be strictly increasing"));
        }
        if entries.iter().any(|e| !(e.1 > 0.0) || !e.1.is_finite()) {
            return Err(Error::Domain("scaling series lengths must be positive"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub d_f: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// Entries that entered the fit.
    pub points: usize,
}

/// Fraction of the smallest K values left out of the fit.
pub const FIT_DROP_FRACTION: f64 = 0.25;
pub const MIN_FIT_POINTS: usize = 4;

/// D_f = 1 + slope of log L against log K, fitted after dropping the
/// smallest quarter of K values (never below four points).
pub fn fractal_dimension(s: &ScalingSeries) -> Result<DimensionEstimate> {
    let n = s.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Domain("dimension fit needs at least four points"));
    }
    let drop = ((n as f64 * FIT_DROP_FRACTION) as usize).min(n - MIN_FIT_POINTS);
    fit_power_law(&s.entries[drop..])
}

/// Least-squares fit of log L = a + b log K over all entries; D_f = 1 + b.
pub fn fit_power_law(entries: &[(usize, f64)]) -> Result<DimensionEstimate> {
    let n = entries.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Domain("dimension fit needs at least four points"));
    }
    let pts: Vec<(f64, f64)> = entries.iter().map(|&(k, l)| ((k as f64).ln(), l.ln())).collect();
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    // a flat series is fitted perfectly
    let r_squared = if syy > 1e-24 * nf { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(DimensionEstimate { d_f: 1.0 + b, slope_stderr, r_squared, points: n })
}

/// Initial states whose K-term truncations are compared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoxFamily {
    /// Centered square of width `width` in a well [0, length].
    SquareWave { length: f64, width: f64 },
    /// Gaussian of width `sigma0` centered in a well [-d/2, d/2].
    GaussianInWell { d: f64, sigma0: f64 },
}

impl BoxFamily {
    pub fn truncation(&self, k: usize) -> Result<BoxSpec> {
        match *self {
            BoxFamily::SquareWave { length, width } => {
                let coeffs = square_wave_coefficients(length, width, k)?;
                BoxSpec::explicit(length, coeffs.into_iter().map(|c| Complex64::new(c, 0.0)).collect())
            }
            BoxFamily::GaussianInWell { d, sigma0 } => BoxSpec::gaussian_in_well(d, sigma0, k),
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            BoxFamily::SquareWave { length, .. } => length,
            BoxFamily::GaussianInWell { d, .. } => d,
        }
    }

    /// Centre of the well, which is also the state's mirror axis.
    pub fn center(&self) -> f64 {
        match *self {
            BoxFamily::SquareWave { length, .. } => 0.5 * length,
            BoxFamily::GaussianInWell { .. } => 0.0,
        }
    }
}

/// Default snapshot time τ_r/√2, an irrational fraction of the recurrence.
pub fn default_snapshot_time(family: &BoxFamily, c: &PhysicalConstants) -> f64 {
    box_recurrence_time(family.width(), c) / SQRT_2
}

/// Grid points per oscillation of the highest mode.
pub const POINTS_PER_MODE: usize = 32;
/// Relative change in L under grid refinement that triggers a warning.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceWarning {
    pub k: usize,
    pub length: f64,
    pub refined_length: f64,
}

impl ConvergenceWarning {
    pub fn relative_change(&self) -> f64 {
        (self.refined_length - self.length).abs() / self.length
    }
}

/// Length of ρ(·, t) of one truncation, on `nx` points and on the grid
/// with halved spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityLength {
    pub k: usize,
    pub length: f64,
    pub refined_length: f64,
}

impl DensityLength {
    pub fn warning(&self) -> Option<ConvergenceWarning> {
        let w = ConvergenceWarning { k: self.k, length: self.length, refined_length: self.refined_length };
        (w.relative_change() > CONVERGENCE_TOLERANCE).then_some(w)
    }
}

pub fn density_length(family: &BoxFamily, k: usize, t: f64, nx: usize, c: &PhysicalConstants) -> Result<DensityLength> {
    if nx < 2 {
        return Err(Error::Domain("need at least two grid points"));
    }
    let spec = family.truncation(k)?;
    let evolved = spec.evolved_coefficients(c, t);
    let (lo, hi) = spec.bounds();
    let length_on = |n: usize| -> Result<f64> {
        let xs = linspace(lo, hi, n);
        let ys: Vec<f64> = xs.iter().map(|&x| spec.psi_with(&evolved, x).norm_sqr()).collect();
        curve_length(&xs, &ys)
    };
    Ok(DensityLength { k, length: length_on(nx)?, refined_length: length_on(2 * nx - 1)? })
}

/// Grid size used when none is given: 32 points per period of mode K_max.
pub fn default_grid_points(k_max: usize) -> usize {
    POINTS_PER_MODE * k_max.max(1) + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthSeries {
    pub series: ScalingSeries,
    pub refined: ScalingSeries,
    pub warnings: Vec<ConvergenceWarning>,
}

impl LengthSeries {
    pub fn from_lengths(lengths: &[DensityLength]) -> Result<Self> {
        Ok(Self {
            series: ScalingSeries::new(lengths.iter().map(|l| (l.k, l.length)).collect())?,
            refined: ScalingSeries::new(lengths.iter().map(|l| (l.k, l.refined_length)).collect())?,
            warnings: lengths.iter().filter_map(DensityLength::warning).collect(),
        })
    }
}

/// L(K) of the density at time t for each K in `ks` (strictly
/// increasing), sampled on `nx` points or [`default_grid_points`].
pub fn density_length_series(
    family: &BoxFamily,
    ks: &[usize],
    t: f64,
    nx: Option<usize>,
    c: &PhysicalConstants,
) -> Result<LengthSeries> {
    let k_max = ks.iter().copied().max().ok_or(Error::Domain("no K values"))?;
    let nx = nx.unwrap_or_else(|| default_grid_points(k_max));
    let lengths = ks.iter().map(|&k| density_length(family, k, t, nx, c)).collect::<Result<Vec<_>>>()?;
    LengthSeries::from_lengths(&lengths)
}

/// `n` roughly geometric, strictly increasing integers from `lo` to `hi`.
pub fn geometric_ks(lo: usize, hi: usize, n: usize) -> Vec<usize> {
    if n < 2 || lo >= hi {
        return alloc::vec![lo.max(1)];
    }
    let r = (hi as f64 / lo as f64).ln() / (n - 1) as f64;
    let mut out: Vec<usize> = (0..n).map(|i| (lo as f64 * (r * i as f64).exp()).round() as usize).collect();
    out.dedup();
    out
}

/// Length of a path in the (t, x) plane with t scaled by the span and x
/// by the well width.
pub fn trajectory_length(times: &[f64], positions: &[f64], well_width: f64) -> Result<f64> {
    let span = times[times.len() - 1] - times[0];
    let ts: Vec<f64> = times.iter().map(|t| (t - times[0]) / span).collect();
    let xs: Vec<f64> = positions.iter().map(|x| x / well_width).collect();
    curve_length(&ts, &xs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySeries {
    pub series: ScalingSeries,
    /// Truncations whose path hit a node, with the abort time.
    pub aborted: Vec<(usize, f64)>,
}

/// Integrates the path from `x0` under each N-term truncation and records
/// its scaled (t, x) length. `cfg` supplies tolerances and save times.
pub fn trajectory_length_series(
    family: &BoxFamily,
    x0: f64,
    ns: &[usize],
    cfg: &IntegratorConfig,
    c: &PhysicalConstants,
) -> Result<TrajectorySeries> {
    cfg.validate()?;
    if cfg.save_times.len() < 2 {
        return Err(Error::Domain("need at least two save times"));
    }
    let mut entries = Vec::new();
    let mut aborted = Vec::new();
    for &n in ns {
        let model = ModelSpec::Box(family.truncation(n)?);
        let wave = model.bind(*c);
        let mut run = cfg.clone();
        if run.reference_density.is_none() {
            run.reference_density = Some(peak_density(&model, c, cfg.start()));
        }
        let tr = integrate(&wave, x0, &run)?;
        match tr.status {
            PathStatus::Completed => entries.push((n, trajectory_length(&cfg.save_times, &tr.positions, family.width())?)),
            PathStatus::NodeAbort { time } | PathStatus::Failed { time } => aborted.push((n, time)),
        }
    }
    Ok(TrajectorySeries { series: ScalingSeries::new(entries)?, aborted })
}

fn peak_density(model: &ModelSpec, c: &PhysicalConstants, t: f64) -> f64 {
    let ModelSpec::Box(spec) = model else { return 1.0 };
    let evolved = spec.evolved_coefficients(c, t);
    let (lo, hi) = spec.bounds();
    linspace(lo, hi, 4096).into_iter().map(|x| spec.psi_with(&evolved, x).norm_sqr()).fold(0.0, f64::max)
}
