//! Space-time density carpets, recurrence checks and far-field momentum
//! ladders.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hydro::{self, RELATIVE_DENSITY_FLOOR};
use crate::wavemodel::{
    box_recurrence_time, talbot_scales, BoxMode, BoxSpec, ModelSpec, PhysicalConstants, TalbotSpec,
    WaveFunction,
};

/// Rectangular (x, t) grid with inclusive endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub nx: usize,
    pub t_range: (f64, f64),
    pub nt: usize,
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), nx: usize, t_range: (f64, f64), nt: usize) -> Result<Self> {
        if !(x_range.0 < x_range.1) || !(t_range.0 < t_range.1) {
            return Err(Error::Domain("grid ranges must be nondegenerate"));
        }
        if nx < 2 || nt < 2 {
            return Err(Error::Domain("grid needs at least two points per axis"));
        }
        Ok(Self { x_range, nx, t_range, nt })
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_range.1 - self.t_range.0) / (self.nt - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_range.0, self.x_range.1, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(self.t_range.0, self.t_range.1, self.nt)
    }

    /// Same ranges with every step halved.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, nt: 2 * self.nt - 1, ..*self }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5 * (a + b)],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * h }).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    /// Each time row scaled so its maximum is 1 (zero rows stay zero).
    PerRowMax,
}

/// ρ on a grid, row-major with one row per time.
#[derive(Clone, Debug, PartialEq)]
pub struct CarpetField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl CarpetField {
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.grid.nx..(k + 1) * self.grid.nx]
    }

    pub fn normalize_rows(&mut self) {
        let nx = self.grid.nx;
        for row in self.values.chunks_mut(nx) {
            let max = row.iter().cloned().fold(0.0, f64::max);
            if max > 0.0 {
                row.iter_mut().for_each(|v| *v /= max);
            }
        }
        self.normalization = Normalization::PerRowMax;
    }
}

pub fn density_row<W: WaveFunction>(wave: &W, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    xs.iter().map(|&x| wave.sample(x, t).map(|w| w.density())).collect()
}

pub fn density_carpet<W: WaveFunction>(wave: &W, grid: &GridSpec, norm: Normalization) -> Result<CarpetField> {
    let xs = grid.xs();
    let mut values = Vec::with_capacity(grid.nx * grid.nt);
    for t in grid.ts() {
        values.extend(density_row(wave, &xs, t)?);
    }
    let mut field = CarpetField { grid: *grid, values, normalization: Normalization::Raw };
    if norm == Normalization::PerRowMax {
        field.normalize_rows();
    }
    Ok(field)
}

/// One density comparison ρ(x + shift, t + period) vs ρ(x, t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceCheck {
    pub label: &'static str,
    pub period: f64,
    pub shift: f64,
    /// Sup-norm density difference over the sampled (x, t) points.
    pub mismatch: f64,
}

/// Reference times as fractions of the period.
const RECURRENCE_PHASES: [f64; 4] = [0.0, 0.137, 0.5, 0.731];
const RECURRENCE_POINTS: usize = 257;

fn density_mismatch<W: WaveFunction>(wave: &W, xs: &[f64], period: f64, shift: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for frac in RECURRENCE_PHASES {
        let t = frac * period;
        for &x in xs {
            let a = wave.sample(x, t)?.density();
            let b = wave.sample(x + shift, t + period)?.density();
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Talbot: full recurrence at τ_T and the half-period shifted replica at
/// τ_T/2. Box: density revival at τ_r = md²/2πħ.
pub fn talbot_recurrence_report(spec: &TalbotSpec, c: &PhysicalConstants) -> Result<[RecurrenceCheck; 2]> {
    let model = ModelSpec::Talbot(*spec);
    let wave = model.bind(*c);
    let tau = talbot_scales(spec.d, None, c).time;
    let xs = linspace(-0.5 * spec.d, 0.5 * spec.d, RECURRENCE_POINTS);
    Ok([
        RecurrenceCheck { label: "talbot_time", period: tau, shift: 0.0, mismatch: density_mismatch(&wave, &xs, tau, 0.0)? },
        RecurrenceCheck {
            label: "half_talbot_shifted",
            period: 0.5 * tau,
            shift: 0.5 * spec.d,
            mismatch: density_mismatch(&wave, &xs, 0.5 * tau, 0.5 * spec.d)?,
        },
    ])
}

pub fn box_recurrence_report(spec: &BoxSpec, c: &PhysicalConstants) -> Result<RecurrenceCheck> {
    let model = ModelSpec::Box(spec.clone());
    let wave = model.bind(*c);
    let tau = box_recurrence_time(spec.d(), c);
    let (lo, hi) = spec.bounds();
    let xs = linspace(lo, hi, RECURRENCE_POINTS);
    let label = match spec.mode() {
        BoxMode::GaussianInWell { .. } => "box_recurrence",
        BoxMode::ExplicitCoefficients => "box_recurrence_sine_modes",
    };
    Ok(RecurrenceCheck { label, period: tau, shift: 0.0, mismatch: density_mismatch(&wave, &xs, tau, 0.0)? })
}

/// Bohmian momentum at one grid point, in units of 2πħ/d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderPoint {
    pub x: f64,
    pub rho: f64,
    /// `None` where the density is below the floor.
    pub p_normalized: Option<f64>,
}

/// p_B(x) = m v(x, t_far) / (2πħ/d) along `xs`. Points with density below
/// 1e-12 of the largest sampled density are skipped.
pub fn momentum_ladder<W: WaveFunction>(wave: &W, xs: &[f64], t_far: f64, d: f64) -> Result<Vec<LadderPoint>> {
    let c = wave.constants();
    let samples = xs.iter().map(|&x| wave.sample(x, t_far)).collect::<Result<Vec<_>>>()?;
    let max_rho = samples.iter().map(|w| w.density()).fold(0.0, f64::max);
    let floor = RELATIVE_DENSITY_FLOOR * max_rho;
    let unit = 2.0 * PI * c.hbar / d;
    Ok(xs
        .iter()
        .zip(&samples)
        .map(|(&x, w)| LadderPoint {
            x,
            rho: w.density(),
            p_normalized: hydro::velocity(w, &c, floor).ok().map(|v| c.mass * v / unit),
        })
        .collect())
}

/// Plateau detector half-width around integers.
pub const PLATEAU_HALF_WIDTH: f64 = 0.05;

/// Fraction of non-skipped points within `half_width` of an integer.
pub fn plateau_fraction(points: &[LadderPoint], half_width: f64) -> f64 {
    let mut kept = 0usize;
    let mut on = 0usize;
    for p in points.iter().filter_map(|p| p.p_normalized) {
        kept += 1;
        if (p - p.round()).abs() <= half_width {
            on += 1;
        }
    }
    if kept == 0 {
        0.0
    } else {
        on as f64 / kept as f64
    }
}

/// Time at which a packet of initial width `sigma0` has spread to
/// σ_t = `factor`·d.
pub fn far_field_time(sigma0: f64, d: f64, factor: f64, c: &PhysicalConstants) -> f64 {
    let ratio = factor * d / sigma0;
    if ratio <= 1.0 {
        return 0.0;
    }
    2.0 * c.mass * sigma0 * sigma0 / c.hbar * (ratio * ratio - 1.0).sqrt()
}

/// Time after which the diffraction orders of an `n`-slit grating with
/// spacing `d` have moved apart by more than the grating width,
/// scaled by `factor` (t = factor·n·md²/2πħ).
pub fn order_separation_time(n: usize, d: f64, factor: f64, c: &PhysicalConstants) -> f64 {
    factor * n as f64 * c.mass * d * d / (2.0 * PI * c.hbar)
}

/// Half-width in x covering normalized momenta in [−orders, orders] at
/// time t in the far field, where x ≈ p t / m.
pub fn ladder_half_width(orders: f64, t: f64, d: f64, c: &PhysicalConstants) -> f64 {
    orders * 2.0 * PI * c.hbar * t / (c.mass * d)
}

/// Indices of local density minima (strict on at least one side).
pub fn density_minima(points: &[LadderPoint]) -> Vec<usize> {
    (1..points.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b, c) = (points[i - 1].rho, points[i].rho, points[i + 1].rho);
            b <= a && b <= c && (b < a || b < c)
        })
        .collect()
}

/// Spike centres along a ladder. A point is a candidate when p departs
/// from the average of its neighbours by more than `threshold`; candidates
/// closer than four cells form one spike, centred on the largest departure.
pub fn ladder_spikes(points: &[LadderPoint], threshold: f64) -> Vec<usize> {
    const MERGE: usize = 3;
    let n = points.len();
    let dev = |i: usize| -> Option<f64> {
        if i == 0 || i + 1 >= n {
            return None;
        }
        let (a, b, c) = (points[i - 1].p_normalized?, points[i].p_normalized?, points[i + 1].p_normalized?);
        Some((b - 0.5 * (a + c)).abs())
    };
    let mut spikes: Vec<(usize, f64)> = Vec::new();
    let mut last = None;
    for i in 1..n.saturating_sub(1) {
        let Some(d) = dev(i).filter(|&d| d > threshold) else { continue };
        match (last, spikes.last_mut()) {
            (Some(l), Some(top)) if i - l <= MERGE => {
                if d > top.1 {
                    *top = (i, d);
                }
            }
            _ => spikes.push((i, d)),
        }
        last = Some(i);
    }
    spikes.into_iter().map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests;
