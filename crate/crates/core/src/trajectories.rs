//! Bohmian trajectories: integral curves of ẋ = v(x, t) for any model,
//! deterministic initial conditions and ensemble diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::hydro;
use crate::ode::{integrate_dense, Dopri5Options};
use crate::wavemodel::{PhysicalConstants, SuperpositionSpec, TalbotSpec, WaveFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Node threshold, relative to `reference_density`.
    pub density_floor: f64,
    /// Density scale for the node threshold. `None` uses ρ(x0, t0) of each
    /// path; ensembles fill it with the peak density on their support.
    pub reference_density: Option<f64>,
    /// Strictly increasing; the first entry is the start time.
    pub save_times: Vec<f64>,
}

impl IntegratorConfig {
    pub fn new(save_times: Vec<f64>) -> Result<Self> {
        let cfg = Self { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY, density_floor: 1e-10, reference_density: None, save_times };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `n` equally spaced save times on [t0, t1].
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t0 < t1) {
            return Err(Error::Domain("need t0 < t1 and at least two save times"));
        }
        Self::new(crate::carpets::linspace(t0, t1, n))
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Result<Self> {
        self.rtol = rtol;
        self.atol = atol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.max_step > 0.0 && self.density_floor > 0.0) {
            return Err(Error::Domain("tolerances, max_step and density_floor must be positive"));
        }
        if self.reference_density.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Domain("reference_density must be positive"));
        }
        if self.save_times.is_empty() || self.save_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("save_times must be finite and nonempty"));
        }
        if self.save_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("save_times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.save_times[0]
    }

    pub fn end(&self) -> f64 {
        self.save_times[self.save_times.len() - 1]
    }

    fn ode_options(&self) -> Dopri5Options {
        Dopri5Options { rtol: self.rtol, atol: self.atol, max_step: self.max_step, ..Default::default() }
    }
}

/// v = (ħ/m) Im(ψ'/ψ) at (x, t); NodeError where ρ < `floor`.
pub fn velocity_at<W: WaveFunction>(wave: &W, x: f64, t: f64, floor: f64) -> Result<f64> {
    let w = wave.sample(x, t)?;
    hydro::velocity(&w, &wave.constants(), floor)
}

/// Grating velocity written as a ratio of double sums over the plane-wave
/// orders, built without ψ itself.
pub fn talbot_velocity_double_sum(spec: &TalbotSpec, c: &PhysicalConstants, x: f64, t: f64) -> f64 {
    let n = spec.nmax as i64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in -n..=n {
        let (ki, wi, ai) = (spec.wavenumber(i), spec.frequency(i, c), spec.weight(i));
        for j in -n..=n {
            let (kj, wj, aj) = (spec.wavenumber(j), spec.frequency(j, c), spec.weight(j));
            let cos = ((ki - kj) * x - (wi - wj) * t).cos();
            num += c.hbar * ki * ai * aj * cos;
            den += ai * aj * cos;
        }
    }
    num / (c.mass * den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathStatus {
    Completed,
    /// The density fell below the floor at `time`.
    NodeAbort { time: f64 },
    /// Integration stopped for another reason (step limit, overflow).
    Failed { time: f64 },
}

impl PathStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, PathStatus::Completed)
    }
}

/// Positions at the config's save times; NaN after an abort.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub x0: f64,
    pub positions: Vec<f64>,
    pub status: PathStatus,
}

pub fn integrate<W: WaveFunction>(wave: &W, x0: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let t0 = cfg.start();
    let rho0 = wave.sample(x0, t0)?.density();
    let floor = cfg.density_floor * cfg.reference_density.unwrap_or(rho0);
    if !(rho0 > 0.0) || rho0 < floor {
        return Err(Error::Node { rho: rho0, floor });
    }
    let sol = integrate_dense(|t, x| velocity_at(wave, x, t, floor), t0, x0, &cfg.save_times, &cfg.ode_options());
    let mut positions = sol.values;
    let status = match sol.failure {
        None => PathStatus::Completed,
        Some((time, Error::Node { .. })) => PathStatus::NodeAbort { time },
        Some((time, _)) => PathStatus::Failed { time },
    };
    positions.resize(cfg.save_times.len(), f64::NAN);
    Ok(Trajectory { x0, positions, status })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Inverse-CDF draws from ρ(·, t0) restricted to the support.
    DensityWeighted,
    /// Equally spaced, endpoints included.
    UniformSupport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub n_traj: usize,
    pub sampling: Sampling,
    pub support: (f64, f64),
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::Domain("ensemble needs at least one trajectory"));
        }
        if !(self.support.0 < self.support.1) {
            return Err(Error::Domain("support must satisfy xmin < xmax"));
        }
        Ok(())
    }
}

/// Points of the tabulated density used for inverse-CDF sampling.
pub const CDF_POINTS: usize = 4096;

/// Uniform deviate in [0, 1) for path `index`, from the seed `seed ^ index`.
pub fn path_uniform(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64);
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Initial positions, sorted ascending. Path order in an ensemble follows
/// this order.
pub fn sample_initial<W: WaveFunction>(spec: &EnsembleSpec, wave: &W, t0: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    let (lo, hi) = spec.support;
    match spec.sampling {
        Sampling::UniformSupport => Ok(crate::carpets::linspace(lo, hi, spec.n_traj)),
        Sampling::DensityWeighted => {
            let xs = crate::carpets::linspace(lo, hi, CDF_POINTS);
            let rho = crate::carpets::density_row(wave, &xs, t0)?;
            let mut cdf = vec![0.0; CDF_POINTS];
            for i in 1..CDF_POINTS {
                cdf[i] = cdf[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (xs[i] - xs[i - 1]);
            }
            let total = cdf[CDF_POINTS - 1];
            if !(total >= 1e-12) {
                return Err(Error::Domain("density mass inside the support is below 1e-12"));
            }
            let mut out: Vec<f64> = (0..spec.n_traj)
                .map(|i| {
                    let target = path_uniform(spec.seed, i) * total;
                    let k = cdf.partition_point(|&c| c <= target).clamp(1, CDF_POINTS - 1);
                    let (c0, c1) = (cdf[k - 1], cdf[k]);
                    let f = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
                    xs[k - 1] + f * (xs[k] - xs[k - 1])
                })
                .collect();
            out.sort_by(f64::total_cmp);
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    pub times: Vec<f64>,
    /// `paths[i][k]` is path i at `times[k]`.
    pub paths: Vec<Vec<f64>>,
    pub status: Vec<PathStatus>,
}

impl TrajectoryEnsemble {
    pub fn from_trajectories(times: Vec<f64>, trajectories: Vec<Trajectory>) -> Self {
        let mut paths = Vec::with_capacity(trajectories.len());
        let mut status = Vec::with_capacity(trajectories.len());
        for tr in trajectories {
            paths.push(tr.positions);
            status.push(tr.status);
        }
        Self { times, paths, status }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn aborted(&self) -> usize {
        self.status.iter().filter(|s| !s.is_completed()).count()
    }

    pub fn abort_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.aborted() as f64 / self.len() as f64
        }
    }

    /// Final positions of completed paths, with their indices.
    pub fn final_positions(&self) -> Vec<(usize, f64)> {
        let last = self.times.len() - 1;
        (0..self.len()).filter(|&i| self.status[i].is_completed()).map(|i| (i, self.paths[i][last])).collect()
    }
}

/// Integrates each initial position in order. Paths are independent, so
/// callers may instead integrate them concurrently and assemble with
/// [`TrajectoryEnsemble::from_trajectories`].
pub fn run_paths<W: WaveFunction>(wave: &W, x0s: &[f64], cfg: &IntegratorConfig) -> Result<TrajectoryEnsemble> {
    let trajectories = x0s.iter().map(|&x0| integrate(wave, x0, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryEnsemble::from_trajectories(cfg.save_times.clone(), trajectories))
}

pub fn run_ensemble<W: WaveFunction>(wave: &W, spec: &EnsembleSpec, cfg: &IntegratorConfig) -> Result<TrajectoryEnsemble> {
    let cfg = ensemble_config(wave, spec, cfg)?;
    let x0s = sample_initial(spec, wave, cfg.start())?;
    run_paths(wave, &x0s, &cfg)
}

/// `cfg` with the reference density set to the peak of ρ(·, t0) over the
/// support, unless the caller already chose one.
pub fn ensemble_config<W: WaveFunction>(wave: &W, spec: &EnsembleSpec, cfg: &IntegratorConfig) -> Result<IntegratorConfig> {
    cfg.validate()?;
    spec.validate()?;
    let mut cfg = cfg.clone();
    if cfg.reference_density.is_none() {
        let xs = crate::carpets::linspace(spec.support.0, spec.support.1, CDF_POINTS);
        let peak = crate::carpets::density_row(wave, &xs, cfg.start())?.into_iter().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Domain("density vanishes on the support"));
        }
        cfg.reference_density = Some(peak);
    }
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderingViolation {
    /// Adjacent completed paths (lower index first) found out of order.
    pub pair: (usize, usize),
    pub time_index: usize,
    pub time: f64,
}

/// Checks that completed paths keep their index order (the initial sort
/// order) at every saved time. Reports the earliest violation.
pub fn ordering_check(e: &TrajectoryEnsemble) -> Option<OrderingViolation> {
    let live: Vec<usize> = (0..e.len()).filter(|&i| e.status[i].is_completed()).collect();
    for (k, &time) in e.times.iter().enumerate() {
        for w in live.windows(2) {
            let (a, b) = (w[0], w[1]);
            let tied_at_start = e.paths[a][0] == e.paths[b][0];
            let (xa, xb) = (e.paths[a][k], e.paths[b][k]);
            if xa > xb || (xa == xb && !tied_at_start) {
                return Some(OrderingViolation { pair: (a, b), time_index: k, time });
            }
        }
    }
    None
}

/// Number of completed paths whose position changes sign relative to
/// `line` at some saved time.
pub fn side_changes(e: &TrajectoryEnsemble, line: f64) -> usize {
    (0..e.len())
        .filter(|&i| e.status[i].is_completed())
        .filter(|&i| {
            let s0 = e.paths[i][0] < line;
            e.paths[i].iter().any(|&x| (x < line) != s0)
        })
        .count()
}

/// Per-side statistics of a two-packet ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideReport {
    pub paths: usize,
    /// Mean velocity at the last saved time, completed paths only.
    pub mean_final_velocity: f64,
    /// Initial velocity of the packet on this side and of the other one.
    pub own_velocity: f64,
    pub other_velocity: f64,
    /// Paths that end on the other side of the symmetry line.
    pub crossed: usize,
    pub initial_spread: f64,
    pub final_spread: f64,
    /// σ_t of the other packet at the last saved time.
    pub other_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeReport {
    pub symmetry_line: f64,
    pub time: f64,
    pub left: SideReport,
    pub right: SideReport,
}

impl ExchangeReport {
    pub fn crossings(&self) -> usize {
        self.left.crossed + self.right.crossed
    }
}

/// Classifies paths by starting side of the line through the midpoint of
/// the two packet centres and compares the outgoing motion with both
/// packets.
pub fn exchange_diagnostics(
    e: &TrajectoryEnsemble,
    model: &SuperpositionSpec,
    c: &PhysicalConstants,
) -> Result<ExchangeReport> {
    let comps = model.components();
    if comps.len() != 2 {
        return Err(Error::Arity { expected: 2, got: comps.len() });
    }
    let (first, second) = if comps[0].x0 <= comps[1].x0 { (&comps[0], &comps[1]) } else { (&comps[1], &comps[0]) };
    let t0 = e.times[0];
    let t_final = e.times[e.times.len() - 1];
    let line = 0.5 * (first.center(t0) + second.center(t0));
    let wave = crate::ModelSpec::Superposition(model.clone());
    let wave = wave.bind(*c);

    let side = |left: bool| -> Result<SideReport> {
        let (own, other) = if left { (first, second) } else { (second, first) };
        let members: Vec<usize> = (0..e.len()).filter(|&i| (e.paths[i][0] < line) == left).collect();
        let mut initial = Vec::new();
        let mut finals = Vec::new();
        let mut v_sum = 0.0;
        let mut crossed = 0;
        for &i in &members {
            if !e.status[i].is_completed() {
                continue;
            }
            let xf = e.paths[i][e.times.len() - 1];
            initial.push(e.paths[i][0]);
            finals.push(xf);
            v_sum += velocity_at(&wave, xf, t_final, hydro::DEFAULT_DENSITY_FLOOR)?;
            if (xf < line) != left {
                crossed += 1;
            }
        }
        let n = finals.len();
        Ok(SideReport {
            paths: members.len(),
            mean_final_velocity: if n > 0 { v_sum / n as f64 } else { f64::NAN },
            own_velocity: own.v,
            other_velocity: other.v,
            crossed,
            initial_spread: std_dev(&initial),
            final_spread: std_dev(&finals),
            other_width: other.width(c, t_final),
        })
    };
    Ok(ExchangeReport { symmetry_line: line, time: t_final, left: side(true)?, right: side(false)? })
}

/// Population standard deviation, summed in order.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Histogram of completed final positions against ∫ρ over the same bins,
/// both normalized to unit total. Returns the largest bin difference.
pub fn transport_mismatch<W: WaveFunction>(
    e: &TrajectoryEnsemble,
    wave: &W,
    range: (f64, f64),
    bins: usize,
) -> Result<f64> {
    if bins == 0 || !(range.0 < range.1) {
        return Err(Error::Domain("need at least one bin and a nondegenerate range"));
    }
    let t = e.times[e.times.len() - 1];
    let width = (range.1 - range.0) / bins as f64;
    let mut counts = vec![0.0; bins];
    let finals = e.final_positions();
    for &(_, x) in &finals {
        if x >= range.0 && x <= range.1 {
            let b = (((x - range.0) / width) as usize).min(bins - 1);
            counts[b] += 1.0;
        }
    }
    // 16 Simpson panels per bin
    const PANELS: usize = 16;
    let mut mass = vec![0.0; bins];
    for (b, m) in mass.iter_mut().enumerate() {
        let a = range.0 + b as f64 * width;
        let h = width / PANELS as f64;
        let mut s = 0.0;
        for k in 0..=PANELS {
            let w = if k == 0 || k == PANELS { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * wave.sample(a + k as f64 * h, t)?.density();
        }
        *m = s * h / 3.0;
    }
    let nc: f64 = counts.iter().sum();
    let nm: f64 = mass.iter().sum();
    if nc == 0.0 || nm == 0.0 {
        return Err(Error::Domain("no paths or no density inside the histogram range"));
    }
    Ok(counts.iter().zip(&mass).map(|(c, m)| (c / nc - m / nm).abs()).fold(0.0, f64::max))
}
