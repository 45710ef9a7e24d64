//! Closed-form wave functions and their first two spatial derivatives.

mod bound;
mod gaussian;
mod talbot;

use core::f64::consts::PI;
use core::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bound::{
    box_recurrence_time, harmonic_relative_frequency, square_wave_coefficients, BoxMode, BoxSpec,
    HarmonicSpec,
};
pub use gaussian::{eval_gaussian, gaussian_overlap, spreading_ratio, GaussianSpec, SuperpositionSpec};
pub use talbot::{default_nmax, TalbotSpec, TALBOT_TAIL};

/// ħ and m. Natural units (both 1) by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Domain("hbar must be positive"));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Domain("mass must be positive"));
        }
        Ok(Self { hbar, mass })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// ψ, ∂ψ/∂x and ∂²ψ/∂x² at one space-time point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WaveSample {
    pub psi: Complex64,
    pub dpsi: Complex64,
    pub d2psi: Complex64,
}

impl WaveSample {
    pub fn density(&self) -> f64 {
        self.psi.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.dpsi.is_finite() && self.d2psi.is_finite()
    }
}

impl Add for WaveSample {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            psi: self.psi + rhs.psi,
            dpsi: self.dpsi + rhs.dpsi,
            d2psi: self.d2psi + rhs.d2psi,
        }
    }
}

impl AddAssign for WaveSample {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul<Complex64> for WaveSample {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        Self {
            psi: self.psi * rhs,
            dpsi: self.dpsi * rhs,
            d2psi: self.d2psi * rhs,
        }
    }
}

/// A plane wave A e^{i(px - Et)/ħ}. Not normalizable; used as a
/// constant-density reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWaveSpec {
    pub p: f64,
    pub amplitude: Complex64,
}

impl PlaneWaveSpec {
    pub fn eval(&self, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
        let k = self.p / c.hbar;
        let energy = self.p * self.p / (2.0 * c.mass);
        let psi = self.amplitude * Complex64::from_polar(1.0, k * x - energy * t / c.hbar);
        let ik = Complex64::new(0.0, k);
        WaveSample { psi, dpsi: psi * ik, d2psi: psi * (ik * ik) }
    }
}

/// The analytic wave-function families.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Superposition(SuperpositionSpec),
    Talbot(TalbotSpec),
    Box(BoxSpec),
    Harmonic(HarmonicSpec),
    PlaneWave(PlaneWaveSpec),
}

impl ModelSpec {
    pub fn bind(&self, constants: PhysicalConstants) -> Evaluator<'_> {
        Evaluator { model: self, constants }
    }
}

/// Evaluates `model` at (x, t), guarding against non-finite terms.
pub fn eval_model(model: &ModelSpec, c: &PhysicalConstants, x: f64, t: f64) -> Result<WaveSample> {
    let sample = match model {
        ModelSpec::Superposition(s) => s.eval(c, x, t),
        ModelSpec::Talbot(s) => s.eval(c, x, t),
        ModelSpec::Box(s) => s.eval(c, x, t),
        ModelSpec::Harmonic(s) => s.eval(c, x, t),
        ModelSpec::PlaneWave(s) => s.eval(c, x, t),
    };
    if sample.is_finite() {
        Ok(sample)
    } else {
        Err(Error::Overflow { x, t })
    }
}

/// Anything that can be sampled as ψ(x, t) with derivatives.
pub trait WaveFunction {
    fn constants(&self) -> PhysicalConstants;
    fn sample(&self, x: f64, t: f64) -> Result<WaveSample>;
}

/// A model paired with its physical constants.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    pub model: &'a ModelSpec,
    pub constants: PhysicalConstants,
}

impl WaveFunction for Evaluator<'_> {
    fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    fn sample(&self, x: f64, t: f64) -> Result<WaveSample> {
        eval_model(self.model, &self.constants, x, t)
    }
}

impl<W: WaveFunction + ?Sized> WaveFunction for &W {
    fn constants(&self) -> PhysicalConstants {
        (**self).constants()
    }

    fn sample(&self, x: f64, t: f64) -> Result<WaveSample> {
        (**self).sample(x, t)
    }
}

/// `inner` multiplied by a global phase e^{iφ(t)}.
#[derive(Clone, Copy, Debug)]
pub struct GlobalPhase<W, F> {
    pub inner: W,
    pub phase: F,
}

impl<W: WaveFunction, F: Fn(f64) -> f64> WaveFunction for GlobalPhase<W, F> {
    fn constants(&self) -> PhysicalConstants {
        self.inner.constants()
    }

    fn sample(&self, x: f64, t: f64) -> Result<WaveSample> {
        Ok(self.inner.sample(x, t)? * Complex64::from_polar(1.0, (self.phase)(t)))
    }
}

/// Speed that keeps two packets at separation `d` within ~10% spreading
/// while they cross, and its ratio to the spreading rate v_s = ħ/2mσ0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalSpeed {
    pub v: f64,
    pub v_over_vs: f64,
}

pub const CRITICAL_SPEED_FACTOR: f64 = 2.2;

pub fn critical_speed(d: f64, sigma0: f64, c: &PhysicalConstants) -> CriticalSpeed {
    CriticalSpeed {
        v: CRITICAL_SPEED_FACTOR * c.hbar * d / (2.0 * c.mass * sigma0 * sigma0),
        v_over_vs: CRITICAL_SPEED_FACTOR * d / sigma0,
    }
}

/// Spreading rate v_s = ħ/2mσ0.
pub fn spreading_speed(sigma0: f64, c: &PhysicalConstants) -> f64 {
    c.hbar / (2.0 * c.mass * sigma0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TalbotScales {
    /// z_T = d²/λ, when a wavelength is given.
    pub distance: Option<f64>,
    /// τ_T = md²/πħ.
    pub time: f64,
}

pub fn talbot_scales(d: f64, wavelength: Option<f64>, c: &PhysicalConstants) -> TalbotScales {
    TalbotScales {
        distance: wavelength.map(|l| d * d / l),
        time: c.mass * d * d / (PI * c.hbar),
    }
}
