use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{PhysicalConstants, WaveSample};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Which eigenbasis a [`BoxSpec`] expands in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoxMode {
    /// Well on [-d/2, d/2], symmetric modes cos(p_n x/ħ), p_n = (2n+1)πħ/d,
    /// weights of a Gaussian of width `sigma0` centered in the well.
    GaussianInWell { sigma0: f64 },
    /// Well on [0, d], modes √(2/d) sin(nπx/d), n = 1, 2, ...
    ExplicitCoefficients,
}

/// Superposition of infinite-well eigenstates with unit-norm coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    d: f64,
    coefficients: Vec<Complex64>,
    mode: BoxMode,
}

impl BoxSpec {
    /// Truncated Gaussian-in-well expansion with `n_terms` symmetric modes.
    pub fn gaussian_in_well(d: f64, sigma0: f64, n_terms: usize) -> Result<Self> {
        if !(sigma0 > 0.0) {
            return Err(Error::Domain("sigma0 must be positive"));
        }
        let mode = BoxMode::GaussianInWell { sigma0 };
        let coefficients = (0..n_terms)
            .map(|n| {
                let k = mode_wavenumber(mode, d, n);
                Complex64::new((-sigma0 * sigma0 * k * k).exp(), 0.0)
            })
            .collect();
        Self::with_mode(d, coefficients, mode)
    }

    /// Sine-mode expansion; coefficient `i` multiplies eigenstate n = i + 1.
    pub fn explicit(d: f64, coefficients: Vec<Complex64>) -> Result<Self> {
        Self::with_mode(d, coefficients, BoxMode::ExplicitCoefficients)
    }

    fn with_mode(d: f64, mut coefficients: Vec<Complex64>, mode: BoxMode) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain("well width d must be positive"));
        }
        if coefficients.is_empty() {
            return Err(Error::Domain("box state needs at least one coefficient"));
        }
        let n2: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Domain("box coefficients have zero or non-finite norm"));
        }
        let s = 1.0 / n2.sqrt();
        coefficients.iter_mut().for_each(|c| *c *= s);
        debug_assert!((coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < NORM_TOL);
        Ok(Self { d, coefficients, mode })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn mode(&self) -> BoxMode {
        self.mode
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Same state keeping only the first `k` coefficients, renormalized.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        let k = k.min(self.coefficients.len());
        Self::with_mode(self.d, self.coefficients[..k].to_vec(), self.mode)
    }

    /// The Gaussian-in-well weights assume the packet is negligible at the
    /// walls, which holds for σ0 ≲ d/8.
    pub fn validity_warning(&self) -> Option<&'static str> {
        match self.mode {
            BoxMode::GaussianInWell { sigma0 } if sigma0 > self.d / 8.0 => {
                Some("sigma0 > d/8: Gaussian is not negligible at the walls")
            }
            _ => None,
        }
    }

    /// Wall positions.
    pub fn bounds(&self) -> (f64, f64) {
        match self.mode {
            BoxMode::GaussianInWell { .. } => (-0.5 * self.d, 0.5 * self.d),
            BoxMode::ExplicitCoefficients => (0.0, self.d),
        }
    }

    /// p/ħ of the mode stored at `index`.
    pub fn wavenumber(&self, index: usize) -> f64 {
        mode_wavenumber(self.mode, self.d, index)
    }

    pub fn energy(&self, index: usize, c: &PhysicalConstants) -> f64 {
        let k = self.wavenumber(index);
        c.hbar * c.hbar * k * k / (2.0 * c.mass)
    }

    /// Coefficients with their time phases, c_n e^{-iE_n t/ħ}.
    pub fn evolved_coefficients(&self, c: &PhysicalConstants, t: f64) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, cn)| *cn * Complex64::from_polar(1.0, -self.energy(i, c) * t / c.hbar))
            .collect()
    }

    pub fn eval(&self, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
        self.eval_with(&self.evolved_coefficients(c, t), x)
    }

    /// Evaluates Σ b_n φ_n(x) for precomputed `b_n` (see
    /// [`evolved_coefficients`](Self::evolved_coefficients)).
    ///
    /// Mode trigonometry comes from a rotation recurrence, so one point
    /// costs a handful of flops per mode.
    pub fn eval_with(&self, evolved: &[Complex64], x: f64) -> WaveSample {
        let (lo, hi) = self.bounds();
        if x < lo || x > hi {
            return WaveSample::default();
        }
        let amp = (2.0 / self.d).sqrt();
        let mut out = WaveSample::default();
        match self.mode {
            BoxMode::GaussianInWell { .. } => {
                // cos((2n+1)θ), θ = πx/d; step the phasor by e^{2iθ}
                let theta = PI * x / self.d;
                let (s1, c1) = theta.sin_cos();
                let (s2, c2) = (2.0 * theta).sin_cos();
                let (mut re, mut im) = (c1, s1);
                for (i, b) in evolved.iter().enumerate() {
                    let k = self.wavenumber(i);
                    out.psi += b * (amp * re);
                    out.dpsi += b * (-amp * k * im);
                    out.d2psi += b * (-amp * k * k * re);
                    let next = re * c2 - im * s2;
                    im = re * s2 + im * c2;
                    re = next;
                }
            }
            BoxMode::ExplicitCoefficients => {
                let theta = PI * x / self.d;
                let (s1, c1) = theta.sin_cos();
                let (mut re, mut im) = (c1, s1);
                for (i, b) in evolved.iter().enumerate() {
                    let k = self.wavenumber(i);
                    out.psi += b * (amp * im);
                    out.dpsi += b * (amp * k * re);
                    out.d2psi += b * (-amp * k * k * im);
                    let next = re * c1 - im * s1;
                    im = re * s1 + im * c1;
                    re = next;
                }
            }
        }
        out
    }

    /// ψ alone, as in [`eval_with`](Self::eval_with).
    pub fn psi_with(&self, evolved: &[Complex64], x: f64) -> Complex64 {
        let (lo, hi) = self.bounds();
        if x < lo || x > hi {
            return Complex64::new(0.0, 0.0);
        }
        let theta = PI * x / self.d;
        let (s1, c1) = theta.sin_cos();
        let (sr, cr) = match self.mode {
            BoxMode::GaussianInWell { .. } => (2.0 * theta).sin_cos(),
            BoxMode::ExplicitCoefficients => (s1, c1),
        };
        let cosine = matches!(self.mode, BoxMode::GaussianInWell { .. });
        let (mut re, mut im) = (c1, s1);
        let mut psi = Complex64::new(0.0, 0.0);
        for b in evolved {
            psi += b * if cosine { re } else { im };
            let next = re * cr - im * sr;
            im = re * sr + im * cr;
            re = next;
        }
        psi * (2.0 / self.d).sqrt()
    }
}

fn mode_wavenumber(mode: BoxMode, d: f64, index: usize) -> f64 {
    match mode {
        BoxMode::GaussianInWell { .. } => (2 * index + 1) as f64 * PI / d,
        BoxMode::ExplicitCoefficients => (index + 1) as f64 * PI / d,
    }
}

/// Density recurrence time md²/2πħ of a well of width `d`.
pub fn box_recurrence_time(d: f64, c: &PhysicalConstants) -> f64 {
    c.mass * d * d / (2.0 * PI * c.hbar)
}

/// Projections of a centered square of width `w` (unit norm) onto the first
/// `n` sine eigenstates of a well [0, L], renormalized to unit sum of squares.
///
/// `w == length` is accepted as the full-width limit.
pub fn square_wave_coefficients(length: f64, w: f64, n: usize) -> Result<Vec<f64>> {
    if !(length > 0.0) || !(w > 0.0) {
        return Err(Error::Domain("well length and square width must be positive"));
    }
    if w > length {
        return Err(Error::Domain("square width must not exceed the well length"));
    }
    if n == 0 {
        return Err(Error::Domain("need at least one coefficient"));
    }
    // ∫ √(2/L) sin(kπx/L) / √w over [L/2 - w/2, L/2 + w/2]
    let scale = (2.0 / (length * w)).sqrt() * 2.0 * length / PI;
    let mut coeffs: Vec<f64> = (1..=n)
        .map(|k| {
            let kf = k as f64;
            if k % 2 == 0 {
                0.0
            } else {
                let sign = if k % 4 == 1 { 1.0 } else { -1.0 };
                scale * sign * (kf * PI * w / (2.0 * length)).sin() / kf
            }
        })
        .collect();
    let n2: f64 = coeffs.iter().map(|c| c * c).sum();
    let s = 1.0 / n2.sqrt();
    coeffs.iter_mut().for_each(|c| *c *= s);
    Ok(coeffs)
}

/// Superposition of harmonic-oscillator eigenstates.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSpec {
    omega: f64,
    levels: Vec<(usize, Complex64)>,
}

impl HarmonicSpec {
    pub fn new(omega: f64, mut levels: Vec<(usize, Complex64)>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain("omega must be positive"));
        }
        if levels.is_empty() {
            return Err(Error::Domain("harmonic state needs at least one level"));
        }
        for (i, (n, _)) in levels.iter().enumerate() {
            if levels[..i].iter().any(|(m, _)| m == n) {
                return Err(Error::Domain("harmonic level indices must be distinct"));
            }
        }
        let n2: f64 = levels.iter().map(|(_, c)| c.norm_sqr()).sum();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Domain("harmonic coefficients have zero norm"));
        }
        let s = 1.0 / n2.sqrt();
        levels.iter_mut().for_each(|(_, c)| *c *= s);
        Ok(Self { omega, levels })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn levels(&self) -> &[(usize, Complex64)] {
        &self.levels
    }

    pub fn energy(&self, n: usize, c: &PhysicalConstants) -> f64 {
        c.hbar * self.omega * (n as f64 + 0.5)
    }

    pub fn eval(&self, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
        let top = self.levels.iter().map(|(n, _)| *n).max().unwrap_or(0);
        let alpha = (c.mass * self.omega / c.hbar).sqrt();
        let xi = alpha * x;
        let phis = hermite_functions(top + 1, xi);
        let scale = alpha.sqrt();
        let mut out = WaveSample::default();
        for (n, cn) in &self.levels {
            let n = *n;
            let b = *cn * Complex64::from_polar(1.0, -self.energy(n, c) * t / c.hbar);
            let phi = scale * phis[n];
            // φ_n' = α[√(n/2) φ_{n-1} - √((n+1)/2) φ_{n+1}],  φ_n'' = α²(ξ² - 2n - 1) φ_n
            let lower = if n > 0 { (n as f64 / 2.0).sqrt() * phis[n - 1] } else { 0.0 };
            let upper = ((n as f64 + 1.0) / 2.0).sqrt() * phis[n + 1];
            let dphi = scale * alpha * (lower - upper);
            let d2phi = alpha * alpha * (xi * xi - 2.0 * n as f64 - 1.0) * phi;
            out.psi += b * phi;
            out.dpsi += b * dphi;
            out.d2psi += b * d2phi;
        }
        out
    }
}

/// Normalized Hermite functions h_0..=h_n at ξ (unit norm in ξ).
fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI.powf(-0.25) * (-0.5 * xi * xi).exp());
    if n >= 1 {
        h.push(2.0f64.sqrt() * xi * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// (E_b - E_a)/ħ for a two-level harmonic state.
pub fn harmonic_relative_frequency(spec: &HarmonicSpec) -> Result<f64> {
    match spec.levels() {
        [(a, _), (b, _)] => Ok(spec.omega() * (*b as f64 - *a as f64).abs()),
        other => Err(Error::Arity { expected: 2, got: other.len() }),
    }
}
