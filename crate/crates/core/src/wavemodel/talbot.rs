use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{PhysicalConstants, WaveSample};
use crate::error::{Error, Result};

/// Smallest retained Gaussian weight exp(-σ0²p_n²/ħ²) for the default truncation.
pub const TALBOT_TAIL: f64 = 1e-16;

/// Periodic grating of Gaussian slits with period `d`, expanded in the
/// quantized plane waves p_n = 2πnħ/d, |n| ≤ `nmax`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TalbotSpec {
    pub d: f64,
    pub sigma0: f64,
    pub nmax: usize,
}

impl TalbotSpec {
    pub fn new(d: f64, sigma0: f64, nmax: usize) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain("grating period d must be positive"));
        }
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(Error::Domain("sigma0 must be positive"));
        }
        Ok(Self { d, sigma0, nmax })
    }

    /// Truncation at the first n whose weight drops below [`TALBOT_TAIL`].
    pub fn with_default_truncation(d: f64, sigma0: f64) -> Result<Self> {
        let mut spec = Self::new(d, sigma0, 0)?;
        spec.nmax = default_nmax(d, sigma0);
        Ok(spec)
    }

    /// Wavenumber p_n/ħ.
    pub fn wavenumber(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.d
    }

    /// ω_n = E_n/ħ = ħ k_n² / 2m.
    pub fn frequency(&self, n: i64, c: &PhysicalConstants) -> f64 {
        let k = self.wavenumber(n);
        c.hbar * k * k / (2.0 * c.mass)
    }

    /// exp(-σ0² p_n² / ħ²)
    pub fn weight(&self, n: i64) -> f64 {
        let k = self.wavenumber(n);
        (-self.sigma0 * self.sigma0 * k * k).exp()
    }

    /// Retained modes as (n, weight) for n = -nmax..=nmax, ordered by |n|.
    pub fn modes(&self) -> Vec<(i64, f64)> {
        let mut out = Vec::with_capacity(2 * self.nmax + 1);
        out.push((0, self.weight(0)));
        for n in 1..=self.nmax as i64 {
            out.push((n, self.weight(n)));
            out.push((-n, self.weight(-n)));
        }
        out
    }

    /// Prefactor making ∫_cell |ψ|² = 1 for the truncated sum.
    ///
    /// The closed-form prefactor √(1/d)(8πσ0²/d²)^{1/4} normalizes the
    /// infinite series; Parseval over one period gives the exact value for
    /// the truncation.
    pub fn normalization(&self) -> f64 {
        let sum_sq: f64 = self.modes().iter().map(|(_, a)| a * a).sum();
        1.0 / (self.d * sum_sq).sqrt()
    }

    pub fn eval(&self, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
        let norm = self.normalization();
        let mut out = WaveSample::default();
        // ±n pairs combine into 2 cos(k_n x); summed by ascending |n|.
        for n in 0..=self.nmax as i64 {
            let k = self.wavenumber(n);
            let a = self.weight(n) * if n == 0 { 1.0 } else { 2.0 };
            let time = Complex64::from_polar(a * norm, -self.frequency(n, c) * t);
            let (s, co) = (k * x).sin_cos();
            out.psi += time * co;
            out.dpsi += time * (-k * s);
            out.d2psi += time * (-k * k * co);
        }
        out
    }
}

pub fn default_nmax(d: f64, sigma0: f64) -> usize {
    // σ0² (2πn/d)² > ln(1/tail)
    let cutoff = d * (-TALBOT_TAIL.ln()).sqrt() / (2.0 * PI * sigma0);
    cutoff.floor() as usize + 1
}
