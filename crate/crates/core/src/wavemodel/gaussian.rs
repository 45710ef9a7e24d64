use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{PhysicalConstants, WaveSample};
use crate::error::{Error, Result};

/// A freely evolving Gaussian packet: initial center `x0`, group velocity
/// `v`, initial width `sigma0` and complex amplitude `weight`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub v: f64,
    pub sigma0: f64,
    pub weight: Complex64,
}

impl GaussianSpec {
    pub fn new(x0: f64, v: f64, sigma0: f64, weight: Complex64) -> Result<Self> {
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(Error::Domain("sigma0 must be positive and finite"));
        }
        if !x0.is_finite() || !v.is_finite() {
            return Err(Error::Domain("x0 and v must be finite"));
        }
        if !weight.re.is_finite() || !weight.im.is_finite() {
            return Err(Error::Domain("weight must be finite"));
        }
        Ok(Self { x0, v, sigma0, weight })
    }

    /// Real unit-weight packet at rest.
    pub fn at_rest(x0: f64, sigma0: f64) -> Result<Self> {
        Self::new(x0, 0.0, sigma0, Complex64::new(1.0, 0.0))
    }

    /// Complex width σ̃_t = σ0 (1 + iħt / 2mσ0²).
    pub fn complex_width(&self, c: &PhysicalConstants, t: f64) -> Complex64 {
        Complex64::new(self.sigma0, c.hbar * t / (2.0 * c.mass * self.sigma0))
    }

    /// Real width σ_t = |σ̃_t|.
    pub fn width(&self, c: &PhysicalConstants, t: f64) -> f64 {
        self.sigma0 * spreading_ratio(self.sigma0, t, c)
    }

    pub fn center(&self, t: f64) -> f64 {
        self.x0 + self.v * t
    }

    pub fn momentum(&self, c: &PhysicalConstants) -> f64 {
        c.mass * self.v
    }
}

/// ψ, ψ′ and ψ″ of one packet, weight included.
pub fn eval_gaussian(spec: &GaussianSpec, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
    let st = spec.complex_width(c, t);
    let p = spec.momentum(c);
    let energy = p * p / (2.0 * c.mass);
    let xi = x - spec.center(t);

    // ψ = (2π σ̃_t²)^{-1/4} exp(φ), φ = -ξ²/4σ0σ̃_t + ipξ/ħ + iEt/ħ
    let four_s0_st = st * (4.0 * spec.sigma0);
    let phase = -Complex64::new(xi * xi, 0.0) / four_s0_st
        + Complex64::new(0.0, (p * xi + energy * t) / c.hbar);
    let prefactor = (2.0 * PI).powf(-0.25) / st.sqrt();
    let psi = spec.weight * prefactor * phase.exp();

    let dphase = -Complex64::new(2.0 * xi, 0.0) / four_s0_st + Complex64::new(0.0, p / c.hbar);
    let d2phase = -Complex64::new(2.0, 0.0) / four_s0_st;
    WaveSample {
        psi,
        dpsi: psi * dphase,
        d2psi: psi * (dphase * dphase + d2phase),
    }
}

/// Width growth σ_t/σ0 = √(1 + (ħt / 2mσ0²)²).
pub fn spreading_ratio(sigma0: f64, t: f64, c: &PhysicalConstants) -> f64 {
    let tau = c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
    (1.0 + tau * tau).sqrt()
}

/// Ordered, nonempty list of packets summed coherently.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpositionSpec {
    components: Vec<GaussianSpec>,
}

impl SuperpositionSpec {
    pub fn new(components: Vec<GaussianSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("superposition needs at least one component"));
        }
        Ok(Self { components })
    }

    pub fn single(g: GaussianSpec) -> Self {
        Self { components: alloc::vec![g] }
    }

    /// Two identical packets at rest centered at ±d/2, equal weights, unit norm.
    pub fn two_slit(d: f64, sigma0: f64) -> Result<Self> {
        Self::n_slit(2, d, sigma0)
    }

    /// `n` equally weighted packets at rest spaced `d` apart, centered on
    /// the origin and renormalized.
    pub fn n_slit(n: usize, d: f64, sigma0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("slit count must be at least 1"));
        }
        if !(d > 0.0) {
            return Err(Error::Domain("slit spacing d must be positive"));
        }
        let offset = 0.5 * (n as f64 - 1.0) * d;
        let components = (0..n)
            .map(|j| GaussianSpec::at_rest(j as f64 * d - offset, sigma0))
            .collect::<Result<Vec<_>>>()?;
        // packets at rest: overlaps do not depend on ħ or m
        Self::new(components)?.normalized(&PhysicalConstants::default())
    }

    /// Two packets at x = ∓d/2 moving toward each other with speed `v`.
    /// `populations` are the intended |c|² of the left and right packet.
    pub fn counter_propagating(
        d: f64,
        sigma_left: f64,
        sigma_right: f64,
        v: f64,
        populations: [f64; 2],
    ) -> Result<Self> {
        if populations.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("packet populations must be positive"));
        }
        let left = GaussianSpec::new(-0.5 * d, v, sigma_left, Complex64::new(populations[0].sqrt(), 0.0))?;
        let right = GaussianSpec::new(0.5 * d, -v, sigma_right, Complex64::new(populations[1].sqrt(), 0.0))?;
        Self::new(alloc::vec![left, right])
    }

    pub fn components(&self) -> &[GaussianSpec] {
        &self.components
    }

    /// ‖Σ ψ_j‖², from closed-form overlaps at t = 0 (conserved in time).
    pub fn norm_squared(&self, c: &PhysicalConstants) -> f64 {
        let mut total = 0.0;
        for a in &self.components {
            for b in &self.components {
                total += gaussian_overlap(a, b, c).re;
            }
        }
        total
    }

    pub fn normalized(mut self, c: &PhysicalConstants) -> Result<Self> {
        self.normalize_with(c)?;
        Ok(self)
    }

    pub fn normalize_with(&mut self, c: &PhysicalConstants) -> Result<()> {
        let n2 = self.norm_squared(c);
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Domain("superposition has zero or non-finite norm"));
        }
        let s = 1.0 / n2.sqrt();
        for g in &mut self.components {
            g.weight *= s;
        }
        Ok(())
    }

    pub fn eval(&self, c: &PhysicalConstants, x: f64, t: f64) -> WaveSample {
        self.components
            .iter()
            .fold(WaveSample::default(), |acc, g| acc + eval_gaussian(g, c, x, t))
    }
}

/// ⟨a|b⟩ at t = 0, weights included.
pub fn gaussian_overlap(a: &GaussianSpec, b: &GaussianSpec, c: &PhysicalConstants) -> Complex64 {
    let ka = a.momentum(c) / c.hbar;
    let kb = b.momentum(c) / c.hbar;
    let (sa2, sb2) = (a.sigma0 * a.sigma0, b.sigma0 * b.sigma0);
    // conj(g_a) g_b = N_a N_b exp(-A x² + B x + C)
    let big_a = 0.25 / sa2 + 0.25 / sb2;
    let big_b = Complex64::new(0.5 * a.x0 / sa2 + 0.5 * b.x0 / sb2, kb - ka);
    let big_c = Complex64::new(
        -0.25 * a.x0 * a.x0 / sa2 - 0.25 * b.x0 * b.x0 / sb2,
        ka * a.x0 - kb * b.x0,
    );
    let norms = (2.0 * PI * sa2).powf(-0.25) * (2.0 * PI * sb2).powf(-0.25);
    let integral = (PI / big_a).sqrt() * (big_b * big_b / (4.0 * big_a) + big_c).exp();
    a.weight.conj() * b.weight * norms * integral
}
