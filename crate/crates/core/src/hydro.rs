//! Hydrodynamic fields of a wave function: density, phase, velocity, flux
//! and quantum potential, plus the two-wave decomposition and the energy
//! split of -ħ²ψ''/2mψ.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::carpets::GridSpec;
use crate::error::{Error, Result};
use crate::wavemodel::{PhysicalConstants, WaveFunction, WaveSample};

/// Absolute floor used when the caller has no better scale.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-300;
/// Floor relative to the largest density along a curve or grid.
pub const RELATIVE_DENSITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HydroSample {
    pub rho: f64,
    /// Principal-branch phase ħ·arg ψ; use [`phase_sweep`] for a continuous S.
    pub phase: f64,
    pub v: f64,
    pub j: f64,
    pub q: f64,
}

/// Density and its first two x-derivatives.
fn density_derivatives(w: &WaveSample) -> (f64, f64, f64) {
    let rho = w.psi.norm_sqr();
    let d1 = 2.0 * (w.psi.conj() * w.dpsi).re;
    let d2 = 2.0 * (w.psi.conj() * w.d2psi).re + 2.0 * w.dpsi.norm_sqr();
    (rho, d1, d2)
}

fn check_floor(w: &WaveSample, floor: f64) -> Result<f64> {
    let rho = w.psi.norm_sqr();
    if rho < floor || rho == 0.0 {
        Err(Error::Node { rho, floor })
    } else {
        Ok(rho)
    }
}

/// Probability current (ħ/m) Im(ψ*ψ'); defined everywhere, nodes included.
pub fn flux(w: &WaveSample, c: &PhysicalConstants) -> f64 {
    c.hbar / c.mass * (w.psi.conj() * w.dpsi).im
}

/// Guidance velocity (ħ/m) Im(ψ'/ψ).
pub fn velocity(w: &WaveSample, c: &PhysicalConstants, floor: f64) -> Result<f64> {
    let rho = check_floor(w, floor)?;
    Ok(flux(w, c) / rho)
}

/// Q = -(ħ²/4m)[ρ''/ρ - (ρ'/ρ)²/2].
pub fn quantum_potential(w: &WaveSample, c: &PhysicalConstants, floor: f64) -> Result<f64> {
    check_floor(w, floor)?;
    let (rho, d1, d2) = density_derivatives(w);
    let (r1, r2) = (d1 / rho, d2 / rho);
    Ok(-c.hbar * c.hbar / (4.0 * c.mass) * (r2 - 0.5 * r1 * r1))
}

/// Q = -(ħ²/2m) A''/A with A''/A = Re(ψ''/ψ - u²) + (Re u)², u = ψ'/ψ.
pub fn quantum_potential_amplitude_form(w: &WaveSample, c: &PhysicalConstants, floor: f64) -> Result<f64> {
    check_floor(w, floor)?;
    let u = w.dpsi / w.psi;
    let curvature = (w.d2psi / w.psi - u * u).re + u.re * u.re;
    Ok(-c.hbar * c.hbar / (2.0 * c.mass) * curvature)
}

pub fn hydro_fields(w: &WaveSample, c: &PhysicalConstants, floor: f64) -> Result<HydroSample> {
    let rho = check_floor(w, floor)?;
    let j = flux(w, c);
    Ok(HydroSample {
        rho,
        phase: c.hbar * w.psi.arg(),
        v: j / rho,
        j,
        q: quantum_potential(w, c, floor)?,
    })
}

/// Mean phase, scaled phase difference and potential-like coupling of two
/// partial waves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoWaveDecomposition {
    /// S̄ = (S1 + S2)/2 (principal branches).
    pub s_bar: f64,
    /// ∂S̄/∂x = m(v1 + v2)/2.
    pub s_bar_gradient: f64,
    /// 𝒮 = (S1 - S2)/ħ wrapped to (-π, π].
    pub curly_s: f64,
    /// 𝒬 = -(ħ²/4m) ∂x ln(ρ1/ρ2), the coupling that multiplies tan 𝒮 in the
    /// cross flux.
    pub curly_q: f64,
    /// (Q1 - Q2)/2.
    pub half_q_difference: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoWaveFields {
    pub rho: f64,
    pub j: f64,
    pub v: f64,
    pub dec: TwoWaveDecomposition,
}

/// ρ, J and v of ψ1 + ψ2 assembled from the partial fields of each wave.
pub fn two_wave_velocity(
    w1: &WaveSample,
    w2: &WaveSample,
    c: &PhysicalConstants,
    floor: f64,
) -> Result<TwoWaveFields> {
    let h1 = hydro_fields(w1, c, floor)?;
    let h2 = hydro_fields(w2, c, floor)?;
    let (_, d1, _) = density_derivatives(w1);
    let (_, d2, _) = density_derivatives(w2);

    let curly_s = wrap_angle((h1.phase - h2.phase) / c.hbar);
    let s_bar_gradient = 0.5 * c.mass * (h1.v + h2.v);
    let curly_q = -c.hbar * c.hbar / (4.0 * c.mass) * (d1 / h1.rho - d2 / h2.rho);
    let cross = 2.0 * (h1.rho * h2.rho).sqrt();
    let (sin_s, cos_s) = curly_s.sin_cos();

    let rho = h1.rho + h2.rho + cross * cos_s;
    // (∇S̄/m - 𝒬 tan𝒮 /ħ) cos𝒮, written without the tan pole
    let j = h1.j + h2.j + cross * (s_bar_gradient / c.mass * cos_s - curly_q / c.hbar * sin_s);
    if rho < floor || rho == 0.0 {
        return Err(Error::Node { rho, floor });
    }
    Ok(TwoWaveFields {
        rho,
        j,
        v: j / rho,
        dec: TwoWaveDecomposition {
            s_bar: 0.5 * (h1.phase + h2.phase),
            s_bar_gradient,
            curly_s,
            curly_q,
            half_q_difference: 0.5 * (h1.q - h2.q),
        },
    })
}

fn wrap_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    } else if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Kinetic, internal and flux terms of -(ħ²/2m) ψ''/ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySplit {
    /// (∂S/∂x)²/2m
    pub kinetic: f64,
    /// Q
    pub internal: f64,
    /// (ħ/2i)(∂J/∂x)/ρ
    pub flux_term: Complex64,
}

impl EnergySplit {
    pub fn total(&self) -> Complex64 {
        self.flux_term + self.kinetic + self.internal
    }
}

/// Left-hand side -(ħ²/2m) ψ''/ψ of the split.
pub fn local_kinetic_energy(w: &WaveSample, c: &PhysicalConstants) -> Complex64 {
    w.d2psi / w.psi * (-c.hbar * c.hbar / (2.0 * c.mass))
}

pub fn energy_split(w: &WaveSample, c: &PhysicalConstants, floor: f64) -> Result<EnergySplit> {
    let h = hydro_fields(w, c, floor)?;
    let dj = c.hbar / c.mass * (w.psi.conj() * w.d2psi).im;
    Ok(EnergySplit {
        kinetic: 0.5 * c.mass * h.v * h.v,
        internal: h.q,
        flux_term: Complex64::new(0.0, -0.5 * c.hbar * dj / h.rho),
    })
}

/// Removes 2π jumps larger than π between consecutive samples, in place.
pub fn unwrap_phase(phases: &mut [f64]) {
    let mut offset = 0.0;
    let mut prev = match phases.first() {
        Some(p) => *p,
        None => return,
    };
    for p in phases.iter_mut().skip(1) {
        let raw = *p;
        let jump = raw - prev;
        if jump > PI {
            offset -= 2.0 * PI * ((jump + PI) / (2.0 * PI)).floor();
        } else if jump < -PI {
            offset += 2.0 * PI * ((-jump + PI) / (2.0 * PI)).floor();
        }
        prev = raw;
        *p = raw + offset;
    }
}

/// Continuous phase S(x, t) = ħ·arg ψ along `xs`, by branch tracking.
pub fn phase_sweep<W: WaveFunction>(wave: &W, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    let hbar = wave.constants().hbar;
    let mut out = xs
        .iter()
        .map(|&x| wave.sample(x, t).map(|w| w.psi.arg()))
        .collect::<Result<Vec<_>>>()?;
    unwrap_phase(&mut out);
    out.iter_mut().for_each(|s| *s *= hbar);
    Ok(out)
}

/// max |∂ρ/∂t + ∂J/∂x| over interior grid nodes, central differences.
pub fn continuity_residual<W: WaveFunction>(wave: &W, grid: &GridSpec) -> Result<f64> {
    let c = wave.constants();
    let xs = grid.xs();
    let ts = grid.ts();
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut rho = Vec::with_capacity(xs.len() * ts.len());
    let mut j = Vec::with_capacity(xs.len() * ts.len());
    for &t in &ts {
        for &x in &xs {
            let w = wave.sample(x, t)?;
            rho.push(w.density());
            j.push(flux(&w, &c));
        }
    }
    let nx = xs.len();
    let mut worst: f64 = 0.0;
    for k in 1..ts.len() - 1 {
        for i in 1..nx - 1 {
            let drho_dt = (rho[(k + 1) * nx + i] - rho[(k - 1) * nx + i]) / (2.0 * dt);
            let dj_dx = (j[k * nx + i + 1] - j[k * nx + i - 1]) / (2.0 * dx);
            worst = worst.max((drho_dt + dj_dx).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
