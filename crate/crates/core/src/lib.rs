//! Analytic quantum-interference models and their hydrodynamic (Bohmian)
//! analysis.
//!
//! Every wave function in this crate is a closed form: Gaussian packets and
//! their superpositions, periodic gratings, bound-state expansions in a box
//! or harmonic trap. From samples of ψ, ∂ψ/∂x and ∂²ψ/∂x² the [`hydro`]
//! module builds density, phase, velocity, flux and quantum potential;
//! [`trajectories`] integrates streamlines of the velocity field;
//! [`carpets`], [`fractal`] and [`toymodel`] cover the space-time density
//! patterns, curve-length scaling and the effective-well picture.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel drivers live in the `qflow` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod carpets;
pub mod error;
pub mod fractal;
pub mod hydro;
pub mod ode;
pub mod toymodel;
pub mod trajectories;
pub mod wavemodel;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use wavemodel::{ModelSpec, PhysicalConstants, WaveFunction, WaveSample};

pub use num_complex::Complex64;
