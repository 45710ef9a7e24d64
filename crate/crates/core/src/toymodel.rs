//! Effective potential for two-packet interference: a hard wall at x = 0
//! with an attractive square well in front of it whose width and depth
//! follow the reflected packet.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::carpets::linspace;
use crate::error::{Error, Result};
use crate::wavemodel::PhysicalConstants;

/// A packet of momentum `p` and width `sigma0` centred at `x0 < 0`, moving
/// toward the wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyParams {
    pub p: f64,
    pub sigma0: f64,
    pub x0: f64,
    pub constants: PhysicalConstants,
}

impl ToyParams {
    pub fn new(p: f64, sigma0: f64, x0: f64, constants: PhysicalConstants) -> Result<Self> {
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(Error::Domain("sigma0 must be positive"));
        }
        if !p.is_finite() || !x0.is_finite() {
            return Err(Error::Domain("p and x0 must be finite"));
        }
        Ok(Self { p, sigma0, x0, constants })
    }

    pub fn velocity(&self) -> f64 {
        self.p / self.constants.mass
    }

    /// Distance from the initial centre to the wall.
    pub fn distance(&self) -> f64 {
        -self.x0
    }

    /// Time for the centre to reach the wall and come back to x0.
    pub fn round_trip_time(&self) -> f64 {
        2.0 * self.distance() / self.velocity()
    }

    fn tau(&self, t: f64) -> f64 {
        let c = &self.constants;
        c.hbar * t / (2.0 * c.mass * self.sigma0 * self.sigma0)
    }

    fn width_squared(&self, t: f64) -> f64 {
        let tau = self.tau(t);
        self.sigma0 * self.sigma0 * (1.0 + tau * tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellGeometry {
    /// Left edge of the well (negative).
    pub x_min: f64,
    /// |x_min|.
    pub width: f64,
    /// Depth V0 = 2ħ²/(m x_min²).
    pub v0: f64,
}

/// Smallest admissible denominator of the width formula.
pub const SINGULAR_DENOMINATOR: f64 = 1e-14;

/// Well width from the two algebraic forms: in terms of the current
/// distance to the wall and spread, and in terms of the initial ones.
pub fn well_width_forms(params: &ToyParams, t: f64) -> (f64, f64) {
    let c = &params.constants;
    let tau = params.tau(t);
    let s2 = params.width_squared(t);
    let a_t = params.distance() - params.velocity() * t;
    let current = PI / (2.0 * params.p / c.hbar + tau * a_t / s2);
    let initial = PI * s2 / (2.0 * params.p * params.sigma0 * params.sigma0 / c.hbar + tau * params.distance());
    (current, initial)
}

pub fn well_geometry(params: &ToyParams, t: f64) -> Result<WellGeometry> {
    let c = &params.constants;
    let tau = params.tau(t);
    let a_t = params.distance() - params.velocity() * t;
    let denominator = 2.0 * params.p / c.hbar + tau * a_t / params.width_squared(t);
    // past a sign change the well is undefined
    if !(denominator >= SINGULAR_DENOMINATOR) {
        return Err(Error::Singularity { t, denominator });
    }
    let width = well_width_forms(params, t).1;
    Ok(WellGeometry { x_min: -width, width, v0: 2.0 * c.hbar * c.hbar / (c.mass * width * width) })
}

/// V(x, t): 0 left of the well, −V0 inside it, +∞ right of the wall.
pub fn potential_profile(params: &ToyParams, x: f64, t: f64) -> Result<f64> {
    let g = well_geometry(params, t)?;
    Ok(if x > 0.0 {
        f64::INFINITY
    } else if x >= g.x_min {
        -g.v0
    } else {
        0.0
    })
}

/// Named parameter sets with increasing v/v_s, v_s = ħ/2mσ0. Illustrative,
/// with σ0 = 1 and the packet starting 10σ0 from the wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyPreset {
    pub name: &'static str,
    pub v_over_vs: f64,
}

pub const TOY_PRESETS: [ToyPreset; 4] = [
    ToyPreset { name: "young", v_over_vs: 0.5 },
    ToyPreset { name: "slow", v_over_vs: 2.0 },
    ToyPreset { name: "fast", v_over_vs: 10.0 },
    ToyPreset { name: "ballistic", v_over_vs: 44.0 },
];

impl ToyPreset {
    pub fn by_name(name: &str) -> Option<Self> {
        TOY_PRESETS.iter().copied().find(|p| p.name == name)
    }

    pub fn params(&self, c: PhysicalConstants) -> ToyParams {
        let sigma0 = 1.0;
        let vs = c.hbar / (2.0 * c.mass * sigma0);
        ToyParams { p: c.mass * self.v_over_vs * vs, sigma0, x0: -10.0 * sigma0, constants: c }
    }
}

/// Extremes of the well over t ∈ [0, round trip].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeSummary {
    pub min_width: f64,
    pub max_depth: f64,
}

/// Samples the well on `n` equally spaced times over the round trip.
pub fn well_history(params: &ToyParams, n: usize) -> Result<Vec<(f64, WellGeometry)>> {
    let t_end = params.round_trip_time();
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain("packet must move toward the wall from x0 < 0"));
    }
    linspace(0.0, t_end, n).into_iter().map(|t| well_geometry(params, t).map(|g| (t, g))).collect()
}

pub fn regime_summary(params: &ToyParams, n: usize) -> Result<RegimeSummary> {
    let history = well_history(params, n)?;
    Ok(RegimeSummary {
        min_width: history.iter().map(|h| h.1.width).fold(f64::INFINITY, f64::min),
        max_depth: history.iter().map(|h| h.1.v0).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::Uniform;

    const C: PhysicalConstants = PhysicalConstants { hbar: 1.0, mass: 1.0 };

    #[test]
    fn initial_well() {
        for (p, hbar, mass) in [(1.0, 1.0, 1.0), (3.7, 0.5, 2.0), (0.2, 2.0, 0.3)] {
            let c = PhysicalConstants::new(hbar, mass).unwrap();
            let params = ToyParams::new(p, 0.8, -4.0, c).unwrap();
            let g = well_geometry(&params, 0.0).unwrap();
            assert!((g.width - PI * hbar / (2.0 * p)).abs() < 1e-12 * g.width);
            assert_eq!(g.x_min, -g.width);
            let depth = 8.0 * p * p / (PI * PI * mass);
            assert!((g.v0 - depth).abs() < 1e-12 * depth);
        }
    }

    #[test]
    fn both_width_forms_agree() {
        let mut rng = Uniform::new(38);
        for _ in 0..100 {
            let c = PhysicalConstants::new(rng.next(0.5, 2.0), rng.next(0.5, 2.0)).unwrap();
            let params = ToyParams::new(rng.next(0.1, 5.0), rng.next(0.2, 3.0), rng.next(-20.0, -1.0), c).unwrap();
            let t = rng.next(0.0, params.round_trip_time());
            let (a, b) = well_width_forms(&params, t);
            assert!((a - b).abs() < 1e-12 * b.abs(), "{a} vs {b}");
            let g = well_geometry(&params, t).unwrap();
            let product = g.v0 * g.x_min * g.x_min;
            let expected = 2.0 * c.hbar * c.hbar / c.mass;
            assert!((product - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn singular_denominator_is_reported() {
        // a packet moving away from the wall: the denominator vanishes at
        // 2p/ħ + τ a/σ0² = 0
        let params = ToyParams::new(-1.0, 1.0, -4.0, C).unwrap();
        assert!(matches!(well_geometry(&params, 0.0), Err(Error::Singularity { .. })));
        let params = ToyParams::new(0.0, 1.0, -4.0, C).unwrap();
        assert!(matches!(well_geometry(&params, 0.0), Err(Error::Singularity { t, denominator }) if t == 0.0 && denominator == 0.0));
        assert!(well_geometry(&params, 0.5).is_ok());
    }

    #[test]
    fn profile_is_piecewise() {
        let params = TOY_PRESETS[1].params(C);
        for t in [0.0, 1.3, 7.0] {
            let g = well_geometry(&params, t).unwrap();
            assert_eq!(potential_profile(&params, g.x_min - 50.0, t).unwrap(), 0.0);
            assert_eq!(potential_profile(&params, 0.5 * g.x_min, t).unwrap(), -g.v0);
            assert_eq!(potential_profile(&params, 0.0, t).unwrap(), -g.v0);
            assert_eq!(potential_profile(&params, 1.0, t).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn presets_span_the_regimes() {
        let vs: Vec<f64> = TOY_PRESETS.iter().map(|p| p.params(C).velocity() / 0.5).collect();
        assert_eq!(vs, [0.5, 2.0, 10.0, 44.0]);
        assert_eq!(ToyPreset::by_name("young"), Some(TOY_PRESETS[0]));
        assert_eq!(ToyPreset::by_name("nope"), None);
    }

    #[test]
    fn young_well_is_wide_and_shallow() {
        let s: Vec<RegimeSummary> = TOY_PRESETS.iter().map(|p| regime_summary(&p.params(C), 2001).unwrap()).collect();
        let (young, ballistic) = (s[0], s[3]);
        assert!(young.min_width > ballistic.min_width);
        assert!(young.max_depth < ballistic.max_depth);
        // ordered through the intermediate presets as well
        assert!(s.windows(2).all(|w| w[0].min_width > w[1].min_width && w[0].max_depth < w[1].max_depth), "{s:?}");
    }

    #[test]
    fn history_needs_an_approaching_packet() {
        let params = ToyParams::new(1.0, 1.0, 3.0, C).unwrap();
        assert!(well_history(&params, 10).is_err());
    }
}
