//! Dormand–Prince 5(4) for scalar ODEs ẋ = f(t, x), with step-size control
//! and continuous (dense) output at requested times.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Result of a dense-output integration. `values[i]` is x at
/// `save_times[i]`; on failure `values` holds the saves reached before it.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSolution {
    pub values: Vec<f64>,
    pub failure: Option<(f64, Error)>,
    pub steps: usize,
    pub rejected: usize,
}

struct Step {
    x_new: f64,
    k7: f64,
    err: f64,
    cont: [f64; 5],
}

fn attempt<F>(f: &mut F, t: f64, x: f64, k1: f64, h: f64, opts: &Dopri5Options) -> Result<Step>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let k2 = f(t + C2 * h, x + h * A21 * k1)?;
    let k3 = f(t + C3 * h, x + h * (A31 * k1 + A32 * k2))?;
    let k4 = f(t + C4 * h, x + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = f(t + C5 * h, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = f(t + h, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let x_new = x + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(t + h, x_new)?;

    let err_abs = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    let sc = opts.atol + opts.rtol * x.abs().max(x_new.abs());
    let diff = x_new - x;
    let bspl = h * k1 - diff;
    Ok(Step {
        x_new,
        k7,
        err: (err_abs / sc).abs(),
        cont: [
            x,
            diff,
            bspl,
            diff - h * k7 - bspl,
            h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
        ],
    })
}

fn dense(cont: &[f64; 5], theta: f64) -> f64 {
    let theta1 = 1.0 - theta;
    cont[0] + theta * (cont[1] + theta1 * (cont[2] + theta * (cont[3] + theta1 * cont[4])))
}

fn initial_step<F>(f: &mut F, t0: f64, x0: f64, f0: f64, span: f64, opts: &Dopri5Options) -> f64
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let sc = opts.atol + opts.rtol * x0.abs();
    let d0 = x0.abs() / sc;
    let d1 = f0.abs() / sc;
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(opts.max_step);
    let d2 = match f(t0 + h0, x0 + h0 * f0) {
        Ok(f1) => (f1 - f0).abs() / sc / h0,
        Err(_) => return h0 * 1e-3,
    };
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6 * span) } else { (0.01 / dmax).powf(0.2) };
    (100.0 * h0).min(h1).min(span).min(opts.max_step)
}

/// Integrates from (t0, x0) and reports x at each of the sorted
/// `save_times` (all ≥ t0).
///
/// A failing right-hand side inside a trial step (e.g. a density node) is
/// retried with a smaller step; integration stops only once the step
/// becomes negligible against t.
pub fn integrate_dense<F>(mut f: F, t0: f64, x0: f64, save_times: &[f64], opts: &Dopri5Options) -> DenseSolution
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut sol = DenseSolution { values: Vec::with_capacity(save_times.len()), failure: None, steps: 0, rejected: 0 };
    let mut next = 0;
    while next < save_times.len() && save_times[next] <= t0 {
        sol.values.push(x0);
        next += 1;
    }
    if next == save_times.len() {
        return sol;
    }
    let t_end = save_times[save_times.len() - 1];
    let span = t_end - t0;

    let mut k1 = match f(t0, x0) {
        Ok(k) => k,
        Err(e) => {
            sol.failure = Some((t0, e));
            return sol;
        }
    };
    let (mut t, mut x) = (t0, x0);
    let mut h = initial_step(&mut f, t0, x0, k1, span, opts);
    let mut last_rejected = false;

    while next < save_times.len() {
        if sol.steps + sol.rejected >= opts.max_steps {
            sol.failure = Some((t, Error::StepLimit { t }));
            return sol;
        }
        h = h.min(opts.max_step).min(t_end - t);
        let h_min = 1e-13 * t.abs().max(span);
        if h < h_min {
            sol.failure = Some((t, Error::StepUnderflow { t }));
            return sol;
        }
        let step = match attempt(&mut f, t, x, k1, h, opts) {
            Ok(s) => s,
            Err(e) => {
                // the trial step poked into a forbidden region; back off
                sol.rejected += 1;
                h *= 0.25;
                if h < h_min {
                    sol.failure = Some((t, e));
                    return sol;
                }
                last_rejected = true;
                continue;
            }
        };
        if step.err <= 1.0 {
            let t_new = if t_end - (t + h) <= 1e-15 * t_end.abs() { t_end } else { t + h };
            while next < save_times.len() && save_times[next] <= t_new {
                let theta = ((save_times[next] - t) / h).clamp(0.0, 1.0);
                sol.values.push(dense(&step.cont, theta));
                next += 1;
            }
            sol.steps += 1;
            t = t_new;
            x = step.x_new;
            k1 = step.k7;
            let mut fac = if step.err == 0.0 { FAC_MAX } else { SAFETY * step.err.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            sol.rejected += 1;
            h *= (SAFETY * step.err.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
        }
    }
    sol
}
