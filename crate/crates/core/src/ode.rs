//! Adaptive Dormand–Prince 5(4) integration of complex-valued systems along a
//! real parameter.

use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};

/// Step-size controller settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Mixed absolute/relative local error bound per step.
    pub tol: f64,
    pub max_steps: usize,
    /// Initial step as a fraction of the interval; `None` picks a heuristic.
    pub initial_step: Option<f64>,
}

impl OdeOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_steps: 200_000,
            initial_step: None,
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }
}

/// Counters accumulated across one or more integrations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_local_error: f64,
}

impl OdeStats {
    pub fn merge(&mut self, other: &OdeStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.max_local_error = self.max_local_error.max(other.max_local_error);
    }
}

// Dormand & Prince (1980) tableau.
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

// Difference between 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (coef, k) in terms {
            acc += k[i] * *coef;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `dy/ds = f(s, y)` from `s0` to `s1` in place.
///
/// `segment` is only used to label errors. The right-hand side may fail
/// (for example when the path hits a pole), which aborts the integration.
pub fn integrate<F>(
    mut f: F,
    y: &mut [C64],
    s0: f64,
    s1: f64,
    opts: &OdeOptions,
    segment: usize,
) -> Result<OdeStats>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let span = s1 - s0;
    if span == 0.0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let n = y.len();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y_new = k1.clone();

    let mut s = s0;
    f(s, y, &mut k1)?;
    let mut h = match opts.initial_step {
        Some(frac) => frac * span.abs(),
        None => initial_step(y, &k1, span.abs(), opts.tol),
    };
    let h_min = 1e-14 * span.abs().max(1.0);

    loop {
        let remaining = (s1 - s) * dir;
        if remaining <= 1e-15 * span.abs() {
            break;
        }
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                segment,
                max_steps: opts.max_steps,
            });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        axpy(&mut tmp, y, hs, &[(A21, &k1)]);
        f(s + C2 * hs, &tmp, &mut k2)?;
        axpy(&mut tmp, y, hs, &[(A31, &k1), (A32, &k2)]);
        f(s + C3 * hs, &tmp, &mut k3)?;
        axpy(&mut tmp, y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(s + C4 * hs, &tmp, &mut k4)?;
        axpy(&mut tmp, y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(s + C5 * hs, &tmp, &mut k5)?;
        axpy(
            &mut tmp,
            y,
            hs,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        f(s + hs, &tmp, &mut k6)?;
        axpy(
            &mut y_new,
            y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        f(s + hs, &y_new, &mut k7)?;

        let mut err = 0.0f64;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * hs;
            let sc = opts.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() || y_new.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            if h <= h_min {
                return Err(Error::NonFinite { segment });
            }
            h *= 0.1;
            stats.rejected += 1;
            continue;
        }

        if err <= 1.0 {
            s = if last { s1 } else { s + hs };
            y.copy_from_slice(&y_new);
            std::mem::swap(&mut k1, &mut k7);
            stats.steps += 1;
            stats.max_local_error = stats.max_local_error.max(err * opts.tol);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last {
                break;
            }
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(Error::StepUnderflow {
                    segment,
                    parameter: s,
                });
            }
        }
    }
    Ok(stats)
}

fn initial_step(y: &[C64], dy: &[C64], span: f64, tol: f64) -> f64 {
    let ynorm = y.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let dnorm = dy.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let h = if dnorm > 0.0 {
        0.01 * (ynorm / dnorm) * tol.powf(0.2) * 10.0
    } else {
        span
    };
    h.min(span).max(1e-6 * span)
}
