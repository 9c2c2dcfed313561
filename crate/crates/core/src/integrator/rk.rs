//! Dormand–Prince 5(4) with an adaptive step controller over fixed-size states.

use crate::{Error, Result};

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

// fifth-order weights (also the last row, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) struct Step<const N: usize> {
    pub y: [f64; N],
    pub dy: [f64; N],
    pub err: [f64; N],
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand–Prince step from `(t, y)` with derivative `k1` already evaluated.
pub(crate) fn dopri_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Step<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        t + C5 * h,
        &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = comb(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(Step { y: y_new, dy: k7, err })
}

/// Evaluation and step counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub evaluations: usize,
    pub accepted: usize,
    pub rejected: usize,
}

pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Step size to try next.
    pub h: f64,
    pub stopped: bool,
}

/// Scaled max-norm of the local error estimate.
fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        let scale = tol * (1.0 + y0[i].abs().max(y1[i].abs()));
        worst = worst.max(err[i].abs() / scale);
    }
    worst
}

/// Adaptive integration from `t0` towards `t_end` (either direction).
///
/// `on_step` sees every accepted step as `(t_prev, y_prev, dy_prev, t, y, dy)` and may
/// stop the run early.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_adaptive<const N: usize, F, C>(
    f: &mut F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    h0: f64,
    tol: f64,
    max_steps: usize,
    stats: &mut Stats,
    mut on_step: C,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    C: FnMut(f64, &[f64; N], &[f64; N], f64, &[f64; N], &[f64; N]) -> Result<Control>,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y)?;
    stats.evaluations += 1;
    let span = (t_end - t0).abs();
    let mut h = if h0 > 0.0 { h0.min(span) } else { (span * 1e-3).max(1e-12) };
    if span == 0.0 {
        return Ok(Outcome { t, y, h, stopped: false });
    }
    let mut steps = 0usize;
    loop {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok(Outcome { t, y, h, stopped: false });
        }
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        let step = dopri_step(f, t, &y, &dy, h_try * dir);
        stats.evaluations += 6;
        let (accept, factor, step) = match step {
            Ok(s) => {
                let e = error_norm(&s.err, &y, &s.y, tol);
                if e.is_finite() && e <= 1.0 {
                    let factor = if e == 0.0 { 5.0 } else { (0.9 * libm::pow(e, -0.2)).clamp(0.2, 5.0) };
                    (true, factor, Some(s))
                } else {
                    let factor = if e.is_finite() { (0.9 * libm::pow(e, -0.25)).clamp(0.1, 0.9) } else { 0.1 };
                    (false, factor, None)
                }
            }
            // a trial stage landed on a singularity: shrink and retry
            Err(Error::Singularity { .. }) | Err(Error::OverlappingRegularization { .. })
                if h_try > 1e-14 * (1.0 + t.abs()) =>
            {
                (false, 0.1, None)
            }
            Err(e) => return Err(e),
        };
        if let (true, Some(s)) = (accept, step) {
            let t_new = if last { t_end } else { t + h_try * dir };
            stats.accepted += 1;
            let control = on_step(t, &y, &dy, t_new, &s.y, &s.dy)?;
            t = t_new;
            y = s.y;
            dy = s.dy;
            h = h_try * factor;
            if last {
                // keep the natural step size for a continuation run
                h = h.max(h_try);
            }
            steps += 1;
            if let Control::Stop = control {
                return Ok(Outcome { t, y, h, stopped: true });
            }
            if steps >= max_steps {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
        } else {
            stats.rejected += 1;
            h = h_try * factor;
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
        }
    }
}
