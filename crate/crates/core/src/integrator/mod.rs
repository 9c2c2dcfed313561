//! Direct integration of `ẍ = ∇U(x)` at zero energy.
//!
//! Away from the centres the Cartesian system is stepped with an embedded 5(4) pair.
//! For `α = 1`, entering the switch disc of a centre hands over to Levi-Civita variables
//! until the orbit leaves a larger exit disc; for `α > 1` such an approach is an error.

mod diagnostics;
mod levi_civita;
mod rk;
mod trajectory;

use alloc::vec::Vec;

use crate::geometry::point_segment_distance;
use crate::math::{sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

pub(crate) use diagnostics::gauss5;
pub use diagnostics::{
    angular_momentum, detect_ring_crossings, radial_convexity, sundman_time, sundman_time_refined, virial_residual, ConvexitySample,
    VirialReport,
};
pub use levi_civita::{levi_civita_lift, levi_civita_lift_with_angle, HalfAngle, LeviCivitaState};
pub use rk::Stats;
pub use trajectory::{State, Trajectory};

use rk::{dopri_step, integrate_adaptive, Control};

/// Knobs of the hybrid integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateSettings {
    /// Local error tolerance per step (mixed absolute/relative).
    pub tol: f64,
    /// Distance below which the orbit is regularized (`α = 1`) or rejected (`α > 1`).
    /// `None` picks [`default_switch_radius`]; `Some(0.0)` never switches.
    pub switch_radius: Option<f64>,
    /// The regularized phase ends once the orbit is outside `exit_factor · switch_radius`.
    pub exit_factor: f64,
    /// Accepted steps allowed per phase.
    pub max_steps: usize,
}

impl IntegrateSettings {
    pub fn new(tol: f64) -> Self {
        IntegrateSettings { tol, switch_radius: None, exit_factor: 2.0, max_steps: 2_000_000 }
    }

    pub fn with_switch_radius(mut self, r: f64) -> Self {
        self.switch_radius = Some(r);
        self
    }
}

/// `10⁻² ×` the smallest centre gap, or `10⁻²` for a single centre.
pub fn default_switch_radius(cfg: &ProblemConfig) -> f64 {
    cfg.min_centre_gap().map_or(1e-2, |g| 1e-2 * g)
}

/// Counters of one integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationReport {
    pub stats: Stats,
    pub regularized_passes: usize,
    pub max_energy_residual: f64,
    /// The user stop condition fired before `t_end`.
    pub stopped: bool,
}

/// Integrates from `start` to `t_end` with default settings at tolerance `tol`.
pub fn integrate_cartesian(start: State, t_end: f64, tol: f64, cfg: &ProblemConfig) -> Result<Trajectory> {
    Ok(integrate(start, t_end, &IntegrateSettings::new(tol), cfg)?.0)
}

pub fn integrate(
    start: State,
    t_end: f64,
    settings: &IntegrateSettings,
    cfg: &ProblemConfig,
) -> Result<(Trajectory, IntegrationReport)> {
    integrate_until(start, t_end, settings, cfg, |_| false)
}

/// Like [`integrate`], stopping after the first recorded sample where `stop` holds.
pub fn integrate_until<S>(
    start: State,
    t_end: f64,
    settings: &IntegrateSettings,
    cfg: &ProblemConfig,
    mut stop: S,
) -> Result<(Trajectory, IntegrationReport)>
where
    S: FnMut(&State) -> bool,
{
    if !(settings.tol > 0.0) || !t_end.is_finite() || !start.position.is_finite() || !start.velocity.is_finite() {
        return Err(Error::InvalidInput("integration needs a finite start, end time and positive tolerance".into()));
    }
    let u0 = cfg.potential(start.position)?;
    let h0 = 0.5 * start.velocity.norm_sq() - u0;
    if h0.abs() > 10.0 * settings.tol * u0.max(1.0) {
        return Err(Error::EnergyResidualTooLarge { residual: h0, bound: 10.0 * settings.tol * u0.max(1.0) });
    }
    let switch = settings.switch_radius.unwrap_or_else(|| default_switch_radius(cfg));
    let exit = settings.exit_factor.max(1.0) * switch;
    let dir = if t_end >= start.time { 1.0 } else { -1.0 };

    let mut sink = Sink::default();
    sink.push(start, h0, cfg)?;
    let mut report = IntegrationReport::default();
    let mut cur = start;
    let mut h_next = 0.0;

    while (t_end - cur.time) * dir > 0.0 && !report.stopped {
        let (d, near) = cfg.min_centre_distance(cur.position);
        if switch > 0.0 && d < switch {
            if cfg.alpha() != 1.0 {
                return Err(Error::CloseEncounter { centre: near, distance: d });
            }
            for (j, c) in cfg.centres().iter().enumerate() {
                if j != near && (c.position - cfg.centres()[near].position).norm() < 2.0 * exit {
                    return Err(Error::OverlappingRegularization { centre: near, other: j });
                }
            }
            let (next, stopped) =
                regularized_pass(cur, near, t_end, dir, exit, settings, cfg, &mut sink, &mut report, &mut stop)?;
            report.regularized_passes += 1;
            report.stopped = stopped;
            cur = next;
            h_next = 0.0;
            continue;
        }
        let (next, h, stopped) =
            cartesian_phase(cur, t_end, h_next, switch, settings, cfg, &mut sink, &mut report, &mut stop)?;
        report.stopped = stopped;
        cur = next;
        h_next = h;
    }

    report.max_energy_residual = sink.residuals.iter().fold(0.0, |m, r| m.max(r.abs()));
    let traj = sink.finish(dir < 0.0, cfg)?;
    Ok((traj, report))
}

#[derive(Default)]
struct Sink {
    samples: Vec<State>,
    accelerations: Vec<Vec2>,
    residuals: Vec<f64>,
}

impl Sink {
    fn push(&mut self, s: State, residual: f64, cfg: &ProblemConfig) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if s.time == last.time {
                return Ok(());
            }
        }
        let g = match cfg.gradient(s.position) {
            Ok(g) => g,
            // too close to evaluate: the sample carries no usable Cartesian data
            Err(Error::Singularity { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        self.samples.push(s);
        self.accelerations.push(g);
        self.residuals.push(residual);
        Ok(())
    }

    fn finish(mut self, reverse: bool, cfg: &ProblemConfig) -> Result<Trajectory> {
        if reverse {
            self.samples.reverse();
            self.accelerations.reverse();
            self.residuals.reverse();
        }
        Trajectory::from_parts(self.samples, self.accelerations, self.residuals, cfg)
    }
}

fn cartesian_rhs(cfg: &ProblemConfig, y: &[f64; 4]) -> Result<[f64; 4]> {
    let g = cfg.gradient(Vec2::new(y[0], y[1]))?;
    Ok([y[2], y[3], g.x, g.y])
}

fn pack(s: &State) -> [f64; 4] {
    [s.position.x, s.position.y, s.velocity.x, s.velocity.y]
}

fn unpack(t: f64, y: &[f64; 4]) -> State {
    State::new(t, Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))
}

/// Cartesian stepping until `t_end`, the switch disc, or the user stop.
#[allow(clippy::too_many_arguments)]
fn cartesian_phase<S: FnMut(&State) -> bool>(
    start: State,
    t_end: f64,
    h_hint: f64,
    switch: f64,
    settings: &IntegrateSettings,
    cfg: &ProblemConfig,
    sink: &mut Sink,
    report: &mut IntegrationReport,
    stop: &mut S,
) -> Result<(State, f64, bool)> {
    let mut from = start;
    let mut h0 = if h_hint > 0.0 {
        h_hint
    } else {
        let (d, _) = cfg.min_centre_distance(start.position);
        0.05 * d / start.velocity.norm().max(1e-300)
    };
    loop {
        let mut overshoot = false;
        let mut user_stop = false;
        let mut f = |_t: f64, y: &[f64; 4]| cartesian_rhs(cfg, y);
        let out = integrate_adaptive(
            &mut f,
            from.time,
            pack(&from),
            t_end,
            h0,
            settings.tol,
            settings.max_steps,
            &mut report.stats,
            |_t0, y0, _dy0, t1, y1, _dy1| {
                let s = unpack(t1, y1);
                if switch > 0.0 {
                    let x0 = Vec2::new(y0[0], y0[1]);
                    let (d1, _) = cfg.min_centre_distance(s.position);
                    if d1 >= switch
                        && cfg.centres().iter().any(|c| point_segment_distance(c.position, x0, s.position) < switch)
                    {
                        // the chord skipped over the switch disc
                        overshoot = true;
                        return Ok(Control::Stop);
                    }
                    if d1 < switch {
                        sink.push(s, s.energy(cfg)?, cfg)?;
                        return Ok(Control::Stop);
                    }
                }
                sink.push(s, s.energy(cfg)?, cfg)?;
                if stop(&s) {
                    user_stop = true;
                    return Ok(Control::Stop);
                }
                Ok(Control::Continue)
            },
        )?;
        if overshoot {
            // restart from the last accepted state with a much shorter step
            let last = *sink.samples.last().expect("start sample is recorded");
            let step = (out.t - last.time).abs();
            if step < 1e-14 * (1.0 + last.time.abs()) {
                return Err(Error::StepUnderflow { time: last.time, step });
            }
            from = last;
            h0 = 0.1 * step;
            continue;
        }
        let end = unpack(out.t, &out.y);
        return Ok((end, out.h, user_stop));
    }
}

/// One regularized passage near `centre`. Returns the Cartesian hand-back state.
#[allow(clippy::too_many_arguments)]
fn regularized_pass<S: FnMut(&State) -> bool>(
    start: State,
    centre: usize,
    t_end: f64,
    dir: f64,
    exit: f64,
    settings: &IntegrateSettings,
    cfg: &ProblemConfig,
    sink: &mut Sink,
    report: &mut IntegrationReport,
    stop: &mut S,
) -> Result<(State, bool)> {
    let lc = levi_civita_lift(&start, centre, cfg)?;
    let y0 = [lc.w.x, lc.w.y, lc.w_prime.x, lc.w_prime.y, lc.physical_time];
    let mut f = |_s: f64, y: &[f64; 5]| levi_civita::rhs(centre, cfg, y);
    let to_lc = |s: f64, y: &[f64; 5]| LeviCivitaState {
        w: Vec2::new(y[0], y[1]),
        w_prime: Vec2::new(y[2], y[3]),
        fictitious_time: s,
        centre_index: centre,
        physical_time: y[4],
    };
    let speed = lc.w_prime.norm().max(1e-300);
    let h0 = 1e-2 * lc.w.norm().max(sqrt(exit)) / speed;
    let mut crossed: Option<(f64, [f64; 5], [f64; 5])> = None;
    let mut user_stop = false;
    let out = integrate_adaptive(
        &mut f,
        0.0,
        y0,
        dir * 1e12,
        h0,
        settings.tol,
        settings.max_steps,
        &mut report.stats,
        |s0, ya, dya, s1, y1, _dy1| {
            if (y1[4] - t_end) * dir >= 0.0 {
                crossed = Some((s0, *ya, *dya));
                return Ok(Control::Stop);
            }
            let st = to_lc(s1, y1);
            if let Ok(cart) = st.drop_to_cartesian(cfg) {
                sink.push(cart, st.invariant_residual(cfg)?, cfg)?;
                if stop(&cart) {
                    user_stop = true;
                    return Ok(Control::Stop);
                }
            }
            let w = st.w;
            if w.norm_sq() >= exit && w.dot(st.w_prime) * dir > 0.0 {
                return Ok(Control::Stop);
            }
            Ok(Control::Continue)
        },
    )?;
    if let Some((s0, ya, dya)) = crossed {
        // land exactly on t_end: Newton on the step length, dt/ds = |w|²
        let mut h = (t_end - ya[4]) / dya[4];
        let mut y = ya;
        for _ in 0..50 {
            let step = dopri_step(&mut f, s0, &ya, &dya, h)?;
            report.stats.evaluations += 6;
            y = step.y;
            let miss = y[4] - t_end;
            if miss.abs() <= 1e-15 * (1.0 + t_end.abs()) {
                break;
            }
            h -= miss / step.dy[4].max(1e-300);
        }
        y[4] = t_end;
        let st = to_lc(s0 + h, &y);
        let cart = st.drop_to_cartesian(cfg)?;
        sink.push(cart, st.invariant_residual(cfg)?, cfg)?;
        return Ok((cart, false));
    }
    if !out.stopped {
        return Err(Error::StepUnderflow { time: out.y[4], step: out.h });
    }
    let st = to_lc(out.t, &out.y);
    let cart = st.drop_to_cartesian(cfg)?;
    if user_stop {
        return Ok((cart, true));
    }
    // hand back on the Cartesian side with the exact (unscaled) residual
    let h = cart.energy(cfg)?;
    if sink.samples.last().map(|s| s.time) == Some(cart.time) {
        *sink.residuals.last_mut().expect("nonempty") = h;
    } else {
        sink.push(cart, h, cfg)?;
    }
    Ok((cart, false))
}
