//! Entire scattering orbits as limits of Bolza solutions with receding endpoints.
//!
//! For endpoints `q^± = R ξ^±` the fixed-endpoint minimizer in the class of a partition
//! is computed for a growing schedule of radii, each warm-started from the previous one
//! and shifted in time so that it enters and leaves the ring `|x| = K` at `∓t_K`. The
//! largest-radius solution, with its tails continued by direct integration from the
//! ring, stands in for the limit orbit in the asymptotic checks.

use alloc::vec::Vec;

use crate::fit::{fit_line, fit_power_law};
use crate::geometry::self_intersections;
use crate::homotopy::{class_separates, partition_to_class, ParityClass, Partition};
use crate::integrator::{gauss5, integrate, integrate_until, IntegrateSettings, State, Trajectory};
use crate::math::{atan2, ln, powf, sqrt, Vec2};
use crate::potentials::{Centre, ProblemConfig};
use crate::variational::{solve_bolza, solve_from, BolzaSolution, DiscretePath, SolveSettings};
use crate::{Error, Result};

/// Scattering data: asymptotic directions, the partition to separate, and the field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProblem {
    dir_minus: Vec2,
    dir_plus: Vec2,
    partition: Partition,
    cfg: ProblemConfig,
}

impl ScatteringProblem {
    pub fn new(dir_minus: Vec2, dir_plus: Vec2, partition: Partition, cfg: ProblemConfig) -> Result<Self> {
        for d in [dir_minus, dir_plus] {
            if !d.is_finite() || (d.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput("asymptotic directions must be unit vectors".into()));
            }
        }
        if (dir_minus - dir_plus).norm() < 1e-9 {
            return Err(Error::InvalidInput("asymptotic directions must differ".into()));
        }
        partition_to_class(&partition, cfg.num_centres())?;
        Ok(ScatteringProblem { dir_minus, dir_plus, partition, cfg })
    }

    /// Directions given as polar angles in radians.
    pub fn from_angles(theta_minus: f64, theta_plus: f64, partition: Partition, cfg: ProblemConfig) -> Result<Self> {
        Self::new(Vec2::from_angle(theta_minus), Vec2::from_angle(theta_plus), partition, cfg)
    }

    pub fn dir_minus(&self) -> Vec2 {
        self.dir_minus
    }

    pub fn dir_plus(&self) -> Vec2 {
        self.dir_plus
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cfg(&self) -> &ProblemConfig {
        &self.cfg
    }

    /// `l_i = 1` iff centre `i` is in the partition.
    pub fn target_class(&self) -> ParityClass {
        partition_to_class(&self.partition, self.cfg.num_centres()).expect("validated at construction")
    }

    pub fn endpoints(&self, radius: f64) -> (Vec2, Vec2) {
        (self.dir_minus * radius, self.dir_plus * radius)
    }

    /// `K · (4, 8, 16, 32)`.
    pub fn default_schedule(&self) -> Vec<f64> {
        let k = self.cfg.ring_radius();
        alloc::vec![4.0 * k, 8.0 * k, 16.0 * k, 32.0 * k]
    }

    /// Angle between `ξ⁻` and `ξ⁺` in `[0, π]`.
    pub fn scattering_angle(&self) -> f64 {
        angle_between(self.dir_minus, self.dir_plus)
    }
}

/// Unsigned angle between two nonzero vectors.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    atan2(a.cross(b), a.dot(b)).abs()
}

/// `(√(m/2α)(2+α))^{2/(2+α)}`: `|x(t)| ≈ c |t|^{2/(2+α)}` for a zero-energy escape.
pub fn radius_law_coefficient(alpha: f64, m: f64) -> f64 {
    powf(sqrt(m / (2.0 * alpha)) * (2.0 + alpha), 2.0 / (2.0 + alpha))
}

/// `√(2m/α) · 4/(2−α)`: the growth rate of the Bolza action in `R^{1−α/2}`.
pub fn action_coefficient(alpha: f64, m: f64) -> f64 {
    sqrt(2.0 * m / alpha) * 4.0 / (2.0 - alpha)
}

/// The fixed-endpoint solution for `q^± = R ξ^±`, time-centred on its ring crossings.
///
/// A warm path for a smaller radius is extended radially to the new endpoints and
/// regraded; if that start fails, a fresh seed is used.
pub fn solve_bolza_at(
    radius: f64,
    prob: &ScatteringProblem,
    warm: Option<&DiscretePath>,
    settings: &SolveSettings,
) -> Result<BolzaSolution> {
    let cfg = &prob.cfg;
    if !(radius > cfg.ring_radius()) {
        return Err(Error::Domain { radius, min_radius: cfg.ring_radius() });
    }
    let target = prob.target_class();
    let (qm, qp) = prob.endpoints(radius);
    let sol = match warm {
        Some(path) => {
            let r0 = path.q_minus().norm();
            let aligned = |q: Vec2, xi: Vec2| q.normalized().dot(xi) > 1.0 - 1e-9;
            if !(r0 <= radius && aligned(path.q_minus(), prob.dir_minus) && aligned(path.q_plus(), prob.dir_plus)) {
                return Err(Error::InvalidInput("warm path does not extend radially to the new endpoints".into()));
            }
            let mut pts = Vec::with_capacity(path.nodes().len() + 2);
            pts.push(qm);
            pts.extend_from_slice(path.nodes());
            pts.push(qp);
            pts.dedup();
            DiscretePath::graded(&pts, settings.segments, cfg)
                .and_then(|start| solve_from(&start, &target, cfg, settings))
                .or_else(|_| solve_bolza(qm, qp, &target, cfg, settings))?
        }
        None => solve_bolza(qm, qp, &target, cfg, settings)?,
    };
    sol.centred()
}

/// `∫ (½|ẋ|² + U) dt` over the inside-ring interval `[t⁻, t⁺]`.
pub fn inside_ring_action(sol: &BolzaSolution, cfg: &ProblemConfig) -> Result<f64> {
    let (a, b) = sol.ring_times().ok_or(Error::TailTooShort)?;
    action_between(&sol.trajectory, cfg, a, b)
}

fn action_between(traj: &Trajectory, cfg: &ProblemConfig, a: f64, b: f64) -> Result<f64> {
    let mut knots = alloc::vec![a];
    knots.extend(traj.samples().iter().map(|s| s.time).filter(|&t| t > a && t < b));
    knots.push(b);
    let mut err = None;
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += gauss5(w[0], w[1], |t| {
            let s = traj.state_at(t);
            match cfg.potential(s.position) {
                Ok(u) => 0.5 * s.velocity.norm_sq() + u,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// A chain of warm-started solutions over a radius schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub radii: Vec<f64>,
    pub solutions: Vec<BolzaSolution>,
    /// `T_w`: deviations are measured on `[−T_w, T_w]`.
    pub window: f64,
    /// `sup_{|t| ≤ T_w} |x_{R_{j+1}}(t) − x_{R_j}(t)|` for consecutive radii.
    pub sup_deviations: Vec<f64>,
    /// Action spent inside the ring, per radius.
    pub inside_actions: Vec<f64>,
    /// Per radius: the solution separates the centres according to the partition.
    pub separates: Vec<bool>,
    /// Deviations nonincreasing over the last three entries and every solution separating.
    pub converged: bool,
}

impl ContinuationResult {
    pub fn last(&self) -> &BolzaSolution {
        self.solutions.last().expect("nonempty by construction")
    }

    /// Total Bolza actions, one per radius.
    pub fn actions(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.action).collect()
    }
}

/// Probe points per deviation measurement.
const WINDOW_PROBES: usize = 401;

pub fn continue_in_radius(
    prob: &ScatteringProblem,
    schedule: &[f64],
    settings: &SolveSettings,
) -> Result<ContinuationResult> {
    if schedule.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("radius schedule must be strictly increasing".into()));
    }
    let k = prob.cfg.ring_radius();
    if !(schedule[0] > 2.0 * k) {
        return Err(Error::InvalidInput(alloc::format!(
            "first radius {} must exceed twice the ring radius {k}",
            schedule[0]
        )));
    }
    let mut solutions: Vec<BolzaSolution> = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let warm = solutions.last().map(|s| &s.path);
        solutions.push(solve_bolza_at(r, prob, warm, settings)?);
    }

    let mut half = f64::INFINITY;
    let mut inside_actions = Vec::with_capacity(solutions.len());
    for s in &solutions {
        let (a, b) = s.ring_times().ok_or(Error::TailTooShort)?;
        half = half.min(0.5 * (b - a));
        inside_actions.push(inside_ring_action(s, &prob.cfg)?);
    }
    let sup_deviations: Vec<f64> = solutions
        .windows(2)
        .map(|w| {
            (0..WINDOW_PROBES)
                .map(|j| {
                    let t = -half + 2.0 * half * j as f64 / (WINDOW_PROBES - 1) as f64;
                    (w[1].trajectory.position_at(t) - w[0].trajectory.position_at(t)).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let separates: Vec<bool> = solutions.iter().map(|s| class_separates(&s.parity, &prob.partition)).collect();
    let tail = &sup_deviations[sup_deviations.len().saturating_sub(3)..];
    let converged = tail.windows(2).all(|w| w[1] <= w[0]) && separates.iter().all(|&b| b);
    Ok(ContinuationResult {
        radii: schedule.to_vec(),
        solutions,
        window: half,
        sup_deviations,
        inside_actions,
        separates,
        converged,
    })
}

/// `A_R ≈ c · R^{1−α/2} + d` over a continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionScaling {
    pub coefficient: f64,
    /// Held fixed at `1 − α/2`.
    pub exponent: f64,
    pub offset: f64,
    /// RMS residual of the fit.
    pub residual: f64,
}

pub fn action_scaling(result: &ContinuationResult, cfg: &ProblemConfig) -> Result<ActionScaling> {
    let n = result.radii.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let exponent = 1.0 - 0.5 * cfg.alpha();
    let xs: Vec<f64> = result.radii.iter().map(|r| powf(*r, exponent)).collect();
    let line = fit_line(&xs, &result.actions())?;
    Ok(ActionScaling { coefficient: line.slope, exponent, offset: line.intercept, residual: line.rms })
}

/// Power law `y ≈ coefficient · |t|^exponent` fitted on a tail window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Signed time range of the fit.
    pub fit_window: (f64, f64),
    /// RMS residual in log space.
    pub residual: f64,
}

/// Samples per tail fit, log-spaced in `|t|`.
const FIT_SAMPLES: usize = 128;

fn fit_tail<F>(traj: &Trajectory, window: (f64, f64), mut value: F) -> Result<AsymptoticFit>
where
    F: FnMut(&State) -> f64,
{
    let (t0, t1) = window;
    if !(t0 * t1 > 0.0) {
        return Err(Error::InvalidInput("tail window must not contain t = 0".into()));
    }
    let (a, b) = (t0.abs().min(t1.abs()), t0.abs().max(t1.abs()));
    let decades = (ln(b) - ln(a)) / core::f64::consts::LN_10;
    if decades < 1.0 - 1e-12 {
        return Err(Error::InsufficientSpan { decades });
    }
    let sign = t0.signum();
    let available = if sign > 0.0 { traj.t_max() } else { -traj.t_min() };
    if b > available {
        return Err(Error::WindowTooShort { needed: b, available });
    }
    let mut ts = Vec::with_capacity(FIT_SAMPLES);
    let mut ys = Vec::with_capacity(FIT_SAMPLES);
    for j in 0..FIT_SAMPLES {
        let t = a * powf(b / a, j as f64 / (FIT_SAMPLES - 1) as f64);
        ts.push(t);
        ys.push(value(&traj.state_at(sign * t)));
    }
    let f = fit_power_law(&ts, &ys)?;
    Ok(AsymptoticFit { exponent: f.exponent, coefficient: f.coefficient, fit_window: window, residual: f.log_rms })
}

/// Log-log fit of `|x(t)|` against `|t|` over `window` (both ends on the same side of 0).
///
/// The window must span at least one decade.
pub fn fit_radius_law(traj: &Trajectory, window: (f64, f64)) -> Result<AsymptoticFit> {
    fit_tail(traj, window, |s| s.position.norm())
}

/// Log-log fit of the angular speed `|ṡ| = |x ∧ ẋ| / |x|²` over `window`. The fitted
/// exponent is the (negative) slope, about `−4/(2+α)` on a scattering tail.
///
/// `None` when the motion is radial on the window (`ṡ` vanishes to roundoff).
pub fn fit_angular_decay(traj: &Trajectory, window: (f64, f64)) -> Result<Option<AsymptoticFit>> {
    let mut radial = true;
    let fit = fit_tail(traj, window, |s| {
        let w = s.position.cross(s.velocity).abs() / s.position.norm_sq();
        if w > 1e-12 * s.velocity.norm() / s.position.norm() {
            radial = false;
        }
        w
    });
    if radial {
        // the window checks still apply
        return fit.map(|_| None).or_else(|e| match e {
            Error::InsufficientData { .. } => Ok(None),
            e => Err(e),
        });
    }
    fit.map(Some)
}

/// How far and how accurately the tails of the limit surrogate are integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSettings {
    /// Tails run over `|t| ≤ horizon`.
    pub horizon: f64,
    pub tol: f64,
}

impl Default for TailSettings {
    fn default() -> Self {
        TailSettings { horizon: 1e6, tol: 1e-10 }
    }
}

impl TailSettings {
    /// The two decades ending at the horizon.
    pub fn fit_window(&self) -> (f64, f64) {
        (1e-2 * self.horizon, self.horizon)
    }
}

/// Stand-in for the limit orbit: a centred Bolza solution inside the ring, continued
/// outside it by integrating the equation of motion from the ring crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireSolution {
    pub trajectory: Trajectory,
    /// `(t⁻, t⁺)`: inside these times the samples are the Bolza solution's.
    pub ring_times: (f64, f64),
    /// Endpoint radius of the source solution.
    pub source_radius: f64,
}

pub fn entire_surrogate(sol: &BolzaSolution, cfg: &ProblemConfig, tails: &TailSettings) -> Result<EntireSolution> {
    let (a, b) = sol.ring_times().ok_or(Error::TailTooShort)?;
    if !(tails.horizon > b.max(-a)) {
        return Err(Error::InvalidInput("tail horizon must lie beyond the ring crossings".into()));
    }
    let settings = IntegrateSettings::new(tails.tol);
    let core = sol.trajectory.window(a, b, cfg)?;
    let enter = sol.trajectory.state_at(a).on_zero_energy(cfg)?;
    let leave = sol.trajectory.state_at(b).on_zero_energy(cfg)?;
    let (past, _) = integrate(enter, -tails.horizon, &settings, cfg)?;
    let (future, _) = integrate(leave, tails.horizon, &settings, cfg)?;
    let trajectory = past.concat(&core)?.concat(&future)?;
    Ok(EntireSolution { trajectory, ring_times: (a, b), source_radius: sol.path.q_minus().norm() })
}

/// Limit directions `s(∓∞)` of a surrogate, with the decay fits behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticDirections {
    pub minus: Vec2,
    pub plus: Vec2,
    /// Angle from `minus` to `ξ⁻`.
    pub error_minus: f64,
    pub error_plus: f64,
    pub decay_minus: Option<AsymptoticFit>,
    pub decay_plus: Option<AsymptoticFit>,
}

/// Asymptotic directions of the orbit continued from `sol`'s ring crossings.
///
/// `s = x/|x|` is read at the tail ends `±horizon`; the angle still to be swept beyond
/// them is added from the fitted decay `|ṡ| ≈ C |t|^{−p}`, i.e. `|t| ṡ(t) / (p − 1)`.
/// The extrapolation is skipped when `p ≤ 1`.
pub fn asymptotic_directions(
    sol: &BolzaSolution,
    prob: &ScatteringProblem,
    tails: &TailSettings,
) -> Result<AsymptoticDirections> {
    let entire = entire_surrogate(sol, &prob.cfg, tails)?;
    directions_of(&entire, prob, tails)
}

pub fn directions_of(entire: &EntireSolution, prob: &ScatteringProblem, tails: &TailSettings) -> Result<AsymptoticDirections> {
    let traj = &entire.trajectory;
    let (lo, hi) = tails.fit_window();
    let decay_plus = fit_angular_decay(traj, (lo, hi))?;
    let decay_minus = fit_angular_decay(traj, (-hi, -lo))?;
    let limit = |t: f64, decay: &Option<AsymptoticFit>| {
        let s = traj.state_at(t);
        let omega = s.position.cross(s.velocity) / s.position.norm_sq();
        let rest = match decay {
            Some(f) if f.exponent < -1.0 => omega * t.abs() / (-f.exponent - 1.0),
            _ => 0.0,
        };
        // past tail: the sweep before −horizon is undone
        s.position.normalized().rotated(rest * t.signum())
    };
    let plus = limit(traj.t_max(), &decay_plus);
    let minus = limit(traj.t_min(), &decay_minus);
    Ok(AsymptoticDirections {
        minus,
        plus,
        error_minus: angle_between(minus, prob.dir_minus),
        error_plus: angle_between(plus, prob.dir_plus),
        decay_minus,
        decay_plus,
    })
}

/// One row of the collapse table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRow {
    pub eps: f64,
    /// `sup` over the probe times of `|y_ε(t) − y₀(t)|`.
    pub deviation: f64,
    /// `max |H_ε| / max U_ε` of `y_ε` in the field with centres `ε c_i`.
    pub energy_residual: f64,
}

/// The piecewise rectilinear limit: `c |t|^{2/(2+α)} ξ^∓` for `t ≶ 0`, and `0` at `t = 0`.
pub fn collapse_limit(prob: &ScatteringProblem, t: f64) -> Vec2 {
    let alpha = prob.cfg.alpha();
    let c = radius_law_coefficient(alpha, prob.cfg.far_mass());
    let r = c * powf(t.abs(), 2.0 / (2.0 + alpha));
    if t < 0.0 {
        prob.dir_minus * r
    } else if t > 0.0 {
        prob.dir_plus * r
    } else {
        Vec2::ZERO
    }
}

/// `41` probe times evenly spread over `[−1, 1]`.
pub fn default_probe_times() -> Vec<f64> {
    (0..41).map(|j| -1.0 + j as f64 / 20.0).collect()
}

/// Compares `y_ε(t) = ε x(t / ε^{(2+α)/2})` with the collapsed limit on the probe times.
pub fn collapse_experiment(
    entire: &EntireSolution,
    prob: &ScatteringProblem,
    eps_list: &[f64],
    probes: &[f64],
) -> Result<Vec<CollapseRow>> {
    let cfg = &prob.cfg;
    let k = 0.5 * (2.0 + cfg.alpha());
    let traj = &entire.trajectory;
    let available = traj.t_max().min(-traj.t_min());
    let reach = probes.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("collapse factors must be positive".into()));
        }
        let needed = reach / powf(eps, k);
        if needed > available {
            return Err(Error::WindowTooShort { needed, available });
        }
        let scaled = cfg.scaled(eps)?;
        let mut deviation: f64 = 0.0;
        let mut max_h: f64 = 0.0;
        let mut max_u: f64 = 0.0;
        for &t in probes {
            let s = traj.state_at(t / powf(eps, k));
            let y = s.position * eps;
            let v = s.velocity * powf(eps, 1.0 - k);
            deviation = deviation.max((y - collapse_limit(prob, t)).norm());
            let u = scaled.potential(y)?;
            max_u = max_u.max(u);
            max_h = max_h.max((0.5 * v.norm_sq() - u).abs());
        }
        rows.push(CollapseRow { eps, deviation, energy_residual: max_h / max_u });
    }
    Ok(rows)
}

/// Spanned angle of a single-centre parabolic orbit, integrated and extrapolated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerAngle {
    /// Aitken-extrapolated spanned angle.
    pub angle: f64,
    /// Twice the half-angle swept from pericentre until `r` grows by `10², 10³, 10⁴`.
    pub partial: [f64; 3],
    /// `2π / (2 − α)`.
    pub target: f64,
}

/// The angle spanned by a zero-energy orbit of `m / (α|x|^α)`.
pub fn kepler_parabolic_angle(alpha: f64, m: f64) -> Result<f64> {
    Ok(kepler_parabolic_angle_report(alpha, m, 1e-12)?.angle)
}

/// Integrates from pericentre `r = 1` until `r` has grown `10⁴`-fold, reading the swept
/// angle at growth factors `10², 10³, 10⁴`. The remaining angle decays geometrically in
/// the growth factor, so one Aitken step removes the leading truncation.
pub fn kepler_parabolic_angle_report(alpha: f64, m: f64, tol: f64) -> Result<KeplerAngle> {
    let cfg = ProblemConfig::new(alpha, alloc::vec![Centre::new(Vec2::ZERO, m)])?;
    let start = State::new(0.0, Vec2::new(1.0, 0.0), Vec2::new(0.0, sqrt(2.0 * m / alpha)));
    let targets = [1e2, 1e3, 1e4];
    let r_stop = 1.1 * targets[2];
    let t_end = 10.0 * powf(r_stop / radius_law_coefficient(alpha, m), 0.5 * (2.0 + alpha));
    let (traj, _) = integrate_until(start, t_end, &IntegrateSettings::new(tol), &cfg, |s| {
        s.position.norm() >= r_stop
    })?;
    let samples = traj.samples();
    if samples.last().map_or(true, |s| s.position.norm() < targets[2]) {
        return Err(Error::TailTooShort);
    }
    let mut unwrapped = Vec::with_capacity(samples.len());
    let mut theta = 0.0;
    unwrapped.push(0.0);
    for w in samples.windows(2) {
        theta += atan2(w[0].position.cross(w[1].position), w[0].position.dot(w[1].position));
        unwrapped.push(theta);
    }
    let mut partial = [0.0; 3];
    for (slot, &r) in partial.iter_mut().zip(&targets) {
        let i = samples.partition_point(|s| s.position.norm() < r).max(1) - 1;
        let (mut lo, mut hi) = (samples[i].time, samples[i + 1].time);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if traj.position_at(mid).norm() < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = traj.position_at(0.5 * (lo + hi));
        let a = samples[i].position;
        *slot = 2.0 * (unwrapped[i] + atan2(a.cross(p), a.dot(p)));
    }
    let [a0, a1, a2] = partial;
    let d1 = a1 - a0;
    let d2 = a2 - a1;
    let angle = if (d2 - d1).abs() > 0.0 { a2 - d2 * d2 / (d2 - d1) } else { a2 };
    Ok(KeplerAngle { angle, partial, target: 2.0 * core::f64::consts::PI / (2.0 - alpha) })
}

/// Index pairs of transversally crossing, non-adjacent segments of the sampled orbit.
pub fn self_intersection_check(traj: &Trajectory) -> Vec<(usize, usize)> {
    self_intersections(&traj.positions())
}
