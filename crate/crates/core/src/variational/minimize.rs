//! Class-constrained minimization: preconditioned L-BFGS with Armijo backtracking.
//!
//! The initial inverse-Hessian guess is `γ T⁻¹`, where `T` is the tridiagonal matrix of
//! the kinetic term (`∂²K/2`). It removes the grid-size dependence of the condition
//! number, which would otherwise grow like `M²` on graded grids.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::homotopy::{parity_class, ParityClass};
use crate::math::{sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

use super::functional::evaluate_nodes;
use super::seed::seed_clearance;
use super::DiscretePath;

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeSettings {
    /// Stop when `max_k |∂M/∂u_k| ≤ gradient_tolerance · (1 + |M|)`.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// `b` in the barrier `b Σ max(0, ρ − d)²`.
    pub barrier_strength: f64,
    /// `ρ` in the barrier; must stay below half the smallest centre gap.
    pub barrier_radius: f64,
    /// Halve steps that change the parity class instead of failing at once.
    pub step_shrink_on_class_change: bool,
    /// Number of stored curvature pairs.
    pub memory: usize,
}

impl MinimizeSettings {
    /// Defaults: tolerance `1e−8`, barrier radius `10⁻²` times [`seed_clearance`].
    ///
    /// Class minimizers can pass well inside the seed clearance (pericentres near `0.06`
    /// for unit gaps are common), so the barrier has to sit far below it to stay inactive.
    pub fn for_config(cfg: &ProblemConfig) -> Self {
        let radius = 1e-2 * seed_clearance(cfg);
        MinimizeSettings {
            gradient_tolerance: 1e-8,
            max_iterations: 20_000,
            barrier_strength: 1e6,
            barrier_radius: radius,
            step_shrink_on_class_change: true,
            memory: 12,
        }
    }

    pub fn validate(&self, cfg: &ProblemConfig) -> Result<()> {
        let positive = self.gradient_tolerance > 0.0
            && self.max_iterations > 0
            && self.barrier_strength > 0.0
            && self.barrier_radius > 0.0
            && self.memory > 0;
        if !positive {
            return Err(Error::InvalidInput("minimizer settings must be positive".into()));
        }
        if let Some(gap) = cfg.min_centre_gap() {
            if self.barrier_radius >= 0.5 * gap {
                return Err(Error::InvalidInput("barrier radius must be below half the centre gap".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of a converged minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub path: DiscretePath,
    /// `M` at the minimizer (without barrier).
    pub value: f64,
    /// `max_k |∂M/∂u_k|` at the minimizer.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Trial steps rejected because they changed the parity class.
    pub class_rejections: usize,
    /// Objective (with barrier) after every accepted iteration, starting at the seed.
    pub history: Vec<f64>,
}

fn dot(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(*y)).sum()
}

fn inf_norm(a: &[Vec2]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.x.abs()).max(v.y.abs()))
}

/// LU factors of the kinetic tridiagonal on the interior nodes.
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn kinetic(times: &[f64]) -> Self {
        let n = times.len() - 2;
        let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let mut diag: Vec<f64> = (0..n).map(|i| 1.0 / h[i] + 1.0 / h[i + 1]).collect();
        let upper: Vec<f64> = (0..n.saturating_sub(1)).map(|i| -1.0 / h[i + 1]).collect();
        let mut lower = vec![0.0; n.saturating_sub(1)];
        for i in 1..n {
            lower[i - 1] = upper[i - 1] / diag[i - 1];
            diag[i] -= lower[i - 1] * upper[i - 1];
        }
        Tridiagonal { lower, diag, upper }
    }

    fn solve(&self, rhs: &[Vec2]) -> Vec<Vec2> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            let l = self.lower[i - 1];
            y[i] = y[i] - y[i - 1] * l;
        }
        y[n - 1] = y[n - 1] / self.diag[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - y[i + 1] * self.upper[i]) / self.diag[i];
        }
        y
    }
}

struct Objective<'a> {
    cfg: &'a ProblemConfig,
    times: &'a [f64],
    q_minus: Vec2,
    q_plus: Vec2,
    strength: f64,
    radius: f64,
    evaluations: usize,
}

struct Point {
    x: Vec<Vec2>,
    f: f64,
    m: f64,
    p: f64,
    g: Vec<Vec2>,
    g_m: f64,
}

impl Objective<'_> {
    fn full(&self, interior: &[Vec2]) -> Vec<Vec2> {
        let mut nodes = Vec::with_capacity(interior.len() + 2);
        nodes.push(self.q_minus);
        nodes.extend_from_slice(interior);
        nodes.push(self.q_plus);
        nodes
    }

    fn eval(&mut self, interior: Vec<Vec2>) -> Result<Point> {
        self.evaluations += 1;
        let nodes = self.full(&interior);
        let e = evaluate_nodes(&nodes, self.times, self.cfg)?;
        let mut g: Vec<Vec2> = e.gradient[1..nodes.len() - 1].to_vec();
        let g_m = inf_norm(&g);
        let mut barrier = 0.0;
        for (k, x) in interior.iter().enumerate() {
            for c in self.cfg.centres() {
                let z = *x - c.position;
                let d = z.norm();
                if d < self.radius {
                    let gap = self.radius - d;
                    barrier += self.strength * gap * gap;
                    g[k] -= z * (2.0 * self.strength * gap / d);
                }
            }
        }
        Ok(Point { x: interior, f: e.value + barrier, m: e.value, p: e.potential, g, g_m })
    }
}

/// Minimizes `M` from `seed` without leaving the parity class `target`.
pub fn minimize_in_class(
    seed: &DiscretePath,
    target: &ParityClass,
    cfg: &ProblemConfig,
    settings: &MinimizeSettings,
) -> Result<MinimizeReport> {
    settings.validate(cfg)?;
    if target.len() != cfg.num_centres() {
        return Err(Error::InvalidInput("class length differs from the number of centres".into()));
    }
    // a single centre has no separation condition to meet
    if target.len() > 1 && !target.is_admissible() {
        return Err(Error::InadmissibleClass);
    }
    if parity_class(seed.nodes(), cfg)? != *target {
        return Err(Error::ClassMismatch);
    }
    let times = seed.times();
    let mut obj = Objective {
        cfg,
        times,
        q_minus: seed.q_minus(),
        q_plus: seed.q_plus(),
        strength: settings.barrier_strength,
        radius: settings.barrier_radius,
        evaluations: 0,
    };
    let precond = Tridiagonal::kinetic(times);
    let n = seed.nodes().len() - 2;

    let mut cur = obj.eval(seed.nodes()[1..n + 1].to_vec())?;
    let mut history = vec![cur.f];
    let mut pairs: VecDeque<(Vec<Vec2>, Vec<Vec2>, f64)> = VecDeque::new();
    let mut gamma = 1.0 / (2.0 * cur.p);
    let mut class_rejections = 0;
    let mut iterations = 0;

    loop {
        if inf_norm(&cur.g) <= settings.gradient_tolerance * (1.0 + cur.m.abs()) {
            break;
        }
        if iterations >= settings.max_iterations {
            return Err(Error::MaxIterations { iterations, gradient_norm: cur.g_m });
        }
        iterations += 1;

        let mut d = direction(&cur.g, &pairs, gamma, &precond);
        let mut slope = dot(&cur.g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            gamma = 1.0 / (2.0 * cur.p);
            d = precond.solve(&cur.g).iter().map(|v| *v * -gamma).collect();
            slope = dot(&cur.g, &d);
        }
        let accepted = match line_search(&mut obj, &cur, &d, slope, target, settings, iterations, &mut class_rejections)? {
            Some(p) => Some(p),
            None if !pairs.is_empty() => {
                // curvature memory went stale: restart along the preconditioned gradient
                pairs.clear();
                gamma = 1.0 / (2.0 * cur.p);
                d = precond.solve(&cur.g).iter().map(|v| *v * -gamma).collect();
                slope = dot(&cur.g, &d);
                line_search(&mut obj, &cur, &d, slope, target, settings, iterations, &mut class_rejections)?
            }
            None => None,
        };
        let Some(next) = accepted else {
            // no representable decrease left along the best available direction
            return Err(Error::MaxIterations { iterations, gradient_norm: cur.g_m });
        };
        let s: Vec<Vec2> = next.x.iter().zip(&cur.x).map(|(a, b)| *a - *b).collect();
        let y: Vec<Vec2> = next.g.iter().zip(&cur.g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * sqrt(dot(&s, &s) * dot(&y, &y)) {
            let hy = precond.solve(&y);
            gamma = sy / dot(&y, &hy);
            if pairs.len() == settings.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        cur = next;
        history.push(cur.f);
    }

    let nodes = obj.full(&cur.x);
    let path = seed.with_interior(&nodes[1..n + 1])?;
    for x in &cur.x {
        let (d, i) = cfg.min_centre_distance(*x);
        if d < settings.barrier_radius {
            return Err(Error::CollisionBarrierSaturated { centre: i, distance: d });
        }
    }
    Ok(MinimizeReport {
        path,
        value: cur.m,
        gradient_norm: cur.g_m,
        iterations,
        evaluations: obj.evaluations,
        class_rejections,
        history,
    })
}

/// Two-loop recursion with the scaled kinetic preconditioner as initial matrix.
fn direction(g: &[Vec2], pairs: &VecDeque<(Vec<Vec2>, Vec<Vec2>, f64)>, gamma: f64, t: &Tridiagonal) -> Vec<Vec2> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= *yi * a;
        }
        alphas.push(a);
    }
    let mut r: Vec<Vec2> = t.solve(&q).iter().map(|v| *v * gamma).collect();
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &r);
        for (ri, si) in r.iter_mut().zip(s) {
            *ri += *si * (a - b);
        }
    }
    r.iter().map(|v| -*v).collect()
}

#[allow(clippy::too_many_arguments)]
/// Backtracking along `d` with Armijo acceptance and the parity guard.
///
/// Returns `None` when the step underflows without a class change.
fn line_search(
    obj: &mut Objective<'_>,
    cur: &Point,
    d: &[Vec2],
    slope: f64,
    target: &ParityClass,
    settings: &MinimizeSettings,
    iteration: usize,
    class_rejections: &mut usize,
) -> Result<Option<Point>> {
    const C1: f64 = 1e-4;
    // no node may travel more than half its distance to the nearest centre
    let mut step: f64 = 1.0;
    for (x, v) in cur.x.iter().zip(d) {
        let len = v.norm();
        if len > 0.0 {
            step = step.min(0.5 * obj.cfg.min_centre_distance(*x).0 / len);
        }
    }
    let initial = step;
    let slack = 1e-13 * cur.f.abs();
    let mut class_limited = false;
    loop {
        if step < 1e-12 * initial {
            if class_limited {
                return Err(Error::ClassChangeUnrecoverable { iteration });
            }
            return Ok(None);
        }
        let trial: Vec<Vec2> = cur.x.iter().zip(d).map(|(x, v)| *x + *v * step).collect();
        let p = match obj.eval(trial) {
            Ok(p) => p,
            Err(Error::Singularity { .. }) => {
                step *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !(p.f <= cur.f + C1 * step * slope + slack) {
            // safeguarded quadratic interpolation of the decrease
            let denom = 2.0 * (p.f - cur.f - step * slope);
            let q = if denom > 0.0 { -slope * step * step / denom } else { 0.5 * step };
            step = q.clamp(0.1 * step, 0.5 * step);
            continue;
        }
        let nodes = obj.full(&p.x);
        let same = match parity_class(&nodes, obj.cfg) {
            Ok(c) => c == *target,
            Err(Error::PointOnPath { .. }) | Err(Error::IllConditionedWinding { .. }) => false,
            Err(e) => return Err(e),
        };
        if !same {
            *class_rejections += 1;
            if !settings.step_shrink_on_class_change {
                return Err(Error::ClassChangeUnrecoverable { iteration });
            }
            class_limited = true;
            step *= 0.5;
            continue;
        }
        return Ok(Some(p));
    }
}
