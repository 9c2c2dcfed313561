//! Post-hoc diagnostics on computed trajectories.

use alloc::vec::Vec;

use crate::math::powf;
use crate::potentials::ProblemConfig;
use crate::Result;

use super::Trajectory;

/// Times where `|x(t)| = k`, located by bisection on the dense output to `1e−10`.
pub fn detect_ring_crossings(traj: &Trajectory, k: f64) -> Vec<f64> {
    let s = traj.samples();
    let mut out = Vec::new();
    for i in 1..s.len() {
        let f0 = s[i - 1].position.norm() - k;
        let f1 = s[i].position.norm() - k;
        if f0 == 0.0 {
            if out.last() != Some(&s[i - 1].time) {
                out.push(s[i - 1].time);
            }
            continue;
        }
        if f0 * f1 >= 0.0 {
            continue;
        }
        let (mut a, mut b) = (s[i - 1].time, s[i].time);
        let mut fa = f0;
        while b - a > 1e-10 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = traj.position_at(m).norm() - k;
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    if let Some(l) = s.last() {
        if l.position.norm() == k && out.last() != Some(&l.time) {
            out.push(l.time);
        }
    }
    out
}

/// Virial check on a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialReport {
    /// Interior sample times.
    pub times: Vec<f64>,
    /// Second difference of `r²/2` minus `2U + ∇U·x` at each interior sample.
    pub residuals: Vec<f64>,
    /// Indices of samples with `|x| ≥ K` where `2U + ∇U·x` falls below
    /// `(2 − α) m / (2α r^α)`.
    pub convexity_violations: Vec<usize>,
}

/// Finite-difference virial residual and the convexity flags outside the ring.
pub fn virial_residual(traj: &Trajectory, cfg: &ProblemConfig) -> Result<VirialReport> {
    let s = traj.samples();
    let mut times = Vec::new();
    let mut residuals = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        let (h1, h2) = (s[i].time - s[i - 1].time, s[i + 1].time - s[i].time);
        let f = |j: usize| 0.5 * s[j].position.norm_sq();
        let second = 2.0 * ((f(i + 1) - f(i)) / h2 - (f(i) - f(i - 1)) / h1) / (h1 + h2);
        let (u, g) = cfg.potential_and_gradient(s[i].position)?;
        times.push(s[i].time);
        residuals.push(second - (2.0 * u + g.dot(s[i].position)));
    }
    let convexity_violations = radial_convexity(traj, cfg)?
        .iter()
        .filter(|c| c.value < c.bound)
        .map(|c| c.index)
        .collect();
    Ok(VirialReport { times, residuals, convexity_violations })
}

/// `2U + ∇U·x` against its lower bound at one sample outside the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexitySample {
    pub index: usize,
    pub time: f64,
    pub radius: f64,
    /// `d²/dt² (r²/2)` on the zero-energy surface.
    pub value: f64,
    /// `(2 − α) m / (2α r^α)`.
    pub bound: f64,
}

/// Radial convexity at every sample with `|x| ≥ K`.
pub fn radial_convexity(traj: &Trajectory, cfg: &ProblemConfig) -> Result<Vec<ConvexitySample>> {
    let alpha = cfg.alpha();
    let k = cfg.ring_radius();
    let mut out = Vec::new();
    for (index, s) in traj.samples().iter().enumerate() {
        let r = s.position.norm();
        if r < k {
            continue;
        }
        let (u, g) = cfg.potential_and_gradient(s.position)?;
        out.push(ConvexitySample {
            index,
            time: s.time,
            radius: r,
            value: 2.0 * u + g.dot(s.position),
            bound: (2.0 - alpha) * cfg.far_mass() / (2.0 * alpha * powf(r, alpha)),
        });
    }
    Ok(out)
}

// 5-point Gauss–Legendre on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332_0,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

/// Five-point Gauss–Legendre approximation of `∫_a^b f`.
pub(crate) fn gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    GL_NODES.iter().zip(GL_WEIGHTS).map(|(x, w)| w * (b - a) * f(a + x * (b - a))).sum()
}

/// Sundman time `s(t) = ∫_{t0}^{t} dτ / |x(τ) − c|` at every sample.
///
/// Each interval is integrated with Gauss–Legendre nodes on the dense output.
pub fn sundman_time(traj: &Trajectory, cfg: &ProblemConfig, centre: usize, t0: f64) -> Vec<f64> {
    sundman_time_refined(traj, cfg, centre, t0, 1)
}

/// Sundman time with every sample interval split into `refine` pieces.
pub fn sundman_time_refined(
    traj: &Trajectory,
    cfg: &ProblemConfig,
    centre: usize,
    t0: f64,
    refine: usize,
) -> Vec<f64> {
    let c = cfg.centres()[centre].position;
    let s = traj.samples();
    let integrand = |t: f64| 1.0 / (traj.position_at(t) - c).norm();
    let quad = |a: f64, b: f64| {
        let n = refine.max(1);
        let mut acc = 0.0;
        for j in 0..n {
            let lo = a + (b - a) * j as f64 / n as f64;
            let hi = a + (b - a) * (j + 1) as f64 / n as f64;
            acc += gauss5(lo, hi, integrand);
        }
        acc
    };
    let mut cumulative = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for i in 1..s.len() {
        acc += quad(s[i - 1].time, s[i].time);
        cumulative.push(acc);
    }
    // shift so that s(t0) = 0
    let idx = s.partition_point(|st| st.time <= t0).max(1) - 1;
    let offset = cumulative[idx] + quad(s[idx].time, t0);
    cumulative.iter().map(|v| v - offset).collect()
}

/// `x ∧ ẋ` at every sample.
pub fn angular_momentum(traj: &Trajectory) -> Vec<f64> {
    traj.samples().iter().map(|s| s.position.cross(s.velocity)).collect()
}
