use alloc::vec::Vec;

use crate::homotopy::{parity_class, ParityClass};
use crate::integrator::{State, Trajectory};
use crate::math::{sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

use super::functional::{evaluate, Sum};
use super::DiscretePath;

/// A minimizer rescaled into a zero-energy solution of the fixed-endpoint problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BolzaSolution {
    pub path: DiscretePath,
    pub omega: f64,
    /// `∫(½|ẋ|² + U) dt` over `[−ω, ω]`.
    pub action: f64,
    pub parity: ParityClass,
    /// Samples at `t_k = ω τ_k + time_shift`.
    pub trajectory: Trajectory,
    /// Offset added to every time stamp of `trajectory`; the solution lives on
    /// `[−ω + time_shift, ω + time_shift]`.
    pub time_shift: f64,
    /// `M` at the path.
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `max_k |∂M/∂u_k|`.
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl BolzaSolution {
    /// `|A/√2 − √M| / √M`.
    pub fn action_identity_residual(&self) -> f64 {
        let root = sqrt(self.value);
        (self.action / core::f64::consts::SQRT_2 - root).abs() / root
    }

    /// First and last crossing of the ring `|x| = K`, if the orbit enters it.
    pub fn ring_times(&self) -> Option<(f64, f64)> {
        let c = self.trajectory.ring_crossings();
        (c.len() >= 2).then(|| (c[0], c[c.len() - 1]))
    }

    /// Moves the solution in time so that its ring crossings are symmetric about `t = 0`.
    pub fn centred(mut self) -> Result<Self> {
        let (a, b) = self.ring_times().ok_or(Error::TailTooShort)?;
        let dt = -0.5 * (a + b);
        self.trajectory = self.trajectory.shifted(dt);
        self.time_shift += dt;
        Ok(self)
    }

    /// `max_k |½|ẋ_k|² − U(x_k)| / max_k U(x_k)` over the samples.
    pub fn relative_energy_residual(&self, cfg: &ProblemConfig) -> Result<f64> {
        relative_energy_residual(&self.trajectory, cfg)
    }
}

/// `max |H| / max U` over the samples of a trajectory.
pub fn relative_energy_residual(traj: &Trajectory, cfg: &ProblemConfig) -> Result<f64> {
    let mut max_u: f64 = 0.0;
    let mut max_h: f64 = 0.0;
    for s in traj.samples() {
        let u = cfg.potential(s.position)?;
        max_u = max_u.max(u);
        max_h = max_h.max((0.5 * s.velocity.norm_sq() - u).abs());
    }
    Ok(max_h / max_u)
}

/// Node velocities `du/dτ` from the quartic through the five nearest nodes (fourth order
/// on any grid; the stencil shifts inwards at the ends).
pub(crate) fn node_derivatives(nodes: &[Vec2], times: &[f64]) -> Vec<Vec2> {
    let n = nodes.len();
    let width = n.min(5);
    (0..n)
        .map(|k| {
            let first = k.saturating_sub(width / 2).min(n - width);
            let idx = first..first + width;
            let t = times[k];
            let mut v = Vec2::ZERO;
            for j in idx.clone() {
                // L_j'(t) = Σ_{m≠j} 1/(t_j − t_m) Π_{l≠j,m} (t − t_l)/(t_j − t_l)
                let mut dl = 0.0;
                for m in idx.clone().filter(|&m| m != j) {
                    let mut prod = 1.0 / (times[j] - times[m]);
                    for l in idx.clone().filter(|&l| l != j && l != m) {
                        prod *= (t - times[l]) / (times[j] - times[l]);
                    }
                    dl += prod;
                }
                v += nodes[j] * dl;
            }
            v
        })
        .collect()
}

/// Rescales a converged path to `x(t) = u(t/ω)` on `[−ω, ω]` and checks the energy.
///
/// Fails with an energy-residual error if `|½|ẋ|² − U|` exceeds `10⁻³ max U` at some node.
pub fn to_trajectory(path: &DiscretePath, cfg: &ProblemConfig) -> Result<BolzaSolution> {
    let e = evaluate(path, cfg)?;
    if !(e.kinetic > 0.0) {
        return Err(Error::DegeneratePath);
    }
    let omega = sqrt(e.kinetic / (2.0 * e.potential));
    let nodes = path.nodes();
    let times = path.times();
    let du = node_derivatives(nodes, times);
    let states: Vec<State> = nodes
        .iter()
        .zip(times)
        .zip(&du)
        .map(|((x, t), v)| State::new(omega * t, *x, *v / omega))
        .collect();
    let trajectory = Trajectory::from_states(states, cfg)?;
    let rel = relative_energy_residual(&trajectory, cfg)?;
    if rel > 1e-3 {
        return Err(Error::EnergyResidualTooLarge { residual: rel, bound: 1e-3 });
    }
    // action in the time domain: segment kinetic energy plus the same potential quadrature
    let mut action = Sum::default();
    for k in 0..nodes.len() - 1 {
        let dt = omega * (times[k + 1] - times[k]);
        let dx = nodes[k + 1] - nodes[k];
        action.add(0.5 * dx.norm_sq() / dt);
    }
    let action = action.value() + omega * e.potential;
    Ok(BolzaSolution {
        path: path.clone(),
        omega,
        action,
        parity: parity_class(nodes, cfg)?,
        trajectory,
        time_shift: 0.0,
        value: e.value,
        kinetic: e.kinetic,
        potential: e.potential,
        gradient_norm: e.gradient.iter().fold(0.0, |m, g| m.max(g.x.abs()).max(g.y.abs())),
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_derivatives_are_exact_for_quartics() {
        let times: Vec<f64> = (0..12).map(|k| -1.0 + 2.0 * (k as f64 / 11.0).powi(2)).collect();
        let f = |t: f64| Vec2::new(t.powi(4) - 2.0 * t, 3.0 * t.powi(3) + t * t);
        let df = |t: f64| Vec2::new(4.0 * t.powi(3) - 2.0, 9.0 * t * t + 2.0 * t);
        let nodes: Vec<Vec2> = times.iter().map(|t| f(*t)).collect();
        for (v, t) in node_derivatives(&nodes, &times).iter().zip(&times) {
            assert!((*v - df(*t)).norm() < 1e-9, "t = {t}");
        }
    }
}
