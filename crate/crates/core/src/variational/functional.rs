//! The discrete Maupertuis functional `M(u) = K(u) · P(u)` with
//! `K = ∫|u̇|² dτ` (exact for the polyline) and `P = ∫U(u) dτ` (composite midpoint rule).

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

use super::DiscretePath;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sub-points of the segment rule: midpoints of four equal sub-segments.
///
/// The same composite rule is used on every segment. Switching rules by distance to the
/// centres would make `P` discontinuous in the nodes and stall the line search.
const SUB4: [f64; 4] = [0.125, 0.375, 0.625, 0.875];

/// `Σ_k |u_{k+1} − u_k|² / h_k`.
pub fn kinetic_integral(path: &DiscretePath) -> f64 {
    kinetic(path.nodes(), path.times())
}

fn kinetic(nodes: &[Vec2], times: &[f64]) -> f64 {
    let mut s = Sum::default();
    for k in 0..nodes.len() - 1 {
        s.add((nodes[k + 1] - nodes[k]).norm_sq() / (times[k + 1] - times[k]));
    }
    s.value()
}

/// `Σ_k h_k Q_k` with `Q_k` the 4-point composite midpoint average of `U` on segment `k`.
pub fn potential_integral(path: &DiscretePath, cfg: &ProblemConfig) -> Result<f64> {
    let nodes = path.nodes();
    let times = path.times();
    let mut s = Sum::default();
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = times[k + 1] - times[k];
        let mut q = 0.0;
        for f in SUB4 {
            q += cfg.potential(a.lerp(b, f))?;
        }
        s.add(h * 0.25 * q);
    }
    Ok(s.value())
}

/// `M(u) = K(u) · P(u)`.
pub fn maupertuis(path: &DiscretePath, cfg: &ProblemConfig) -> Result<f64> {
    Ok(kinetic_integral(path) * potential_integral(path, cfg)?)
}

/// `ω = √(K / (2P))`, the time scale turning the path into a zero-energy solution.
pub fn omega_of(path: &DiscretePath, cfg: &ProblemConfig) -> Result<f64> {
    let k = kinetic_integral(path);
    if !(k > 0.0) {
        return Err(Error::DegeneratePath);
    }
    let p = potential_integral(path, cfg)?;
    Ok(sqrt(k / (2.0 * p)))
}

/// Value and gradient of `M` in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub kinetic: f64,
    pub potential: f64,
    pub value: f64,
    /// `∂M/∂u_k` for every node; zero at the fixed endpoints.
    pub gradient: Vec<Vec2>,
}

pub fn evaluate(path: &DiscretePath, cfg: &ProblemConfig) -> Result<Evaluation> {
    evaluate_nodes(path.nodes(), path.times(), cfg)
}

pub(crate) fn evaluate_nodes(nodes: &[Vec2], times: &[f64], cfg: &ProblemConfig) -> Result<Evaluation> {
    let n = nodes.len();
    let mut dk = vec![Vec2::ZERO; n];
    let mut dp = vec![Vec2::ZERO; n];
    let mut ks = Sum::default();
    let mut ps = Sum::default();
    for k in 0..n - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = times[k + 1] - times[k];
        let d = b - a;
        ks.add(d.norm_sq() / h);
        let v = d * (2.0 / h);
        dk[k] -= v;
        dk[k + 1] += v;
        let mut q = 0.0;
        for f in SUB4 {
            let (u, g) = cfg.potential_and_gradient(a.lerp(b, f))?;
            q += u;
            dp[k] += g * (0.25 * h * (1.0 - f));
            dp[k + 1] += g * (0.25 * h * f);
        }
        ps.add(h * 0.25 * q);
    }
    let kin = ks.value();
    let pot = ps.value();
    let mut gradient: Vec<Vec2> = dk.iter().zip(&dp).map(|(a, b)| *a * pot + *b * kin).collect();
    gradient[0] = Vec2::ZERO;
    gradient[n - 1] = Vec2::ZERO;
    Ok(Evaluation { kinetic: kin, potential: pot, value: kin * pot, gradient })
}

/// Exact gradient of the discrete functional (product rule over both factors).
pub fn maupertuis_gradient(path: &DiscretePath, cfg: &ProblemConfig) -> Result<Vec<Vec2>> {
    Ok(evaluate(path, cfg)?.gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin, PI};
    use crate::potentials::Centre;

    fn kepler(m: f64) -> ProblemConfig {
        ProblemConfig::new(1.0, vec![Centre::new(Vec2::ZERO, m)]).unwrap()
    }

    #[test]
    fn straight_kinetic() {
        let p = DiscretePath::straight(Vec2::new(-3.0, 0.0), Vec2::new(3.0, 0.0), 10).unwrap();
        assert!((kinetic_integral(&p) - 18.0).abs() < 1e-12);
        let p2 = DiscretePath::straight(Vec2::new(-3.0, 0.0), Vec2::new(3.0, 0.0), 20).unwrap();
        assert!((kinetic_integral(&p2) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_kinetic() {
        let nodes = (0..=512)
            .map(|k| {
                let t = PI * (1.0 - k as f64 / 512.0);
                Vec2::new(cos(t), sin(t))
            })
            .collect();
        let p = DiscretePath::new(nodes).unwrap();
        let want = PI * PI / 2.0;
        assert!((kinetic_integral(&p) - want).abs() / want < 1e-3);
    }

    #[test]
    fn circle_potential_and_omega() {
        let cfg = kepler(1.0);
        let r = 2.0;
        let nodes = (0..=64)
            .map(|k| Vec2::from_angle(PI * (1.0 - k as f64 / 64.0)) * r)
            .collect();
        let p = DiscretePath::new(nodes).unwrap();
        // midpoints sit slightly inside the circle
        assert!((potential_integral(&p, &cfg).unwrap() - 2.0 * (1.0 / r)).abs() < 1e-3);
        // ω = L / (2 √(2 m / r)) with L the polyline length
        let len: f64 = p.nodes().windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let want = len / (2.0 * sqrt(2.0 / r));
        let omega = omega_of(&p, &cfg).unwrap();
        assert!((omega - want).abs() / want < 1e-3);
        // four times the mass halves ω
        let heavy = kepler(4.0);
        assert!((omega_of(&p, &heavy).unwrap() - 0.5 * omega).abs() < 1e-14);
    }
}
