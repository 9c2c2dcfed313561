use alloc::vec::Vec;

use crate::homotopy::check_endpoints;
use crate::math::{sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

/// Smallest allowed number of segments.
pub const MIN_SEGMENTS: usize = 8;

/// A polyline `u_0 … u_M` with parameter times `−1 = τ_0 < … < τ_M = 1`.
///
/// The endpoints `q⁻ = u_0` and `q⁺ = u_M` satisfy `|q⁻| = |q⁺|`, `q⁻ ≠ q⁺`, and are never
/// moved by the optimizer. Times are uniform unless built by [`DiscretePath::graded`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    nodes: Vec<Vec2>,
    times: Vec<f64>,
}

impl DiscretePath {
    /// Nodes on the uniform grid `τ_k = −1 + 2k/M`.
    pub fn new(nodes: Vec<Vec2>) -> Result<Self> {
        let m = nodes.len().saturating_sub(1);
        let times = (0..=m).map(|k| -1.0 + 2.0 * k as f64 / m.max(1) as f64).collect();
        Self::with_times(nodes, times)
    }

    pub fn with_times(nodes: Vec<Vec2>, mut times: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_SEGMENTS + 1 {
            return Err(Error::InvalidInput("a path needs at least 8 segments".into()));
        }
        if times.len() != nodes.len() {
            return Err(Error::InvalidInput("one time per node is required".into()));
        }
        if nodes.iter().any(|n| !n.is_finite()) {
            return Err(Error::InvalidInput("path nodes must be finite".into()));
        }
        if (times[0] + 1.0).abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("parameter times must run from −1 to 1".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("parameter times must increase strictly".into()));
        }
        let last = times.len() - 1;
        times[0] = -1.0;
        times[last] = 1.0;
        check_endpoints(nodes[0], nodes[nodes.len() - 1])?;
        Ok(DiscretePath { nodes, times })
    }

    /// Straight uniform path between `q⁻` and `q⁺` with `m` segments.
    pub fn straight(q_minus: Vec2, q_plus: Vec2, m: usize) -> Result<Self> {
        Self::new((0..=m).map(|k| q_minus.lerp(q_plus, k as f64 / m as f64)).collect())
    }

    /// Resamples a polyline with `m` segments, concentrating nodes near the centres.
    ///
    /// Nodes equidistribute `∫ ds / ℓ(x)` with `ℓ` the distance to the nearest centre
    /// (about `ds / r` far out, hence logarithmic spacing along the radial legs). The
    /// parameter times follow the zero-energy clock `dt = ds / √(2U)`, so that the
    /// resampled path already moves at roughly the right speed.
    pub fn graded(points: &[Vec2], m: usize, cfg: &ProblemConfig) -> Result<Self> {
        if points.len() < 2 || m < MIN_SEGMENTS {
            return Err(Error::InvalidInput("graded resampling needs a polyline and m ≥ 8".into()));
        }
        let floor = 1e-3 * cfg.min_centre_gap().unwrap_or(1.0);
        let weight = |x: Vec2| 1.0 / cfg.min_centre_distance(x).0.max(floor);
        // fine table of (monitor length, point)
        const SUB: usize = 16;
        let mut table: Vec<(f64, Vec2)> = Vec::with_capacity((points.len() - 1) * SUB + 1);
        table.push((0.0, points[0]));
        let mut acc = 0.0;
        for w in points.windows(2) {
            let len = (w[1] - w[0]).norm();
            if len == 0.0 {
                continue;
            }
            for j in 0..SUB {
                let a = w[0].lerp(w[1], j as f64 / SUB as f64);
                let b = w[0].lerp(w[1], (j + 1) as f64 / SUB as f64);
                acc += (b - a).norm() * weight(a.lerp(b, 0.5));
                table.push((acc, b));
            }
        }
        if acc == 0.0 {
            return Err(Error::DegeneratePath);
        }
        let mut nodes = Vec::with_capacity(m + 1);
        nodes.push(points[0]);
        let mut j = 1;
        for k in 1..m {
            let target = acc * k as f64 / m as f64;
            while table[j].0 < target {
                j += 1;
            }
            let (s0, p0) = table[j - 1];
            let (s1, p1) = table[j];
            let f = if s1 > s0 { (target - s0) / (s1 - s0) } else { 0.0 };
            nodes.push(p0.lerp(p1, f));
        }
        nodes.push(points[points.len() - 1]);
        let times = zero_energy_times(&nodes, cfg)?;
        Self::with_times(nodes, times)
    }

    /// Same geometry regraded with `m` segments.
    pub fn regraded(&self, m: usize, cfg: &ProblemConfig) -> Result<Self> {
        Self::graded(&self.nodes, m, cfg)
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of segments `M`.
    pub fn num_segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn q_minus(&self) -> Vec2 {
        self.nodes[0]
    }

    pub fn q_plus(&self) -> Vec2 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Parameter steps `h_k = τ_{k+1} − τ_k`.
    pub fn steps(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn is_uniform(&self) -> bool {
        let h = 2.0 / self.num_segments() as f64;
        self.steps().iter().all(|s| (s - h).abs() < 1e-12)
    }

    /// Replaces the interior nodes, keeping endpoints and times.
    pub fn with_interior(&self, interior: &[Vec2]) -> Result<Self> {
        if interior.len() + 2 != self.nodes.len() {
            return Err(Error::InvalidInput("interior node count mismatch".into()));
        }
        let mut nodes = self.nodes.clone();
        nodes[1..self.nodes.len() - 1].copy_from_slice(interior);
        Ok(DiscretePath { nodes, times: self.times.clone() })
    }

    /// Adds `offsets[k]` to interior node `k + 1`.
    pub fn perturbed(&self, offsets: &[Vec2]) -> Result<Self> {
        let interior: Vec<Vec2> = self.nodes[1..self.nodes.len() - 1]
            .iter()
            .zip(offsets)
            .map(|(n, o)| *n + *o)
            .collect();
        self.with_interior(&interior)
    }

    /// Reverses the direction of travel (endpoints swap, times mirror).
    pub fn reversed(&self) -> Self {
        let nodes = self.nodes.iter().rev().copied().collect();
        let times = self.times.iter().rev().map(|t| -t).collect();
        DiscretePath { nodes, times }
    }

    /// Position at parameter `τ` by linear interpolation.
    pub fn position_at(&self, tau: f64) -> Vec2 {
        let k = self.times.partition_point(|&t| t <= tau).clamp(1, self.nodes.len() - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        self.nodes[k - 1].lerp(self.nodes[k], (tau - t0) / (t1 - t0))
    }
}

/// Times on `[−1, 1]` proportional to the zero-energy travel time `Σ |Δu| / √(2U(mid))`.
fn zero_energy_times(nodes: &[Vec2], cfg: &ProblemConfig) -> Result<Vec<f64>> {
    let mut cumulative = Vec::with_capacity(nodes.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        let ds = (w[1] - w[0]).norm();
        let u = cfg.potential(w[0].lerp(w[1], 0.5))?;
        acc += ds / sqrt(2.0 * u);
        cumulative.push(acc);
    }
    if acc == 0.0 {
        return Err(Error::DegeneratePath);
    }
    Ok(cumulative.iter().map(|c| -1.0 + 2.0 * c / acc).collect())
}
