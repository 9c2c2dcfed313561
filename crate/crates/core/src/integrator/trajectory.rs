use alloc::vec::Vec;

use crate::math::Vec2;
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

/// Phase-space point at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub time: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl State {
    pub fn new(time: f64, position: Vec2, velocity: Vec2) -> Self {
        State { time, position, velocity }
    }

    /// `H = ½|ẋ|² − U(x)`.
    pub fn energy(&self, cfg: &ProblemConfig) -> Result<f64> {
        Ok(0.5 * self.velocity.norm_sq() - cfg.potential(self.position)?)
    }

    /// Same position, speed rescaled to `√(2U)` so that `H = 0` exactly.
    pub fn on_zero_energy(&self, cfg: &ProblemConfig) -> Result<State> {
        let speed = cfg.zero_energy_speed(self.position)?;
        let v = self.velocity.norm();
        if v == 0.0 {
            return Err(Error::InvalidInput("cannot rescale a zero velocity".into()));
        }
        Ok(State::new(self.time, self.position, self.velocity * (speed / v)))
    }
}

/// Time-ordered samples of a zero-energy orbit with per-sample diagnostics.
///
/// Between samples the orbit is reconstructed by cubic Hermite interpolation of the
/// position (with velocities) and of the velocity (with accelerations).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<State>,
    accelerations: Vec<Vec2>,
    energy_residuals: Vec<f64>,
    ring_crossings: Vec<f64>,
    min_distance_log: Vec<(f64, usize)>,
}

impl Trajectory {
    /// Builds a trajectory, evaluating accelerations and `H` at every sample.
    pub fn from_states(samples: Vec<State>, cfg: &ProblemConfig) -> Result<Self> {
        let mut accelerations = Vec::with_capacity(samples.len());
        let mut residuals = Vec::with_capacity(samples.len());
        for s in &samples {
            let (u, g) = cfg.potential_and_gradient(s.position)?;
            accelerations.push(g);
            residuals.push(0.5 * s.velocity.norm_sq() - u);
        }
        Self::from_parts(samples, accelerations, residuals, cfg)
    }

    /// Builds a trajectory from precomputed accelerations and energy residuals.
    pub(crate) fn from_parts(
        samples: Vec<State>,
        accelerations: Vec<Vec2>,
        energy_residuals: Vec<f64>,
        cfg: &ProblemConfig,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidInput("trajectory times must increase strictly".into()));
        }
        let min_distance_log = samples.iter().map(|s| cfg.min_centre_distance(s.position)).collect();
        let mut traj = Trajectory {
            samples,
            accelerations,
            energy_residuals,
            ring_crossings: Vec::new(),
            min_distance_log,
        };
        traj.ring_crossings = super::diagnostics::detect_ring_crossings(&traj, cfg.ring_radius());
        Ok(traj)
    }

    pub fn samples(&self) -> &[State] {
        &self.samples
    }

    pub fn accelerations(&self) -> &[Vec2] {
        &self.accelerations
    }

    /// Per-sample `H`; samples taken in regularized coordinates store `|x − c|·H/2`.
    pub fn energy_residuals(&self) -> &[f64] {
        &self.energy_residuals
    }

    /// Times where `|x| = K`.
    pub fn ring_crossings(&self) -> &[f64] {
        &self.ring_crossings
    }

    pub fn min_distance_log(&self) -> &[(f64, usize)] {
        &self.min_distance_log
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &State {
        &self.samples[0]
    }

    pub fn last(&self) -> &State {
        &self.samples[self.samples.len() - 1]
    }

    pub fn t_min(&self) -> f64 {
        self.first().time
    }

    pub fn t_max(&self) -> f64 {
        self.last().time
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.position).collect()
    }

    pub fn max_abs_energy_residual(&self) -> f64 {
        self.energy_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Shifts every time stamp by `dt`.
    pub fn shifted(&self, dt: f64) -> Trajectory {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.time += dt;
        }
        for t in &mut out.ring_crossings {
            *t += dt;
        }
        out
    }

    /// Appends `other`, which must start at or after the end of `self`.
    pub fn concat(&self, other: &Trajectory) -> Result<Trajectory> {
        let mut out = self.clone();
        let skip = match (self.samples.last(), other.samples.first()) {
            (Some(a), Some(b)) if b.time < a.time => {
                return Err(Error::InvalidInput("concatenated trajectories overlap".into()))
            }
            (Some(a), Some(b)) if b.time == a.time => 1,
            _ => 0,
        };
        out.samples.extend_from_slice(&other.samples[skip..]);
        out.accelerations.extend_from_slice(&other.accelerations[skip..]);
        out.energy_residuals.extend_from_slice(&other.energy_residuals[skip..]);
        out.min_distance_log.extend_from_slice(&other.min_distance_log[skip..]);
        let mut crossings = out.ring_crossings;
        for &t in &other.ring_crossings {
            if crossings.last().map_or(true, |&l| t > l + 1e-9) {
                crossings.push(t);
            }
        }
        out.ring_crossings = crossings;
        Ok(out)
    }

    /// Index `i` with `t_i <= t <= t_{i+1}`, clamped to the ends.
    fn bracket(&self, t: f64) -> usize {
        let n = self.samples.len();
        if n < 2 || t <= self.samples[0].time {
            return 0;
        }
        if t >= self.samples[n - 1].time {
            return n - 2;
        }
        let i = self.samples.partition_point(|s| s.time <= t);
        i.saturating_sub(1).min(n - 2)
    }

    /// Interpolated state at `t`; extrapolates the Hermite cubic outside the range.
    pub fn state_at(&self, t: f64) -> State {
        if self.samples.len() == 1 {
            return self.samples[0];
        }
        let i = self.bracket(t);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.time - a.time;
        let s = (t - a.time) / h;
        let position = hermite(a.position, a.velocity * h, b.position, b.velocity * h, s);
        let velocity = hermite(
            a.velocity,
            self.accelerations[i] * h,
            b.velocity,
            self.accelerations[i + 1] * h,
            s,
        );
        State::new(t, position, velocity)
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        self.state_at(t).position
    }

    /// Resamples on `n` uniformly spaced times over the full span.
    pub fn resample_uniform(&self, n: usize, cfg: &ProblemConfig) -> Result<Trajectory> {
        let (t0, t1) = (self.t_min(), self.t_max());
        let states = (0..n)
            .map(|k| self.state_at(t0 + (t1 - t0) * k as f64 / (n - 1) as f64))
            .collect();
        Trajectory::from_states(states, cfg)
    }

    /// The sub-trajectory with `t0 <= t <= t1` (sample-aligned, endpoints interpolated).
    pub fn window(&self, t0: f64, t1: f64, cfg: &ProblemConfig) -> Result<Trajectory> {
        let mut states = alloc::vec![self.state_at(t0)];
        states.extend(self.samples.iter().filter(|s| s.time > t0 && s.time < t1).copied());
        states.push(self.state_at(t1));
        Trajectory::from_states(states, cfg)
    }
}

/// Cubic Hermite basis on `s ∈ [0,1]` with end values and scaled end derivatives.
#[inline]
pub(crate) fn hermite(p0: Vec2, m0: Vec2, p1: Vec2, m1: Vec2, s: f64) -> Vec2 {
    let s2 = s * s;
    let s3 = s2 * s;
    p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (s3 - 2.0 * s2 + s)
        + p1 * (-2.0 * s3 + 3.0 * s2)
        + m1 * (s3 - s2)
}
