//! Levi-Civita regularization of close approaches to one centre (`α = 1` only).
//!
//! With `x − c = w²` (complex square) and fictitious time `ds = dt / |x − c|`, the
//! zero-energy motion becomes
//! `w'' = (w/2) U₁(c + w²) + (w̄/2) |w|² ∇U₁(c + w²)`, where `U₁` is the part of `U`
//! that is smooth at `c`. The right side stays bounded through `w = 0`, so collisions and
//! near-collisions are integrated without loss of accuracy.

use crate::math::{cos, sin, sqrt, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

use super::State;

/// Regularized phase-space point near one centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeviCivitaState {
    /// `w` with `w² = x − c`.
    pub w: Vec2,
    /// `dw/ds`.
    pub w_prime: Vec2,
    /// Sundman time `s`.
    pub fictitious_time: f64,
    pub centre_index: usize,
    /// Physical time `t`.
    pub physical_time: f64,
}

impl LeviCivitaState {
    /// Back to Cartesian coordinates: `x = c + w²`, `ẋ = 2 w w' / |w|²`.
    ///
    /// Fails with a singularity error at `w = 0`, where the velocity is unbounded.
    pub fn drop_to_cartesian(&self, cfg: &ProblemConfig) -> Result<State> {
        let c = cfg.centres()[self.centre_index].position;
        let rho = self.w.norm_sq();
        if rho == 0.0 {
            return Err(Error::Singularity { centre: self.centre_index, distance: 0.0 });
        }
        let position = c + self.w.cmul(self.w);
        let velocity = self.w.cmul(self.w_prime) * (2.0 / rho);
        Ok(State::new(self.physical_time, position, velocity))
    }

    /// `|w'|² − m₁/2 − |w|² U₁/2`, which equals `|x − c| · H / 2`.
    pub fn invariant_residual(&self, cfg: &ProblemConfig) -> Result<f64> {
        let c = cfg.centres()[self.centre_index];
        let x = c.position + self.w.cmul(self.w);
        let u1 = cfg.regular_part(self.centre_index, x)?;
        Ok(self.w_prime.norm_sq() - 0.5 * c.mass - 0.5 * self.w.norm_sq() * u1)
    }
}

/// Lifts a Cartesian state near `centre`, taking `phi` as the polar angle of `x − c`.
///
/// Pass an angle accumulated continuously along the orbit (see [`HalfAngle`]) to keep
/// the branch of `w`; [`levi_civita_lift`] uses the principal angle instead.
pub fn levi_civita_lift_with_angle(
    state: &State,
    centre: usize,
    phi: f64,
    cfg: &ProblemConfig,
) -> Result<LeviCivitaState> {
    if cfg.alpha() != 1.0 {
        return Err(Error::WrongAlpha { alpha: cfg.alpha() });
    }
    if centre >= cfg.num_centres() {
        return Err(Error::InvalidInput("centre index out of range".into()));
    }
    let z = state.position - cfg.centres()[centre].position;
    let rho = z.norm();
    if rho == 0.0 {
        return Err(Error::Singularity { centre, distance: 0.0 });
    }
    let w = Vec2::new(cos(0.5 * phi), sin(0.5 * phi)) * sqrt(rho);
    // x' = |w|² ẋ = 2 w w'  ⇒  w' = ẋ w̄ / 2
    let w_prime = state.velocity.cmul(w.conj()) * 0.5;
    Ok(LeviCivitaState {
        w,
        w_prime,
        fictitious_time: 0.0,
        centre_index: centre,
        physical_time: state.time,
    })
}

/// Lift with the principal polar angle `φ ∈ (−π, π]`.
pub fn levi_civita_lift(state: &State, centre: usize, cfg: &ProblemConfig) -> Result<LeviCivitaState> {
    let c = cfg.centres().get(centre).ok_or_else(|| Error::InvalidInput("centre index out of range".into()))?;
    let phi = (state.position - c.position).angle();
    levi_civita_lift_with_angle(state, centre, phi, cfg)
}

/// Continuous polar angle of `x − c` accumulated step by step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfAngle {
    centre: Vec2,
    last: Vec2,
    phi: f64,
}

impl HalfAngle {
    pub fn new(centre: Vec2, x: Vec2) -> Self {
        let z = x - centre;
        HalfAngle { centre, last: z, phi: z.angle() }
    }

    /// Advances to `x`, adding the signed angle increment from the previous point.
    pub fn advance(&mut self, x: Vec2) -> f64 {
        let z = x - self.centre;
        self.phi += crate::math::atan2(self.last.cross(z), self.last.dot(z));
        self.last = z;
        self.phi
    }

    pub fn angle(&self) -> f64 {
        self.phi
    }
}

/// Right side of the regularized system in `(w, w', t)`.
pub(crate) fn rhs(centre: usize, cfg: &ProblemConfig, y: &[f64; 5]) -> Result<[f64; 5]> {
    let c = cfg.centres()[centre].position;
    let w = Vec2::new(y[0], y[1]);
    let wp = Vec2::new(y[2], y[3]);
    let rho = w.norm_sq();
    let x = c + w.cmul(w);
    let (u1, g1) = cfg.regular_part_and_gradient(centre, x).map_err(|e| match e {
        Error::Singularity { centre: other, .. } => Error::OverlappingRegularization { centre, other },
        e => e,
    })?;
    let acc = w * (0.5 * u1) + w.conj().cmul(g1) * (0.5 * rho);
    Ok([wp.x, wp.y, acc.x, acc.y, rho])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Centre;
    use alloc::vec;

    fn two() -> ProblemConfig {
        ProblemConfig::new(
            1.0,
            vec![Centre::new(Vec2::new(-0.5, 0.0), 1.0), Centre::new(Vec2::new(0.5, 0.0), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn lift_on_positive_axis() {
        let cfg = two();
        let s = State::new(0.0, Vec2::new(-0.5 + 0.04, 0.0), Vec2::new(0.0, 1.0));
        let lc = levi_civita_lift(&s, 0, &cfg).unwrap();
        assert!((lc.w - Vec2::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lift_on_negative_axis_takes_upper_branch() {
        let cfg = two();
        let s = State::new(0.0, Vec2::new(-0.5 - 0.04, 0.0), Vec2::new(0.0, 1.0));
        let lc = levi_civita_lift_with_angle(&s, 0, crate::math::PI, &cfg).unwrap();
        assert!((lc.w - Vec2::new(0.0, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let cfg = two();
        let x = Vec2::new(0.51, -0.013);
        let u = cfg.potential(x).unwrap();
        let v = Vec2::from_angle(2.1) * sqrt(2.0 * u);
        let s = State::new(3.0, x, v);
        let back = levi_civita_lift(&s, 1, &cfg).unwrap().drop_to_cartesian(&cfg).unwrap();
        assert!((back.position - x).norm() < 1e-12);
        assert!((back.velocity - v).norm() < 1e-12 * v.norm());
        let inv = levi_civita_lift(&s, 1, &cfg).unwrap().invariant_residual(&cfg).unwrap();
        assert!(inv.abs() < 1e-9);
    }

    #[test]
    fn wrong_alpha() {
        let cfg = ProblemConfig::new(1.5, vec![Centre::new(Vec2::ZERO, 1.0)]).unwrap();
        let s = State::new(0.0, Vec2::new(0.1, 0.0), Vec2::new(0.0, 1.0));
        assert!(matches!(levi_civita_lift(&s, 0, &cfg), Err(Error::WrongAlpha { .. })));
    }

    #[test]
    fn half_angle_unwraps() {
        let mut h = HalfAngle::new(Vec2::ZERO, Vec2::new(1.0, 0.0));
        for k in 1..=8 {
            h.advance(Vec2::from_angle(crate::math::TAU * k as f64 / 8.0));
        }
        assert!((h.angle() - crate::math::TAU).abs() < 1e-12);
    }
}
