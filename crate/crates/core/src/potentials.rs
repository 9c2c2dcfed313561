//! The N-centre potential `U(x) = Σ m_i / (α |x − c_i|^α)`, its derivatives, and the
//! far-field split `U = m / (α |x|^α) + W`.

use alloc::vec::Vec;

use crate::math::{powf, sqrt, Mat2, Vec2, TAU};
use crate::{Error, Result};

/// A fixed attracting centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centre {
    pub position: Vec2,
    pub mass: f64,
}

impl Centre {
    pub fn new(position: Vec2, mass: f64) -> Self {
        Centre { position, mass }
    }
}

/// Exponent, centres and the derived far-field data of one problem instance.
///
/// Immutable after construction; every accessor is a pure function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    alpha: f64,
    centres: Vec<Centre>,
    far_mass: f64,
    decay_beta: f64,
    ring_radius: f64,
}

impl ProblemConfig {
    /// Builds a configuration with the default ring radius `max |c_i| + 2`.
    pub fn new(alpha: f64, centres: Vec<Centre>) -> Result<Self> {
        let extent = centres.iter().map(|c| c.position.norm()).fold(0.0, f64::max);
        Self::with_ring_radius(alpha, centres, extent + 2.0)
    }

    pub fn with_ring_radius(alpha: f64, centres: Vec<Centre>, ring_radius: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&alpha) {
            return Err(Error::InvalidInput(alloc::format!(
                "alpha must lie in [1, 2), got {alpha}"
            )));
        }
        if centres.is_empty() {
            return Err(Error::InvalidInput("at least one centre is required".into()));
        }
        for (i, c) in centres.iter().enumerate() {
            if !(c.mass > 0.0 && c.mass.is_finite()) {
                return Err(Error::InvalidInput(alloc::format!(
                    "centre {i} has non-positive mass {}",
                    c.mass
                )));
            }
            if !c.position.is_finite() {
                return Err(Error::InvalidInput(alloc::format!("centre {i} is not finite")));
            }
            for (j, d) in centres.iter().enumerate().take(i) {
                if (c.position - d.position).norm() == 0.0 {
                    return Err(Error::InvalidInput(alloc::format!(
                        "centres {j} and {i} coincide"
                    )));
                }
            }
        }
        let extent = centres.iter().map(|c| c.position.norm()).fold(0.0, f64::max);
        if !(ring_radius > extent + 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "ring radius {ring_radius} must exceed max |c_i| + 1 = {}",
                extent + 1.0
            )));
        }
        let far_mass = centres.iter().map(|c| c.mass).sum();
        Ok(ProblemConfig {
            alpha,
            centres,
            far_mass,
            decay_beta: alpha + 1.0,
            ring_radius,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn centres(&self) -> &[Centre] {
        &self.centres
    }

    pub fn num_centres(&self) -> usize {
        self.centres.len()
    }

    /// `m = Σ m_i`, the mass seen from infinity.
    pub fn far_mass(&self) -> f64 {
        self.far_mass
    }

    /// Decay exponent of the far-field remainder, `α + 1`.
    pub fn decay_beta(&self) -> f64 {
        self.decay_beta
    }

    /// The diagnostic radius `K`.
    pub fn ring_radius(&self) -> f64 {
        self.ring_radius
    }

    /// `max_i |c_i|`.
    pub fn extent(&self) -> f64 {
        self.centres.iter().map(|c| c.position.norm()).fold(0.0, f64::max)
    }

    /// Smallest distance between two centres, `None` for a single centre.
    pub fn min_centre_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.centres.iter().enumerate() {
            for b in &self.centres[i + 1..] {
                let d = (a.position - b.position).norm();
                best = Some(best.map_or(d, |g| g.min(d)));
            }
        }
        best
    }

    /// Same masses and exponent with every centre moved to `eps · c_i`.
    pub fn scaled(&self, eps: f64) -> Result<ProblemConfig> {
        let centres = self
            .centres
            .iter()
            .map(|c| Centre::new(c.position * eps, c.mass))
            .collect();
        ProblemConfig::with_ring_radius(self.alpha, centres, self.extent() * eps + 2.0)
    }

    #[inline]
    fn check(&self, i: usize, d: f64) -> Result<()> {
        let c = &self.centres[i];
        if d < 1e-12 * (1.0 + c.position.norm()) {
            Err(Error::Singularity { centre: i, distance: d })
        } else {
            Ok(())
        }
    }

    /// `U(x)`.
    pub fn potential(&self, x: Vec2) -> Result<f64> {
        let mut u = 0.0;
        for (i, c) in self.centres.iter().enumerate() {
            let d = (x - c.position).norm();
            self.check(i, d)?;
            u += c.mass / (self.alpha * powf(d, self.alpha));
        }
        Ok(u)
    }

    /// `∇U(x) = −Σ m_i (x − c_i) / |x − c_i|^(α+2)`.
    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.potential_and_gradient(x)?.1)
    }

    /// Both `U` and `∇U`, sharing the distance computations.
    pub fn potential_and_gradient(&self, x: Vec2) -> Result<(f64, Vec2)> {
        let mut u = 0.0;
        let mut g = Vec2::ZERO;
        for (i, c) in self.centres.iter().enumerate() {
            let z = x - c.position;
            let d = z.norm();
            self.check(i, d)?;
            let da = powf(d, self.alpha);
            u += c.mass / (self.alpha * da);
            g -= z * (c.mass / (da * d * d));
        }
        Ok((u, g))
    }

    pub fn hessian(&self, x: Vec2) -> Result<Mat2> {
        let mut h = Mat2::default();
        for (i, c) in self.centres.iter().enumerate() {
            let z = x - c.position;
            let d = z.norm();
            self.check(i, d)?;
            let d2 = d * d;
            let s = c.mass / (powf(d, self.alpha) * d2);
            let t = (self.alpha + 2.0) * s / d2;
            h = h + Mat2 {
                xx: -s + t * z.x * z.x,
                xy: t * z.x * z.y,
                yx: t * z.x * z.y,
                yy: -s + t * z.y * z.y,
            };
        }
        Ok(h)
    }

    /// `U_i(x) = U(x) − m_i / (α |x − c_i|^α)`, smooth near `c_i`.
    pub fn regular_part(&self, centre: usize, x: Vec2) -> Result<f64> {
        let mut u = 0.0;
        for (i, c) in self.centres.iter().enumerate() {
            if i == centre {
                continue;
            }
            let d = (x - c.position).norm();
            self.check(i, d)?;
            u += c.mass / (self.alpha * powf(d, self.alpha));
        }
        Ok(u)
    }

    /// `U_i` and `∇U_i`.
    pub fn regular_part_and_gradient(&self, centre: usize, x: Vec2) -> Result<(f64, Vec2)> {
        let mut u = 0.0;
        let mut g = Vec2::ZERO;
        for (i, c) in self.centres.iter().enumerate() {
            if i == centre {
                continue;
            }
            let z = x - c.position;
            let d = z.norm();
            self.check(i, d)?;
            let da = powf(d, self.alpha);
            u += c.mass / (self.alpha * da);
            g -= z * (c.mass / (da * d * d));
        }
        Ok((u, g))
    }

    /// `W(x) = U(x) − m / (α |x|^α)`, defined outside the disc containing the centres.
    pub fn far_field_remainder(&self, x: Vec2) -> Result<f64> {
        let r = x.norm();
        let extent = self.extent();
        if r <= extent {
            return Err(Error::Domain { radius: r, min_radius: extent });
        }
        Ok(self.potential(x)? - self.far_mass / (self.alpha * powf(r, self.alpha)))
    }

    /// `∇W(x)`.
    pub fn far_field_remainder_gradient(&self, x: Vec2) -> Result<Vec2> {
        let r = x.norm();
        let extent = self.extent();
        if r <= extent {
            return Err(Error::Domain { radius: r, min_radius: extent });
        }
        let kepler = -x * (self.far_mass / (powf(r, self.alpha) * r * r));
        Ok(self.gradient(x)? - kepler)
    }

    /// Empirical `sup |W(x)| |x|^β` over 16 rays and radii in `[K, 100K]`.
    ///
    /// Bound constants are existential in the analysis; this reports the observed sup
    /// so that `|W(x)| ≤ C / |x|^β` holds on the sampled set.
    pub fn far_field_constant(&self) -> f64 {
        let k = self.ring_radius;
        let mut sup: f64 = 0.0;
        for ray in 0..16 {
            let dir = Vec2::from_angle(TAU * ray as f64 / 16.0);
            for j in 0..=200 {
                let r = k * powf(100.0, j as f64 / 200.0);
                if let Ok(w) = self.far_field_remainder(dir * r) {
                    sup = sup.max(w.abs() * powf(r, self.decay_beta));
                }
            }
        }
        sup
    }

    /// Distance to the nearest centre and its index; ties go to the lower index.
    pub fn min_centre_distance(&self, x: Vec2) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, c) in self.centres.iter().enumerate() {
            let d = (x - c.position).norm();
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Speed of a zero-energy orbit at `x`, `√(2U(x))`.
    pub fn zero_energy_speed(&self, x: Vec2) -> Result<f64> {
        Ok(sqrt(2.0 * self.potential(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kepler(alpha: f64, m: f64) -> ProblemConfig {
        ProblemConfig::new(alpha, vec![Centre::new(Vec2::ZERO, m)]).unwrap()
    }

    fn pair() -> ProblemConfig {
        ProblemConfig::new(
            1.0,
            vec![
                Centre::new(Vec2::new(-1.0, 0.0), 1.0),
                Centre::new(Vec2::new(1.0, 0.0), 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn potential_values() {
        assert_eq!(kepler(1.0, 1.0).potential(Vec2::new(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(pair().potential(Vec2::ZERO).unwrap(), 2.0);
        let expected = 2.0 / (1.5 * powf(2.0, 1.5));
        let got = kepler(1.5, 2.0).potential(Vec2::new(2.0, 0.0)).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.471405).abs() < 1e-6);
    }

    #[test]
    fn gradient_values() {
        let g = kepler(1.0, 1.0).gradient(Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(g, Vec2::new(-1.0, 0.0));
        let g = pair().gradient(Vec2::new(0.0, 1.0)).unwrap();
        assert!(g.x.abs() < 1e-15);
        assert!((g.y + 2.0 / powf(2.0, 1.5)).abs() < 1e-15);
        assert!((g.y + 0.707107).abs() < 1e-6);
    }

    #[test]
    fn hessian_kepler_unit() {
        let h = kepler(1.0, 1.0).hessian(Vec2::new(1.0, 0.0)).unwrap();
        assert!((h.xx - 2.0).abs() < 1e-14);
        assert!((h.yy + 1.0).abs() < 1e-14);
        assert_eq!(h.xy, h.yx);
        assert!(h.xy.abs() < 1e-14);
    }

    #[test]
    fn singularity_is_an_error() {
        let cfg = pair();
        assert!(matches!(
            cfg.potential(Vec2::new(1.0, 0.0)),
            Err(Error::Singularity { centre: 1, .. })
        ));
        assert!(cfg.gradient(Vec2::new(-1.0, 1e-14)).is_err());
        assert!(cfg.hessian(Vec2::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn far_field_remainder_values() {
        let w = kepler(1.3, 2.0).far_field_remainder(Vec2::new(3.0, 4.0)).unwrap();
        assert_eq!(w, 0.0);
        let w = pair().far_field_remainder(Vec2::new(10.0, 0.0)).unwrap();
        let expected = (1.0 / 9.0 + 1.0 / 11.0) - 2.0 / 10.0;
        assert!((w - expected).abs() < 1e-15);
        assert!((w - 0.00202).abs() < 1e-5);
        assert!(matches!(
            pair().far_field_remainder(Vec2::new(0.5, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn far_field_constant_bounds_samples() {
        let cfg = pair();
        let c = cfg.far_field_constant();
        assert!(c > 0.0 && c.is_finite());
        let x = Vec2::new(7.0, 3.0);
        let w = cfg.far_field_remainder(x).unwrap().abs();
        // (7,3) is inside the sampled annulus only radially; the sup still dominates up to discretization
        assert!(w * powf(x.norm(), cfg.decay_beta()) <= 1.1 * c);
    }

    #[test]
    fn nearest_centre_and_ties() {
        let cfg = pair();
        let (d, i) = cfg.min_centre_distance(Vec2::new(0.9, 0.0));
        assert!((d - 0.1).abs() < 1e-15);
        assert_eq!(i, 1);
        assert_eq!(cfg.min_centre_distance(Vec2::new(-1.0, 0.0)), (0.0, 0));
        assert_eq!(cfg.min_centre_distance(Vec2::ZERO), (1.0, 0));
    }

    #[test]
    fn config_validation() {
        let c = vec![Centre::new(Vec2::ZERO, 1.0)];
        assert!(ProblemConfig::new(2.0, c.clone()).is_err());
        assert!(ProblemConfig::new(0.9, c.clone()).is_err());
        assert!(ProblemConfig::with_ring_radius(1.0, c.clone(), 0.5).is_err());
        assert!(ProblemConfig::new(1.0, vec![Centre::new(Vec2::ZERO, 0.0)]).is_err());
        assert!(ProblemConfig::new(
            1.0,
            vec![Centre::new(Vec2::ZERO, 1.0), Centre::new(Vec2::ZERO, 2.0)]
        )
        .is_err());
        let cfg = pair();
        assert_eq!(cfg.far_mass(), 2.0);
        assert_eq!(cfg.decay_beta(), 2.0);
        assert_eq!(cfg.ring_radius(), 3.0);
    }
}
