//! Planar vectors and the handful of float functions `core` does not provide.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Angle of `v` folded into `[0, 2π)`.
pub fn polar_angle(v: Vec2) -> f64 {
    let a = atan2(v.y, v.x);
    if a < 0.0 {
        let b = a + TAU;
        // -0.0 and tiny negatives round to 2π
        if b >= TAU {
            0.0
        } else {
            b
        }
    } else {
        a
    }
}

/// A point or displacement in the plane. Doubles as a complex number where the
/// Levi-Civita map needs one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta`.
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(cos(theta), sin(theta))
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// The scalar cross product `self ∧ o`.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Counterclockwise rotation by a quarter turn.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, theta: f64) -> Vec2 {
        self.cmul(Vec2::from_angle(theta))
    }

    pub fn angle(self) -> f64 {
        atan2(self.y, self.x)
    }

    #[inline]
    pub fn cmul(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x * o.x - self.y * o.y, self.x * o.y + self.y * o.x)
    }

    #[inline]
    pub fn conj(self) -> Vec2 {
        Vec2::new(self.x, -self.y)
    }

    pub fn lerp(self, o: Vec2, s: f64) -> Vec2 {
        self + (o - self) * s
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl MulAssign<f64> for Vec2 {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        self.x *= s;
        self.y *= s;
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Row-major symmetric-or-not 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl Mat2 {
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.yx * v.x + self.yy * v.y)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2 {
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yx: self.yx + o.yx,
            yy: self.yy + o.yy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_angle_range() {
        assert_eq!(polar_angle(Vec2::new(1.0, 0.0)), 0.0);
        assert!((polar_angle(Vec2::new(0.0, -1.0)) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(polar_angle(Vec2::new(1.0, -0.0)), 0.0);
        let a = polar_angle(Vec2::new(1.0, -1e-300));
        assert!((0.0..TAU).contains(&a));
    }

    #[test]
    fn complex_product() {
        let i = Vec2::new(0.0, 1.0);
        assert_eq!(i.cmul(i), Vec2::new(-1.0, 0.0));
        let w = Vec2::new(2.0, -3.0);
        assert_eq!(w.cmul(w.conj()), Vec2::new(13.0, 0.0));
    }
}
