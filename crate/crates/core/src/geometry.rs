use core::f64::consts::FRAC_PI_2;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point (or vector) of the plane in model units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, t: f64) -> Self {
        Point::new(r * libm::cos(t), r * libm::sin(t))
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        libm::atan2(self.y, self.x)
    }

    pub fn lerp(self, other: Point, s: f64) -> Point {
        Point::new(self.x + s * (other.x - self.x), self.y + s * (other.y - self.y))
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// Twice the signed area of `(a, b, c)`; positive for counter-clockwise order.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Euclidean distance from `x` to the closed segment `[a, b]`.
pub fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.norm2();
    if len2 == 0.0 {
        return x.dist(a);
    }
    let s = ((x - a).dot(d) / len2).clamp(0.0, 1.0);
    x.dist(a.lerp(b, s))
}

/// Direction of approach `p = (cos α, sin α)` on the open right half circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    alpha: f64,
    p: Point,
}

impl Direction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha.abs() >= FRAC_PI_2 {
            return Err(Error::invalid(alloc::format!("direction angle {alpha} must lie in (-pi/2, pi/2)")));
        }
        Ok(Direction { alpha, p: Point::new(libm::cos(alpha), libm::sin(alpha)) })
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn unit(&self) -> Point {
        self.p
    }

    /// The point `t·p`.
    pub fn at(&self, t: f64) -> Point {
        t * self.p
    }

    /// Distance along `p` from `start` to the circle of radius `radius` centred at the origin.
    pub fn exit_distance(&self, start: Point, radius: f64) -> f64 {
        // |start + s p|^2 = R^2 with s > 0
        let b = start.dot(self.p);
        let c = start.norm2() - radius * radius;
        -b + libm::sqrt(b * b - c)
    }
}

/// A point with its polar angle measured in `[-π/2, π/2]` for the right half-plane.
pub fn half_plane_polar(x: Point) -> (f64, f64) {
    (x.norm(), libm::atan2(x.y, x.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_rejects_vertical() {
        assert!(Direction::new(FRAC_PI_2).is_err());
        assert!(Direction::new(-FRAC_PI_2).is_err());
        assert!(Direction::new(f64::NAN).is_err());
        let d = Direction::new(0.3).unwrap();
        assert!((d.unit().norm() - 1.0).abs() < 1e-15);
        assert!(d.unit().x > 0.0);
    }

    #[test]
    fn exit_distance_hits_circle() {
        let d = Direction::new(0.4).unwrap();
        let a = d.at(0.1);
        let s = d.exit_distance(a, 1.0);
        assert!(((a + s * d.unit()).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn segment_distance_cases() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert_eq!(segment_distance(Point::new(0.5, 2.0), a, b), 2.0);
        assert_eq!(segment_distance(Point::new(-3.0, 4.0), a, b), 5.0);
    }
}
