use super::point::{Point, EPS_GEOM};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Threshold on `|sin(phi1 - phi2)|` below which two lines are treated as
/// near-parallel and never intersected.
pub const PARALLEL_TOL: f64 = 1e-9;

/// A straight line in `(phi, rho)` coordinates: `phi` in `[0, pi)`, and the
/// foot point `(rho sin phi, rho cos phi)` is the orthogonal projection of
/// the origin onto the line. The isometry-invariant line measure is
/// Lebesgue measure `dphi drho` in these coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub phi: f64,
    pub rho: f64,
}

impl Line {
    /// Normalises any angle into `[0, pi)` (flipping the sign of `rho` on
    /// half-turns).
    pub fn new(phi: f64, rho: f64) -> Self {
        let mut phi = phi.rem_euclid(2.0 * PI);
        let mut rho = rho;
        if phi >= PI {
            phi -= PI;
            rho = -rho;
        }
        if phi >= PI {
            phi = 0.0;
        }
        Line { phi, rho }
    }

    /// Unit normal `(sin phi, cos phi)`.
    #[inline]
    pub fn normal(&self) -> Point {
        Point::new(self.phi.sin(), self.phi.cos())
    }

    /// Unit direction `(cos phi, -sin phi)`.
    #[inline]
    pub fn direction(&self) -> Point {
        Point::new(self.phi.cos(), -self.phi.sin())
    }

    pub fn foot(&self) -> Point {
        self.normal() * self.rho
    }

    pub fn point_at(&self, s: f64) -> Point {
        self.foot() + self.direction() * s
    }

    /// Arc-length coordinate of the projection of `p` onto the line.
    pub fn coordinate(&self, p: Point) -> f64 {
        p.dot(self.direction())
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        p.dot(self.normal()) - self.rho
    }

    pub fn through(a: Point, b: Point) -> Result<Self> {
        let d = b - a;
        let n = d.norm();
        if n <= EPS_GEOM {
            return Err(Error::Degenerate("line through coincident points".into()));
        }
        let d = d * (1.0 / n);
        let phi = (-d.y).atan2(d.x);
        let line = Line::new(phi, 0.0);
        Ok(Line { rho: a.dot(line.normal()), ..line })
    }

    /// Line through `p` with direction angle `theta` (any orientation).
    pub fn through_point_with_angle(p: Point, theta: f64) -> Self {
        let line = Line::new(-theta, 0.0);
        Line { rho: p.dot(line.normal()), ..line }
    }

    /// `|sin|` of the angle between the two lines.
    pub fn sin_angle(&self, o: &Line) -> f64 {
        (self.phi - o.phi).sin().abs()
    }

    /// Intersection point; near-parallel pairs are reported as an error.
    pub fn intersect(&self, o: &Line) -> Result<Point> {
        let n1 = self.normal();
        let n2 = o.normal();
        let det = n1.cross(n2);
        if det.abs() < PARALLEL_TOL {
            return Err(Error::NearParallel(det.abs()));
        }
        Ok(Point::new(
            (self.rho * n2.y - o.rho * n1.y) / det,
            (n1.x * o.rho - n2.x * self.rho) / det,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn foot_point_orthogonal() {
        let l = Line::new(0.7, 2.5);
        let f = l.foot();
        assert!(f.dot(l.direction()).abs() < 1e-12);
        assert!((l.signed_distance(f)).abs() < 1e-12);
    }

    #[test]
    fn parallel_flagged() {
        let a = Line::new(0.3, 1.0);
        let b = Line::new(0.3 + 1e-12, -1.0);
        assert!(matches!(a.intersect(&b), Err(Error::NearParallel(_))));
    }

    proptest! {
        #[test]
        fn round_trip(phi in 0.0..PI, rho in -50.0..50.0f64, s0 in -10.0..10.0f64, ds in 0.1..10.0f64) {
            let l = Line::new(phi, rho);
            let a = l.point_at(s0);
            let b = l.point_at(s0 + ds);
            let r = Line::through(a, b).unwrap();
            // phi near 0 and near pi describe the same line
            let dphi = (r.phi - l.phi).abs();
            if dphi > PI / 2.0 {
                prop_assert!((PI - dphi) < 1e-9);
                prop_assert!((r.rho + l.rho).abs() < 1e-7);
            } else {
                prop_assert!(dphi < 1e-9);
                prop_assert!((r.rho - l.rho).abs() < 1e-7);
            }
        }

        #[test]
        fn intersection_on_both(p1 in 0.0..PI, r1 in -5.0..5.0f64, p2 in 0.0..PI, r2 in -5.0..5.0f64) {
            let a = Line::new(p1, r1);
            let b = Line::new(p2, r2);
            prop_assume!(a.sin_angle(&b) > 1e-3);
            let x = a.intersect(&b).unwrap();
            prop_assert!(a.signed_distance(x).abs() < 1e-6);
            prop_assert!(b.signed_distance(x).abs() < 1e-6);
        }
    }
}
