use crate::geometry::{Contour, Point, Region};
use serde::{Deserialize, Serialize};

/// Parity colouring of a configuration of disjoint contours: the unbounded
/// component is white and the colour flips across every contour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Colouring {
    /// Number of contours strictly enclosing each contour.
    pub depths: Vec<usize>,
}

impl Colouring {
    pub fn new(contours: &[Contour]) -> Self {
        let depths = contours
            .iter()
            .enumerate()
            .map(|(i, c)| {
                contours.iter().enumerate().filter(|(j, o)| *j != i && o.contains_contour(c)).count()
            })
            .collect();
        Colouring { depths }
    }

    /// `+1` if the interior of contour `i` (just inside the curve) is black.
    pub fn inner_sign(&self, i: usize) -> f64 {
        if self.depths[i].is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_black(&self, contours: &[Contour], p: Point) -> bool {
        contours.iter().filter(|c| c.encloses(p)).count() % 2 == 1
    }
}

/// Black area minus white area of `u`, by inclusion-exclusion over nesting
/// depth: the black indicator is `sum_c (-1)^depth(c) 1[Int c]`.
pub fn magnetisation(contours: &[Contour], u: &Region) -> f64 {
    let col = Colouring::new(contours);
    magnetisation_with(contours, &col, u)
}

pub fn magnetisation_with(contours: &[Contour], col: &Colouring, u: &Region) -> f64 {
    let ub = u.bbox();
    let black: f64 = contours
        .iter()
        .enumerate()
        .filter(|(_, c)| c.bbox().overlaps(&ub))
        .map(|(i, c)| col.inner_sign(i) * u.overlap_area(c.vertices()))
        .sum();
    let area = u.area();
    (2.0 * black - area).clamp(-area, area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use std::f64::consts::PI;

    fn square(c: Point, s: f64) -> Contour {
        let h = s / 2.0;
        Contour::new(vec![
            Point::new(c.x - h, c.y - h),
            Point::new(c.x + h, c.y - h),
            Point::new(c.x + h, c.y + h),
            Point::new(c.x - h, c.y + h),
        ])
        .unwrap()
    }

    #[test]
    fn fixtures() {
        let r = (10.0 / PI).sqrt();
        let u = Region::Disk { center: Point::ORIGIN, radius: r };
        assert!((magnetisation(&[], &u) + 10.0).abs() < 1e-12);
        assert!((magnetisation(&[square(Point::ORIGIN, 1.0)], &u) + 8.0).abs() < 1e-9);
        let big = square(Point::ORIGIN, 10.0);
        assert!((magnetisation(std::slice::from_ref(&big), &u) - 10.0).abs() < 1e-9);
        // nested: white hole of area 1 inside black
        let m = magnetisation(&[big, square(Point::ORIGIN, 1.0)], &u);
        assert!((m - 8.0).abs() < 1e-9);
    }

    #[test]
    fn adding_a_contour_changes_by_twice_its_area() {
        let u = Region::Polygon {
            vertices: vec![Point::new(-5.0, -5.0), Point::new(5.0, -5.0), Point::new(5.0, 5.0), Point::new(-5.0, 5.0)],
        };
        let base = vec![square(Point::new(-2.0, 0.0), 3.0)];
        let m0 = magnetisation(&base, &u);
        let mut with = base.clone();
        with.push(square(Point::new(2.5, 2.5), 1.0));
        assert!((magnetisation(&with, &u) - m0 - 2.0).abs() < 1e-9);
        // inside the black square the sign flips
        let mut inner = base.clone();
        inner.push(square(Point::new(-2.0, 0.0), 1.0));
        assert!((magnetisation(&inner, &u) - m0 + 2.0).abs() < 1e-9);
        // partial overlap with U counts only the part inside
        let mut edge = base;
        edge.push(square(Point::new(5.0, 0.0), 2.0));
        assert!((magnetisation(&edge, &u) - m0 - 2.0 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_area() {
        let u = Region::Disk { center: Point::new(0.3, 0.0), radius: 1.0 };
        for k in 1..6 {
            let cs: Vec<Contour> = (0..k).map(|i| square(Point::ORIGIN, 0.4 * (i + 1) as f64)).collect();
            assert!(magnetisation(&cs, &u).abs() <= u.area() + 1e-12);
        }
    }
}
