use super::line::Line;
use super::point::{point_segment_distance, segments_intersect, BBox, Point, EPS_GEOM};
use crate::error::{invalid, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Simulation domain: a disk or a convex polygon (counter-clockwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Window {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
}

impl Window {
    pub fn disk(radius: f64) -> Result<Self> {
        Window::disk_at(Point::ORIGIN, radius)
    }

    pub fn disk_at(center: Point, radius: f64) -> Result<Self> {
        let w = Window::Disk { center, radius };
        w.validate()?;
        Ok(w)
    }

    /// Convex polygon; vertices are re-oriented counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self> {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let w = Window::Polygon { vertices };
        w.validate()?;
        Ok(w)
    }

    pub fn square(center: Point, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Window::polygon(vec![
            Point::new(center.x - h, center.y - h),
            Point::new(center.x + h, center.y - h),
            Point::new(center.x + h, center.y + h),
            Point::new(center.x - h, center.y + h),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Window::Disk { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                    return Err(Error::Degenerate(format!("disk radius must be positive, got {radius}")));
                }
            }
            Window::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Degenerate("polygon window needs >= 3 vertices".into()));
                }
                if signed_area(vertices) <= EPS_GEOM {
                    return Err(Error::Degenerate("polygon window has zero area".into()));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if (b - a).cross(c - b) < -EPS_GEOM {
                        return invalid("polygon window is not convex");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        match self {
            Window::Disk { radius, .. } => PI * radius * radius,
            Window::Polygon { vertices } => signed_area(vertices),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Window::Disk { radius, .. } => 2.0 * PI * radius,
            Window::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| vertices[i].dist(vertices[(i + 1) % n])).sum()
            }
        }
    }

    pub fn center(&self) -> Point {
        match self {
            Window::Disk { center, .. } => *center,
            Window::Polygon { vertices } => polygon_centroid(vertices),
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Window::Disk { center, radius } => BBox {
                min: Point::new(center.x - radius, center.y - radius),
                max: Point::new(center.x + radius, center.y + radius),
            },
            Window::Polygon { vertices } => BBox::from_points(vertices),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Window::Disk { radius, .. } => 2.0 * radius,
            Window::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(a.dist(*b));
                    }
                }
                d
            }
        }
    }

    /// Distance from `p` to the boundary, positive inside, negative outside.
    pub fn clearance(&self, p: Point) -> f64 {
        match self {
            Window::Disk { center, radius } => radius - p.dist(*center),
            Window::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = true;
                let mut dmin = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (b - a).cross(p - a) < 0.0 {
                        inside = false;
                    }
                    dmin = dmin.min(point_segment_distance(p, a, b));
                }
                if inside {
                    dmin
                } else {
                    -dmin
                }
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.clearance(p) >= -EPS_GEOM
    }

    /// Strictly inside with clearance larger than `EPS_GEOM`.
    pub fn contains_strictly(&self, p: Point) -> bool {
        self.clearance(p) > EPS_GEOM
    }

    /// Range of `n(phi) . x` over the window (support function pair).
    pub fn support(&self, phi: f64) -> (f64, f64) {
        let n = Point::new(phi.sin(), phi.cos());
        match self {
            Window::Disk { center, radius } => {
                let c = n.dot(*center);
                (c - radius, c + radius)
            }
            Window::Polygon { vertices } => vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let s = n.dot(*v);
                (lo.min(s), hi.max(s))
            }),
        }
    }

    /// Interval of arc-length coordinates (along `line.direction()`) of the
    /// chord `line ∩ window`, if non-degenerate.
    pub fn chord(&self, line: &Line) -> Option<(f64, f64)> {
        let d = line.direction();
        let f = line.foot();
        match self {
            Window::Disk { center, radius } => {
                let g = f - *center;
                let b = g.dot(d);
                let c = g.norm_sq() - radius * radius;
                let disc = b * b - c;
                if disc <= 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                Some((-b - s, -b + s))
            }
            Window::Polygon { vertices } => {
                let n = vertices.len();
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..n {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    // inside: e x (p - a) >= 0 with p = f + d s
                    let c0 = e.cross(f - a);
                    let c1 = e.cross(d);
                    if c1.abs() < 1e-15 {
                        if c0 < 0.0 {
                            return None;
                        }
                        continue;
                    }
                    let s = -c0 / c1;
                    if c1 > 0.0 {
                        lo = lo.max(s);
                    } else {
                        hi = hi.min(s);
                    }
                }
                if hi - lo > 0.0 {
                    Some((lo, hi))
                } else {
                    None
                }
            }
        }
    }

    /// Distance travelled from `p` (inside) along the unit vector `d` before
    /// leaving the window.
    pub fn exit_distance(&self, p: Point, d: Point) -> f64 {
        match self {
            Window::Disk { center, radius } => {
                let g = p - *center;
                let b = g.dot(d);
                let c = g.norm_sq() - radius * radius;
                let disc = (b * b - c).max(0.0);
                (-b + disc.sqrt()).max(0.0)
            }
            Window::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    let c1 = e.cross(d);
                    if c1 < 0.0 {
                        best = best.min((-e.cross(p - a) / c1).max(0.0));
                    }
                }
                best
            }
        }
    }

    /// Chord length of a line inside the window (0 if it misses).
    pub fn chord_length(&self, line: &Line) -> f64 {
        self.chord(line).map_or(0.0, |(a, b)| b - a)
    }

    /// Line-measure mass of the lines hitting the window: the perimeter of a
    /// convex body (Cauchy).
    pub fn line_measure(&self) -> f64 {
        self.perimeter()
    }

    /// One line drawn from the line measure restricted to hitters of the
    /// window, normalised.
    pub fn sample_hitting_line<R: Rng + ?Sized>(&self, rng: &mut R) -> Line {
        match self {
            Window::Disk { center, radius } => {
                let phi = rng.random::<f64>() * PI;
                let n = Point::new(phi.sin(), phi.cos());
                let rho = n.dot(*center) + radius * (2.0 * rng.random::<f64>() - 1.0);
                Line::new(phi, rho)
            }
            Window::Polygon { .. } => {
                let dmax = self.diameter();
                loop {
                    let phi = rng.random::<f64>() * PI;
                    let (lo, hi) = self.support(phi);
                    if rng.random::<f64>() * dmax <= hi - lo {
                        let rho = lo + (hi - lo) * rng.random::<f64>();
                        return Line::new(phi, rho);
                    }
                }
            }
        }
    }

    pub fn to_region(&self) -> Region {
        match self {
            Window::Disk { center, radius } => Region::Disk { center: *center, radius: *radius },
            Window::Polygon { vertices } => Region::Polygon { vertices: vertices.clone() },
        }
    }

    /// Boundary as a closed polyline (disks use `segments` chords).
    pub fn boundary_polyline(&self, segments: usize) -> Vec<Point> {
        match self {
            Window::Disk { center, radius } => (0..segments)
                .map(|k| *center + Point::from_angle(2.0 * PI * k as f64 / segments as f64) * *radius)
                .collect(),
            Window::Polygon { vertices } => vertices.clone(),
        }
    }
}

/// Bounded planar region used for forbidden sets, cut-off sets and
/// area-field sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
    Annulus { center: Point, inner: f64, outer: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Disk { center, radius } => Window::Disk { center: *center, radius: *radius }.validate(),
            Region::Polygon { vertices } => {
                let mut v = vertices.clone();
                if signed_area(&v) < 0.0 {
                    v.reverse();
                }
                Window::Polygon { vertices: v }.validate()
            }
            Region::Annulus { inner, outer, .. } => {
                if !(*inner >= 0.0 && outer > inner && outer.is_finite()) {
                    return invalid(format!("annulus needs 0 <= inner < outer, got {inner}, {outer}"));
                }
                Ok(())
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Disk { radius, .. } => PI * radius * radius,
            Region::Polygon { vertices } => signed_area(vertices).abs(),
            Region::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Disk { center, radius } => p.dist(*center) <= radius + EPS_GEOM,
            Region::Polygon { vertices } => point_in_polygon(p, vertices),
            Region::Annulus { center, inner, outer } => {
                let r = p.dist(*center);
                r >= inner - EPS_GEOM && r <= outer + EPS_GEOM
            }
        }
    }

    /// True if the closed segment `[a, b]` meets the region.
    pub fn segment_hits(&self, a: Point, b: Point) -> bool {
        match self {
            Region::Disk { center, radius } => point_segment_distance(*center, a, b) <= radius + EPS_GEOM,
            Region::Polygon { vertices } => {
                if point_in_polygon(a, vertices) || point_in_polygon(b, vertices) {
                    return true;
                }
                let n = vertices.len();
                (0..n).any(|i| segments_intersect(a, b, vertices[i], vertices[(i + 1) % n]))
            }
            Region::Annulus { center, inner, outer } => {
                point_segment_distance(*center, a, b) <= outer + EPS_GEOM
                    && (a.dist(*center) >= inner - EPS_GEOM || b.dist(*center) >= inner - EPS_GEOM)
            }
        }
    }

    /// True if the closed polyline/polygon through `pts` meets the region.
    pub fn curve_hits(&self, pts: &[Point], closed: bool) -> bool {
        let n = pts.len();
        if n == 1 {
            return self.contains(pts[0]);
        }
        let m = if closed { n } else { n - 1 };
        (0..m).any(|i| self.segment_hits(pts[i], pts[(i + 1) % n]))
    }

    /// Area of `polygon ∩ region` for a simple polygon.
    pub fn overlap_area(&self, polygon: &[Point]) -> f64 {
        match self {
            Region::Disk { center, radius } => polygon_disk_overlap(polygon, *center, *radius),
            Region::Polygon { vertices } => {
                let mut clip = vertices.clone();
                if signed_area(&clip) < 0.0 {
                    clip.reverse();
                }
                signed_area(&clip_polygon_convex(polygon, &clip)).abs()
            }
            Region::Annulus { center, inner, outer } => {
                polygon_disk_overlap(polygon, *center, *outer) - polygon_disk_overlap(polygon, *center, *inner)
            }
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Region::Disk { center, radius } | Region::Annulus { center, outer: radius, .. } => BBox {
                min: Point::new(center.x - radius, center.y - radius),
                max: Point::new(center.x + radius, center.y + radius),
            },
            Region::Polygon { vertices } => BBox::from_points(vertices),
        }
    }

    /// Conservative containment test `other ⊆ self`.
    pub fn contains_region(&self, other: &Region) -> bool {
        match other {
            Region::Disk { center, radius } | Region::Annulus { center, outer: radius, .. } => {
                self.contains_disk(*center, *radius)
            }
            Region::Polygon { vertices } => match self {
                Region::Annulus { center, inner, .. } => {
                    vertices.iter().all(|v| self.contains(*v))
                        && !point_in_polygon(*center, vertices)
                        && polygon_boundary_distance(*center, vertices) >= *inner - EPS_GEOM
                }
                _ => vertices.iter().all(|v| self.contains(*v)),
            },
        }
    }

    fn contains_disk(&self, c: Point, r: f64) -> bool {
        match self {
            Region::Disk { center, radius } => c.dist(*center) + r <= radius + EPS_GEOM,
            Region::Polygon { vertices } => {
                point_in_polygon(c, vertices) && polygon_boundary_distance(c, vertices) >= r - EPS_GEOM
            }
            Region::Annulus { center, inner, outer } => {
                let d = c.dist(*center);
                d + r <= outer + EPS_GEOM && d - r >= inner - EPS_GEOM
            }
        }
    }
}

pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    s / 2.0
}

pub fn polygon_centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let a = signed_area(pts);
    if a.abs() < 1e-300 {
        let s = pts.iter().fold(Point::ORIGIN, |acc, p| acc + *p);
        return s * (1.0 / n as f64);
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

/// Even-odd point-in-polygon test (boundary counts as inside).
pub fn point_in_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = pts[i];
        let b = pts[j];
        if point_segment_distance(p, a, b) <= EPS_GEOM {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn polygon_boundary_distance(p: Point, pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| point_segment_distance(p, pts[i], pts[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

/// Sutherland–Hodgman clip of a simple polygon against a convex,
/// counter-clockwise polygon.
pub fn clip_polygon_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let e = b - a;
        let inside = |p: Point| e.cross(p - a) >= 0.0;
        let input = std::mem::take(&mut out);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let (ci, pi) = (inside(cur), inside(prev));
            if ci != pi {
                let d = cur - prev;
                let t = e.cross(a - prev) / e.cross(d);
                let t = if t.is_finite() { t } else { 0.0 };
                out.push(prev + d * t.clamp(0.0, 1.0));
            }
            if ci {
                out.push(cur);
            }
        }
    }
    out
}

/// Area of `polygon ∩ disk(center, r)` for a simple polygon (any
/// orientation), via signed triangle–disk areas.
pub fn polygon_disk_overlap(polygon: &[Point], center: Point, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let n = polygon.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = polygon[i] - center;
        let b = polygon[(i + 1) % n] - center;
        s += triangle_disk_signed(a, b, r);
    }
    s.abs()
}

fn triangle_disk_signed(a: Point, b: Point, r: f64) -> f64 {
    let mut pts = vec![a];
    for t in super::point::segment_circle_params(a, b, Point::ORIGIN, r) {
        if t > 0.0 && t < 1.0 {
            pts.push(a.lerp(b, t));
        }
    }
    pts.push(b);
    let mut s = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = p.lerp(q, 0.5);
        if mid.norm() <= r {
            s += p.cross(q) / 2.0;
        } else {
            s += r * r * p.cross(q).atan2(p.dot(q)) / 2.0;
        }
    }
    s
}
