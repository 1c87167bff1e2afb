use super::point::{point_segment_distance, segment_segment_distance, segments_intersect, BBox, Point, EPS_GEOM};
use super::window::{point_in_polygon, polygon_centroid, signed_area, Region, Window};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Closed simple polygon with at least three vertices and no two adjacent
/// edges co-linear. Length and bounding box are cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Contour {
    vertices: Vec<Point>,
    length: f64,
    bbox: BBox,
}

impl TryFrom<Vec<Point>> for Contour {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        Contour::new(v)
    }
}

impl From<Contour> for Vec<Point> {
    fn from(c: Contour) -> Self {
        c.vertices
    }
}

impl Contour {
    /// Validating constructor.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let c = Contour::from_vertices_unchecked(vertices);
        c.validate()?;
        Ok(c)
    }

    /// Skips the O(n^2) simplicity check; callers guarantee the invariants.
    pub fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let length = (0..n).map(|i| vertices[i].dist(vertices[(i + 1) % n])).sum();
        let bbox = BBox::from_points(&vertices);
        Contour { vertices, length, bbox }
    }

    pub fn regular(center: Point, radius: f64, n: usize, phase: f64) -> Result<Self> {
        let v = (0..n)
            .map(|k| center + Point::from_angle(phase + 2.0 * std::f64::consts::PI * k as f64 / n as f64) * radius)
            .collect();
        Contour::new(v)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return Err(Error::Degenerate(format!("contour needs >= 3 vertices, got {n}")));
        }
        if v.iter().any(|p| !p.is_finite()) {
            return Err(Error::Degenerate("non-finite vertex".into()));
        }
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            let c = v[(i + 2) % n];
            if a.dist(b) <= EPS_GEOM {
                return Err(Error::Degenerate(format!("zero-length edge at vertex {i}")));
            }
            let e1 = b - a;
            let e2 = c - b;
            if e1.cross(e2).abs() <= EPS_GEOM * e1.norm() * e2.norm() {
                return Err(Error::Degenerate(format!("co-linear adjacent edges at vertex {}", (i + 1) % n)));
            }
        }
        if !self.is_simple() {
            return Err(Error::Degenerate("self-intersecting contour".into()));
        }
        if self.area() <= 0.0 {
            return Err(Error::Degenerate("zero-area contour".into()));
        }
        Ok(())
    }

    fn is_simple(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        for i in 0..n {
            let (a0, a1) = (v[i], v[(i + 1) % n]);
            for j in i + 1..n {
                let (b0, b1) = (v[j], v[(j + 1) % n]);
                if j == i + 1 || (i == 0 && j == n - 1) {
                    // adjacent: must only share the common vertex
                    let (shared, other_a, other_b) = if j == i + 1 { (a1, a0, b1) } else { (a0, a1, b0) };
                    let _ = shared;
                    if point_segment_distance(other_b, a0, a1) <= EPS_GEOM
                        || point_segment_distance(other_a, b0, b1) <= EPS_GEOM
                    {
                        return false;
                    }
                    continue;
                }
                if segments_intersect(a0, a1, b0, b1) {
                    return false;
                }
            }
        }
        true
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_clockwise(&self) -> bool {
        self.signed_area() < 0.0
    }

    /// Maximum vertex-to-vertex distance (the diameter of a polygon is
    /// attained at vertices).
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d2: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d2 = d2.max(v[i].dist_sq(v[j]));
            }
        }
        d2.sqrt()
    }

    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.vertices)
    }

    /// Point in the closed region bounded by the contour.
    pub fn encloses(&self, p: Point) -> bool {
        self.bbox.contains(p) && point_in_polygon(p, &self.vertices)
    }

    pub fn distance_to_point(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to(&self, o: &Contour) -> f64 {
        let mut d = f64::INFINITY;
        for (a0, a1) in self.edges() {
            for (b0, b1) in o.edges() {
                d = d.min(segment_segment_distance(a0, a1, b0, b1));
            }
        }
        d
    }

    /// Curves share a point.
    pub fn intersects(&self, o: &Contour) -> bool {
        if !self.bbox.inflate(EPS_GEOM).overlaps(&o.bbox) {
            return false;
        }
        for (a0, a1) in self.edges() {
            let eb = BBox::from_points(&[a0, a1]).inflate(EPS_GEOM);
            if !eb.overlaps(&o.bbox) {
                continue;
            }
            for (b0, b1) in o.edges() {
                if segments_intersect(a0, a1, b0, b1) {
                    return true;
                }
            }
        }
        false
    }

    /// Enclosed open regions overlap: curves meet or one contour lies inside
    /// the other.
    pub fn interiors_overlap(&self, o: &Contour) -> bool {
        if !self.bbox.overlaps(&o.bbox) {
            return false;
        }
        self.intersects(o) || self.encloses(o.vertices[0]) || o.encloses(self.vertices[0])
    }

    /// `o` lies inside `self` (assuming the curves are disjoint).
    pub fn contains_contour(&self, o: &Contour) -> bool {
        self.bbox.overlaps(&o.bbox) && self.area() > o.area() && self.encloses(o.vertices[0])
    }

    pub fn hits_region(&self, r: &Region) -> bool {
        if !self.bbox.inflate(EPS_GEOM).overlaps(&r.bbox()) {
            return false;
        }
        r.curve_hits(&self.vertices, true)
    }

    pub fn translated(&self, t: Point) -> Contour {
        Contour::from_vertices_unchecked(self.vertices.iter().map(|p| *p + t).collect())
    }

    pub fn rotated_about(&self, c: Point, angle: f64) -> Contour {
        Contour::from_vertices_unchecked(self.vertices.iter().map(|p| p.rotate_about(c, angle)).collect())
    }

    pub fn reversed(&self) -> Contour {
        let mut v = self.vertices.clone();
        v.reverse();
        Contour::from_vertices_unchecked(v)
    }

    /// Points along the closed curve with spacing at most `h` (vertices
    /// included).
    pub fn densify(&self, h: f64) -> Vec<Point> {
        densify_chain(&self.vertices, true, h)
    }
}

/// Open polygonal chain (e.g. a boundary-to-boundary path of the
/// free-boundary Arak process).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }
}

pub fn densify_chain(pts: &[Point], closed: bool, h: f64) -> Vec<Point> {
    let n = pts.len();
    let m = if closed { n } else { n.saturating_sub(1) };
    let mut out = Vec::new();
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let k = ((a.dist(b) / h).ceil() as usize).max(1);
        for j in 0..k {
            out.push(a.lerp(b, j as f64 / k as f64));
        }
    }
    if !closed {
        if let Some(l) = pts.last() {
            out.push(*l);
        }
    }
    out
}

/// Disjoint (possibly nested) contours.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolygonalConfiguration {
    pub contours: Vec<Contour>,
}

impl PolygonalConfiguration {
    pub fn new(contours: Vec<Contour>) -> Self {
        PolygonalConfiguration { contours }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    pub fn len(&self) -> usize {
        self.contours.len()
    }

    pub fn total_length(&self) -> f64 {
        self.contours.iter().map(Contour::length).sum()
    }

    /// Empty-boundary admissibility: every contour strictly inside the window
    /// with clearance `EPS_GEOM`, simple, pairwise disjoint, no two edges
    /// co-linear.
    pub fn is_admissible(&self, window: &Window) -> bool {
        admissibility_violation(&self.contours, window).is_none()
    }
}

/// First violated admissibility condition, if any, as a human-readable tag.
pub fn admissibility_violation(contours: &[Contour], window: &Window) -> Option<String> {
    for (k, c) in contours.iter().enumerate() {
        if c.validate().is_err() {
            return Some(format!("contour {k} is not a simple polygon"));
        }
        if c.vertices().iter().any(|p| !window.contains_strictly(*p)) {
            return Some(format!("contour {k} touches or leaves the window"));
        }
    }
    let chains: Vec<(&[Point], bool)> = contours.iter().map(|c| (c.vertices(), true)).collect();
    if let Some(msg) = chain_crossing(&chains) {
        return Some(msg);
    }
    if colinear_edge_pair(&chains) {
        return Some("two edges are co-linear".into());
    }
    None
}

/// Edge soup crossing test across and within chains: non-adjacent edges
/// must be disjoint; adjacent edges of one chain share only their vertex.
pub fn chain_crossing(chains: &[(&[Point], bool)]) -> Option<String> {
    struct Edge {
        chain: usize,
        idx: usize,
        a: Point,
        b: Point,
    }
    let mut edges = Vec::new();
    let mut total_len = 0.0;
    for (ci, (pts, closed)) in chains.iter().enumerate() {
        let n = pts.len();
        let m = if *closed { n } else { n.saturating_sub(1) };
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            total_len += a.dist(b);
            edges.push(Edge { chain: ci, idx: i, a, b });
        }
    }
    if edges.len() < 2 {
        return None;
    }
    let cell = (total_len / edges.len() as f64).max(1e-6) * 2.0;
    let key = |p: Point| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        let bb = BBox::from_points(&[e.a, e.b]).inflate(EPS_GEOM);
        let (x0, y0) = key(bb.min);
        let (x1, y1) = key(bb.max);
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                grid.entry((gx, gy)).or_default().push(k);
            }
        }
    }
    let adjacent = |e: &Edge, f: &Edge| -> bool {
        if e.chain != f.chain {
            return false;
        }
        let (pts, closed) = chains[e.chain];
        let n = pts.len();
        let m = if closed { n } else { n - 1 };
        let (i, j) = (e.idx.min(f.idx), e.idx.max(f.idx));
        j == i + 1 || (closed && i == 0 && j == m - 1 && m > 2)
    };
    for bucket in grid.values() {
        for (p, &i) in bucket.iter().enumerate() {
            for &j in &bucket[p + 1..] {
                let (e, f) = (&edges[i], &edges[j]);
                if adjacent(e, f) {
                    // the shared vertex is fine; anything more is an overlap
                    let (other_e, other_f) = if e.b == f.a {
                        (e.a, f.b)
                    } else if f.b == e.a {
                        (e.b, f.a)
                    } else if e.a == f.a {
                        (e.b, f.b)
                    } else {
                        (e.a, f.a)
                    };
                    if point_segment_distance(other_f, e.a, e.b) <= EPS_GEOM
                        || point_segment_distance(other_e, f.a, f.b) <= EPS_GEOM
                    {
                        return Some(format!("chain {} folds back on itself at edge {}", e.chain, e.idx));
                    }
                    continue;
                }
                if segments_intersect(e.a, e.b, f.a, f.b) {
                    return Some(format!(
                        "edge {} of chain {} meets edge {} of chain {}",
                        e.idx, e.chain, f.idx, f.chain
                    ));
                }
            }
        }
    }
    None
}

/// True if two distinct edges lie on a common line (within `EPS_GEOM`).
pub fn colinear_edge_pair(chains: &[(&[Point], bool)]) -> bool {
    let mut lines = Vec::new();
    for (pts, closed) in chains {
        let n = pts.len();
        let m = if *closed { n } else { n.saturating_sub(1) };
        for i in 0..m {
            if let Ok(l) = super::line::Line::through(pts[i], pts[(i + 1) % n]) {
                lines.push(l);
            }
        }
    }
    lines.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    let k = lines.len();
    for i in 0..k {
        for j in i + 1..k {
            if lines[j].phi - lines[i].phi > 1e-9 {
                break;
            }
            if (lines[j].rho - lines[i].rho).abs() <= EPS_GEOM.max(1e-9 * lines[i].rho.abs()) {
                return true;
            }
        }
        // wrap-around: phi near pi is the same direction as phi near 0
        if std::f64::consts::PI - lines[i].phi < 1e-9 {
            for l in lines.iter().take_while(|l| l.phi < 1e-9) {
                if (l.rho + lines[i].rho).abs() <= EPS_GEOM {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tri(o: Point, s: f64) -> Contour {
        Contour::new(vec![o, o + Point::new(s, 0.0), o + Point::new(0.3 * s, 0.8 * s)]).unwrap()
    }

    #[test]
    fn regular_ngon_metrics() {
        for n in [3usize, 4, 7, 64, 513] {
            let r = 2.5;
            let c = Contour::regular(Point::new(1.0, -1.0), r, n, 0.3).unwrap();
            let nf = n as f64;
            let len = 2.0 * nf * r * (PI / nf).sin();
            let area = 0.5 * nf * r * r * (2.0 * PI / nf).sin();
            let diam = if n % 2 == 0 { 2.0 * r } else { 2.0 * r * (PI * (nf - 1.0) / (2.0 * nf)).sin() };
            assert!((c.length() - len).abs() <= 1e-9 * len);
            assert!((c.area() - area).abs() <= 1e-9 * area);
            assert!((c.diameter() - diam).abs() <= 1e-9 * diam, "n={n}");
        }
    }

    #[test]
    fn invalid_contours() {
        assert!(Contour::new(vec![Point::ORIGIN, Point::new(1.0, 0.0)]).is_err());
        // bow-tie
        let bow = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(Contour::new(bow).is_err());
        // co-linear adjacent edges
        let col = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 1.0)];
        assert!(Contour::new(col).is_err());
    }

    #[test]
    fn admissibility_cases() {
        let w = Window::disk(10.0).unwrap();
        assert!(PolygonalConfiguration::empty().is_admissible(&w));
        let t = tri(Point::new(0.0, 0.0), 1.0);
        assert!(PolygonalConfiguration::new(vec![t.clone()]).is_admissible(&w));
        // shares a vertex with t
        let u = Contour::new(vec![Point::new(1.0, 0.0), Point::new(2.0, -0.5), Point::new(2.0, 0.7)]).unwrap();
        assert!(!PolygonalConfiguration::new(vec![t.clone(), u]).is_admissible(&w));
        // leaves the window
        assert!(!PolygonalConfiguration::new(vec![tri(Point::new(9.5, 0.0), 1.0)]).is_admissible(&w));
        // nested disjoint is fine
        let big = Contour::regular(Point::new(0.3, 0.3), 3.0, 8, 0.1).unwrap();
        assert!(PolygonalConfiguration::new(vec![big, t.clone()]).is_admissible(&w));
        // co-linear edges on distinct contours
        let a = Contour::new(vec![Point::new(3.0, 0.0), Point::new(4.0, 0.0), Point::new(3.5, 1.0)]).unwrap();
        let b = Contour::new(vec![Point::new(5.0, 0.0), Point::new(6.0, 0.0), Point::new(5.5, -1.0)]).unwrap();
        assert!(!PolygonalConfiguration::new(vec![a, b]).is_admissible(&w));
    }

    #[test]
    fn interiors() {
        let big = Contour::regular(Point::ORIGIN, 3.0, 8, 0.1).unwrap();
        let small = tri(Point::new(0.0, 0.0), 0.5);
        assert!(!big.intersects(&small));
        assert!(big.interiors_overlap(&small));
        assert!(big.contains_contour(&small));
        assert!(!small.contains_contour(&big));
    }

    #[test]
    fn serde_round_trip_validates() {
        let t = tri(Point::new(0.0, 0.0), 1.0);
        let s = serde_json::to_string(&t).unwrap();
        let back: Contour = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = "[[0.0,0.0],[1.0,0.0]]";
        assert!(serde_json::from_str::<Contour>(bad).is_err());
    }
}
