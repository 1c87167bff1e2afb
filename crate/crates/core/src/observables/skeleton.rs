//! Coarse lattice skeletons of families of large contours.
//!
//! A skeleton is a list of lattice segments `[I_i, E_i]` of length about
//! `alpha`, each shadowing a sub-path of one contour (its witness), with the
//! witnessed sub-paths kept `delta` apart. The extractor is the greedy
//! construction; [`verify_skeleton`] checks the defining properties from
//! scratch.

use crate::error::{invalid, Error, Result};
use crate::geometry::{point_segment_distance, segment_circle_params, segment_segment_distance, Contour, Point};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub fn nearest(p: Point) -> Self {
        LatticePoint { x: p.x.round() as i64, y: p.y.round() as i64 }
    }

    pub fn point(self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }
}

/// Skeleton segment with its witness: arc positions `from`, `to` along the
/// clockwise traversal of contour `contour` starting at its first vertex
/// (`to` may exceed the contour length, wrapping once).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSegment {
    pub start: LatticePoint,
    pub end: LatticePoint,
    pub contour: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub alpha: f64,
    pub delta: f64,
    pub radius: f64,
    pub segments: Vec<SkeletonSegment>,
}

impl Skeleton {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.start.point().dist(s.end.point())).sum()
    }

    pub fn n_vertices(&self) -> usize {
        2 * self.segments.len()
    }
}

/// Vertices of `c` in clockwise order, starting at its first vertex.
pub fn clockwise_vertices(c: &Contour) -> Vec<Point> {
    let v = c.vertices();
    if c.is_clockwise() {
        v.to_vec()
    } else {
        std::iter::once(v[0]).chain(v[1..].iter().rev().cloned()).collect()
    }
}

struct Traversal {
    pts: Vec<Point>,
    cum: Vec<f64>,
    total: f64,
}

impl Traversal {
    fn new(c: &Contour) -> Self {
        let pts = clockwise_vertices(c);
        let n = pts.len();
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            cum[i + 1] = cum[i] + pts[i].dist(pts[(i + 1) % n]);
        }
        let total = cum[n];
        Traversal { pts, cum, total }
    }

    fn edge_of(&self, s: f64) -> usize {
        let s = s.rem_euclid(self.total);
        match self.cum.binary_search_by(|x| x.total_cmp(&s)) {
            Ok(i) => i.min(self.pts.len() - 1),
            Err(i) => i - 1,
        }
    }

    fn at(&self, s: f64) -> Point {
        let n = self.pts.len();
        let i = self.edge_of(s);
        let s = s.rem_euclid(self.total);
        let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
        let l = self.cum[i + 1] - self.cum[i];
        a.lerp(b, ((s - self.cum[i]) / l).clamp(0.0, 1.0))
    }

    /// First arc position after `s` (within one turn) at Euclidean distance
    /// `r` from the point at `s`.
    fn first_at_distance(&self, s: f64, r: f64) -> Option<f64> {
        let n = self.pts.len();
        let x = self.at(s);
        let i0 = self.edge_of(s);
        let base = s - s.rem_euclid(self.total);
        for k in 0..=n {
            let i = (i0 + k) % n;
            let wrap = base + ((i0 + k) / n) as f64 * self.total;
            let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
            let l = self.cum[i + 1] - self.cum[i];
            let t_min = if k == 0 { ((s - base - self.cum[i]) / l).max(0.0) } else { 0.0 };
            let hit = segment_circle_params(a, b, x, r).into_iter().filter(|&t| t > t_min).fold(f64::INFINITY, f64::min);
            if hit.is_finite() {
                let pos = wrap + self.cum[i] + hit * l;
                return if pos - s <= self.total { Some(pos) } else { None };
            }
        }
        None
    }

    /// Polyline of the sub-path between arc positions `from < to`.
    fn subpath(&self, from: f64, to: f64) -> Vec<Point> {
        let n = self.pts.len();
        let mut out = vec![self.at(from)];
        let base = from - from.rem_euclid(self.total);
        let mut i = self.edge_of(from);
        let mut turn = base;
        loop {
            let next_pos = turn + self.cum[i + 1];
            if next_pos >= to {
                break;
            }
            out.push(self.pts[(i + 1) % n]);
            i += 1;
            if i == n {
                i = 0;
                turn += self.total;
            }
        }
        out.push(self.at(to));
        out
    }
}

fn polyline_point_distance(p: Point, pl: &[Point]) -> f64 {
    if pl.len() == 1 {
        return p.dist(pl[0]);
    }
    pl.windows(2).map(|w| point_segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

/// Greedy skeleton of `gamma` inside the disk of radius `l` about the
/// origin. Candidate initial points are the vertices together with a grid
/// of arc positions with spacing at most `min(delta / 4, alpha / 32)`; the
/// separation test is tightened by the largest station gap so the exact
/// separation holds. Vertices matter for contours of diameter barely above
/// `alpha`, where the admissible starts form a short arc at a vertex.
pub fn extract_skeleton(gamma: &[Contour], alpha: f64, delta: f64, l: f64) -> Result<Skeleton> {
    if !(alpha >= 4.0 * delta && delta > 0.0) {
        return invalid(format!("need alpha >= 4 delta > 0, got alpha = {alpha}, delta = {delta}"));
    }
    if let Some(i) = gamma.iter().position(|c| c.diameter() <= alpha) {
        return Err(Error::InvalidArgument(format!("contour {i} is not alpha-large")));
    }
    let trav: Vec<Traversal> = gamma.iter().map(Traversal::new).collect();
    struct Station {
        pos: f64,
        p: Point,
        end: Option<f64>,
        span: usize,
    }
    let h0 = (delta / 4.0).min(alpha / 32.0);
    let mut stations: Vec<Vec<Station>> = Vec::new();
    let mut steps: Vec<f64> = Vec::new();
    for t in &trav {
        let m = (t.total / h0).ceil() as usize;
        let h = t.total / m as f64;
        let mut ps: Vec<f64> = (0..m).map(|k| k as f64 * h).chain(t.cum[..t.pts.len()].iter().cloned()).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup_by(|a, b| *a - *b < 1e-12);
        let m = ps.len();
        let gap = (0..m).map(|k| if k + 1 < m { ps[k + 1] - ps[k] } else { t.total - ps[k] }).fold(0.0, f64::max);
        let after = |e: f64| ps.partition_point(|&x| x <= e);
        stations.push(
            ps.iter()
                .enumerate()
                .map(|(k, &pos)| {
                    let end = t.first_at_distance(pos, alpha);
                    let span = end.map_or(0, |e| {
                        let j = if e < t.total { after(e) } else { m + after(e - t.total) };
                        j - k
                    });
                    Station { pos, p: t.at(pos), end, span }
                })
                .collect(),
        );
        steps.push(gap);
    }
    let mut dist: Vec<Vec<f64>> = stations.iter().map(|s| vec![f64::INFINITY; s.len()]).collect();
    let mut segs: Vec<SkeletonSegment> = Vec::new();
    let mut used: std::collections::HashSet<LatticePoint> = Default::default();
    let mut visited = vec![false; gamma.len()];
    let inside = |q: LatticePoint| q.point().norm() <= l;
    loop {
        let mut best: Option<(f64, usize, usize, LatticePoint, LatticePoint)> = None;
        for (c, st) in stations.iter().enumerate() {
            let m = st.len();
            for (k, s) in st.iter().enumerate() {
                let Some(end) = s.end else { continue };
                let score = dist[c][k];
                if let Some(b) = &best {
                    if score >= b.0 {
                        continue;
                    }
                }
                let sep = (0..=s.span).map(|j| dist[c][(k + j) % m]).fold(f64::INFINITY, f64::min);
                if sep < delta + steps[c] {
                    continue;
                }
                let (i, e) = (LatticePoint::nearest(s.p), LatticePoint::nearest(trav[c].at(end)));
                if i == e || used.contains(&i) || used.contains(&e) || !inside(i) || !inside(e) {
                    continue;
                }
                if visited[c] {
                    let near = segs.iter().any(|g| g.start.point().dist(i.point()) <= alpha + delta + SQRT_2);
                    if !near {
                        continue;
                    }
                }
                best = Some((score, c, k, i, e));
            }
        }
        let Some((_, c, k, i, e)) = best else { break };
        let s = &stations[c][k];
        let end = s.end.unwrap();
        let path = trav[c].subpath(s.pos, end);
        for (cc, st) in stations.iter().enumerate() {
            for (kk, q) in st.iter().enumerate() {
                let d = polyline_point_distance(q.p, &path);
                if d < dist[cc][kk] {
                    dist[cc][kk] = d;
                }
            }
        }
        used.insert(i);
        used.insert(e);
        visited[c] = true;
        segs.push(SkeletonSegment { start: i, end: e, contour: c, from: s.pos, to: end });
    }
    Ok(Skeleton { alpha, delta, radius: l, segments: segs })
}

// ---------------------------------------------------------------------------
// independent verifier

fn cw(c: &Contour) -> Vec<Point> {
    let mut v = c.vertices().to_vec();
    let a: f64 = (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum();
    if a > 0.0 {
        v[1..].reverse();
    }
    v
}

/// Points of the closed polygon `v` walked from arc position `from` to `to`.
fn walk(v: &[Point], from: f64, to: f64) -> Vec<Point> {
    let n = v.len();
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut i = 0;
    let mut started = false;
    while acc <= to + 1e-12 && i < 3 * n {
        let (a, b) = (v[i % n], v[(i + 1) % n]);
        let l = a.dist(b);
        let (lo, hi) = (acc, acc + l);
        if !started && from <= hi {
            out.push(a + (b - a) * ((from - lo) / l).clamp(0.0, 1.0));
            started = true;
        }
        if started {
            if to <= hi {
                out.push(a + (b - a) * ((to - lo) / l).clamp(0.0, 1.0));
                return out;
            }
            out.push(b);
        }
        acc = hi;
        i += 1;
    }
    out
}

fn chain_gap(a: &[Point], b: &[Point]) -> f64 {
    let mut d = f64::INFINITY;
    for x in a.windows(2) {
        for y in b.windows(2) {
            d = d.min(segment_segment_distance(x[0], x[1], y[0], y[1]));
        }
    }
    d
}

/// Checks a skeleton against `gamma`, returning the first violated
/// property. The coverage condition is checked on points spaced `0.01`
/// along every contour.
pub fn verify_skeleton(sk: &Skeleton, gamma: &[Contour]) -> std::result::Result<(), String> {
    let (alpha, delta) = (sk.alpha, sk.delta);
    let tol = 1e-9;
    let mut seen = std::collections::HashSet::new();
    for (i, s) in sk.segments.iter().enumerate() {
        for q in [s.start, s.end] {
            if !seen.insert(q) {
                return Err(format!("vertex {q:?} repeated (segment {i})"));
            }
            if ((q.x * q.x + q.y * q.y) as f64).sqrt() > sk.radius + tol {
                return Err(format!("vertex {q:?} outside the disk"));
            }
        }
        let d = s.start.point().dist(s.end.point());
        if d < alpha - SQRT_2 - tol || d > alpha + SQRT_2 + tol {
            return Err(format!("S1: segment {i} has length {d}"));
        }
    }
    let polys: Vec<Vec<Point>> = gamma.iter().map(cw).collect();
    let mut paths = Vec::new();
    let mut first_on = std::collections::HashMap::new();
    for (i, s) in sk.segments.iter().enumerate() {
        let Some(v) = polys.get(s.contour) else {
            return Err(format!("S2: segment {i} names a missing contour"));
        };
        let p = walk(v, s.from, s.to);
        let (ig, eg) = (p[0], *p.last().unwrap());
        let r = 0.5f64.sqrt() + tol;
        if ig.dist(s.start.point()) > r || eg.dist(s.end.point()) > r {
            return Err(format!("S2: segment {i} endpoints too far from its witness"));
        }
        if p.iter().any(|x| x.dist(s.start.point()) > alpha + 0.5f64.sqrt() + tol) {
            return Err(format!("S2: witness of segment {i} leaves the alpha-ball"));
        }
        first_on.entry(s.contour).or_insert(i);
        paths.push(p);
    }
    for (i, s) in sk.segments.iter().enumerate() {
        let near = sk.segments[..i].iter().any(|g| g.start.point().dist(s.start.point()) <= alpha + delta + SQRT_2 + tol);
        if !near && first_on[&s.contour] != i {
            return Err(format!("S3: segment {i}"));
        }
    }
    if !sk.segments.is_empty() {
        let starts: Vec<Point> = sk.segments.iter().map(|s| s.start.point()).collect();
        let bound = 2.0 * alpha + delta + SQRT_2;
        for v in &polys {
            let n = v.len();
            for k in 0..n {
                let (a, b) = (v[k], v[(k + 1) % n]);
                let m = (a.dist(b) / 0.01).ceil() as usize;
                for j in 0..m {
                    let x = a.lerp(b, j as f64 / m as f64);
                    if starts.iter().all(|s| s.dist(x) > bound) {
                        return Err(format!("S4: point {x:?} uncovered"));
                    }
                }
            }
        }
    } else if !gamma.is_empty() {
        return Err("S4: empty skeleton for non-empty family".into());
    }
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let d = chain_gap(&paths[i], &paths[j]);
            if d < delta - tol {
                return Err(format!("S5: witnesses {i} and {j} at distance {d}"));
            }
        }
    }
    Ok(())
}

/// Slack budget constants of the isoperimetric check, fitted once on
/// synthetic families (see the `fit_isoperimetric_constants` test) and
/// frozen.
pub const ISO_C1: f64 = 4.5;
pub const ISO_C2: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub skeleton_length: f64,
    pub black_area: f64,
    pub lower_bound: f64,
    pub slack: f64,
    pub budget: f64,
    pub violated: bool,
}

/// Compares the skeleton length with `2 sqrt(pi A)`, `A` the black area of
/// `gamma`; a violation is a slack below `-(c1 (delta/alpha) sqrt(A) + c2 alpha)`.
pub fn isoperimetric_check(sk: &Skeleton, gamma: &[Contour], c1: f64, c2: f64) -> IsoperimetricReport {
    let col = super::Colouring::new(gamma);
    let a: f64 = gamma.iter().enumerate().map(|(i, c)| col.inner_sign(i) * c.area()).sum::<f64>().max(0.0);
    let len = sk.length();
    let lb = 2.0 * (PI * a).sqrt();
    let budget = c1 * (sk.delta / sk.alpha) * a.sqrt() + c2 * sk.alpha;
    IsoperimetricReport {
        skeleton_length: len,
        black_area: a,
        lower_bound: lb,
        slack: len - lb,
        budget,
        violated: len - lb < -budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Star-shaped random polygon with radius in `[r (1 - w), r]`.
    pub(crate) fn blob(rng: &mut impl Rng, c: Point, r: f64, w: f64, n: usize) -> Contour {
        let ph: f64 = rng.random::<f64>() * 6.0;
        let pts = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64 + ph;
                c + Point::from_angle(a) * (r * (1.0 - w * rng.random::<f64>()))
            })
            .collect();
        Contour::new(pts).unwrap()
    }

    #[test]
    fn empty_family() {
        let s = extract_skeleton(&[], 4.0, 1.0, 10.0).unwrap();
        assert!(s.segments.is_empty());
        assert!(verify_skeleton(&s, &[]).is_ok());
        assert!(!isoperimetric_check(&s, &[], ISO_C1, ISO_C2).violated);
    }

    #[test]
    fn rejects_small_and_bad_parameters() {
        let c = Contour::regular(Point::ORIGIN, 1.0, 20, 0.0).unwrap();
        assert!(extract_skeleton(std::slice::from_ref(&c), 4.0, 1.0, 10.0).is_err());
        assert!(extract_skeleton(&[c], 1.0, 0.5, 10.0).is_err());
    }

    #[test]
    fn circle_count_and_properties() {
        let r = 15.0;
        let c = Contour::regular(Point::new(0.3, -0.2), r, 400, 0.1).unwrap();
        let (alpha, delta) = (4.0, 1.0);
        let s = extract_skeleton(std::slice::from_ref(&c), alpha, delta, 30.0).unwrap();
        verify_skeleton(&s, std::slice::from_ref(&c)).unwrap();
        let m = s.segments.len() as f64;
        let expect = c.length() / (alpha + delta);
        assert!((m - expect).abs() <= 0.35 * expect, "m = {m}, P/(a+d) = {expect}");
        let rep = isoperimetric_check(&s, &[c], ISO_C1, ISO_C2);
        assert!(!rep.violated, "{rep:?}");
        assert!(rep.slack.abs() < 0.35 * rep.lower_bound);
    }

    #[test]
    fn barely_large_contour_gets_a_segment() {
        let alpha = 3.0;
        let c = Contour::new(vec![
            Point::new(1.5, -0.3),
            Point::new(alpha + 0.01, 0.0),
            Point::new(1.5, 0.3),
            Point::new(0.0, 0.0),
        ])
        .unwrap();
        let s = extract_skeleton(std::slice::from_ref(&c), alpha, 0.75, 10.0).unwrap();
        assert_eq!(s.segments.len(), 1);
        verify_skeleton(&s, &[c]).unwrap();
    }

    #[test]
    fn verifier_catches_tampering() {
        let c = Contour::regular(Point::ORIGIN, 10.0, 200, 0.0).unwrap();
        let s = extract_skeleton(std::slice::from_ref(&c), 4.0, 1.0, 20.0).unwrap();
        let mut bad = s.clone();
        bad.segments[0].end = LatticePoint { x: bad.segments[0].end.x + 3, y: bad.segments[0].end.y };
        assert!(verify_skeleton(&bad, std::slice::from_ref(&c)).is_err());
        let mut short = s.clone();
        short.segments.truncate(1);
        assert!(verify_skeleton(&short, std::slice::from_ref(&c)).unwrap_err().starts_with("S4"));
        let mut dup = s;
        let first = dup.segments[0];
        dup.segments.push(first);
        assert!(verify_skeleton(&dup, &[c]).is_err());
    }

    #[test]
    fn two_disks_exceed_single_disk_bound() {
        let a = Contour::regular(Point::new(-12.0, 0.0), 8.0, 200, 0.0).unwrap();
        let b = Contour::regular(Point::new(12.0, 0.0), 8.0, 200, 0.0).unwrap();
        let g = [a, b];
        let s = extract_skeleton(&g, 4.0, 1.0, 30.0).unwrap();
        verify_skeleton(&s, &g).unwrap();
        let rep = isoperimetric_check(&s, &g, ISO_C1, ISO_C2);
        assert!(rep.slack > 0.0, "{rep:?}");
    }

    #[test]
    fn rotation_by_quarter_turn_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = vec![blob(&mut rng, Point::new(2.0, 1.0), 9.0, 0.2, 60)];
        let rot = |p: Point| Point::new(-p.y, p.x);
        let gr: Vec<Contour> =
            g.iter().map(|c| Contour::new(c.vertices().iter().map(|p| rot(*p)).collect()).unwrap()).collect();
        let s = extract_skeleton(&g, 4.0, 1.0, 25.0).unwrap();
        let sr = extract_skeleton(&gr, 4.0, 1.0, 25.0).unwrap();
        assert_eq!(s.segments.len(), sr.segments.len());
        for (a, b) in s.segments.iter().zip(&sr.segments) {
            assert_eq!(LatticePoint { x: -a.start.y, y: a.start.x }, b.start);
            assert_eq!(LatticePoint { x: -a.end.y, y: a.end.x }, b.end);
        }
    }

    /// Fitting run for the frozen constants: the largest normalised deficits
    /// over synthetic blobs stay within the frozen budget.
    #[test]
    fn fit_isoperimetric_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        let mut worst: f64 = 0.0;
        for _ in 0..12 {
            let alpha = rng.random_range(3.0..6.0);
            let delta = alpha / rng.random_range(4.0..8.0);
            let r = rng.random_range(2.0 * alpha..5.0 * alpha);
            let g = vec![blob(&mut rng, Point::ORIGIN, r, 0.25, 48)];
            let s = extract_skeleton(&g, alpha, delta, 40.0).unwrap();
            let rep = isoperimetric_check(&s, &g, ISO_C1, ISO_C2);
            worst = worst.max(-rep.slack / rep.budget);
        }
        assert!(worst < 1.0, "worst deficit fraction {worst}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn extractor_output_passes_verifier(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.random_range(1..4);
            let mut g: Vec<Contour> = Vec::new();
            for j in 0..k {
                let c = Point::new(-16.0 + 16.0 * j as f64, rng.random_range(-3.0..3.0));
                let r = rng.random_range(4.0..7.0);
                g.push(blob(&mut rng, c, r, 0.3, 40));
            }
            let s = extract_skeleton(&g, 3.0, 0.75, 30.0).unwrap();
            prop_assert!(verify_skeleton(&s, &g).is_ok(), "{:?}", verify_skeleton(&s, &g));
        }
    }
}
