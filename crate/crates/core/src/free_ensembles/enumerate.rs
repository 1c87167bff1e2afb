use crate::error::{Error, Result};
use crate::geometry::{Contour, Line, Point, Polyline, Window, EPS_GEOM, PARALLEL_TOL};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ENUMERATION_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Closed contours strictly inside the window.
    Empty,
    /// Additionally allows chains ending on the window boundary (degree-one
    /// boundary vertices).
    Free,
}

/// One admissible configuration on a fixed line set: line `i` carries the
/// segment `segments[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineConfiguration {
    pub segments: Vec<(Point, Point)>,
}

impl LineConfiguration {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|(a, b)| a.dist(*b)).sum()
    }

    /// Closed contours and open chains obtained by gluing segments at shared
    /// endpoints.
    pub fn assemble(&self) -> (Vec<Contour>, Vec<Polyline>) {
        assemble_segments(&self.segments)
    }
}

/// Glues segments whose endpoints coincide (within `1e-7`) into closed
/// contours and open chains. Endpoints are assumed to have degree <= 2.
pub fn assemble_segments(segments: &[(Point, Point)]) -> (Vec<Contour>, Vec<Polyline>) {
    let n = segments.len();
    let ends = |k: usize, e: usize| if e == 0 { segments[k].0 } else { segments[k].1 };
    // partner[(k, e)] = the other segment end sharing this point
    let mut partner = vec![[None::<(usize, usize)>; 2]; n];
    for k in 0..n {
        for e in 0..2 {
            let p = ends(k, e);
            for j in 0..n {
                if j == k {
                    continue;
                }
                for f in 0..2 {
                    if ends(j, f).dist(p) < 1e-7 {
                        partner[k][e] = Some((j, f));
                    }
                }
            }
        }
    }
    let mut used = vec![false; n];
    let mut closed = Vec::new();
    let mut open = Vec::new();
    let walk = |start: usize, start_end: usize, used: &mut Vec<bool>| -> (Vec<Point>, bool) {
        // leave segment `start` through its end opposite to `start_end`
        let mut pts = vec![ends(start, start_end)];
        let (mut k, mut e) = (start, 1 - start_end);
        loop {
            used[k] = true;
            pts.push(ends(k, e));
            match partner[k][e] {
                Some((j, _)) if j == start => return (pts, true),
                Some((j, f)) if !used[j] => {
                    k = j;
                    e = 1 - f;
                }
                _ => return (pts, false),
            }
        }
    };
    // open chains first: start from free ends
    for k in 0..n {
        for e in 0..2 {
            if !used[k] && partner[k][e].is_none() {
                let (pts, _) = walk(k, e, &mut used);
                open.push(Polyline { points: pts });
            }
        }
    }
    for k in 0..n {
        if !used[k] {
            let (mut pts, is_closed) = walk(k, 0, &mut used);
            if is_closed {
                pts.pop();
                closed.push(Contour::from_vertices_unchecked(pts));
            } else {
                open.push(Polyline { points: pts });
            }
        }
    }
    (closed, open)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Out,
    Interior,
    End,
}

struct Crossing {
    /// coordinate along each line
    s_i: f64,
    s_j: f64,
}

/// Enumerates every configuration in which each line carries exactly one
/// positive-length segment, with corners only at pairwise intersections
/// (and, in free mode, chain ends on the boundary), no crossings, no
/// T-junctions and no dangling interior ends.
pub fn enumerate_admissible_on_lines(lines: &[Line], window: &Window, mode: BoundaryMode) -> Result<Vec<LineConfiguration>> {
    enumerate_with_cap(lines, window, mode, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(lines: &[Line], window: &Window, mode: BoundaryMode, cap: usize) -> Result<Vec<LineConfiguration>> {
    enumerate_inner(lines, window, mode, cap, false)
}

/// As [`enumerate_with_cap`] but every line may also stay unused, so the
/// result ranges over configurations on all subsets of `lines`.
pub fn enumerate_on_subsets(lines: &[Line], window: &Window, mode: BoundaryMode, cap: usize) -> Result<Vec<LineConfiguration>> {
    enumerate_inner(lines, window, mode, cap, true)
}

fn enumerate_inner(
    lines: &[Line],
    window: &Window,
    mode: BoundaryMode,
    cap: usize,
    allow_unused: bool,
) -> Result<Vec<LineConfiguration>> {
    let n = lines.len();
    if n > cap {
        return Err(Error::EnumerationCap { lines: n, cap });
    }
    window.validate()?;
    if n == 0 {
        return Ok(vec![LineConfiguration { segments: Vec::new() }]);
    }
    let chords: Vec<Option<(f64, f64)>> = lines.iter().map(|l| window.chord(l)).collect();
    let mut cross: Vec<Vec<Option<Crossing>>> = (0..n).map(|_| (0..n).map(|_| None).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            if lines[i].sin_angle(&lines[j]) < PARALLEL_TOL {
                return Err(Error::NearParallel(lines[i].sin_angle(&lines[j])));
            }
            let p = lines[i].intersect(&lines[j])?;
            if window.contains_strictly(p) {
                let (si, sj) = (lines[i].coordinate(p), lines[j].coordinate(p));
                cross[i][j] = Some(Crossing { s_i: si, s_j: sj });
                cross[j][i] = Some(Crossing { s_i: sj, s_j: si });
            }
        }
    }
    // candidate intervals per line (coordinates along the line)
    let mut cands: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let Some((lo, hi)) = chords[i] else {
            if allow_unused {
                cands.push(vec![(f64::NAN, f64::NAN)]);
                continue;
            }
            return Ok(Vec::new());
        };
        let mut pts: Vec<f64> = (0..n).filter_map(|j| cross[i][j].as_ref().map(|c| c.s_i)).collect();
        if mode == BoundaryMode::Free {
            pts.push(lo);
            pts.push(hi);
        }
        pts.sort_by(f64::total_cmp);
        let mut c = Vec::new();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                if pts[b] - pts[a] > EPS_GEOM {
                    c.push((pts[a], pts[b]));
                }
            }
        }
        if allow_unused {
            // an unused line is `Out` at every crossing
            c.push((f64::NAN, f64::NAN));
        } else if c.is_empty() {
            return Ok(Vec::new());
        }
        cands.push(c);
    }
    let status = |iv: (f64, f64), s: f64| -> Status {
        if (s - iv.0).abs() <= EPS_GEOM || (s - iv.1).abs() <= EPS_GEOM {
            Status::End
        } else if s > iv.0 && s < iv.1 {
            Status::Interior
        } else {
            Status::Out
        }
    };
    let compatible = |a: Status, b: Status| {
        matches!(
            (a, b),
            (Status::Out, Status::Out) | (Status::Out, Status::Interior) | (Status::Interior, Status::Out) | (Status::End, Status::End)
        )
    };
    let mut out = Vec::new();
    let mut choice = vec![(0.0, 0.0); n];
    fn rec(
        i: usize,
        n: usize,
        cands: &[Vec<(f64, f64)>],
        cross: &[Vec<Option<Crossing>>],
        choice: &mut Vec<(f64, f64)>,
        out: &mut Vec<Vec<(f64, f64)>>,
        status: &dyn Fn((f64, f64), f64) -> Status,
        compatible: &dyn Fn(Status, Status) -> bool,
    ) {
        if i == n {
            out.push(choice.clone());
            return;
        }
        'c: for &iv in &cands[i] {
            for j in 0..i {
                if let Some(c) = &cross[i][j] {
                    if !compatible(status(iv, c.s_i), status(choice[j], c.s_j)) {
                        continue 'c;
                    }
                }
            }
            choice[i] = iv;
            rec(i + 1, n, cands, cross, choice, out, status, compatible);
        }
    }
    let mut raw = Vec::new();
    rec(0, n, &cands, &cross, &mut choice, &mut raw, &status, &compatible);
    for ch in raw {
        // every interval end must be a corner (or a boundary point in free mode)
        let mut ok = true;
        for i in (0..n).filter(|&i| !ch[i].0.is_nan()) {
            for s in [ch[i].0, ch[i].1] {
                let corner = (0..n).any(|j| cross[i][j].as_ref().is_some_and(|c| (c.s_i - s).abs() <= EPS_GEOM));
                let boundary = mode == BoundaryMode::Free
                    && chords[i].is_some_and(|(lo, hi)| (s - lo).abs() <= EPS_GEOM || (s - hi).abs() <= EPS_GEOM);
                if !corner && !boundary {
                    ok = false;
                }
            }
        }
        if ok {
            out.push(LineConfiguration {
                segments: (0..n)
                    .filter(|&i| !ch[i].0.is_nan())
                    .map(|i| (lines[i].point_at(ch[i].0), lines[i].point_at(ch[i].1)))
                    .collect(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chain_crossing, sample_poisson_lines, PolygonalConfiguration};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle_lines() -> Vec<Line> {
        let a = Point::new(-1.0, -0.5);
        let b = Point::new(1.0, -0.6);
        let c = Point::new(0.1, 1.0);
        vec![Line::through(a, b).unwrap(), Line::through(b, c).unwrap(), Line::through(c, a).unwrap()]
    }

    #[test]
    fn trivial_cases() {
        let w = Window::disk(5.0).unwrap();
        let e = enumerate_admissible_on_lines(&[], &w, BoundaryMode::Empty).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].segments.is_empty());
        let two = &triangle_lines()[..2];
        assert!(enumerate_admissible_on_lines(two, &w, BoundaryMode::Empty).unwrap().is_empty());
        let lines: Vec<Line> = (0..9).map(|k| Line::new(0.3 * k as f64, 0.1)).collect();
        assert!(matches!(enumerate_admissible_on_lines(&lines, &w, BoundaryMode::Empty), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn triangle_unique() {
        let w = Window::disk(5.0).unwrap();
        let e = enumerate_admissible_on_lines(&triangle_lines(), &w, BoundaryMode::Empty).unwrap();
        assert_eq!(e.len(), 1);
        let (c, o) = e[0].assemble();
        assert_eq!((c.len(), o.len()), (1, 0));
        assert_eq!(c[0].len(), 3);
        // brute force over all pairs of candidate endpoints (corners only)
        let lines = triangle_lines();
        let pts: Vec<Point> = vec![
            lines[0].intersect(&lines[1]).unwrap(),
            lines[1].intersect(&lines[2]).unwrap(),
            lines[2].intersect(&lines[0]).unwrap(),
        ];
        let expected = (pts[0].dist(pts[1]) + pts[1].dist(pts[2]) + pts[2].dist(pts[0])) as f64;
        assert!((e[0].total_length() - expected).abs() < 1e-9);
    }

    #[test]
    fn parallel_flagged() {
        let w = Window::disk(5.0).unwrap();
        let l = [Line::new(0.5, 0.0), Line::new(0.5, 1.0)];
        assert!(matches!(enumerate_admissible_on_lines(&l, &w, BoundaryMode::Free), Err(Error::NearParallel(_))));
    }

    #[test]
    fn free_single_line_is_full_chord() {
        let w = Window::disk(1.0).unwrap();
        let l = Line::new(0.4, 0.3);
        let e = enumerate_admissible_on_lines(&[l], &w, BoundaryMode::Free).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0].total_length() - w.chord_length(&l)).abs() < 1e-12);
    }

    #[test]
    fn random_line_sets_are_admissible_and_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = Window::disk(0.8).unwrap();
        let mut nonempty = 0;
        for _ in 0..300 {
            let lines = sample_poisson_lines(&w, &mut rng).unwrap();
            if lines.len() > 7 {
                continue;
            }
            for mode in [BoundaryMode::Empty, BoundaryMode::Free] {
                let all = enumerate_admissible_on_lines(&lines, &w, mode).unwrap();
                for (k, cfg) in all.iter().enumerate() {
                    assert_eq!(cfg.segments.len(), lines.len());
                    for other in &all[k + 1..] {
                        assert_ne!(cfg, other);
                    }
                    let (closed, open) = cfg.assemble();
                    if mode == BoundaryMode::Empty {
                        assert!(open.is_empty());
                        assert!(PolygonalConfiguration::new(closed.clone()).is_admissible(&w));
                    } else {
                        for p in &open {
                            for q in [p.points[0], *p.points.last().unwrap()] {
                                assert!(w.clearance(q).abs() < 1e-9);
                            }
                        }
                        let chains: Vec<(&[Point], bool)> = closed
                            .iter()
                            .map(|c| (c.vertices(), true))
                            .chain(open.iter().map(|p| (&p.points[..], false)))
                            .collect();
                        assert!(chain_crossing(&chains).is_none());
                    }
                    if !lines.is_empty() {
                        nonempty += 1;
                    }
                }
                // empty mode configurations are a subset of free ones
                if mode == BoundaryMode::Free {
                    let empty = enumerate_admissible_on_lines(&lines, &w, BoundaryMode::Empty).unwrap();
                    for c in &empty {
                        assert!(all.contains(c));
                    }
                }
            }
        }
        assert!(nonempty > 50);
    }

    #[test]
    fn subset_enumeration_matches_union_over_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = Window::disk(1.0).unwrap();
        for _ in 0..15 {
            let mut lines = sample_poisson_lines(&w, &mut rng).unwrap();
            lines.truncate(6);
            let n = lines.len();
            let mut expect = 0;
            let mut length = 0.0;
            for mask in 0u32..(1 << n) {
                let sub: Vec<Line> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| lines[i]).collect();
                for c in enumerate_admissible_on_lines(&sub, &w, BoundaryMode::Empty).unwrap() {
                    expect += 1;
                    length += c.total_length();
                }
            }
            let got = enumerate_on_subsets(&lines, &w, BoundaryMode::Empty, 8).unwrap();
            assert_eq!(got.len(), expect);
            let l2: f64 = got.iter().map(|c| c.total_length()).sum();
            assert!((l2 - length).abs() < 1e-9);
        }
    }
}
