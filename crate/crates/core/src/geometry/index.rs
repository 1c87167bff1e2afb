use super::point::{segment_line_params, BBox, Point, EPS_GEOM};
use std::collections::HashMap;

/// Uniform-grid index over segments, answering "first segment crossed by
/// the query segment" queries. Segments may be appended incrementally.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    cell: f64,
    grid: HashMap<(i64, i64), Vec<u32>>,
    segs: Vec<(Point, Point)>,
}

impl SegmentIndex {
    pub fn new(cell: f64) -> Self {
        SegmentIndex { cell: cell.max(1e-6), grid: HashMap::new(), segs: Vec::new() }
    }

    pub fn from_chains<'a>(chains: impl IntoIterator<Item = (&'a [Point], bool)>, cell: f64) -> Self {
        let mut idx = SegmentIndex::new(cell);
        for (pts, closed) in chains {
            let n = pts.len();
            let m = if closed { n } else { n.saturating_sub(1) };
            for i in 0..m {
                idx.push(pts[i], pts[(i + 1) % n]);
            }
        }
        idx
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn cells(&self, a: Point, b: Point) -> impl Iterator<Item = (i64, i64)> {
        let bb = BBox::from_points(&[a, b]).inflate(EPS_GEOM);
        let (x0, y0) = self.key(bb.min);
        let (x1, y1) = self.key(bb.max);
        (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
    }

    /// Appends a segment and returns its id.
    pub fn push(&mut self, a: Point, b: Point) -> usize {
        let id = self.segs.len();
        self.segs.push((a, b));
        let cells: Vec<_> = self.cells(a, b).collect();
        for c in cells {
            self.grid.entry(c).or_default().push(id as u32);
        }
        id
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn segment(&self, id: usize) -> (Point, Point) {
        self.segs[id]
    }

    /// Smallest parameter `t` in `[t_min, 1]` at which `a + t (b - a)` meets
    /// an indexed segment, skipping ids for which `skip` returns true.
    pub fn first_hit(&self, a: Point, b: Point, t_min: f64, skip: impl Fn(usize) -> bool) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        let len = a.dist(b).max(1e-300);
        let tol = EPS_GEOM / len;
        for c in self.cells(a, b) {
            let Some(ids) = self.grid.get(&c) else { continue };
            for &id in ids {
                let id = id as usize;
                if skip(id) {
                    continue;
                }
                let (p, q) = self.segs[id];
                if let Some((t, u)) = segment_line_params(a, b, p, q) {
                    if t >= t_min && t <= 1.0 + tol && (-tol..=1.0 + tol).contains(&u) && best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, id));
                    }
                }
            }
        }
        best
    }

    pub fn hits(&self, a: Point, b: Point) -> bool {
        self.first_hit(a, b, 0.0, |_| false).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_hit_ordering() {
        let mut idx = SegmentIndex::new(0.5);
        idx.push(Point::new(2.0, -1.0), Point::new(2.0, 1.0));
        idx.push(Point::new(1.0, -1.0), Point::new(1.0, 1.0));
        idx.push(Point::new(5.0, 3.0), Point::new(6.0, 3.0));
        let (t, id) = idx.first_hit(Point::ORIGIN, Point::new(4.0, 0.0), 0.0, |_| false).unwrap();
        assert_eq!(id, 1);
        assert!((t - 0.25).abs() < 1e-12);
        let (_, id) = idx.first_hit(Point::ORIGIN, Point::new(4.0, 0.0), 0.0, |i| i == 1).unwrap();
        assert_eq!(id, 0);
        assert!(!idx.hits(Point::ORIGIN, Point::new(0.0, 4.0)));
    }
}
