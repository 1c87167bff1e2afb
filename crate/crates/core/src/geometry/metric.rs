use super::point::{point_segment_distance, Point};
use super::polygon::{densify_chain, Contour};
use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn chain_distance(p: Point, pts: &[Point], closed: bool) -> f64 {
    let n = pts.len();
    if n == 1 {
        return p.dist(pts[0]);
    }
    let m = if closed { n } else { n - 1 };
    (0..m).map(|i| point_segment_distance(p, pts[i], pts[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

fn chain_diameter(pts: &[Point]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d2 = d2.max(pts[i].dist_sq(pts[j]));
        }
    }
    d2.sqrt()
}

/// Hausdorff distance between two polygonal chains (closed when the flag is
/// set), computed by densifying each side with spacing `h` and measuring
/// exact point-to-chain distances. `h = None` uses the larger diameter / 512.
pub fn hausdorff_distance_with(a: &[Point], a_closed: bool, b: &[Point], b_closed: bool, h: Option<f64>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("hausdorff distance of an empty set");
    }
    let h = h.unwrap_or_else(|| chain_diameter(a).max(chain_diameter(b)) / 512.0);
    let h = if h > 0.0 { h } else { 1.0 };
    let da = densify_chain(a, a_closed && a.len() > 2, h)
        .into_iter()
        .map(|p| chain_distance(p, b, b_closed && b.len() > 2))
        .fold(0.0, f64::max);
    let db = densify_chain(b, b_closed && b.len() > 2, h)
        .into_iter()
        .map(|p| chain_distance(p, a, a_closed && a.len() > 2))
        .fold(0.0, f64::max);
    Ok(da.max(db))
}

pub fn hausdorff_distance(a: &Contour, b: &Contour) -> Result<f64> {
    hausdorff_distance_with(a.vertices(), true, b.vertices(), true, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Point,
    pub distance: f64,
}

fn circle_cost(c: &Contour, samples: &[Point], circle_unit: &[Point], x: Point, r: f64) -> f64 {
    let d1 = samples.iter().map(|p| (p.dist(x) - r).abs()).fold(0.0, f64::max);
    let d2 = circle_unit.iter().map(|u| c.distance_to_point(x + *u * r)).fold(0.0, f64::max);
    d1.max(d2)
}

fn nelder_mead(f: &dyn Fn(Point) -> f64, start: Point, step: f64, iters: usize) -> (Point, f64) {
    let mut s = [start, start + Point::new(step, 0.0), start + Point::new(0.0, step)];
    let mut v = [f(s[0]), f(s[1]), f(s[2])];
    for _ in 0..iters {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        if (v[w] - v[b]).abs() < 1e-12 && s[w].dist(s[b]) < 1e-10 {
            break;
        }
        let cen = (s[b] + s[m]) * 0.5;
        let xr = cen + (cen - s[w]);
        let fr = f(xr);
        if fr < v[b] {
            let xe = cen + (cen - s[w]) * 2.0;
            let fe = f(xe);
            if fe < fr {
                s[w] = xe;
                v[w] = fe;
            } else {
                s[w] = xr;
                v[w] = fr;
            }
        } else if fr < v[m] {
            s[w] = xr;
            v[w] = fr;
        } else {
            let xc = cen + (s[w] - cen) * 0.5;
            let fc = f(xc);
            if fc < v[w] {
                s[w] = xc;
                v[w] = fc;
            } else {
                for k in [m, w] {
                    s[k] = s[b] + (s[k] - s[b]) * 0.5;
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let k = (0..3).min_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
    (s[k], v[k])
}

/// Centre minimising the Hausdorff distance between the contour and the
/// circle of the given radius: Nelder-Mead from the centroid, plus a coarse
/// grid restart.
pub fn best_circle_fit(contour: &Contour, radius: f64) -> Result<CircleFit> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("circle radius must be positive, got {radius}"));
    }
    contour.validate()?;
    let diam = contour.diameter();
    let h = diam.max(2.0 * radius) / 512.0;
    let samples = contour.densify(h);
    let k = ((2.0 * PI * radius / h).ceil() as usize).clamp(64, 4096);
    let unit: Vec<Point> = (0..k).map(|i| Point::from_angle(2.0 * PI * i as f64 / k as f64)).collect();
    let f = |x: Point| circle_cost(contour, &samples, &unit, x, radius);
    let c0 = contour.centroid();
    let mut best = nelder_mead(&f, c0, 0.1 * diam.max(radius), 400);
    let g = 9;
    let span = 0.5 * diam;
    let mut grid_best = (c0, f64::INFINITY);
    for i in 0..g {
        for j in 0..g {
            let x = c0 + Point::new(span * (2.0 * i as f64 / (g - 1) as f64 - 1.0), span * (2.0 * j as f64 / (g - 1) as f64 - 1.0));
            let v = f(x);
            if v < grid_best.1 {
                grid_best = (x, v);
            }
        }
    }
    let alt = nelder_mead(&f, grid_best.0, span / (g - 1) as f64, 400);
    if alt.1 < best.1 {
        best = alt;
    }
    if !best.1.is_finite() {
        return Err(Error::Degenerate("circle fit diverged".into()));
    }
    Ok(CircleFit { center: best.0, distance: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_and_translated() {
        let c = Contour::regular(Point::ORIGIN, 1.0, 256, 0.0).unwrap();
        assert!(hausdorff_distance(&c, &c).unwrap() < 1e-12);
        let t = c.translated(Point::new(0.3, 0.0));
        let d = hausdorff_distance(&c, &t).unwrap();
        assert!((d - 0.3).abs() < 2e-3, "{d}");
        assert!(hausdorff_distance_with(&[], false, c.vertices(), true, None).is_err());
    }

    #[test]
    fn circle_fit_64gon() {
        let r = 3.0;
        let c = Contour::regular(Point::new(1.0, 2.0), r, 64, 0.0).unwrap();
        let fit = best_circle_fit(&c, r).unwrap();
        assert!(fit.distance <= r * (1.0 - (PI / 64.0).cos()) + 1e-6, "{fit:?}");
        let t = c.translated(Point::new(-4.0, 0.5));
        let fit2 = best_circle_fit(&t, r).unwrap();
        assert!((fit2.distance - fit.distance).abs() < 1e-6);
        assert!(fit2.center.dist(fit.center + Point::new(-4.0, 0.5)) < 1e-3);
        // doubled query radius: brute-force grid of centres never beats R
        let big = best_circle_fit(&c, 2.0 * r).unwrap();
        assert!(big.distance >= r - 1e-2, "{big:?}");
        let mut brute = f64::INFINITY;
        for i in -10..=10 {
            for j in -10..=10 {
                let x = Point::new(1.0 + 0.2 * i as f64, 2.0 + 0.2 * j as f64);
                let d1 = c.vertices().iter().map(|p| (p.dist(x) - 2.0 * r).abs()).fold(0.0, f64::max);
                brute = brute.min(d1);
            }
        }
        assert!(brute >= r - 1e-2);
        assert!(big.distance <= brute + 1e-2 || big.distance >= r - 1e-2);
    }

    fn brute(a: &[Point], b: &[Point]) -> f64 {
        let da = densify_chain(a, true, 1e-3);
        let db = densify_chain(b, true, 1e-3);
        let d = |x: &[Point], y: &[Point]| {
            x.iter().map(|p| y.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        d(&da, &db).max(d(&db, &da))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn matches_dense_sampling(
            r1 in 0.2..1.0f64, r2 in 0.2..1.0f64, n1 in 3usize..9, n2 in 3usize..9,
            dx in -0.5..0.5f64, ph in 0.0..1.0f64,
        ) {
            let a = Contour::regular(Point::ORIGIN, r1, n1, 0.0).unwrap();
            let b = Contour::regular(Point::new(dx, 0.1), r2, n2, ph).unwrap();
            let h = hausdorff_distance(&a, &b).unwrap();
            let o = brute(a.vertices(), b.vertices());
            prop_assert!((h - o).abs() < 5e-3, "{} vs {}", h, o);
            let h2 = hausdorff_distance(&b, &a).unwrap();
            prop_assert!((h - h2).abs() < 1e-12);
        }
    }
}
