use crate::error::{invalid, Result};
use crate::geometry::{point_segment_distance, Contour, Point, Region};

/// Indices of the contours with diameter `> alpha` whose curve meets the
/// disk of radius `l` about the origin, with their total length.
pub fn large_contours(contours: &[Contour], alpha: f64, l: f64) -> (Vec<usize>, f64) {
    let disk = Region::Disk { center: Point::ORIGIN, radius: l };
    let idx: Vec<usize> =
        (0..contours.len()).filter(|&i| contours[i].diameter() > alpha && contours[i].hits_region(&disk)).collect();
    let len = idx.iter().map(|&i| contours[i].length()).sum();
    (idx, len)
}

/// Distance from a contour to the circle of radius `l` about the origin.
pub fn distance_to_circle(c: &Contour, l: f64) -> f64 {
    c.edges()
        .map(|(a, b)| {
            let rmin = point_segment_distance(Point::ORIGIN, a, b);
            let rmax = a.norm().max(b.norm());
            if rmin <= l && l <= rmax {
                0.0
            } else {
                (rmin - l).abs().min((rmax - l).abs())
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Event that no `alpha`-large contour comes within `6 alpha` of the circle
/// of radius `l`.
pub fn check_no_boundary_large(contours: &[Contour], alpha: f64, l: f64) -> Result<bool> {
    if !(6.0 * alpha < l) {
        return invalid(format!("need 6 alpha < L, got alpha = {alpha}, L = {l}"));
    }
    Ok(contours.iter().filter(|c| c.diameter() > alpha).all(|c| distance_to_circle(c, l) >= 6.0 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        let small = Contour::regular(Point::new(1.0, 0.0), 0.4, 12, 0.0).unwrap();
        let (s, len) = large_contours(std::slice::from_ref(&small), 1.0, 5.0);
        assert!(s.is_empty() && len == 0.0);
        let big = Contour::regular(Point::ORIGIN, 1.0, 64, 0.0).unwrap();
        let (s, len) = large_contours(&[small, big.clone()], 1.0, 5.0);
        assert_eq!(s, vec![1]);
        assert!((len - big.length()).abs() < 1e-12);
        let far = Contour::regular(Point::new(20.0, 0.0), 1.0, 64, 0.0).unwrap();
        assert!(large_contours(&[far], 1.0, 5.0).0.is_empty());
    }

    #[test]
    fn boundary_event() {
        assert!(check_no_boundary_large(&[], 1.0, 10.0).unwrap());
        assert!(check_no_boundary_large(&[], 2.0, 12.0).is_err());
        let touching = Contour::regular(Point::new(9.0, 0.0), 1.0, 32, 0.0).unwrap();
        assert!(!check_no_boundary_large(&[touching], 1.0, 10.0).unwrap());
        // square with its right edge at distance 6 alpha + 1 from the circle
        let alpha = 1.0;
        let x = 20.0 - 7.0;
        let sq = Contour::new(vec![
            Point::new(x - 2.0, -1.0),
            Point::new(x, -1.0),
            Point::new(x, 1.0),
            Point::new(x - 2.0, 1.0),
        ])
        .unwrap();
        let d = distance_to_circle(&sq, 20.0);
        assert!((d - (20.0 - (x * x + 1.0f64).sqrt())).abs() < 1e-12);
        let sq_mid = Contour::new(vec![
            Point::new(x - 2.0, -0.0001),
            Point::new(x, -0.0001),
            Point::new(x, 0.0001),
            Point::new(x - 2.0, 0.0001),
        ])
        .unwrap();
        assert!((distance_to_circle(&sq_mid, 20.0) - 7.0).abs() < 1e-6);
        assert!(check_no_boundary_large(&[sq_mid], alpha, 20.0).unwrap());
    }
}
