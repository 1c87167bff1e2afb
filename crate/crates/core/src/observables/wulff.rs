use super::magnetisation;
use crate::error::{invalid, Result};
use crate::geometry::{best_circle_fit, Contour, Point, Region};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Droplet radius `L sqrt(a / (2 pi |m|))`.
pub fn wulff_radius(l: f64, a: f64, m_beta: f64) -> f64 {
    l * (a / (2.0 * PI * m_beta.abs())).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WulffReport {
    pub l: f64,
    pub a: f64,
    pub m_beta: f64,
    pub magnetisation: f64,
    /// `m_beta pi L^2 + a L^2`.
    pub target_magnetisation: f64,
    pub constraint_met: bool,
    pub n_large_contours: usize,
    pub theta_large: Option<Contour>,
    pub circle_center: Option<Point>,
    pub hausdorff_to_circle: Option<f64>,
    pub wulff_radius: f64,
}

impl WulffReport {
    /// Stored radius agrees with the inputs.
    pub fn is_consistent(&self) -> bool {
        (self.wulff_radius - wulff_radius(self.l, self.a, self.m_beta)).abs() <= 1e-12 * self.wulff_radius.max(1.0)
            && self.hausdorff_to_circle.is_none_or(|h| h >= 0.0)
    }
}

/// Report for one configuration in the disk of radius `l`: contours larger
/// than `c_large log L` are counted; a unique one is fitted by a circle of
/// the droplet radius.
pub fn wulff_report(contours: &[Contour], a: f64, m_beta: f64, l: f64, c_large: f64) -> Result<WulffReport> {
    if !(m_beta < 0.0 && m_beta > -1.0) {
        return invalid(format!("magnetisation estimate must lie in (-1, 0), got {m_beta}"));
    }
    if !(a > 0.0 && a < 2.0 * PI * m_beta.abs()) {
        return invalid(format!("excess a = {a} outside (0, 2 pi |M|)"));
    }
    let disk = Region::Disk { center: Point::ORIGIN, radius: l };
    let m = magnetisation(contours, &disk);
    let target = m_beta * PI * l * l + a * l * l;
    let threshold = c_large * l.ln();
    let large: Vec<&Contour> = contours.iter().filter(|c| c.diameter() > threshold && c.hits_region(&disk)).collect();
    let r = wulff_radius(l, a, m_beta);
    let (theta, center, hd) = if large.len() == 1 {
        let fit = best_circle_fit(large[0], r)?;
        (Some(large[0].clone()), Some(fit.center), Some(fit.distance))
    } else {
        (None, None, None)
    };
    Ok(WulffReport {
        l,
        a,
        m_beta,
        magnetisation: m,
        target_magnetisation: target,
        constraint_met: m >= target,
        n_large_contours: large.len(),
        theta_large: theta,
        circle_center: center,
        hausdorff_to_circle: hd,
        wulff_radius: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_formula() {
        let m = -0.8;
        assert!((wulff_radius(10.0, PI * 0.8, m) - 10.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_circle() {
        let r = wulff_report(&[], 1.0, -0.9, 20.0, 1.0).unwrap();
        assert_eq!(r.n_large_contours, 0);
        assert!(r.theta_large.is_none() && !r.constraint_met && r.is_consistent());
        assert!((r.magnetisation + PI * 400.0).abs() < 1e-6);
        let (l, a, m) = (20.0, 1.0, -0.9);
        let rad = wulff_radius(l, a, m);
        let c = Contour::regular(Point::new(1.0, 2.0), rad, 720, 0.0).unwrap();
        let rep = wulff_report(&[c], a, m, l, 1.0).unwrap();
        assert_eq!(rep.n_large_contours, 1);
        assert!(rep.hausdorff_to_circle.unwrap() < 0.01 * rad);
        assert!(rep.circle_center.unwrap().dist(Point::new(1.0, 2.0)) < 0.01 * rad);
        assert!(rep.is_consistent());
    }

    #[test]
    fn out_of_range() {
        assert!(wulff_report(&[], 0.0, -0.5, 10.0, 1.0).is_err());
        assert!(wulff_report(&[], 4.0, -0.5, 10.0, 1.0).is_err());
        assert!(wulff_report(&[], 1.0, 0.2, 10.0, 1.0).is_err());
    }
}
