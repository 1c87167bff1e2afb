use crate::error::{invalid, Result};
use crate::geometry::{Contour, Region, Window};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub alpha: f64,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaField {
    pub h: f64,
    pub region: Region,
}

/// Contour field in a window: length tilt `beta`, optionally a cut-off on
/// large contours hitting a region, a forbidden region and an area field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub beta: f64,
    pub window: Window,
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
    #[serde(default)]
    pub forbidden: Option<Region>,
    #[serde(default)]
    pub area_field: Option<AreaField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BirthFilter {
    Admitted,
    Cutoff,
    Forbidden,
}

impl FieldSpec {
    pub fn new(beta: f64, window: Window) -> Result<Self> {
        let s = FieldSpec { beta, window, cutoff: None, forbidden: None, area_field: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_cutoff(mut self, alpha: f64, region: Region) -> Result<Self> {
        self.cutoff = Some(Cutoff { alpha, region });
        self.validate()?;
        Ok(self)
    }

    pub fn with_forbidden(mut self, region: Region) -> Result<Self> {
        self.forbidden = Some(region);
        self.validate()?;
        Ok(self)
    }

    pub fn with_area_field(mut self, h: f64, region: Region) -> Result<Self> {
        self.area_field = Some(AreaField { h, region });
        self.validate()?;
        Ok(self)
    }

    /// Largest admissible `|h|` for a cut-off threshold `alpha`.
    pub fn max_field(beta: f64, alpha: f64) -> f64 {
        beta / (PI * alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 2.0) {
            return invalid(format!("beta must be finite and >= 2, got {}", self.beta));
        }
        self.window.validate()?;
        if let Some(c) = &self.cutoff {
            if !(c.alpha > 0.0 && c.alpha.is_finite()) {
                return invalid("cut-off alpha must be positive");
            }
            c.region.validate()?;
        }
        if let Some(u) = &self.forbidden {
            u.validate()?;
        }
        if let Some(f) = &self.area_field {
            f.region.validate()?;
            if !f.h.is_finite() {
                return invalid("area field h must be finite");
            }
            if self.beta / 2.0 < 2.0 {
                return invalid("area field needs beta >= 4 (births use beta / 2)");
            }
            if let Some(c) = &self.cutoff {
                let max = Self::max_field(self.beta, c.alpha);
                if f.h.abs() > max * (1.0 + 1e-12) {
                    return invalid(format!("|h| = {} exceeds beta / (pi alpha) = {max}", f.h.abs()));
                }
            }
        }
        Ok(())
    }

    /// Tilt of the birth measure.
    pub fn birth_beta(&self) -> f64 {
        if self.area_field.is_some() {
            self.beta / 2.0
        } else {
            self.beta
        }
    }

    pub fn filter(&self, c: &Contour) -> BirthFilter {
        if let Some(u) = &self.forbidden {
            if c.hits_region(u) {
                return BirthFilter::Forbidden;
            }
        }
        if let Some(cut) = &self.cutoff {
            if c.diameter() > cut.alpha && c.hits_region(&cut.region) {
                return BirthFilter::Cutoff;
            }
        }
        BirthFilter::Admitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn validation() {
        let w = Window::disk(5.0).unwrap();
        assert!(FieldSpec::new(1.0, w.clone()).is_err());
        let s = FieldSpec::new(6.0, w.clone()).unwrap();
        let v = Region::Disk { center: Point::ORIGIN, radius: 5.0 };
        let s = s.with_cutoff(1.0, v.clone()).unwrap();
        let max = FieldSpec::max_field(6.0, 1.0);
        assert!(s.clone().with_area_field(max, v.clone()).is_ok());
        assert!(s.clone().with_area_field(-1.01 * max, v.clone()).is_err());
        assert!(FieldSpec::new(3.0, w).unwrap().with_area_field(0.1, v).is_err());
    }

    #[test]
    fn filters() {
        let w = Window::disk(5.0).unwrap();
        let big = Contour::regular(Point::ORIGIN, 2.0, 16, 0.0).unwrap();
        let small = Contour::regular(Point::new(3.0, 0.0), 0.2, 8, 0.0).unwrap();
        let s = FieldSpec::new(5.0, w.clone()).unwrap().with_cutoff(1.0, Region::Disk { center: Point::ORIGIN, radius: 5.0 }).unwrap();
        assert_eq!(s.filter(&big), BirthFilter::Cutoff);
        assert_eq!(s.filter(&small), BirthFilter::Admitted);
        let u = FieldSpec::new(5.0, w).unwrap().with_forbidden(Region::Disk { center: Point::new(3.2, 0.0), radius: 0.1 }).unwrap();
        assert_eq!(u.filter(&small), BirthFilter::Forbidden);
        assert_eq!(u.filter(&big), BirthFilter::Admitted);
    }
}
