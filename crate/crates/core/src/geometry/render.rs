//! SVG and JSON vertex-list serialisation of configuration snapshots.

use super::point::{BBox, Point};
use super::polygon::{Contour, Polyline};
use super::window::Window;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Vertex-list snapshot: every contour is a list of `[x, y]` pairs; open
/// paths (free-boundary Arak output) are listed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub window: Window,
    pub contours: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<Vec<[f64; 2]>>,
}

impl Snapshot {
    pub fn new(window: &Window, contours: &[Contour], paths: &[Polyline]) -> Self {
        let conv = |pts: &[Point]| pts.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>();
        Snapshot {
            window: window.clone(),
            contours: contours.iter().map(|c| conv(c.vertices())).collect(),
            paths: paths.iter().map(|p| conv(&p.points)).collect(),
        }
    }

    pub fn contours(&self) -> Result<Vec<Contour>> {
        self.contours
            .iter()
            .enumerate()
            .map(|(k, v)| {
                Contour::new(v.iter().map(|a| Point::new(a[0], a[1])).collect()).map_err(|e| Error::Schema {
                    location: format!("contours[{k}]"),
                    message: e.to_string(),
                })
            })
            .collect()
    }

    pub fn paths(&self) -> Vec<Polyline> {
        self.paths.iter().map(|v| Polyline { points: v.iter().map(|a| Point::new(a[0], a[1])).collect() }).collect()
    }
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn path_data(out: &mut String, pts: &[Point], closed: bool) {
    for (i, p) in pts.iter().enumerate() {
        let _ = write!(out, "{}{},{} ", if i == 0 { 'M' } else { 'L' }, fmt(p.x), fmt(-p.y));
    }
    if closed {
        out.push('Z');
    }
}

/// Deterministic SVG rendering. Contours go into a single `evenodd` path, so
/// the fill follows nesting parity (outermost region white, black inside).
pub fn to_svg(window: &Window, contours: &[Contour], paths: &[Polyline]) -> String {
    let bb = window.bbox();
    let pad = 0.02 * (bb.max.x - bb.min.x).max(bb.max.y - bb.min.y);
    let BBox { min, max } = bb.inflate(pad);
    let (w, h) = (max.x - min.x, max.y - min.y);
    let stroke = fmt(w.max(h) / 600.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
        fmt(min.x),
        fmt(-max.y),
        fmt(w),
        fmt(h),
        (600.0 * h / w).round() as i64
    );
    let _ = writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, fmt(min.x), fmt(-max.y), fmt(w), fmt(h));
    let mut d = String::new();
    match window {
        Window::Disk { center, radius } => {
            let _ = writeln!(
                s,
                r#"<circle class="window" cx="{}" cy="{}" r="{}" fill="none" stroke="gray" stroke-width="{}"/>"#,
                fmt(center.x),
                fmt(-center.y),
                fmt(*radius),
                stroke
            );
        }
        Window::Polygon { vertices } => {
            path_data(&mut d, vertices, true);
            let _ = writeln!(s, r#"<path class="window" d="{}" fill="none" stroke="gray" stroke-width="{}"/>"#, d.trim_end(), stroke);
        }
    }
    if !contours.is_empty() {
        d.clear();
        for c in contours {
            path_data(&mut d, c.vertices(), true);
            d.push(' ');
        }
        let _ = writeln!(
            s,
            r#"<path class="contours" d="{}" fill="black" fill-rule="evenodd" stroke="black" stroke-width="{}"/>"#,
            d.trim_end(),
            stroke
        );
    }
    for p in paths {
        d.clear();
        path_data(&mut d, &p.points, false);
        let _ = writeln!(s, r#"<path class="path" d="{}" fill="none" stroke="black" stroke-width="{}"/>"#, d.trim_end(), stroke);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_triangle() {
        let w = Window::disk(5.0).unwrap();
        let e = to_svg(&w, &[], &[]);
        assert!(e.contains("class=\"window\""));
        assert!(!e.contains("class=\"contours\""));
        let t = Contour::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let s = to_svg(&w, std::slice::from_ref(&t), &[]);
        assert_eq!(s.matches('Z').count(), 1);
        assert!(s.contains("M0.000000,0.000000 L1.000000,0.000000 L0.000000,-1.000000 Z"));
        assert_eq!(s, to_svg(&w, &[t], &[]));
    }

    #[test]
    fn snapshot_round_trip() {
        let w = Window::square(Point::ORIGIN, 4.0).unwrap();
        let t = Contour::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let snap = Snapshot::new(&w, std::slice::from_ref(&t), &[]);
        let js = serde_json::to_string(&snap).unwrap();
        let back: Snapshot = serde_json::from_str(&js).unwrap();
        assert_eq!(back.contours().unwrap(), vec![t]);
        let bad: Snapshot = serde_json::from_str(r#"{"window":{"shape":"disk","center":{"x":0,"y":0},"radius":1},"contours":[[[0,0],[1,0]]]}"#).unwrap();
        assert!(matches!(bad.contours(), Err(Error::Schema { .. })));
    }
}
