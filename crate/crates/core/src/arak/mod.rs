//! Exact sampler of the free-boundary Arak process through its time-space
//! particle system: the `x` axis is time, `y` is the particle position and
//! trajectories are traced as polygonal lines in the window.

use crate::error::{Error, Result};
use crate::geometry::{chain_crossing, segment_line_params, Contour, Point, Polyline, Window};
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Angle between two independent lines of the process: density
/// `sin(phi) / 2` on `(0, pi)`, by inversion.
pub fn sample_typical_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (1.0 - 2.0 * rng.random::<f64>()).acos()
}

/// Wraps an angle into `(-pi/2, pi/2]` (directions of non-vertical lines).
fn wrap_half(a: f64) -> f64 {
    let r = (a + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

/// Initial velocities of an interior birth. In angle coordinates
/// `v = tan(psi)` the pair density is proportional to `|sin(psi' - psi'')|`
/// on `(-pi/2, pi/2)^2`: `psi'` is uniform and `psi'' - psi'` is a typical
/// angle (mod pi).
pub fn sample_velocity_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let a = -FRAC_PI_2 + PI * rng.random::<f64>();
    let b = wrap_half(a + sample_typical_angle(rng));
    if rng.random::<bool>() {
        (a.tan(), b.tan())
    } else {
        (b.tan(), a.tan())
    }
}

/// Total velocity-jump rate `q(v) = int |u - v| (1 + u^2)^(-3/2) du`, in
/// closed form `2 sqrt(1 + v^2)` (rate 2 per unit trajectory length).
pub fn jump_rate(v: f64) -> f64 {
    2.0 * (1.0 + v * v).sqrt()
}

/// Waiting time (in time units) and new velocity of the jump process. The
/// new direction angle is the old one plus a typical angle, mod pi.
pub fn velocity_jump_kernel<R: Rng + ?Sized>(v: f64, rng: &mut R) -> (f64, f64) {
    let wait = Exp::new(jump_rate(v)).unwrap().sample(rng);
    let psi = v.atan();
    (wait, wrap_half(psi + sample_typical_angle(rng)).tan())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArakStats {
    pub interior_births: usize,
    pub boundary_births: usize,
    pub jumps: usize,
    pub collisions: usize,
    pub exits: usize,
    pub events: usize,
    /// Collisions closer in time than `1e-12` to another event (processed
    /// pairwise in order).
    pub near_simultaneous: usize,
}

/// Free-boundary polygonal configuration: closed contours plus chains with
/// both ends on the window boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArakConfiguration {
    pub window: Window,
    pub contours: Vec<Contour>,
    pub paths: Vec<Polyline>,
    pub stats: ArakStats,
}

impl ArakConfiguration {
    pub fn total_length(&self) -> f64 {
        self.contours.iter().map(|c| c.length()).sum::<f64>() + self.paths.iter().map(|p| p.length()).sum::<f64>()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.contours.iter().flat_map(|c| c.edges()).chain(self.paths.iter().flat_map(|p| p.edges()))
    }

    /// Free-boundary admissibility: no crossings, chain ends on the
    /// boundary, everything else strictly inside.
    pub fn is_admissible(&self) -> bool {
        let w = &self.window;
        let tol = 1e-7;
        for p in &self.paths {
            let n = p.points.len();
            if n < 2 || w.clearance(p.points[0]).abs() > tol || w.clearance(p.points[n - 1]).abs() > tol {
                return false;
            }
            if p.points[1..n - 1].iter().any(|q| w.clearance(*q) <= 0.0) {
                return false;
            }
        }
        if self.contours.iter().any(|c| c.vertices().iter().any(|q| w.clearance(*q) <= 0.0)) {
            return false;
        }
        let chains: Vec<(&[Point], bool)> = self
            .contours
            .iter()
            .map(|c| (c.vertices(), true))
            .chain(self.paths.iter().map(|p| (&p.points[..], false)))
            .collect();
        chain_crossing(&chains).is_none()
    }
}

/// Sorted distances from `a` of the points where the configuration crosses
/// the segment `[a, b]`.
pub fn chord_crossings(cfg: &ArakConfiguration, a: Point, b: Point) -> Vec<f64> {
    let len = a.dist(b);
    let mut out: Vec<f64> = cfg
        .edges()
        .filter_map(|(p, q)| segment_line_params(a, b, p, q))
        .filter(|&(t, u)| (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u))
        .map(|(t, _)| t * len)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArakOptions {
    /// Direction of the time axis (radians); the law does not depend on it.
    pub time_angle: f64,
    pub max_events: usize,
}

impl Default for ArakOptions {
    fn default() -> Self {
        ArakOptions { time_angle: 0.0, max_events: 10_000_000 }
    }
}

struct Particle {
    t: f64,
    y: f64,
    v: f64,
    next_jump: f64,
    exit: f64,
    traj: Vec<Point>,
    start_link: Option<usize>,
    end_link: Option<usize>,
    alive: bool,
}

fn rotate_window(w: &Window, angle: f64) -> Window {
    match w {
        Window::Disk { center, radius } => Window::Disk { center: center.rotate(angle), radius: *radius },
        Window::Polygon { vertices } => Window::Polygon { vertices: vertices.iter().map(|p| p.rotate(angle)).collect() },
    }
}

/// One draw of the Arak process in a convex window.
pub fn run_arak<R: Rng + ?Sized>(window: &Window, opts: &ArakOptions, rng: &mut R) -> Result<ArakConfiguration> {
    window.validate()?;
    // simulate in a frame where time runs along +x
    let w = rotate_window(window, -opts.time_angle);
    let bb = w.bbox();

    // births: (time, y, kind) with kind = None for interior, Some(v) for boundary
    let mut births: Vec<(f64, f64, Option<f64>)> = Vec::new();
    let n_int = Poisson::new(PI * w.area()).unwrap().sample(rng) as usize;
    while births.len() < n_int {
        let p = Point::new(
            bb.min.x + (bb.max.x - bb.min.x) * rng.random::<f64>(),
            bb.min.y + (bb.max.y - bb.min.y) * rng.random::<f64>(),
        );
        if w.contains_strictly(p) {
            births.push((p.x, p.y, None));
        }
    }
    let n_bd = Poisson::new(w.perimeter()).unwrap().sample(rng) as usize;
    for _ in 0..n_bd {
        let l = w.sample_hitting_line(rng);
        let d = l.direction();
        if d.x.abs() < 1e-12 {
            continue;
        }
        let (lo, hi) = w.chord(&l).expect("sampled line hits");
        let (pa, pb) = (l.point_at(lo), l.point_at(hi));
        let entry = if pa.x < pb.x { pa } else { pb };
        births.push((entry.x, entry.y, Some(d.y / d.x)));
    }
    births.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut stats = ArakStats { interior_births: n_int, boundary_births: births.len() - n_int, ..Default::default() };
    let mut ps: Vec<Particle> = Vec::new();
    let mut alive: Vec<usize> = Vec::new();

    let spawn = |ps: &mut Vec<Particle>, t: f64, y: f64, v: f64, rng: &mut R| -> usize {
        let p = Point::new(t, y);
        let dir = Point::new(1.0, v).normalized();
        let exit = t + w.exit_distance(p, dir) * dir.x;
        let wait = Exp::new(jump_rate(v)).unwrap().sample(rng);
        ps.push(Particle { t, y, v, next_jump: t + wait, exit, traj: vec![p], start_link: None, end_link: None, alive: true });
        ps.len() - 1
    };

    let mut bi = 0;
    let mut last_collision = f64::NEG_INFINITY;
    loop {
        stats.events += 1;
        if stats.events > opts.max_events {
            return Err(Error::EventBudget(opts.max_events));
        }
        // earliest event
        let mut best_t = births.get(bi).map_or(f64::INFINITY, |b| b.0);
        let mut kind = 0u8; // 0 birth, 1 jump, 2 exit, 3 collision
        let (mut ia, mut ib) = (usize::MAX, usize::MAX);
        for &i in &alive {
            let p = &ps[i];
            if p.next_jump < best_t && p.next_jump < p.exit {
                best_t = p.next_jump;
                kind = 1;
                ia = i;
            }
            if p.exit <= p.next_jump && p.exit < best_t {
                best_t = p.exit;
                kind = 2;
                ia = i;
            }
        }
        for (k, &i) in alive.iter().enumerate() {
            for &j in &alive[k + 1..] {
                let (p, q) = (&ps[i], &ps[j]);
                let dv = p.v - q.v;
                if dv == 0.0 {
                    continue;
                }
                // y_p(t) = p.y + p.v (t - p.t)
                let t0 = p.t.max(q.t);
                let yp = p.y + p.v * (t0 - p.t);
                let yq = q.y + q.v * (t0 - q.t);
                let tc = t0 + (yq - yp) / dv;
                if tc > t0 + 1e-13 && tc < best_t && tc < p.exit.min(q.exit) {
                    best_t = tc;
                    kind = 3;
                    ia = i;
                    ib = j;
                }
            }
        }
        if !best_t.is_finite() {
            break;
        }
        match kind {
            0 => {
                let (t, y, v) = births[bi];
                bi += 1;
                match v {
                    None => {
                        let (v1, v2) = sample_velocity_pair(rng);
                        let a = spawn(&mut ps, t, y, v1, rng);
                        let b = spawn(&mut ps, t, y, v2, rng);
                        ps[a].start_link = Some(b);
                        ps[b].start_link = Some(a);
                        alive.push(a);
                        alive.push(b);
                    }
                    Some(v) => {
                        let a = spawn(&mut ps, t, y, v, rng);
                        alive.push(a);
                    }
                }
            }
            1 => {
                stats.jumps += 1;
                let p = &mut ps[ia];
                let y = p.y + p.v * (best_t - p.t);
                let pt = Point::new(best_t, y);
                p.traj.push(pt);
                p.t = best_t;
                p.y = y;
                let psi = p.v.atan();
                p.v = wrap_half(psi + sample_typical_angle(rng)).tan();
                let dir = Point::new(1.0, p.v).normalized();
                p.exit = best_t + w.exit_distance(pt, dir) * dir.x;
                p.next_jump = best_t + Exp::new(jump_rate(p.v)).unwrap().sample(rng);
            }
            2 => {
                stats.exits += 1;
                let p = &mut ps[ia];
                let pt = Point::new(best_t, p.y + p.v * (best_t - p.t));
                p.traj.push(pt);
                p.alive = false;
                alive.retain(|&k| k != ia);
            }
            _ => {
                stats.collisions += 1;
                if best_t - last_collision < 1e-12 {
                    stats.near_simultaneous += 1;
                }
                last_collision = best_t;
                let y = ps[ia].y + ps[ia].v * (best_t - ps[ia].t);
                let pt = Point::new(best_t, y);
                for (i, j) in [(ia, ib), (ib, ia)] {
                    let p = &mut ps[i];
                    p.traj.push(pt);
                    p.alive = false;
                    p.end_link = Some(j);
                }
                alive.retain(|&k| k != ia && k != ib);
            }
        }
    }

    // glue trajectories through birth and collision vertices
    let n = ps.len();
    let mut used = vec![false; n];
    let mut contours = Vec::new();
    let mut paths = Vec::new();
    let trace = |start: usize, from_start: bool, used: &mut Vec<bool>| -> (Vec<Point>, bool) {
        // traverse particle `start` beginning at its start (or end) vertex
        let mut pts: Vec<Point> = Vec::new();
        let (mut i, mut fwd) = (start, from_start);
        loop {
            used[i] = true;
            let mut seg = ps[i].traj.clone();
            if !fwd {
                seg.reverse();
            }
            if pts.is_empty() {
                pts.extend(seg);
            } else {
                pts.extend(seg.into_iter().skip(1));
            }
            let next = if fwd { ps[i].end_link } else { ps[i].start_link };
            match next {
                Some(j) if j == start => return (pts, true),
                Some(j) => {
                    // birth links join starts, collision links join ends
                    fwd = !fwd;
                    i = j;
                }
                None => return (pts, false),
            }
        }
    };
    for i in 0..n {
        if used[i] {
            continue;
        }
        if ps[i].start_link.is_none() {
            let (pts, _) = trace(i, true, &mut used);
            paths.push(Polyline { points: pts });
        } else if ps[i].end_link.is_none() {
            let (pts, _) = trace(i, false, &mut used);
            paths.push(Polyline { points: pts });
        }
    }
    for i in 0..n {
        if !used[i] {
            let (mut pts, closed) = trace(i, true, &mut used);
            if closed {
                pts.pop();
                contours.push(Contour::from_vertices_unchecked(pts));
            } else {
                paths.push(Polyline { points: pts });
            }
        }
    }
    let back = opts.time_angle;
    let rot = |p: Point| p.rotate(back);
    Ok(ArakConfiguration {
        window: window.clone(),
        contours: contours.into_iter().map(|c| Contour::from_vertices_unchecked(c.vertices().iter().map(|p| rot(*p)).collect())).collect(),
        paths: paths.into_iter().map(|p| Polyline { points: p.points.into_iter().map(rot).collect() }).collect(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_statistic, Estimate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn typical_angle_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_typical_angle(&mut rng)).collect();
        assert!(ks_statistic(&xs, |p| (1.0 - p.cos()) / 2.0) < 0.01);
        let m = Estimate::from_samples(&xs);
        assert!(m.within(FRAC_PI_2, 4.0));
        assert!(((1.0 - FRAC_PI_2.cos()) / 2.0 - 0.5).abs() < 1e-15);
    }

    fn quad_rate(v: f64) -> f64 {
        // substitution u = tan(a)
        let n = 200_000;
        let h = PI / n as f64;
        (0..n)
            .map(|k| {
                let a = -FRAC_PI_2 + (k as f64 + 0.5) * h;
                let u = a.tan();
                (u - v).abs() * (1.0 + u * u).powf(-1.5) / a.cos().powi(2) * h
            })
            .sum()
    }

    #[test]
    fn jump_rate_closed_form() {
        assert!((jump_rate(0.0) - 2.0).abs() < 1e-15);
        let mut prev = 0.0;
        for v in [0.0, 1.0, 2.0, -3.5] {
            let q = quad_rate(v);
            assert!((q - jump_rate(v)).abs() < 1e-6, "{v}: {q}");
            if v >= 0.0 {
                assert!(q > prev);
                prev = q;
            }
        }
    }

    #[test]
    fn jump_at_zero_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 40_000;
        let pos = (0..n).filter(|_| velocity_jump_kernel(0.0, &mut rng).1 > 0.0).count();
        assert!((pos as f64 / n as f64 - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn velocity_pair_angle_and_exchangeability() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pairs: Vec<(f64, f64)> = (0..60_000).map(|_| sample_velocity_pair(&mut rng)).collect();
        let angles: Vec<f64> = pairs
            .iter()
            .map(|(a, b)| {
                
                (a.atan() - b.atan()).abs()
            })
            .map(|d| if d > FRAC_PI_2 { PI - d } else { d })
            .collect();
        // sharp angle between the lines: density sin(phi) on (0, pi/2) after folding
        assert!(ks_statistic(&angles, |p| 1.0 - p.cos()) < 0.01);
        let first_pos = pairs.iter().filter(|(a, b)| a > b).count() as f64 / pairs.len() as f64;
        assert!((first_pos - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_run_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for w in [Window::disk(3.0).unwrap(), Window::square(Point::new(1.0, 0.0), 4.0).unwrap()] {
            for k in 0..20 {
                let opts = ArakOptions { time_angle: 0.37 * k as f64, ..Default::default() };
                let c = run_arak(&w, &opts, &mut rng).unwrap();
                assert!(c.is_admissible(), "run {k}");
                assert_eq!(c.stats.exits + c.stats.boundary_births, c.paths.len() * 2);
                for ct in &c.contours {
                    assert!(ct.validate().is_ok());
                }
            }
        }
    }
}
