use crate::error::{invalid, Result};
use crate::geometry::{Contour, Line, Point, Polyline, SegmentIndex, Window};
use crate::tension::walk::{run_walk, start_walk, sample_turn_angle, WalkParams, WalkStatus, TURN_RATE};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// Contour drawn by the walk-closure proposal with its exact log densities
/// (both with respect to the unordered line-set measure).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedContourProposal {
    pub contour: Contour,
    pub log_target_density: f64,
    pub log_proposal_density: f64,
}

impl WeightedContourProposal {
    pub fn log_weight(&self) -> f64 {
        self.log_target_density - self.log_proposal_density
    }

    pub fn weight(&self) -> f64 {
        self.log_weight().exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosureParams {
    /// Probability of closing at each admissible return to the start line.
    pub closure_probability: f64,
    pub max_turns: usize,
}

impl Default for ClosureParams {
    fn default() -> Self {
        ClosureParams { closure_probability: 0.5, max_turns: 100_000 }
    }
}

/// Why a proposal attempt produced no contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Killed,
    SelfHit,
    Escaped,
    TooLong,
    Degenerate,
}

fn log_sub_exp(a: f64, b: f64) -> f64 {
    // log(e^a - e^b), a > b
    a + (-(b - a).exp()).ln_1p()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Open segment `(a, b)` free of the indexed segments (touching at the
/// endpoints is allowed).
fn open_segment_free(idx: &SegmentIndex, a: Point, b: Point, skip: impl Fn(usize) -> bool) -> bool {
    let tol = 1e-9 / a.dist(b).max(1e-12);
    match idx.first_hit(a, b, tol, skip) {
        Some((t, _)) => t >= 1.0 - tol,
        None => true,
    }
}

/// Walk-closure proposal for the free contour measure tilted by `beta`
/// (`beta >= 2`), restricted to contours inside `window` whose curve meets
/// the convex `anchor`.
///
/// A line is drawn from the line measure restricted to the anchor, a start
/// point uniformly on its chord and a direction along it with probability
/// 1/2. The walk turns at rate 4 with angle law `|sin| / 4`, is killed at
/// rate `beta - 2`, on self-contact and on leaving the window. Whenever it
/// crosses the start line behind the start point and the closing segment
/// back to the start is free, it closes with probability `p_c`.
pub fn propose_free_contour<R: Rng + ?Sized>(
    beta: f64,
    anchor: &Window,
    window: &Window,
    params: &ClosureParams,
    rng: &mut R,
) -> Result<std::result::Result<WeightedContourProposal, Rejection>> {
    if beta < 2.0 {
        return invalid(format!("beta must be >= 2, got {beta}"));
    }
    let pc = params.closure_probability;
    if !(pc > 0.0 && pc <= 1.0) {
        return invalid("closure probability must lie in (0, 1]");
    }
    let l1 = anchor.sample_hitting_line(rng);
    let (a_lo, a_hi) = match anchor.chord(&l1) {
        Some(c) => c,
        None => return Ok(Err(Rejection::Degenerate)),
    };
    let s0 = a_lo + (a_hi - a_lo) * rng.random::<f64>();
    let p0 = l1.point_at(s0);
    if !window.contains_strictly(p0) {
        return Ok(Err(Rejection::Escaped));
    }
    let o = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut dir = l1.direction() * o;
    let kill = beta - 2.0;
    let turn = Exp::new(TURN_RATE).unwrap();
    let killer = if kill > 0.0 { Some(Exp::new(kill).unwrap()) } else { None };
    let mut idx = SegmentIndex::new(0.5);
    let mut pts = vec![p0];
    let mut pos = p0;
    let mut turns = 0usize;
    loop {
        let s_turn = turn.sample(rng);
        let s_kill = killer.map_or(f64::INFINITY, |k| k.sample(rng));
        let s_exit = window.exit_distance(pos, dir);
        let s = s_turn.min(s_kill).min(s_exit);
        let end = pos + dir * s;
        let last = idx.len().checked_sub(1);
        let t_self = idx.first_hit(pos, end, 0.0, |id| Some(id) == last).map(|(t, _)| t);
        // crossing of the start line (never on the first segment, which lies on it)
        let mut t_cross = None;
        if pts.len() > 1 {
            let (da, db) = (l1.signed_distance(pos), l1.signed_distance(end));
            if da * db < 0.0 {
                t_cross = Some(da / (da - db));
            }
        }
        if let Some(tc) = t_cross {
            if t_self.is_none_or(|ts| tc < ts) {
                let q = pos + (end - pos) * tc;
                let sq = l1.coordinate(q);
                if (sq - s0) * o < 0.0 && open_segment_free(&idx, q, p0, |id| id == 0)
                    && rng.random::<f64>() < pc {
                        let mut verts: Vec<Point> = pts[1..].to_vec();
                        verts.push(q);
                        let contour = match Contour::new(verts) {
                            Ok(c) => c,
                            Err(_) => return Ok(Err(Rejection::Degenerate)),
                        };
                        let log_target = -(2.0 + beta) * contour.length();
                        let log_prop = log_proposal_density(&contour, beta, anchor, pc);
                        return Ok(Ok(WeightedContourProposal {
                            contour,
                            log_target_density: log_target,
                            log_proposal_density: log_prop,
                        }));
                    }
            }
        }
        if t_self.is_some() {
            return Ok(Err(Rejection::SelfHit));
        }
        if s == s_exit {
            return Ok(Err(Rejection::Escaped));
        }
        if s == s_kill {
            return Ok(Err(Rejection::Killed));
        }
        idx.push(pos, end);
        pts.push(end);
        pos = end;
        turns += 1;
        if turns > params.max_turns {
            return Ok(Err(Rejection::TooLong));
        }
        dir = dir.rotate(sample_turn_angle(rng));
    }
}

/// Exact log density of the walk-closure proposal at `contour`: the sum over
/// start edges meeting the anchor and both orientations.
pub fn log_proposal_density(contour: &Contour, beta: f64, anchor: &Window, pc: f64) -> f64 {
    let v = contour.vertices();
    let n = v.len();
    let k = 2.0 + beta;
    let per = anchor.perimeter();
    let mut terms = Vec::new();
    for i in 0..n {
        // edge e = [v_i, v_{i+1}]
        let (a, b) = (v[i], v[(i + 1) % n]);
        let Ok(line) = Line::through(a, b) else { continue };
        let Some((c_lo, c_hi)) = anchor.chord(&line) else { continue };
        let (sa, sb) = (line.coordinate(a), line.coordinate(b));
        let (e_lo, e_hi) = (sa.min(sb), sa.max(sb));
        let (lo, hi) = (e_lo.max(c_lo), e_hi.min(c_hi));
        if hi - lo <= 0.0 {
            continue;
        }
        let chord = c_hi - c_lo;
        for forward in [true, false] {
            // walking a -> b (forward) closes at q = a; otherwise closes at q = b
            let sq = if forward { sa } else { sb };
            let (u1, u2) = ((lo - sq).abs().min((hi - sq).abs()), (lo - sq).abs().max((hi - sq).abs()));
            let n_free = count_free_crossings(v, i, forward, &line);
            let log_int = log_sub_exp(k * u2, k * u1) - k.ln();
            terms.push(pc.ln() + n_free as f64 * (-pc).ln_1p() - (2.0 * per * chord).ln() + log_int);
        }
    }
    log_sum_exp(&terms) - k * contour.length()
}

/// Replays the traversal starting on edge `i` and counts the crossings of
/// the edge's line behind the start whose closing segment is free.
fn count_free_crossings(v: &[Point], i: usize, forward: bool, line: &Line) -> usize {
    let n = v.len();
    // vertices in walking order: far end of edge i first, closing end q last
    let order: Vec<Point> = if forward {
        (1..=n).map(|k| v[(i + k) % n]).collect()
    } else {
        (0..n).map(|k| v[(i + n - k) % n]).collect()
    };
    let q = order[n - 1];
    let sq = line.coordinate(q);
    let o = (line.coordinate(order[0]) - sq).signum();
    let p_ref = order[0].lerp(q, 0.5);
    let mut idx = SegmentIndex::new(0.5);
    let mut count = 0;
    // the final edge meets the line only at q
    for k in 0..n - 2 {
        let (s, e) = (order[k], order[k + 1]);
        let (da, db) = (line.signed_distance(s), line.signed_distance(e));
        if da * db < 0.0 {
            let c = s + (e - s) * (da / (da - db));
            if (line.coordinate(c) - sq) * o < 0.0 && open_segment_free(&idx, c, p_ref, |_| false) {
                count += 1;
            }
        }
        idx.push(s, e);
    }
    count
}

/// Anchors/targets of the free path family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFamilySpec {
    pub x: Point,
    pub y: Point,
    pub delta: f64,
}

impl PathFamilySpec {
    pub fn validate(&self, window: Option<&Window>) -> Result<()> {
        if !(self.delta > 0.0) {
            return invalid("delta must be positive");
        }
        if self.x.dist(self.y) <= 2.0 * self.delta {
            return invalid("need dist(x, y) > 2 delta");
        }
        if let Some(w) = window {
            for c in [self.x, self.y] {
                if w.clearance(c) < self.delta {
                    return invalid("anchor balls must lie inside the window");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedPath {
    pub path: Polyline,
    pub log_target_density: f64,
    pub log_proposal_density: f64,
}

impl WeightedPath {
    pub fn weight(&self) -> f64 {
        (self.log_target_density - self.log_proposal_density).exp()
    }
}

/// Walk from the circle around `x` until its first entry into the ball
/// around `y`; the path ends at the entry point. The proposal density is
/// `exp(-(2 + beta) length) / (4 pi delta)` relative to the line-set measure,
/// so the weight is the constant `4 pi delta`.
pub fn propose_free_path<R: Rng + ?Sized>(
    spec: &PathFamilySpec,
    beta: f64,
    window: Option<&Window>,
    rng: &mut R,
) -> Result<Option<WeightedPath>> {
    spec.validate(window)?;
    if beta < 2.0 {
        return invalid(format!("beta must be >= 2, got {beta}"));
    }
    let params = WalkParams {
        target: Some((spec.y, spec.delta)),
        domain: window.cloned(),
        max_entries: 1,
        ..WalkParams::plain(beta - 2.0)
    };
    let w = run_walk(start_walk(spec.x, spec.delta, &params, rng), &params, None, rng);
    if w.status != WalkStatus::EntryCap {
        return Ok(None);
    }
    // cut the last segment at its first entry point
    let mut pts = w.trace.clone();
    let n = pts.len();
    let (a, b) = (pts[n - 2], pts[n - 1]);
    let ts = crate::geometry::segment_circle_params(a, b, spec.y, spec.delta);
    let t = ts.into_iter().find(|&t| (a + (b - a) * t - spec.y).dot(b - a) < 0.0).unwrap_or(1.0);
    pts[n - 1] = a + (b - a) * t;
    let path = Polyline { points: pts };
    let len = path.length();
    let k = 2.0 + beta;
    Ok(Some(WeightedPath {
        path,
        log_target_density: -k * len,
        log_proposal_density: -k * len - (4.0 * std::f64::consts::PI * spec.delta).ln(),
    }))
}
