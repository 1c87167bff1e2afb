use crate::geometry::{segment_circle_params, Point, SegmentIndex, Window};
use crate::error::{invalid, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Direction updates happen at rate 4 per unit length.
pub const TURN_RATE: f64 = 4.0;

/// Turn angle on `(0, 2 pi)` with density `|sin phi| / 4`: a typical angle
/// `arccos(1 - 2U)` reflected through `pi` with probability one half.
pub fn sample_turn_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let a = (1.0 - 2.0 * rng.random::<f64>()).acos();
    if rng.random::<bool>() {
        a + PI
    } else {
        a
    }
}

pub fn turn_density(phi: f64) -> f64 {
    phi.sin().abs() / 4.0
}

/// Importance drift along a fixed axis. Under the proposal the walk heading
/// at angle `t` to the axis turns at rate `a(t) = total_rate - strength cos t`
/// and picks new headings with density proportional to
/// `|sin(t' - t)| g(t')`, `g = 4 / a`. The likelihood ratio of a path then
/// collapses to `g(t0) ... ` factors, see `step_walk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub axis: f64,
    pub strength: f64,
    pub total_rate: f64,
}

impl Drift {
    pub fn new(axis: f64, strength: f64, total_rate: f64) -> Result<Self> {
        if !(strength >= 0.0 && total_rate > strength && total_rate.is_finite()) {
            return invalid(format!("drift needs 0 <= strength < total rate, got {strength}, {total_rate}"));
        }
        Ok(Drift { axis, strength, total_rate })
    }

    /// Drift for killing rate `kill` with `sim_kill` simulated: the heading
    /// law stays roughly stationary when `g` averages to one.
    pub fn balanced(axis: f64, kill: f64, sim_kill: f64) -> Result<Self> {
        let a = TURN_RATE + kill - sim_kill;
        Drift::new(axis, (a * a - TURN_RATE * TURN_RATE).max(0.0).sqrt(), a)
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.total_rate - self.strength * (t - self.axis).cos()
    }

    pub fn g(&self, t: f64) -> f64 {
        TURN_RATE / self.rate(t)
    }

    fn g_max(&self) -> f64 {
        TURN_RATE / (self.total_rate - self.strength)
    }

    fn series(&self) -> (f64, f64) {
        let (a, m) = (self.total_rate, self.strength);
        let root = (a * a - m * m).sqrt();
        let r = if m > 0.0 { (a - root) / m } else { 0.0 };
        (TURN_RATE / root, r)
    }

    /// Mean of `g` over uniform headings.
    pub fn g_mean(&self) -> f64 {
        self.series().0
    }

    /// `Z(t) = int |sin(t' - t)| / 4 g(t') dt'`, from the Fourier series of
    /// `g` (only even harmonics survive the convolution).
    pub fn z(&self, t: f64) -> f64 {
        let (g0, r) = self.series();
        let u = t - self.axis;
        let mut sum = 1.0;
        let r2 = r * r;
        let mut rk = r2;
        let mut k = 2.0;
        while rk > 1e-17 {
            sum += 2.0 * rk * (k * u).cos() / (1.0 - k * k);
            rk *= r2;
            k += 2.0;
        }
        g0 * sum
    }

    fn sample_heading<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gm = self.g_max();
        loop {
            let t = 2.0 * PI * rng.random::<f64>();
            if rng.random::<f64>() * gm < self.g(t) {
                return t;
            }
        }
    }

    fn sample_turn<R: Rng + ?Sized>(&self, base: f64, rng: &mut R) -> f64 {
        let gm = self.g_max();
        loop {
            let t = base + sample_turn_angle(rng);
            if rng.random::<f64>() * gm < self.g(t) {
                return t;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkStatus {
    Alive,
    KilledRate,
    KilledSelf,
    KilledObstacle,
    KilledBoundary,
    /// Entry cap reached; counting stopped (one-sided bias, flagged).
    EntryCap,
}

impl WalkStatus {
    pub fn is_alive(self) -> bool {
        self == WalkStatus::Alive
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkParams {
    /// Target killing rate (`beta - 2`).
    pub kill_rate: f64,
    /// Killing rate actually simulated; the rest enters the weight.
    pub sim_kill_rate: f64,
    pub drift: Option<Drift>,
    /// Ball whose inward boundary crossings are counted.
    pub target: Option<(Point, f64)>,
    /// Finite-volume mode: killed on leaving this domain.
    pub domain: Option<Window>,
    pub max_entries: u32,
    pub max_steps: usize,
}

impl WalkParams {
    pub fn plain(kill_rate: f64) -> Self {
        WalkParams {
            kill_rate,
            sim_kill_rate: kill_rate,
            drift: None,
            target: None,
            domain: None,
            max_entries: 32,
            max_steps: 1_000_000,
        }
    }

    fn turn_rate(&self, heading: f64) -> f64 {
        self.drift.map_or(TURN_RATE, |d| d.rate(heading))
    }
}

/// Continuum walk with speed one, direction updates at rate 4 and
/// self-avoidance. `log_weight` accumulates importance corrections.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub position: Point,
    pub direction: Point,
    pub heading: f64,
    pub trace: Vec<Point>,
    pub status: WalkStatus,
    pub length: f64,
    pub log_weight: f64,
    pub entries: u32,
    /// Sum over counted entries of the importance weight at the entry.
    pub score: f64,
    pub turns: usize,
    /// Length of the last straight run (diagnostic).
    pub last_run: f64,
    index: SegmentIndex,
}

impl WalkState {
    pub fn new(position: Point, direction: Point) -> Self {
        WalkState {
            position,
            direction: direction.normalized(),
            heading: direction.angle(),
            trace: vec![position],
            status: WalkStatus::Alive,
            length: 0.0,
            log_weight: 0.0,
            entries: 0,
            score: 0.0,
            turns: 0,
            last_run: 0.0,
            index: SegmentIndex::new(0.5),
        }
    }

    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    fn set_heading(&mut self, t: f64) {
        self.heading = t.rem_euclid(2.0 * PI);
        self.direction = Point::from_angle(self.heading);
    }
}

/// Start on the circle `|z - x| = delta`: a line through the ball drawn from
/// the normalised line measure, one of its two boundary points with
/// probability 1/2, heading outwards along the line. Equivalently the
/// heading is uniform and the signed offset of the line from `x` uniform
/// on `[-delta, delta]`; with a drift the heading is drawn from `g`.
pub fn start_walk<R: Rng + ?Sized>(x: Point, delta: f64, params: &WalkParams, rng: &mut R) -> WalkState {
    let offset = delta * (2.0 * rng.random::<f64>() - 1.0);
    let (psi, lw) = match params.drift {
        Some(d) => {
            let psi = d.sample_heading(rng);
            (psi, (d.g_mean() / d.g(psi)).ln())
        }
        None => (2.0 * PI * rng.random::<f64>(), 0.0),
    };
    let d = Point::from_angle(psi);
    let start = x + d.perp() * offset + d * (delta * delta - offset * offset).max(0.0).sqrt();
    let mut s = WalkState::new(start, d);
    s.heading = psi;
    s.log_weight = lw;
    s
}

/// Advances the walk to its next event: direction update, kill, self-hit,
/// obstacle hit or boundary exit. Inward crossings of the target circle on
/// the way are counted.
///
/// Over a straight run of length `s` in heading `t` the log likelihood
/// ratio gains `-(4 + kill - a(t) - sim_kill) s`; a turn from `t` to `t'`
/// adds `ln(g(t) Z(t) / g(t'))`.
pub fn step_walk<R: Rng + ?Sized>(state: &mut WalkState, params: &WalkParams, obstacles: Option<&SegmentIndex>, rng: &mut R) {
    if !state.status.is_alive() {
        return;
    }
    let a = params.turn_rate(state.heading);
    let s_turn = Exp::new(a).unwrap().sample(rng);
    let s_kill = if params.sim_kill_rate > 0.0 { Exp::new(params.sim_kill_rate).unwrap().sample(rng) } else { f64::INFINITY };
    // Every event is located as a distance along one reference run so that
    // clipping at the domain does not change the arithmetic before it.
    let mut s0 = s_turn.min(s_kill);
    if !s0.is_finite() {
        s0 = 1e6;
    }
    let mut s = s0;
    let mut event = if s_turn <= s_kill { WalkStatus::Alive } else { WalkStatus::KilledRate };
    if let Some(dom) = &params.domain {
        let sb = dom.exit_distance(state.position, state.direction);
        if sb < s {
            s = sb;
            event = WalkStatus::KilledBoundary;
        }
    }
    let p = state.position;
    let far = p + state.direction * s0;
    let last = state.index.len().checked_sub(1);
    if let Some((t, _)) = state.index.first_hit(p, far, 0.0, |id| Some(id) == last) {
        if t * s0 < s {
            s = t * s0;
            event = WalkStatus::KilledSelf;
        }
    }
    if let Some(obs) = obstacles {
        if let Some((t, _)) = obs.first_hit(p, far, 0.0, |_| false) {
            if t * s0 < s {
                s = t * s0;
                event = WalkStatus::KilledObstacle;
            }
        }
    }
    let end = p + state.direction * s;
    let dk = TURN_RATE + params.kill_rate - a - params.sim_kill_rate;
    if let Some((y, r)) = params.target {
        for t in segment_circle_params(p, far, y, r) {
            let u = t * s0;
            if u > s {
                break;
            }
            if (p + (far - p) * t - y).dot(state.direction) < 0.0 {
                state.entries += 1;
                state.score += (state.log_weight - dk * u).exp();
                if state.entries >= params.max_entries {
                    event = WalkStatus::EntryCap;
                    break;
                }
            }
        }
    }
    state.log_weight -= dk * s;
    state.length += s;
    state.last_run = s;
    state.position = end;
    state.index.push(p, end);
    state.trace.push(end);
    if event != WalkStatus::Alive {
        state.status = event;
        return;
    }
    state.turns += 1;
    if state.turns >= params.max_steps {
        state.status = WalkStatus::KilledRate;
        return;
    }
    let t = state.heading;
    let next = match params.drift {
        Some(d) => {
            let next = d.sample_turn(t, rng);
            state.log_weight += (d.g(t) * d.z(t) / d.g(next)).ln();
            next
        }
        None => t + sample_turn_angle(rng),
    };
    state.set_heading(next);
}

/// Runs to termination.
pub fn run_walk<R: Rng + ?Sized>(mut state: WalkState, params: &WalkParams, obstacles: Option<&SegmentIndex>, rng: &mut R) -> WalkState {
    while state.status.is_alive() {
        step_walk(&mut state, params, obstacles, rng);
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_statistic, Estimate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn turn_angle_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..50_000).map(|_| sample_turn_angle(&mut rng)).collect();
        // CDF of |sin|/4 on (0, 2 pi)
        let cdf = |p: f64| if p <= PI { (1.0 - p.cos()) / 4.0 } else { 0.5 + (1.0 - (p - PI).cos()) / 4.0 };
        assert!(ks_statistic(&xs, cdf) < 0.01);
    }

    #[test]
    fn drift_normaliser_matches_quadrature() {
        let d = Drift::balanced(0.4, 3.0, 0.5).unwrap();
        let n = 20_000;
        let h = 2.0 * PI / n as f64;
        for t in [0.0, 0.4, 1.3, 2.9, 4.0] {
            let q: f64 = (0..n).map(|i| {
                let u = (i as f64 + 0.5) * h;
                turn_density(u - t) * d.g(u)
            }).sum::<f64>() * h;
            assert!((q - d.z(t)).abs() < 1e-6, "{t}: {q} vs {}", d.z(t));
        }
        let mean: f64 = (0..n).map(|i| d.g((i as f64 + 0.5) * h)).sum::<f64>() / n as f64;
        assert!((mean - d.g_mean()).abs() < 1e-9);
        assert!((d.g_mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drifted_turns_follow_their_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Drift::balanced(0.0, 3.0, 0.5).unwrap();
        let t0 = 1.0;
        let xs: Vec<f64> = (0..20_000).map(|_| (d.sample_turn(t0, &mut rng) - t0).rem_euclid(2.0 * PI)).collect();
        let n = 4000;
        let h = 2.0 * PI / n as f64;
        let dens: Vec<f64> = (0..n).map(|i| turn_density((i as f64 + 0.5) * h) * d.g(t0 + (i as f64 + 0.5) * h) / d.z(t0)).collect();
        let cdf = |u: f64| dens[..((u / h) as usize).min(n)].iter().sum::<f64>() * h;
        assert!(ks_statistic(&xs, cdf) < 0.015);
    }

    #[test]
    fn run_lengths_exp4() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = WalkParams { max_steps: 2000, ..WalkParams::plain(0.0) };
        let mut runs = Vec::new();
        // first runs only: later runs are conditioned on avoiding the trace
        for _ in 0..4000 {
            let mut w = WalkState::new(Point::ORIGIN, Point::new(1.0, 0.0));
            step_walk(&mut w, &params, None, &mut rng);
            runs.push(w.last_run);
        }
        let e = Estimate::from_samples(&runs);
        assert!(e.within(0.25, 3.0), "{e:?}");
    }

    #[test]
    fn start_on_circle_outward() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Point::new(1.0, -2.0);
        let p = WalkParams::plain(1.0);
        for _ in 0..1000 {
            let w = start_walk(x, 0.7, &p, &mut rng);
            assert!((w.position.dist(x) - 0.7).abs() < 1e-12);
            assert!(w.direction.dot(w.position - x) >= -1e-12);
        }
    }

    #[test]
    fn start_line_offset_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = Point::new(0.5, 0.5);
        let p = WalkParams::plain(1.0);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| {
                let w = start_walk(x, 2.0, &p, &mut rng);
                w.direction.cross(x - w.position)
            })
            .collect();
        assert!(ks_statistic(&xs, |t| ((t + 2.0) / 4.0).clamp(0.0, 1.0)) < 0.015);
    }

    #[test]
    fn no_kill_without_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = WalkParams { max_steps: 50, ..WalkParams::plain(0.0) };
        for _ in 0..200 {
            let w = run_walk(WalkState::new(Point::ORIGIN, Point::new(1.0, 0.0)), &p, None, &mut rng);
            assert!(matches!(w.status, WalkStatus::KilledSelf | WalkStatus::KilledRate));
            if w.status == WalkStatus::KilledRate {
                assert_eq!(w.turns, 50);
            }
        }
    }

    #[test]
    fn entries_are_weighted_at_entry() {
        // straight shot through a target with extra killing in the weight only
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = WalkParams { target: Some((Point::new(3.0, 0.0), 1.0)), sim_kill_rate: 0.0, ..WalkParams::plain(0.5) };
        let mut w = WalkState::new(Point::ORIGIN, Point::new(1.0, 0.0));
        loop {
            let before = w.entries;
            step_walk(&mut w, &p, None, &mut rng);
            if w.entries > before || !w.status.is_alive() {
                break;
            }
            w.direction = Point::new(1.0, 0.0);
        }
        assert_eq!(w.entries, 1);
        assert!((w.score - (-0.5 * 2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn walk_stays_self_avoiding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = WalkParams::plain(0.5);
        for _ in 0..200 {
            let w = run_walk(WalkState::new(Point::ORIGIN, Point::new(0.0, 1.0)), &p, None, &mut rng);
            // all but the terminal segment must be pairwise non-crossing
            let alive_part = if w.status == WalkStatus::KilledSelf { &w.trace[..w.trace.len() - 1] } else { &w.trace[..] };
            assert!(crate::geometry::chain_crossing(&[(alive_part, false)]).is_none());
        }
    }
}
