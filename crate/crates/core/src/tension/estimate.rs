use super::walk::{run_walk, start_walk, Drift, WalkParams, WalkStatus};
use crate::error::{invalid, Result};
use crate::geometry::{Point, SegmentIndex, Window};
use crate::gibbs::{sample_field, BirthSampler, FieldSpec, SamplerOptions, Strategy};
use crate::rng::{child_seed, stream, Subsystem};
use crate::stats::{linear_fit, Estimate};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Infinite,
    /// Walks are also killed on leaving the square `separation_square`.
    Finite,
}

/// Obstacles met by the walks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Environment {
    Empty,
    /// Independent field draw per replica in the disk around the midpoint
    /// of radius `lambda / 2 + delta + margin`. `beta` defaults to the walk
    /// beta.
    Field {
        beta: Option<f64>,
        margin: f64,
        strategy: Strategy,
        sampler: SamplerOptions,
    },
}

impl Default for Environment {
    fn default() -> Self {
        Environment::Field { beta: None, margin: 2.0, strategy: Strategy::default(), sampler: SamplerOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionOptions {
    pub walks_per_env: usize,
    /// Drift the walks from `x` towards `y` (importance sampling).
    pub drift: bool,
    /// Killing rate the drift is balanced for; defaults to `beta - 2`. Fix
    /// it to share walk trajectories across different `beta`.
    pub reference_kill: Option<f64>,
    /// Killing rate simulated along the walk; the rest goes into the weight.
    /// `None` simulates the full rate.
    pub sim_kill_rate: Option<f64>,
    pub max_entries: u32,
    pub max_steps: usize,
    pub environment: Environment,
}

impl Default for TensionOptions {
    fn default() -> Self {
        TensionOptions {
            walks_per_env: 500,
            drift: true,
            reference_kill: None,
            sim_kill_rate: Some(0.0),
            max_entries: 32,
            max_steps: 100_000,
            environment: Environment::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionEstimate {
    pub lambda: f64,
    pub delta: f64,
    pub beta: f64,
    pub mode: Mode,
    pub t_hat: f64,
    pub t_stderr: f64,
    /// `-ln(t_hat) / lambda`; a lower bound when nothing was observed.
    pub tau_lambda: f64,
    pub tau_stderr: f64,
    /// Upper confidence bound on `T` (set only without successes).
    pub t_upper: Option<f64>,
    pub replicas: usize,
    pub walks: usize,
    pub successes: usize,
    pub cap_hits: usize,
    /// Per-environment estimates of `T`.
    pub per_replica: Vec<f64>,
}

/// Square of side `|y - x| + 2 delta` with two sides parallel to `[x, y]`
/// at distance `delta` from `x` and `y`.
pub fn separation_square(x: Point, y: Point, delta: f64) -> Result<Window> {
    let lam = x.dist(y);
    if !(lam > 0.0) {
        return invalid("x and y must differ");
    }
    let e = (y - x) * (1.0 / lam);
    let n = e.perp();
    let h = lam / 2.0 + delta;
    let m = x.lerp(y, 0.5);
    Window::polygon(vec![m - e * h - n * h, m + e * h - n * h, m + e * h + n * h, m - e * h + n * h])
}

/// Estimate of `T` between the balls of radius `delta` around `x` and `y`
/// from `replicas` environments with `walks_per_env` walks each.
#[allow(clippy::too_many_arguments)]
pub fn estimate_t(
    x: Point,
    y: Point,
    delta: f64,
    beta: f64,
    replicas: usize,
    mode: Mode,
    opts: &TensionOptions,
    seed: u64,
) -> Result<TensionEstimate> {
    let lambda = x.dist(y);
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    if !(lambda > 2.0 * delta) {
        return invalid(format!("need |x - y| > 2 delta, got {lambda} <= {}", 2.0 * delta));
    }
    if !(beta >= 2.0 && beta.is_finite()) {
        return invalid("beta must be finite and >= 2");
    }
    if replicas == 0 || opts.walks_per_env == 0 {
        return invalid("replicas and walks per environment must be positive");
    }
    let kill = beta - 2.0;
    let sim = opts.sim_kill_rate.unwrap_or(kill).min(kill);
    if sim < 0.0 {
        return invalid("simulated kill rate must be non-negative");
    }
    let drift = if opts.drift {
        let r = opts.reference_kill.unwrap_or(kill);
        Some(Drift::balanced((y - x).angle(), r, sim.min(r))?)
    } else {
        None
    };
    let params = WalkParams {
        kill_rate: kill,
        sim_kill_rate: sim,
        drift,
        target: Some((y, delta)),
        domain: match mode {
            Mode::Infinite => None,
            Mode::Finite => Some(separation_square(x, y, delta)?),
        },
        max_entries: opts.max_entries,
        max_steps: opts.max_steps,
    };
    let env = match &opts.environment {
        Environment::Empty => None,
        Environment::Field { beta: b, margin, strategy, sampler } => {
            let r = lambda / 2.0 + delta + margin;
            let spec = FieldSpec::new(b.unwrap_or(beta), Window::disk_at(x.lerp(y, 0.5), r)?)?;
            let env_seed = child_seed(seed, Subsystem::Environment, 0);
            let s = BirthSampler::calibrate(&spec, *sampler, env_seed)?;
            Some((spec, *strategy, s, env_seed))
        }
    };
    let k = opts.walks_per_env;
    let rows: Vec<Result<(f64, usize, usize)>> = crate::par::map(replicas, |r| {
        let obstacles = match &env {
            None => None,
            Some((spec, st, s, es)) => {
                let f = sample_field(spec, st, s, *es, r as u64)?;
                Some(SegmentIndex::from_chains(f.configuration.contours.iter().map(|c| (c.vertices(), true)), 1.0))
            }
        };
        let (mut sum, mut succ, mut cap) = (0.0, 0, 0);
        for j in 0..k {
            let mut rng = stream(seed, Subsystem::Walks, (r * k + j) as u64);
            let w = start_walk(x, delta, &params, &mut rng);
            let w = run_walk(w, &params, obstacles.as_ref(), &mut rng);
            sum += w.score;
            succ += (w.entries > 0) as usize;
            cap += (w.status == WalkStatus::EntryCap) as usize;
        }
        Ok((4.0 * PI * delta * sum / k as f64, succ, cap))
    });
    let rows: Vec<(f64, usize, usize)> = rows.into_iter().collect::<Result<_>>()?;
    let per_replica: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let successes = rows.iter().map(|r| r.1).sum();
    let cap_hits = rows.iter().map(|r| r.2).sum();
    let e = Estimate::from_samples(&per_replica);
    let walks = replicas * k;
    let (tau, tau_se, upper) = if successes == 0 {
        // rule of three on the walk count
        let u = 4.0 * PI * delta * 3.0 / walks as f64;
        (-u.ln() / lambda, f64::NAN, Some(u))
    } else {
        (-e.mean.ln() / lambda, e.stderr / (e.mean * lambda), None)
    };
    Ok(TensionEstimate {
        lambda,
        delta,
        beta,
        mode,
        t_hat: e.mean,
        t_stderr: e.stderr,
        tau_lambda: tau,
        tau_stderr: tau_se,
        t_upper: upper,
        replicas,
        walks,
        successes,
        cap_hits,
        per_replica,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionFit {
    /// Extrapolated `tau` (intercept of `tau_lambda` against `1 / lambda`).
    pub tau: f64,
    pub tau_stderr: f64,
    pub c: f64,
    pub c_stderr: f64,
    /// `(tau_lambda - fit) / tau_stderr` at each lambda.
    pub z_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionCurve {
    pub estimates: Vec<TensionEstimate>,
    pub fit: Option<TensionFit>,
}

/// Weighted fit `tau_lambda = tau + c / lambda`.
pub fn fit_tension(estimates: &[TensionEstimate]) -> Option<TensionFit> {
    let ok: Vec<&TensionEstimate> =
        estimates.iter().filter(|e| e.t_upper.is_none() && e.tau_stderr.is_finite() && e.tau_stderr > 0.0).collect();
    if ok.len() < 2 {
        return None;
    }
    let x: Vec<f64> = ok.iter().map(|e| 1.0 / e.lambda).collect();
    let y: Vec<f64> = ok.iter().map(|e| e.tau_lambda).collect();
    let w: Vec<f64> = ok.iter().map(|e| e.tau_stderr.powi(-2)).collect();
    let f = linear_fit(&x, &y, Some(&w));
    let z = ok.iter().map(|e| (e.tau_lambda - f.intercept - f.slope / e.lambda) / e.tau_stderr).collect();
    // with two points the fit is exact; fall back to the propagated errors
    let (ts, cs) = if ok.len() == 2 {
        let (a, b) = (ok[0], ok[1]);
        let d = 1.0 / a.lambda - 1.0 / b.lambda;
        let cs = (a.tau_stderr.powi(2) + b.tau_stderr.powi(2)).sqrt() / d.abs();
        let ts = (a.tau_stderr.powi(2) * (b.lambda.recip() / d).powi(2) + b.tau_stderr.powi(2) * (a.lambda.recip() / d).powi(2)).sqrt();
        (ts, cs)
    } else {
        (f.intercept_stderr, f.slope_stderr)
    };
    Some(TensionFit { tau: f.intercept, tau_stderr: ts, c: f.slope, c_stderr: cs, z_residuals: z })
}

/// Estimates at each `lambda` (points on the x axis, centred at the
/// origin) with a shared configuration, plus the `1 / lambda` fit.
pub fn tension_curve(
    lambdas: &[f64],
    delta: f64,
    beta: f64,
    replicas: usize,
    mode: Mode,
    opts: &TensionOptions,
    seed: u64,
) -> Result<TensionCurve> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("lambdas must be increasing");
    }
    let mut estimates = Vec::new();
    for (i, &l) in lambdas.iter().enumerate() {
        let x = Point::new(-l / 2.0, 0.0);
        let y = Point::new(l / 2.0, 0.0);
        estimates.push(estimate_t(x, y, delta, beta, replicas, mode, opts, child_seed(seed, Subsystem::Walks, i as u64))?);
    }
    let fit = fit_tension(&estimates);
    Ok(TensionCurve { estimates, fit })
}
