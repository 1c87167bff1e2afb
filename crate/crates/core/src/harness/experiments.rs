use super::config::{check_excess, ExperimentConfig, Kind};
use super::record::{config_record, RunRecord};
use crate::arak::run_arak;
use crate::error::{invalid, Error, Result};
use crate::geometry::render::{to_svg, Snapshot};
use crate::geometry::{Contour, Point, Region, Window};
use crate::gibbs::{estimate_spontaneous_magnetisation, sample_field, AreaField, BirthSampler, FieldSpec};
use crate::observables::{
    check_no_boundary_large, extract_skeleton, isoperimetric_check, large_contours, magnetisation, verify_skeleton,
    wulff_report, WulffReport, ISO_C1, ISO_C2,
};
use crate::rng::{child_seed, stream, Subsystem};
use crate::tension::{tension_curve, Environment, TensionOptions};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Records, CSV summary and a representative snapshot of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub csv: String,
    pub snapshot: Option<Snapshot>,
}

impl RunOutput {
    pub fn svg(&self) -> Option<String> {
        let s = self.snapshot.as_ref()?;
        Some(to_svg(&s.window, &s.contours().ok()?, &s.paths()))
    }
}

struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Csv(w)
    }

    fn row(&mut self, cells: &[String]) {
        self.0.write_record(cells).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.0.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// SVG of a configuration in its window (nesting-parity fill).
pub fn emit_svg(window: &Window, contours: &[Contour]) -> String {
    to_svg(window, contours, &[])
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.kind {
        Kind::Arak => run_arak_experiment(cfg),
        Kind::Gibbs => run_gibbs_experiment(cfg),
        Kind::Tension => run_tension_experiment(cfg),
        Kind::Wulff => run_wulff_experiment(cfg).map(|w| w.output),
    }
}

/// Loads a config, optionally overriding the seed, and runs it.
pub fn replay(path: &std::path::Path, seed: Option<u64>) -> Result<RunOutput> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run_experiment(&cfg)
}

pub fn run_arak_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let w = &cfg.field.window;
    let runs: Vec<Result<_>> = crate::par::map(cfg.schedule.replicas, |r| {
        let mut rng = stream(cfg.seed, Subsystem::Arak, r as u64);
        run_arak(w, &cfg.arak, &mut rng)
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let mut csv = Csv::new(&["replica", "total_length", "contours", "paths", "interior_births", "boundary_births", "collisions"]);
    let mut records = vec![config_record(cfg)];
    for (r, a) in runs.iter().enumerate() {
        csv.row(&[
            r.to_string(),
            num(a.total_length()),
            a.contours.len().to_string(),
            a.paths.len().to_string(),
            a.stats.interior_births.to_string(),
            a.stats.boundary_births.to_string(),
            a.stats.collisions.to_string(),
        ]);
        records.push(RunRecord::new(
            cfg,
            "arak",
            Some(r),
            json!({
                "total_length": a.total_length(),
                "stats": a.stats,
                "snapshot": Snapshot::new(w, &a.contours, &a.paths),
            }),
        ));
    }
    let snapshot = runs.first().map(|a| Snapshot::new(w, &a.contours, &a.paths));
    Ok(RunOutput { records, csv: csv.finish(), snapshot })
}

fn observation_disk(cfg: &ExperimentConfig) -> (Region, f64) {
    let r = if cfg.l() > cfg.schedule.margin { cfg.l() - cfg.schedule.margin } else { cfg.l() };
    (Region::Disk { center: Point::ORIGIN, radius: r }, PI * r * r)
}

pub fn run_gibbs_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = &cfg.field;
    let sampler = BirthSampler::calibrate(spec, cfg.sampler, cfg.seed)?;
    let st = cfg.strategy();
    let samples: Vec<Result<_>> =
        crate::par::map(cfg.schedule.replicas, |r| sample_field(spec, &st, &sampler, cfg.seed, r as u64));
    let samples: Vec<_> = samples.into_iter().collect::<Result<_>>()?;
    let (disk, area) = observation_disk(cfg);
    let mut csv = Csv::new(&["replica", "contours", "free_at_zero", "magnetisation_density", "total_length", "mean_ess"]);
    let mut records = vec![config_record(cfg)];
    for (r, s) in samples.iter().enumerate() {
        let c = &s.configuration.contours;
        let m = magnetisation(c, &disk) / area;
        csv.row(&[
            r.to_string(),
            c.len().to_string(),
            s.diagnostics.free_at_zero.to_string(),
            num(m),
            num(s.configuration.total_length()),
            num(s.diagnostics.mean_ess()),
        ]);
        records.push(RunRecord::new(
            cfg,
            "gibbs",
            Some(r),
            json!({
                "magnetisation_density": m,
                "diagnostics": s.diagnostics,
                "snapshot": Snapshot::new(&spec.window, c, &[]),
            }),
        ));
    }
    records.push(RunRecord::new(
        cfg,
        "gibbs",
        None,
        json!({ "birth_mass": sampler.mass, "birth_mass_stderr": sampler.mass_stderr, "pilot_success_rate": sampler.pilot_success_rate }),
    ));
    let snapshot = samples.first().map(|s| Snapshot::new(&spec.window, &s.configuration.contours, &[]));
    Ok(RunOutput { records, csv: csv.finish(), snapshot })
}

pub fn tension_options(cfg: &ExperimentConfig) -> TensionOptions {
    let t = &cfg.tension;
    TensionOptions {
        walks_per_env: t.walks_per_env,
        drift: t.drift,
        reference_kill: None,
        sim_kill_rate: t.sim_kill_rate,
        max_entries: t.max_entries,
        max_steps: 100_000,
        environment: if t.empty_environment {
            Environment::Empty
        } else {
            Environment::Field { beta: None, margin: t.environment_margin, strategy: cfg.strategy(), sampler: cfg.sampler }
        },
    }
}

pub fn run_tension_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let t = &cfg.tension;
    let curve = tension_curve(
        &t.lambdas,
        t.delta,
        cfg.field.beta,
        cfg.schedule.replicas,
        t.mode,
        &tension_options(cfg),
        cfg.seed,
    )?;
    let mut csv = Csv::new(&["lambda", "delta", "beta", "mode", "t_hat", "t_stderr", "tau_lambda", "tau_stderr", "walks", "successes", "cap_hits"]);
    let mut records = vec![config_record(cfg)];
    for (i, e) in curve.estimates.iter().enumerate() {
        csv.row(&[
            num(e.lambda),
            num(e.delta),
            num(e.beta),
            serde_json::to_value(e.mode).unwrap().as_str().unwrap_or("").to_string(),
            num(e.t_hat),
            num(e.t_stderr),
            num(e.tau_lambda),
            num(e.tau_stderr),
            e.walks.to_string(),
            e.successes.to_string(),
            e.cap_hits.to_string(),
        ]);
        records.push(RunRecord::new(cfg, "tension", Some(i), serde_json::to_value(e)?));
    }
    records.push(RunRecord::new(cfg, "tension", None, json!({ "fit": curve.fit })));
    Ok(RunOutput { records, csv: csv.finish(), snapshot: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WulffSummary {
    pub m_beta: f64,
    pub m_beta_stderr: f64,
    pub a: f64,
    pub h: f64,
    pub h_bound: f64,
    pub alpha: f64,
    pub target_magnetisation: f64,
    pub proposals: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub constraint_met: usize,
    pub event_held: usize,
    /// Largest `M_L` seen among the proposals.
    pub max_magnetisation: f64,
    pub clipped_probabilities: usize,
    pub unique_large: usize,
}

#[derive(Debug, Clone)]
pub struct WulffRun {
    pub summary: WulffSummary,
    pub reports: Vec<WulffReport>,
    pub output: RunOutput,
}

/// Droplet experiment: estimate the spontaneous magnetisation, sample the
/// field tilted by an area field on `B(L)` and keep the draws meeting the
/// magnetisation constraint and the boundary event.
pub fn run_wulff_experiment(cfg: &ExperimentConfig) -> Result<WulffRun> {
    if cfg.kind != Kind::Wulff {
        return invalid("config kind must be wulff");
    }
    let l = cfg.l();
    let alpha = cfg.alpha();
    let a = cfg.schedule.a.ok_or_else(|| Error::Config("schedule.a missing".into()))?;
    let beta = cfg.field.beta;
    let (m_beta, m_se) = match cfg.wulff.m_beta {
        Some(m) => (m, 0.0),
        None => {
            let e = estimate_spontaneous_magnetisation(
                beta,
                l + cfg.schedule.margin,
                cfg.schedule.margin,
                cfg.wulff.m_replicas,
                &cfg.strategy(),
                cfg.sampler,
                child_seed(cfg.seed, Subsystem::Misc, 1),
            )?;
            (e.mean, e.stderr)
        }
    };
    check_excess(a, m_beta)?;
    let bound = FieldSpec::max_field(beta, alpha);
    let h = (cfg.wulff.h_scale * a).clamp(-bound, bound);
    let disk = Region::Disk { center: Point::ORIGIN, radius: l };
    let mut spec = cfg.field.clone();
    spec.area_field = Some(AreaField { h, region: disk.clone() });
    spec.validate()?;
    let sampler = BirthSampler::calibrate(&spec, cfg.sampler, child_seed(cfg.seed, Subsystem::Tilt, 0))?;
    let st = cfg.strategy();
    let target = m_beta * PI * l * l + a * l * l;
    let tilt_seed = child_seed(cfg.seed, Subsystem::Tilt, 1);
    let rows: Vec<Result<_>> = crate::par::map(cfg.wulff.budget, |k| -> Result<_> {
        let s = sample_field(&spec, &st, &sampler, tilt_seed, k as u64)?;
        let c = &s.configuration.contours;
        let m = magnetisation(c, &disk);
        let event = check_no_boundary_large(c, alpha, l)?;
        let report = if m >= target && event { Some(wulff_report(c, a, m_beta, l, cfg.wulff.c_large)?) } else { None };
        let keep = if k == 0 || report.is_some() { Some(c.clone()) } else { None };
        Ok((m, event, s.diagnostics.clipped, report, keep))
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let mut csv = Csv::new(&["proposal", "magnetisation", "target", "constraint_met", "event_held", "accepted", "n_large", "hausdorff_to_circle"]);
    let mut records = vec![config_record(cfg)];
    let mut reports = Vec::new();
    let mut snapshot = None;
    let mut summary = WulffSummary {
        m_beta,
        m_beta_stderr: m_se,
        a,
        h,
        h_bound: bound,
        alpha,
        target_magnetisation: target,
        proposals: rows.len(),
        accepted: 0,
        acceptance_rate: 0.0,
        constraint_met: 0,
        event_held: 0,
        max_magnetisation: f64::NEG_INFINITY,
        clipped_probabilities: 0,
        unique_large: 0,
    };
    for (k, (m, event, clipped, report, contours)) in rows.into_iter().enumerate() {
        summary.constraint_met += (m >= target) as usize;
        summary.event_held += event as usize;
        summary.max_magnetisation = summary.max_magnetisation.max(m);
        summary.clipped_probabilities += clipped;
        csv.row(&[
            k.to_string(),
            num(m),
            num(target),
            (m >= target).to_string(),
            event.to_string(),
            report.is_some().to_string(),
            report.as_ref().map_or(String::new(), |r| r.n_large_contours.to_string()),
            report.as_ref().and_then(|r| r.hausdorff_to_circle).map_or(String::new(), num),
        ]);
        let mut data = json!({ "magnetisation": m, "target": target, "event_held": event, "accepted": report.is_some() });
        if let Some(r) = &report {
            summary.accepted += 1;
            summary.unique_large += r.theta_large.is_some() as usize;
            data["report"] = serde_json::to_value(r)?;
            reports.push(r.clone());
        }
        if let Some(c) = contours {
            let snap = Snapshot::new(&spec.window, &c, &[]);
            if report.is_some() {
                data["snapshot"] = serde_json::to_value(&snap)?;
            }
            if snapshot.is_none() || report.is_some() && reports.len() == 1 {
                snapshot = Some(snap);
            }
        }
        records.push(RunRecord::new(cfg, "wulff", Some(k), data));
    }
    summary.acceptance_rate = summary.accepted as f64 / summary.proposals as f64;
    records.push(RunRecord::new(cfg, "wulff", None, serde_json::to_value(&summary)?));
    Ok(WulffRun { summary, reports, output: RunOutput { records, csv: csv.finish(), snapshot } })
}

/// Observables of recorded configurations: magnetisation density, large
/// contours, the boundary event, skeleton checks and (for droplet
/// configs) the Wulff report.
pub fn analyze(cfg: &ExperimentConfig, input: &[RunRecord]) -> Result<RunOutput> {
    let l = cfg.l();
    let alpha = cfg.alpha();
    let delta = cfg.delta();
    let (disk, area) = observation_disk(cfg);
    let mut csv = Csv::new(&["source", "replica", "contours", "magnetisation_density", "large", "event_held", "skeleton_segments", "skeleton_ok", "isoperimetric_slack"]);
    let mut records = vec![config_record(cfg)];
    for (i, rec) in input.iter().enumerate() {
        let Some(snap) = rec.data.get("snapshot") else { continue };
        let snap: Snapshot = serde_json::from_value(snap.clone()).map_err(|e| Error::Schema {
            location: format!("record {i}: data.snapshot"),
            message: e.to_string(),
        })?;
        let contours = snap.contours()?;
        let m = magnetisation(&contours, &disk) / area;
        let (large, large_len) = large_contours(&contours, alpha, l);
        let event = if 6.0 * alpha < l { Some(check_no_boundary_large(&contours, alpha, l)?) } else { None };
        let gamma: Vec<Contour> = large.iter().map(|&k| contours[k].clone()).collect();
        let (segments, ok, iso) = match extract_skeleton(&gamma, alpha, delta, l) {
            Ok(sk) => {
                let ok = verify_skeleton(&sk, &gamma).is_ok();
                let iso = isoperimetric_check(&sk, &gamma, ISO_C1, ISO_C2);
                (Some(sk.segments.len()), Some(ok), Some(iso))
            }
            Err(_) => (None, None, None),
        };
        let wulff = match (cfg.kind, cfg.schedule.a, cfg.wulff.m_beta) {
            (Kind::Wulff, Some(a), Some(mb)) => Some(wulff_report(&contours, a, mb, l, cfg.wulff.c_large)?),
            _ => None,
        };
        csv.row(&[
            rec.stage.clone(),
            rec.replica.map_or(String::new(), |r| r.to_string()),
            contours.len().to_string(),
            num(m),
            large.len().to_string(),
            event.map_or(String::new(), |e| e.to_string()),
            segments.map_or(String::new(), |s| s.to_string()),
            ok.map_or(String::new(), |o| o.to_string()),
            iso.map_or(String::new(), |r| num(r.slack)),
        ]);
        records.push(RunRecord::new(
            cfg,
            "analyze",
            rec.replica,
            json!({
                "source_stage": rec.stage,
                "magnetisation_density": m,
                "large_contours": large.len(),
                "large_length": large_len,
                "event_held": event,
                "skeleton_segments": segments,
                "skeleton_verified": ok,
                "isoperimetric": iso,
                "wulff": wulff,
            }),
        ));
    }
    Ok(RunOutput { records, csv: csv.finish(), snapshot: None })
}

/// SVG of a snapshot given as a vertex-list JSON document or as a record
/// carrying `data.snapshot`.
pub fn render(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text.lines().find(|l| !l.trim().is_empty()).unwrap_or(""))
        .or_else(|_| serde_json::from_str(text))?;
    let snap = v.get("data").and_then(|d| d.get("snapshot")).cloned().unwrap_or(v);
    let snap: Snapshot = serde_json::from_value(snap)
        .map_err(|e| Error::Schema { location: "snapshot".into(), message: e.to_string() })?;
    Ok(to_svg(&snap.window, &snap.contours()?, &snap.paths()))
}
