use polyfield::geometry::render::{to_svg, Snapshot};
use polyfield::harness::*;
use polyfield::observables::magnetisation;
use polyfield::{Contour, Error, Point, Region, Window};
use std::process::Command;

const GIBBS: &str = r#"
kind = "gibbs"
seed = 5

[field]
beta = 5.0
window = { shape = "disk", center = { x = 0.0, y = 0.0 }, radius = 4.0 }

[schedule]
replicas = 2
horizon = 10.0
margin = 1.0
"#;

fn wulff_config(seed: u64, budget: usize, a: f64, h_scale: f64) -> ExperimentConfig {
    let text = format!(
        r#"
kind = "wulff"
seed = {seed}

[field]
beta = 5.0
window = {{ shape = "disk", center = {{ x = 0.0, y = 0.0 }}, radius = 4.0 }}

[schedule]
l = 4.0
alpha = 0.6
a = {a}

[wulff]
m_beta = -0.999
budget = {budget}
h_scale = {h_scale}
"#
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn replay_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(&dir, "g.toml", GIBBS);
    let a = replay(&p, None).unwrap();
    let b = replay(&p, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(to_jsonl(&a.records), to_jsonl(&b.records));
    let c = replay(&p, Some(6)).unwrap();
    assert_ne!(a.records, c.records);
    for r in &a.records {
        assert_eq!(r.seed, 5);
        assert_eq!(r.build_id, build_id());
        assert_eq!(r.config_hash, a.records[0].config_hash);
    }
    assert!(c.records.iter().all(|r| r.seed == 6));
}

#[test]
fn jsonl_round_trip_and_embedded_config() {
    let cfg = ExperimentConfig::from_toml_str(GIBBS).unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.records.len(), 1 + 2 + 1);
    assert_eq!(out.csv.lines().count(), 1 + 2);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.jsonl");
    write_jsonl(&p, &out.records).unwrap();
    let back = read_jsonl(&p).unwrap();
    assert_eq!(back, out.records);
    assert_eq!(config_from_records(&back).unwrap(), cfg);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(&dir, "bad.toml", &GIBBS.replace("seed = 5\n", ""));
    match replay(&p, None) {
        Err(Error::Schema { location, message }) => {
            assert!(message.contains("seed"), "{message}");
            assert!(location.contains("bad.toml"), "{location}");
        }
        other => panic!("{other:?}"),
    }
    let p = write_config(&dir, "bad2.toml", &GIBBS.replace("replicas = 2", "replicas = \"two\""));
    match replay(&p, None) {
        Err(Error::Schema { location, .. }) => assert!(location.contains("line 10"), "{location}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn svg_fixtures() {
    let w = Window::disk(2.0).unwrap();
    let empty = emit_svg(&w, &[]);
    assert!(empty.starts_with("<svg"));
    assert_eq!(empty.matches("<circle").count(), 1);
    assert!(!empty.contains("Z\""));
    let tri = Contour::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
    let one = emit_svg(&w, std::slice::from_ref(&tri));
    assert_eq!(one.matches("<path").count(), 1);
    assert_eq!(one.matches('Z').count(), 1);
    assert!(one.contains("evenodd"));
    assert!(one.contains("M0.000000,0.000000 L1.000000,0.000000 L0.000000,-1.000000 Z"));
    assert_eq!(one, emit_svg(&w, std::slice::from_ref(&tri)));
    let snap = Snapshot::new(&w, std::slice::from_ref(&tri), &[]);
    assert_eq!(render(&serde_json::to_string(&snap).unwrap()).unwrap(), one);
    assert_eq!(to_svg(&w, &[tri], &[]), one);
}

/// Distance from a polygon to the circle of radius `l`, from points spaced
/// at most `h` apart along the edges. Never below the true distance.
fn sampled_circle_distance(c: &Contour, l: f64, h: f64) -> f64 {
    let v = c.vertices();
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let n = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let p = a + (b - a) * t;
            best = best.min((p.norm() - l).abs());
        }
    }
    best
}

#[test]
fn wulff_accepted_samples_meet_the_filters() {
    let cfg = wulff_config(11, 40, 0.005, 100.0);
    let run = run_wulff_experiment(&cfg).unwrap();
    let s = &run.summary;
    assert!(s.accepted >= 1, "{s:?}");
    assert_eq!(run.reports.len(), s.accepted);
    assert!(s.h.abs() <= 5.0 / (std::f64::consts::PI * 0.6) + 1e-12);
    let target = -0.999 * std::f64::consts::PI * 16.0 + 0.005 * 16.0;
    assert!((s.target_magnetisation - target).abs() < 1e-9);
    let disk = Region::Disk { center: Point::ORIGIN, radius: 4.0 };
    let mut checked = 0;
    for r in run.output.records.iter().filter(|r| r.stage == "wulff" && r.replica.is_some()) {
        if r.data["accepted"] != true {
            continue;
        }
        let snap: Snapshot = serde_json::from_value(r.data["snapshot"].clone()).unwrap();
        let cs = snap.contours().unwrap();
        assert!(magnetisation(&cs, &disk) >= target);
        for c in cs.iter().filter(|c| c.diameter() > 0.6) {
            assert!(sampled_circle_distance(c, 4.0, 1e-3) >= 3.6);
        }
        let rep: polyfield::observables::WulffReport = serde_json::from_value(r.data["report"].clone()).unwrap();
        assert!(rep.constraint_met && rep.is_consistent());
        let radius = 4.0 * (0.005 / (2.0 * std::f64::consts::PI * 0.999)).sqrt();
        assert!((rep.wulff_radius - radius).abs() < 1e-12);
        checked += 1;
    }
    assert_eq!(checked, s.accepted);
}

#[test]
fn wulff_tilt_is_clipped_and_zero_acceptance_reports_diagnostics() {
    let cfg = wulff_config(3, 3, 1.0, 1000.0);
    let run = run_wulff_experiment(&cfg).unwrap();
    let s = &run.summary;
    assert_eq!(s.h, s.h_bound);
    assert!((s.h_bound - 5.0 / (std::f64::consts::PI * 0.6)).abs() < 1e-12);
    assert_eq!(s.accepted, 0);
    assert!(run.reports.is_empty());
    assert_eq!(s.proposals, 3);
    assert!(s.max_magnetisation < s.target_magnetisation);
    let last = run.output.records.last().unwrap();
    assert_eq!(last.replica, None);
    assert_eq!(last.data["accepted"], 0);
}

#[test]
fn analyze_reads_run_records() {
    let cfg = ExperimentConfig::from_toml_str(GIBBS).unwrap();
    let run = run_experiment(&cfg).unwrap();
    let mut acfg = cfg.clone();
    acfg.schedule.alpha = Some(0.5);
    acfg.schedule.delta = Some(0.2);
    let out = analyze(&acfg, &run.records).unwrap();
    let rows: Vec<_> = out.records.iter().filter(|r| r.stage == "analyze").collect();
    assert_eq!(rows.len(), 2);
    for (row, src) in rows.iter().zip(run.records.iter().filter(|r| r.stage == "gibbs" && r.replica.is_some())) {
        assert_eq!(row.data["magnetisation_density"], src.data["magnetisation_density"]);
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyfield"))
}

#[test]
fn cli_writes_outputs_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "g.toml", GIBBS);
    let out = dir.path().join("run.jsonl");
    let st = cli().args(["run-gibbs", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    for ext in ["jsonl", "csv", "svg", "json"] {
        assert!(out.with_extension(ext).exists(), "{ext}");
    }
    let first = std::fs::read_to_string(&out).unwrap();
    let st = cli().args(["run-gibbs", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
    let replayed = replay(&cfg, None).unwrap();
    assert_eq!(first, to_jsonl(&replayed.records));

    let report = dir.path().join("report.csv");
    let st = cli().args(["analyze", "--in"]).arg(&out).args(["--alpha", "0.5", "--delta", "0.2", "--out"]).arg(&report).status().unwrap();
    assert!(st.success());
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 3);

    let svg = dir.path().join("r.svg");
    let st = cli().args(["render", "--in"]).arg(out.with_extension("json")).arg("--out").arg(&svg).status().unwrap();
    assert!(st.success());
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(out.with_extension("svg")).unwrap());
}

#[test]
fn cli_flags_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("arak.jsonl");
    let st = cli().args(["run-arak", "--radius", "2", "--replicas", "2", "--seed", "4", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let recs = read_jsonl(&out).unwrap();
    assert_eq!(recs.iter().filter(|r| r.stage == "arak").count(), 2);
    assert!(recs.iter().all(|r| r.seed == 4));

    let o = cli().args(["run-gibbs", "--config"]).arg(dir.path().join("missing.toml")).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.toml"));

    let o = cli().args(["run-gibbs", "--beta", "1.0", "--radius", "2"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));

    let o = cli().args(["run-gibbs", "--forbid", "disk:0,0"]).output().unwrap();
    assert!(!o.status.success());
}
