use clap::{Args, Parser, Subcommand};
use polyfield::gibbs::{AreaField, Cutoff, FieldSpec};
use polyfield::harness::{
    analyze, config_from_records, read_jsonl, to_jsonl, render, run_experiment, run_wulff_experiment, write_jsonl, ExperimentConfig, Kind, RunOutput,
};
use polyfield::tension::Mode;
use polyfield::{Error, Point, Region, Result, Window};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyfield", version, about = "Polygonal Markov field simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file. Siblings with .csv, .svg and .json extensions are
    /// written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dynamic construction of the Arak process in a disk.
    RunArak {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Graphical construction of the Gibbs field.
    RunGibbs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        field: FieldFlags,
    },
    /// Surface tension estimates over a list of separations.
    EstimateTension {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long)]
        walks: Option<usize>,
        /// Walk in an empty environment.
        #[arg(long)]
        empty: bool,
    },
    /// Droplet experiment by tilt-then-reject conditioning.
    Wulff {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        field: FieldFlags,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        m_beta: Option<f64>,
    },
    /// Observables of the snapshots in a JSONL run file.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "L")]
        l: Option<f64>,
    },
    /// SVG of a vertex-list snapshot or of the first record of a JSONL file.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct FieldFlags {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Cut-off scale: contours of diameter >= alpha hitting the cut-off
    /// region are not born.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Region as disk:x,y,r or annulus:x,y,inner,outer or
    /// polygon:x1,y1;x2,y2;...
    #[arg(long, value_parser = parse_region)]
    cutoff_region: Option<Region>,
    #[arg(long, value_parser = parse_region)]
    forbid: Option<Region>,
    #[arg(long)]
    field: Option<f64>,
    #[arg(long, value_parser = parse_region)]
    field_region: Option<Region>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "finite" => Ok(Mode::Finite),
        "infinite" => Ok(Mode::Infinite),
        _ => Err(format!("expected finite or infinite, got {s}")),
    }
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    let (shape, rest) = s.split_once(':').ok_or("expected shape:coordinates")?;
    let nums = |t: &str| -> std::result::Result<Vec<f64>, String> {
        t.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"))).collect()
    };
    let r = match shape {
        "disk" => match nums(rest)?[..] {
            [x, y, r] => Region::Disk { center: Point::new(x, y), radius: r },
            _ => return Err("disk needs x,y,r".into()),
        },
        "annulus" => match nums(rest)?[..] {
            [x, y, i, o] => Region::Annulus { center: Point::new(x, y), inner: i, outer: o },
            _ => return Err("annulus needs x,y,inner,outer".into()),
        },
        "polygon" => {
            let mut vertices = Vec::new();
            for v in rest.split(';') {
                match nums(v)?[..] {
                    [x, y] => vertices.push(Point::new(x, y)),
                    _ => return Err(format!("bad vertex {v}")),
                }
            }
            Region::Polygon { vertices }
        }
        _ => return Err(format!("unknown shape {shape}")),
    };
    r.validate().map_err(|e| e.to_string())?;
    Ok(r)
}

fn base_config(kind: Kind, common: &Common, beta: f64, radius: f64) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig {
            kind,
            seed: 0,
            field: FieldSpec::new(beta, Window::disk(radius)?)?,
            schedule: Default::default(),
            sampler: Default::default(),
            arak: Default::default(),
            tension: Default::default(),
            wulff: Default::default(),
            output: Default::default(),
        },
    };
    if cfg.kind != kind {
        return Err(Error::Config(format!("config kind {:?} does not match the subcommand", cfg.kind)));
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.replicas {
        cfg.schedule.replicas = r;
    }
    Ok(cfg)
}

fn apply_field(cfg: &mut ExperimentConfig, f: &FieldFlags) -> Result<()> {
    if let Some(b) = f.beta {
        cfg.field.beta = b;
    }
    if let Some(r) = f.radius {
        cfg.field.window = Window::disk(r)?;
        cfg.schedule.l = None;
        cfg.schedule.alpha = None;
        cfg.schedule.delta = None;
    }
    if let Some(h) = f.horizon {
        cfg.schedule.horizon = h;
    }
    if let Some(alpha) = f.cutoff {
        let region = f.cutoff_region.clone().unwrap_or_else(|| cfg.field.window.to_region());
        cfg.field.cutoff = Some(Cutoff { alpha, region });
    }
    if let Some(u) = &f.forbid {
        cfg.field.forbidden = Some(u.clone());
    }
    if let Some(h) = f.field {
        let region = f.field_region.clone().unwrap_or_else(|| cfg.field.window.to_region());
        cfg.field.area_field = Some(AreaField { h, region });
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `--out x.jsonl` (or any extension but csv) writes records there and the
/// CSV, SVG and vertex-list JSON next to it; `--out x.csv` puts the CSV
/// first. Without `--out` the config's output paths are used, and records
/// go to stdout when none is set.
fn emit(out: &RunOutput, cli_out: Option<&Path>, cfg: &ExperimentConfig) -> Result<()> {
    let (jsonl, csv, svg) = match cli_out {
        Some(p) => {
            let is_csv = p.extension().is_some_and(|e| e == "csv");
            let jsonl = if is_csv { p.with_extension("jsonl") } else { p.to_path_buf() };
            (Some(jsonl), Some(p.with_extension("csv")), Some(p.with_extension("svg")))
        }
        None => (cfg.output.jsonl.clone(), cfg.output.csv.clone(), cfg.output.svg.clone()),
    };
    match &jsonl {
        Some(p) => {
            write_jsonl(p, &out.records)?;
            log::info!("wrote {}", p.display());
        }
        None => {
            std::io::stdout().lock().write_all(to_jsonl(&out.records).as_bytes())?;
        }
    }
    if let Some(p) = csv {
        write_file(&p, &out.csv)?;
    }
    if let (Some(p), Some(snap)) = (svg, &out.snapshot) {
        if let Some(s) = out.svg() {
            write_file(&p, &s)?;
        }
        write_file(&p.with_extension("json"), &serde_json::to_string_pretty(snap)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunArak { common, radius } => {
            let mut cfg = base_config(Kind::Arak, &common, 2.0, radius.unwrap_or(4.0))?;
            if let (Some(r), Some(_)) = (radius, &common.config) {
                cfg.field.window = Window::disk(r)?;
            }
            let cfg = cfg.resolve()?;
            emit(&run_experiment(&cfg)?, common.out.as_deref(), &cfg)
        }
        Command::RunGibbs { common, field } => {
            let mut cfg = base_config(Kind::Gibbs, &common, 5.0, 6.0)?;
            apply_field(&mut cfg, &field)?;
            let cfg = cfg.resolve()?;
            emit(&run_experiment(&cfg)?, common.out.as_deref(), &cfg)
        }
        Command::EstimateTension { common, beta, delta, lambda, mode, walks, empty } => {
            let mut cfg = base_config(Kind::Tension, &common, beta.unwrap_or(5.0), 1.0)?;
            if let Some(b) = beta {
                cfg.field.beta = b;
            }
            let t = &mut cfg.tension;
            if let Some(d) = delta {
                t.delta = d;
            }
            if let Some(l) = lambda {
                t.lambdas = l;
            }
            if let Some(m) = mode {
                t.mode = m;
            }
            if let Some(w) = walks {
                t.walks_per_env = w;
            }
            t.empty_environment |= empty;
            let cfg = cfg.resolve()?;
            emit(&run_experiment(&cfg)?, common.out.as_deref(), &cfg)
        }
        Command::Wulff { common, field, a, alpha, budget, m_beta } => {
            let mut cfg = base_config(Kind::Wulff, &common, 5.0, 20.0)?;
            apply_field(&mut cfg, &field)?;
            if a.is_some() {
                cfg.schedule.a = a;
            }
            if alpha.is_some() {
                cfg.schedule.alpha = alpha;
            }
            if let Some(b) = budget {
                cfg.wulff.budget = b;
            }
            if m_beta.is_some() {
                cfg.wulff.m_beta = m_beta;
            }
            let cfg = cfg.resolve()?;
            let run = run_wulff_experiment(&cfg)?;
            let s = &run.summary;
            eprintln!(
                "accepted {} of {} proposals (constraint met {}, event held {}), h = {:.4}",
                s.accepted, s.proposals, s.constraint_met, s.event_held, s.h
            );
            emit(&run.output, common.out.as_deref(), &cfg)
        }
        Command::Analyze { common, input, alpha, delta, l } => {
            let records = read_jsonl(&input)?;
            let mut cfg = match &common.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => config_from_records(&records)?,
            };
            if l.is_some() {
                cfg.schedule.l = l;
            }
            if alpha.is_some() {
                cfg.schedule.alpha = alpha;
            }
            if delta.is_some() {
                cfg.schedule.delta = delta;
            }
            let cfg = cfg.resolve()?;
            let out = analyze(&cfg, &records)?;
            match common.out.as_deref() {
                Some(p) if p.extension().is_some_and(|e| e == "csv") => {
                    write_file(p, &out.csv)?;
                    write_jsonl(&p.with_extension("jsonl"), &out.records)
                }
                other => emit(&out, other, &cfg),
            }
        }
        Command::Render { input, out } => {
            let svg = render(&std::fs::read_to_string(&input)?)?;
            match out {
                Some(p) => write_file(&p, &svg),
                None => {
                    print!("{svg}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
