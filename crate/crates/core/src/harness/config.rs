use crate::arak::ArakOptions;
use crate::error::{invalid, Error, Result};
use crate::gibbs::{FieldSpec, SamplerOptions, Strategy};
use crate::geometry::Region;
use crate::tension::Mode;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Arak,
    Gibbs,
    Tension,
    Wulff,
}

/// Scales of an experiment. Unset `l`, `alpha` and `delta` are filled in by
/// `ExperimentConfig::resolve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    /// Radius of the observation disk about the origin.
    pub l: Option<f64>,
    /// Excess magnetisation density of the droplet experiment.
    pub a: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub replicas: usize,
    pub horizon: f64,
    pub burn_in: f64,
    /// Distance kept from the window boundary by interior observables.
    pub margin: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { l: None, a: None, alpha: None, delta: None, replicas: 1, horizon: 20.0, burn_in: 0.0, margin: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensionSection {
    pub lambdas: Vec<f64>,
    pub delta: f64,
    pub mode: Mode,
    pub walks_per_env: usize,
    pub drift: bool,
    pub sim_kill_rate: Option<f64>,
    pub max_entries: u32,
    /// Walks in an empty environment instead of field draws.
    pub empty_environment: bool,
    pub environment_margin: f64,
}

impl Default for TensionSection {
    fn default() -> Self {
        TensionSection {
            lambdas: vec![6.0, 8.0, 10.0, 12.0],
            delta: 1.0,
            mode: Mode::Infinite,
            walks_per_env: 500,
            drift: true,
            sim_kill_rate: Some(0.0),
            max_entries: 32,
            empty_environment: false,
            environment_margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WulffSection {
    /// Known spontaneous magnetisation; estimated when absent.
    pub m_beta: Option<f64>,
    pub m_replicas: usize,
    /// Tilt `h = h_scale * a`, clipped to `beta / (pi alpha)`.
    pub h_scale: f64,
    /// Tilted field draws offered to the rejection step.
    pub budget: usize,
    pub c_large: f64,
}

impl Default for WulffSection {
    fn default() -> Self {
        WulffSection { m_beta: None, m_replicas: 8, h_scale: 1.0, budget: 100, c_large: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub jsonl: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub field: FieldSpec,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub sampler: SamplerOptions,
    #[serde(default)]
    pub arak: ArakOptions,
    #[serde(default)]
    pub tension: TensionSection,
    #[serde(default)]
    pub wulff: WulffSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Schema {
            location: e.span().map_or("document".into(), |s| format!("line {}", line_of(text, s.start))),
            message: e.message().to_string(),
        })?;
        cfg.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Schema { location, message } => {
                Error::Schema { location: format!("{}: {location}", path.display()), message }
            }
            e => e,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Observation radius: `schedule.l`, else the distance from the origin
    /// to the window boundary.
    pub fn l(&self) -> f64 {
        self.schedule.l.unwrap()
    }

    pub fn alpha(&self) -> f64 {
        self.schedule.alpha.unwrap()
    }

    pub fn delta(&self) -> f64 {
        self.schedule.delta.unwrap()
    }

    pub fn strategy(&self) -> Strategy {
        Strategy { horizon: self.schedule.horizon, burn_in: self.schedule.burn_in }
    }

    /// Fills defaults (`l` from the window, `alpha = sqrt(L) ln L`,
    /// `delta = (ln L)^2`) and validates.
    pub fn resolve(mut self) -> Result<Self> {
        self.field.validate()?;
        let s = &mut self.schedule;
        if s.l.is_none() {
            s.l = Some(self.field.window.clearance(crate::geometry::Point::ORIGIN).max(0.0));
        }
        let l = s.l.unwrap();
        if !(l > 0.0 && l.is_finite()) {
            return invalid(format!("schedule.l must be positive, got {l}"));
        }
        let ln = l.ln().max(1e-3);
        s.alpha.get_or_insert(l.sqrt() * ln);
        s.delta.get_or_insert(ln * ln);
        if s.replicas == 0 {
            return invalid("schedule.replicas must be positive");
        }
        if !(s.horizon > 0.0) || !(s.burn_in >= 0.0) || !(s.margin >= 0.0) {
            return invalid("schedule.horizon must be positive, burn_in and margin non-negative");
        }
        let w = self.field.window.to_region();
        let inside = |r: &Region, name: &str| -> Result<()> {
            if w.contains_region(r) {
                Ok(())
            } else {
                invalid(format!("{name} must lie inside the window"))
            }
        };
        if let Some(c) = &self.field.cutoff {
            inside(&c.region, "field.cutoff.region")?;
        }
        if let Some(u) = &self.field.forbidden {
            inside(u, "field.forbidden")?;
        }
        if let Some(f) = &self.field.area_field {
            inside(&f.region, "field.area_field.region")?;
        }
        if self.kind == Kind::Tension {
            let t = &self.tension;
            if t.lambdas.is_empty() || t.lambdas.windows(2).any(|p| p[1] <= p[0]) {
                return invalid("tension.lambdas must be non-empty and increasing");
            }
        }
        if self.kind == Kind::Wulff {
            let a = self.schedule.a.ok_or_else(|| Error::Schema {
                location: "schedule.a".into(),
                message: "missing field `a` (required for kind = \"wulff\")".into(),
            })?;
            if let Some(m) = self.wulff.m_beta {
                check_excess(a, m)?;
            }
            if self.wulff.budget == 0 {
                return invalid("wulff.budget must be positive");
            }
        }
        Ok(self)
    }
}

/// `a` must lie in `(0, 2 pi |m|)` for `m` in `(-1, 0)`.
pub fn check_excess(a: f64, m: f64) -> Result<()> {
    if !(m > -1.0 && m < 0.0) {
        return invalid(format!("magnetisation estimate {m} outside (-1, 0)"));
    }
    if !(a > 0.0 && a < 2.0 * PI * m.abs()) {
        return invalid(format!("schedule.a = {a} outside (0, 2 pi |M|) = (0, {})", 2.0 * PI * m.abs()));
    }
    Ok(())
}
