use super::{accepted_at, clan_members, resolve_acceptance, run_free_process, BirthDiagnostics, BirthSampler, FieldSpec, SamplerOptions};
use crate::error::{invalid, Result};
use crate::geometry::{Contour, PolygonalConfiguration, Point, Region, Window};
use crate::observables::magnetisation;
use crate::rng::{stream, Subsystem};
use crate::stats::Estimate;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Strategy {
    /// Simulated span `[-horizon, 0]` in mean lifetimes.
    pub horizon: f64,
    /// Extra lead-in time simulated before `-horizon`.
    #[serde(default)]
    pub burn_in: f64,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy { horizon: 20.0, burn_in: 0.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub birth_mass: f64,
    pub instances: usize,
    pub discarded_cutoff: usize,
    pub discarded_forbidden: usize,
    pub free_at_zero: usize,
    pub accepted_at_zero: usize,
    pub clipped: usize,
    /// `clan_sizes[k]` counts instances alive at 0 whose clan has `k + 1`
    /// members.
    pub clan_sizes: Vec<usize>,
    pub births: BirthDiagnostics,
}

impl FieldDiagnostics {
    pub fn proposal_success_rate(&self) -> f64 {
        self.births.success_rate()
    }

    pub fn mean_ess(&self) -> f64 {
        self.births.mean_ess()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSample {
    pub configuration: PolygonalConfiguration,
    pub diagnostics: FieldDiagnostics,
}

/// One draw of the field at time 0 from the graphical construction on
/// stream `replica` of `seed`.
pub fn sample_field(spec: &FieldSpec, strategy: &Strategy, sampler: &BirthSampler, seed: u64, replica: u64) -> Result<FieldSample> {
    spec.validate()?;
    if !(strategy.burn_in >= 0.0) {
        return invalid("burn-in must be non-negative");
    }
    let mut rng = stream(seed, Subsystem::Births, replica);
    let process = run_free_process(spec, sampler, strategy.horizon + strategy.burn_in, &mut rng)?;
    let res = resolve_acceptance(&process, spec)?;
    let acc = accepted_at(&process, &res, 0.0)?;
    let alive = process.alive_at(0.0);
    let mut clan_sizes = Vec::new();
    for &i in &alive {
        let size = clan_members(&res, &[i]).len();
        if clan_sizes.len() < size {
            clan_sizes.resize(size, 0);
        }
        clan_sizes[size - 1] += 1;
    }
    let contours: Vec<Contour> = acc.iter().map(|&i| process.instances[i].contour.clone()).collect();
    Ok(FieldSample {
        diagnostics: FieldDiagnostics {
            birth_mass: sampler.mass,
            instances: process.instances.len(),
            discarded_cutoff: process.discarded_cutoff,
            discarded_forbidden: process.discarded_forbidden,
            free_at_zero: alive.len(),
            accepted_at_zero: contours.len(),
            clipped: res.clipped,
            clan_sizes,
            births: process.births,
        },
        configuration: PolygonalConfiguration::new(contours),
    })
}

/// Mean of `M(B(l - margin)) / area` over independent fields in the disk
/// of radius `l`.
pub fn estimate_spontaneous_magnetisation(
    beta: f64,
    l: f64,
    margin: f64,
    replicas: usize,
    strategy: &Strategy,
    options: SamplerOptions,
    seed: u64,
) -> Result<Estimate> {
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    if !(margin >= 0.0 && margin < l) {
        return invalid(format!("margin must lie in [0, {l}), got {margin}"));
    }
    let spec = FieldSpec::new(beta, Window::disk(l)?)?;
    let sampler = BirthSampler::calibrate(&spec, options, seed)?;
    let inner = l - margin;
    let region = Region::Disk { center: Point::ORIGIN, radius: inner };
    let area = PI * inner * inner;
    let xs: Vec<Result<f64>> = crate::par::map(replicas, |r| {
        let s = sample_field(&spec, strategy, &sampler, seed, r as u64)?;
        Ok(magnetisation(&s.configuration.contours, &region) / area)
    });
    let xs: Vec<f64> = xs.into_iter().collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&xs))
}
