use super::FieldSpec;
use crate::error::{Error, Result};
use crate::free_ensembles::{propose_free_contour, ClosureParams};
use crate::geometry::{Contour, Window};
use crate::rng::{stream, Subsystem};
use crate::stats::{effective_sample_size, Estimate};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerOptions {
    pub closure: ClosureParams,
    /// Proposals per importance-resampling batch.
    pub batch: usize,
    /// Proposals used to estimate the total birth mass.
    pub pilot: usize,
    /// Consecutive empty batches tolerated before giving up.
    pub max_empty_batches: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { closure: ClosureParams::default(), batch: 32, pilot: 20_000, max_empty_batches: 10_000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BirthDiagnostics {
    pub proposals: u64,
    pub successes: u64,
    pub batches: u64,
    pub empty_batches: u64,
    pub ess_sum: f64,
}

impl BirthDiagnostics {
    pub fn merge(&mut self, o: &BirthDiagnostics) {
        self.proposals += o.proposals;
        self.successes += o.successes;
        self.batches += o.batches;
        self.empty_batches += o.empty_batches;
        self.ess_sum += o.ess_sum;
    }

    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.proposals.max(1) as f64
    }

    /// Mean effective sample size of the non-empty batches.
    pub fn mean_ess(&self) -> f64 {
        self.ess_sum / (self.batches - self.empty_batches).max(1) as f64
    }
}

/// Approximate sampler of the free contour measure restricted to a window,
/// normalised: marks are importance-resampled walk-closure proposals and
/// `mass` estimates the total measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirthSampler {
    pub window: Window,
    pub beta: f64,
    pub options: SamplerOptions,
    pub mass: f64,
    pub mass_stderr: f64,
    pub pilot_success_rate: f64,
}

impl BirthSampler {
    /// Pilot run on stream `Misc` of `seed`.
    pub fn calibrate(spec: &FieldSpec, options: SamplerOptions, seed: u64) -> Result<Self> {
        spec.validate()?;
        let beta = spec.birth_beta();
        let w = &spec.window;
        let xs: Vec<Result<f64>> = crate::par::map(options.pilot, |r| {
            let mut rng = stream(seed, Subsystem::Misc, r as u64);
            Ok(match propose_free_contour(beta, w, w, &options.closure, &mut rng)? {
                Ok(p) => p.weight(),
                Err(_) => 0.0,
            })
        });
        let xs: Vec<f64> = xs.into_iter().collect::<Result<_>>()?;
        let succ = xs.iter().filter(|&&x| x > 0.0).count();
        let e = Estimate::from_samples(&xs);
        Ok(BirthSampler {
            window: w.clone(),
            beta,
            options,
            mass: e.mean,
            mass_stderr: e.stderr,
            pilot_success_rate: succ as f64 / xs.len().max(1) as f64,
        })
    }

    /// Sampler with a known mass (used when the mass comes from elsewhere).
    pub fn with_mass(spec: &FieldSpec, options: SamplerOptions, mass: f64) -> Self {
        BirthSampler {
            window: spec.window.clone(),
            beta: spec.birth_beta(),
            options,
            mass,
            mass_stderr: 0.0,
            pilot_success_rate: f64::NAN,
        }
    }

    /// One mark: a batch of proposals resampled in proportion to weight.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, diag: &mut BirthDiagnostics) -> Result<Contour> {
        let mut empty = 0;
        loop {
            let mut pool: Vec<(Contour, f64)> = Vec::new();
            for _ in 0..self.options.batch {
                diag.proposals += 1;
                if let Ok(p) = propose_free_contour(self.beta, &self.window, &self.window, &self.options.closure, rng)? {
                    let w = p.weight();
                    pool.push((p.contour, w));
                }
            }
            diag.batches += 1;
            diag.successes += pool.len() as u64;
            if pool.is_empty() {
                diag.empty_batches += 1;
                empty += 1;
                if empty >= self.options.max_empty_batches {
                    return Err(Error::ProposalStarvation { attempts: diag.proposals as usize });
                }
                continue;
            }
            let ws: Vec<f64> = pool.iter().map(|p| p.1).collect();
            diag.ess_sum += effective_sample_size(&ws);
            let total: f64 = ws.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut k = ws.len() - 1;
            for (i, w) in ws.iter().enumerate() {
                if u < *w {
                    k = i;
                    break;
                }
                u -= w;
            }
            return Ok(pool.swap_remove(k).0);
        }
    }
}
