use super::enumerate::{enumerate_with_cap, BoundaryMode, DEFAULT_ENUMERATION_CAP};
use crate::error::{invalid, Result};
use crate::geometry::{sample_poisson_lines, Window};
use crate::rng::{stream, Subsystem};
use crate::stats::Estimate;
use serde::{Deserialize, Serialize};

/// Hard cap used by the estimator for rare large line draws.
pub const ESTIMATOR_LINE_CAP: usize = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionEstimate {
    pub window: Window,
    pub mode: BoundaryMode,
    pub replicas: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub max_lines: usize,
    /// Draws with more lines than the default enumeration cap.
    pub over_cap_draws: usize,
}

/// Sum over admissible configurations on the lines of `exp(-2 length)`.
pub fn configuration_sum(lines: &[crate::geometry::Line], window: &Window, mode: BoundaryMode, cap: usize) -> Result<f64> {
    Ok(enumerate_with_cap(lines, window, mode, cap)?.iter().map(|c| (-2.0 * c.total_length()).exp()).sum())
}

/// Monte Carlo over Poisson line draws of the configuration sum; in free
/// mode its expectation is `exp(pi Area)`.
pub fn estimate_partition_function(window: &Window, mode: BoundaryMode, replicas: usize, seed: u64) -> Result<PartitionEstimate> {
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    window.validate()?;
    let mean_lines = window.line_measure();
    if mean_lines > DEFAULT_ENUMERATION_CAP as f64 / 2.0 {
        log::warn!("window has {mean_lines:.2} expected lines; enumeration will often exceed the cap");
    }
    let per: Vec<Result<(f64, usize)>> = crate::par::map(replicas, |r| {
        let mut rng = stream(seed, Subsystem::Lines, r as u64);
        let lines = sample_poisson_lines(window, &mut rng)?;
        Ok((configuration_sum(&lines, window, mode, ESTIMATOR_LINE_CAP)?, lines.len()))
    });
    let mut xs = Vec::with_capacity(replicas);
    let mut max_lines = 0;
    let mut over = 0;
    for r in per {
        let (x, n) = r?;
        xs.push(x);
        max_lines = max_lines.max(n);
        if n > DEFAULT_ENUMERATION_CAP {
            over += 1;
        }
    }
    if over > 0 {
        log::warn!("{over} draw(s) exceeded {DEFAULT_ENUMERATION_CAP} lines and used the extended cap");
    }
    let e = Estimate::from_samples(&xs);
    Ok(PartitionEstimate {
        window: window.clone(),
        mode,
        replicas,
        estimate: e.mean,
        stderr: e.stderr,
        max_lines,
        over_cap_draws: over,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tiny_window_near_one() {
        let w = Window::disk(0.01).unwrap();
        let e = estimate_partition_function(&w, BoundaryMode::Free, 2000, 1).unwrap();
        assert!((e.estimate - (PI * w.area()).exp()).abs() < 4.0 * e.stderr.max(1e-4));
        assert!((e.estimate - 1.0).abs() < 0.01);
        assert!(estimate_partition_function(&w, BoundaryMode::Free, 0, 1).is_err());
    }

    #[test]
    fn empty_mode_not_above_free() {
        let w = Window::disk((0.1 / PI).sqrt()).unwrap();
        let f = estimate_partition_function(&w, BoundaryMode::Free, 4000, 2).unwrap();
        let e = estimate_partition_function(&w, BoundaryMode::Empty, 4000, 2).unwrap();
        assert!(e.estimate <= f.estimate);
        assert!(f.within_target());
    }

    impl PartitionEstimate {
        fn within_target(&self) -> bool {
            (self.estimate - (PI * self.window.area()).exp()).abs() <= 4.0 * self.stderr
        }
    }
}
