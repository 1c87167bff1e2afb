use super::line::Line;
use super::window::Window;
use crate::error::Result;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Line-measure mass of the lines meeting a convex window. By the Cauchy
/// formula this is the perimeter (`2 pi r` for a disk).
pub fn measure_lines_hitting(region: &Window) -> Result<f64> {
    region.validate()?;
    Ok(region.line_measure())
}

/// Poisson line process restricted to the lines hitting `window`.
pub fn sample_poisson_lines<R: Rng + ?Sized>(window: &Window, rng: &mut R) -> Result<Vec<Line>> {
    let mass = measure_lines_hitting(window)?;
    let n = Poisson::new(mass).expect("positive mass").sample(rng) as usize;
    Ok((0..n).map(|_| window.sample_hitting_line(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn cauchy_values() {
        let d = Window::disk(1.0).unwrap();
        assert!((measure_lines_hitting(&d).unwrap() - 2.0 * PI).abs() < 1e-12);
        let s = Window::square(Point::ORIGIN, 1.0).unwrap();
        assert!((measure_lines_hitting(&s).unwrap() - 4.0).abs() < 1e-12);
        assert!(Window::disk(0.0).is_err());
    }

    #[test]
    fn square_measure_by_grid_oracle() {
        // Riemann sum of the hit indicator over a (phi, rho) grid
        let s = Window::square(Point::new(0.3, -0.2), 1.0).unwrap();
        let (np, nr) = (400, 400);
        let rmax = 2.0;
        let mut hits = 0usize;
        for i in 0..np {
            let phi = (i as f64 + 0.5) * PI / np as f64;
            for j in 0..nr {
                let rho = -rmax + (j as f64 + 0.5) * 2.0 * rmax / nr as f64;
                if s.chord(&Line::new(phi, rho)).is_some() {
                    hits += 1;
                }
            }
        }
        let est = hits as f64 * (PI / np as f64) * (2.0 * rmax / nr as f64);
        assert!((est - 4.0).abs() < 0.02, "{est}");
    }

    #[test]
    fn sampled_lines_hit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in [Window::disk_at(Point::new(2.0, 1.0), 1.5).unwrap(), Window::square(Point::ORIGIN, 2.0).unwrap()] {
            for _ in 0..200 {
                for l in sample_poisson_lines(&w, &mut rng).unwrap() {
                    assert!(w.chord(&l).is_some());
                }
            }
        }
    }
}
