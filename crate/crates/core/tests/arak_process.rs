use polyfield::arak::{chord_crossings, run_arak, ArakOptions};
use polyfield::geometry::{Point, Window};
use polyfield::rng::{stream, Subsystem};
use polyfield::stats::{ks_pvalue, ks_statistic, Estimate};
use std::f64::consts::PI;

fn runs(w: &Window, n: usize, seed: u64, angle: f64) -> Vec<polyfield::arak::ArakConfiguration> {
    polyfield::par::map(n, |r| {
        let mut rng = stream(seed, Subsystem::Arak, r as u64);
        run_arak(w, &ArakOptions { time_angle: angle, ..Default::default() }, &mut rng).unwrap()
    })
}

#[test]
fn chord_sections_are_poisson_rate_two() {
    let w = Window::disk(2.0).unwrap();
    let cfgs = runs(&w, 600, 3, 0.0);
    let (a, b) = (Point::new(-2.0, 0.3), Point::new(2.0, 0.3));
    let len = a.dist(b);
    let counts: Vec<f64> = cfgs.iter().map(|c| chord_crossings(c, a, b).len() as f64 / len).collect();
    let e = Estimate::from_samples(&counts);
    assert!(e.within(2.0, 3.5), "{e:?}");
    // first three spacings from the chord start, each Exp(2) when uncensored
    let mut gaps = Vec::new();
    for c in &cfgs {
        let xs = chord_crossings(c, a, b);
        let mut prev = 0.0;
        for x in xs.iter().take(3) {
            gaps.push(x - prev);
            prev = *x;
        }
    }
    let d = ks_statistic(&gaps, |g| 1.0 - (-2.0 * g).exp());
    assert!(ks_pvalue(d, gaps.len()) > 0.01, "D = {d}");
}

#[test]
fn interior_birth_count() {
    let w = Window::square(Point::ORIGIN, 2.0).unwrap();
    let cfgs = runs(&w, 2000, 5, 0.0);
    let xs: Vec<f64> = cfgs.iter().map(|c| c.stats.interior_births as f64).collect();
    assert!(Estimate::from_samples(&xs).within(PI * 4.0, 3.5));
    let bd: Vec<f64> = cfgs.iter().map(|c| c.stats.boundary_births as f64).collect();
    assert!(Estimate::from_samples(&bd).within(8.0, 3.5));
}

#[test]
fn time_axis_direction_does_not_matter() {
    let w = Window::disk(2.0).unwrap();
    let stat = |angle: f64, seed: u64| {
        let cfgs = runs(&w, 600, seed, angle);
        let lens: Vec<f64> = cfgs.iter().flat_map(|c| c.edges().map(|(p, q)| p.dist(q)).collect::<Vec<_>>()).collect();
        let total: Vec<f64> = cfgs.iter().map(|c| c.total_length()).collect();
        (lens, Estimate::from_samples(&total))
    };
    let (l0, t0) = stat(0.0, 21);
    let (l1, t1) = stat(1.1, 22);
    let joint = (t0.stderr.powi(2) + t1.stderr.powi(2)).sqrt();
    assert!((t0.mean - t1.mean).abs() < 3.5 * joint, "{t0:?} {t1:?}");
    // expected total length pi * area
    assert!(t0.within(PI * PI * 4.0, 3.5), "{t0:?}");
    let (e0, e1) = (Estimate::from_samples(&l0), Estimate::from_samples(&l1));
    let joint = (e0.stderr.powi(2) + e1.stderr.powi(2)).sqrt();
    assert!((e0.mean - e1.mean).abs() < 3.5 * joint, "{e0:?} {e1:?}");
}
