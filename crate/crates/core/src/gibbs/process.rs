use super::{BirthDiagnostics, BirthFilter, BirthSampler, FieldSpec};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Contour, Point, Region};
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Contour alive on `[birth, death)`. Members of the initial population
/// (alive at the start of the simulated span) have unknown history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSpaceInstance {
    pub contour: Contour,
    pub birth: f64,
    pub death: f64,
    pub initial: bool,
    /// Uniform mark used by the area-field acceptance.
    pub mark: f64,
}

impl TimeSpaceInstance {
    pub fn alive_at(&self, s: f64) -> bool {
        self.birth <= s && s < self.death
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeProcess {
    pub horizon: f64,
    /// Sorted by birth time; the initial population comes first.
    pub instances: Vec<TimeSpaceInstance>,
    pub discarded_cutoff: usize,
    pub discarded_forbidden: usize,
    pub births: BirthDiagnostics,
}

impl FreeProcess {
    pub fn alive_at(&self, s: f64) -> Vec<usize> {
        (0..self.instances.len()).filter(|&i| self.instances[i].alive_at(s)).collect()
    }
}

/// Stationary free birth-and-death process on `[-horizon, 0]`: births at
/// rate `sampler.mass` with resampled marks, unit death rate, and the
/// stationary Poisson population at `-horizon`. Contours excluded by the
/// cut-off or the forbidden region are dropped at birth.
pub fn run_free_process<R: Rng + ?Sized>(
    spec: &FieldSpec,
    sampler: &BirthSampler,
    horizon: f64,
    rng: &mut R,
) -> Result<FreeProcess> {
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    if !(sampler.mass >= 0.0) {
        return invalid("birth mass must be non-negative");
    }
    let mut out = FreeProcess {
        horizon,
        instances: Vec::new(),
        discarded_cutoff: 0,
        discarded_forbidden: 0,
        births: BirthDiagnostics::default(),
    };
    if sampler.mass == 0.0 {
        return Ok(out);
    }
    let life = Exp::new(1.0).unwrap();
    let n0 = Poisson::new(sampler.mass).unwrap().sample(rng) as usize;
    let mut times: Vec<(f64, bool)> = vec![(-horizon, true); n0];
    let gap = Exp::new(sampler.mass).unwrap();
    let mut t = -horizon;
    loop {
        t += gap.sample(rng);
        if t > 0.0 {
            break;
        }
        times.push((t, false));
    }
    for (birth, initial) in times {
        let contour = sampler.draw(rng, &mut out.births)?;
        let death = birth + life.sample(rng);
        let mark = rng.random::<f64>();
        match spec.filter(&contour) {
            BirthFilter::Admitted => out.instances.push(TimeSpaceInstance { contour, birth, death, initial, mark }),
            BirthFilter::Cutoff => out.discarded_cutoff += 1,
            BirthFilter::Forbidden => out.discarded_forbidden += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Accepted,
    Rejected,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolution {
    pub status: Vec<Status>,
    /// Direct ancestors (instances alive at the birth that may influence
    /// the acceptance).
    pub ancestors: Vec<Vec<usize>>,
    /// Area-field acceptance probabilities above one that were clipped
    /// (large contours only).
    pub clipped: usize,
}

fn linked(spec: &FieldSpec, a: &Contour, b: &Contour) -> bool {
    if spec.area_field.is_some() {
        a.interiors_overlap(b)
    } else {
        a.intersects(b)
    }
}

/// Forward three-valued resolution of the acceptance statuses. Members of
/// the initial population are `Unknown`; an instance is rejected as soon as
/// it hits an accepted ancestor, unknown if an ancestor it depends on is
/// unknown, and otherwise accepted (with the area-field probability in
/// that mode).
pub fn resolve_acceptance(process: &FreeProcess, spec: &FieldSpec) -> Result<Resolution> {
    let inst = &process.instances;
    let n = inst.len();
    if inst.windows(2).any(|w| w[1].birth < w[0].birth) {
        return invalid("instances must be sorted by birth time");
    }
    let mut status = vec![Status::Unknown; n];
    let mut ancestors = vec![Vec::new(); n];
    let mut clipped = 0;
    let mut active: Vec<usize> = Vec::new();
    for i in 0..n {
        let me = &inst[i];
        active.retain(|&j| inst[j].death > me.birth);
        if me.initial {
            active.push(i);
            continue;
        }
        let anc: Vec<usize> =
            active.iter().copied().filter(|&j| linked(spec, &me.contour, &inst[j].contour)).collect();
        active.push(i);
        let hitting = |j: usize| spec.area_field.is_none() || me.contour.intersects(&inst[j].contour);
        let st = if anc.iter().any(|&j| status[j] == Status::Accepted && hitting(j)) {
            Status::Rejected
        } else if anc.iter().any(|&j| status[j] == Status::Unknown) {
            Status::Unknown
        } else if let Some(f) = &spec.area_field {
            let nested: Vec<&Contour> =
                anc.iter().filter(|&&j| status[j] == Status::Accepted).map(|&j| &inst[j].contour).collect();
            let dm = magnetisation_change(&me.contour, &nested, &f.region);
            let len = me.contour.length();
            assert!(dm.abs() <= PI * len * len / 2.0 + 1e-9, "magnetisation change {dm} exceeds bound");
            let lp = -(spec.beta / 2.0) * len + f.h * dm;
            if let Some(c) = &spec.cutoff {
                if me.contour.diameter() <= c.alpha && lp > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "acceptance probability exp({lp}) above one for a small contour"
                    )));
                }
            }
            if lp > 0.0 {
                clipped += 1;
            }
            if me.mark < lp.min(0.0).exp() {
                Status::Accepted
            } else {
                Status::Rejected
            }
        } else {
            Status::Accepted
        };
        status[i] = st;
        ancestors[i] = anc;
    }
    Ok(Resolution { status, ancestors, clipped })
}

/// Change of the magnetisation in `w` when `theta` is added to a
/// configuration whose contours nesting with `theta` are `nested` (all
/// disjoint from `theta`): the colour flips inside `theta`.
pub fn magnetisation_change(theta: &Contour, nested: &[&Contour], w: &Region) -> f64 {
    let a_theta = w.overlap_area(theta.vertices());
    if a_theta == 0.0 {
        return 0.0;
    }
    let mut black = 0.0;
    for (k, c) in nested.iter().enumerate() {
        let depth = nested.iter().enumerate().filter(|(j, o)| *j != k && o.contains_contour(c)).count();
        let sign = if depth % 2 == 0 { 1.0 } else { -1.0 };
        let part = if c.contains_contour(theta) { a_theta } else { w.overlap_area(c.vertices()) };
        black += sign * part;
    }
    -2.0 * (2.0 * black - a_theta)
}

/// Accepted instances alive at `s`; errors if one alive there is unresolved.
pub fn accepted_at(process: &FreeProcess, res: &Resolution, s: f64) -> Result<Vec<usize>> {
    let alive = process.alive_at(s);
    let unresolved = alive.iter().filter(|&&i| res.status[i] == Status::Unknown).count();
    if unresolved > 0 {
        return Err(Error::HorizonTooShort { unresolved, horizon: process.horizon });
    }
    Ok(alive.into_iter().filter(|&i| res.status[i] == Status::Accepted).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clan {
    pub roots: Vec<usize>,
    /// Roots and all their ancestors, sorted.
    pub members: Vec<usize>,
    pub diameter: f64,
    /// Some member belongs to the initial population.
    pub reaches_horizon: bool,
}

fn touches(spec: &FieldSpec, c: &Contour, target: &Region) -> bool {
    c.hits_region(target) || (spec.area_field.is_some() && target.overlap_area(c.vertices()) > 0.0)
}

/// Ancestor clan of the instances alive at `s` that hit `target`.
pub fn ancestor_clan(process: &FreeProcess, res: &Resolution, spec: &FieldSpec, target: &Region, s: f64) -> Clan {
    let inst = &process.instances;
    let roots: Vec<usize> =
        (0..inst.len()).filter(|&i| inst[i].alive_at(s) && touches(spec, &inst[i].contour, target)).collect();
    let members = clan_members(res, &roots);
    let pts: Vec<Point> = members.iter().flat_map(|&i| inst[i].contour.vertices().iter().cloned()).collect();
    Clan {
        reaches_horizon: members.iter().any(|&i| inst[i].initial),
        diameter: point_set_diameter(&pts),
        roots,
        members,
    }
}

/// Roots together with all their ancestors, sorted.
pub fn clan_members(res: &Resolution, roots: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; res.ancestors.len()];
    let mut stack = roots.to_vec();
    for &r in roots {
        seen[r] = true;
    }
    let mut members = Vec::new();
    while let Some(i) = stack.pop() {
        members.push(i);
        for &j in &res.ancestors[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    members.sort_unstable();
    members
}

/// Diameter of a finite point set through its convex hull.
pub fn point_set_diameter(pts: &[Point]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let cross = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let it: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in it {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let mut d: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            d = d.max(hull[i].dist(hull[j]));
        }
    }
    d.max(p[0].dist(p[p.len() - 1]))
}
