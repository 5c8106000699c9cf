//! Seeded searches for closed geodesics and closed Reeb orbits.
//!
//! Geodesics in a torus class `k` are seeded by the straight loops
//! `t ↦ p + k t` on a lattice of offsets transverse to `k` (jittered by a fixed
//! ChaCha stream), then corrected by multiple shooting. Seeds that fail are
//! relaxed by discrete loop-energy descent and shot once more. Reeb orbits on
//! unit cotangent tori use the canonical lifts of the same seeds; other models
//! use near-returns of trajectories from lattice or random points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ad::{seed, Real, D1};
use crate::error::{Error, Result};
use crate::flow::{trajectory, FlowSystem};
use crate::index::monodromy;
use crate::models::{ContactModel, GeodesicFlow, ReebFlow, TorusMetric};
use crate::orbit::components::{detect_components, min_component_separation};
use crate::orbit::shooting::{assemble_orbit, choose_section, correct, normal_section, trajectory_nodes, ShootingControls};
use crate::orbit::{
    multiplicity, orbit_distance_with_shift, ClassLabel, ClosedOrbit, OrbitFamilyReport, OrbitString,
    DEFAULT_SAMPLES, DEFAULT_TOL_MATCH, DEFAULT_TOL_ORBIT,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinderControls {
    pub seeds: usize,
    pub shooting: ShootingControls,
    pub samples: usize,
    pub tol_orbit: f64,
    pub tol_match: f64,
    pub rng_seed: u64,
    /// Seed offsets are moved by up to `jitter` lattice spacings.
    pub jitter: f64,
    pub degeneracy_tol: f64,
}

impl Default for FinderControls {
    fn default() -> Self {
        Self {
            seeds: 32,
            shooting: ShootingControls::default(),
            samples: DEFAULT_SAMPLES,
            tol_orbit: DEFAULT_TOL_ORBIT,
            tol_match: DEFAULT_TOL_MATCH,
            rng_seed: 0x5eed,
            jitter: 0.25,
            degeneracy_tol: crate::index::DEFAULT_DEGENERACY_TOL,
        }
    }
}

/// What to search for on a contact model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReebTarget {
    /// Winding vector over the chart coordinates; a two-entry vector on a unit
    /// cotangent torus means the canonical lift of a base class.
    Class { winding: Vec<i64> },
    Window { min: f64, max: f64 },
}

fn primitive(k: [i64; 2]) -> ([i64; 2], i64) {
    let g = num_integer::gcd(k[0], k[1]);
    ([k[0] / g, k[1] / g], g)
}

/// Offsets `c_j ∈ [0, 1)` of the seed lines `k₁y − k₂x = c_j`.
fn seed_offsets(count: usize, jitter: f64, rng_seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|j| {
            let u: f64 = rng.random_range(-0.5..0.5);
            ((j as f64 + 0.5 + jitter * u) / count as f64).rem_euclid(1.0)
        })
        .collect()
}

fn seed_base_points(k: [i64; 2], c: &FinderControls) -> Vec<[f64; 2]> {
    let (kp, _) = primitive(k);
    let n2 = (kp[0] * kp[0] + kp[1] * kp[1]) as f64;
    seed_offsets(c.seeds, c.jitter, c.rng_seed)
        .into_iter()
        .map(|off| [-off * kp[1] as f64 / n2, off * kp[0] as f64 / n2])
        .collect()
}

fn unit_velocity(metric: &TorusMetric, x: &[f64], dir: &[f64]) -> [f64; 2] {
    let n = metric.inner(x, dir, dir).sqrt();
    [dir[0] / n, dir[1] / n]
}

/// Angle coordinate of the covector `g·v` in the model coframe.
pub fn covector_angle(metric: &TorusMetric, x: &[f64], v: &[f64]) -> f64 {
    let [g11, g12, g22] = metric.components(x);
    let p = [g11 * v[0] + g12 * v[1], g12 * v[0] + g22 * v[1]];
    let r = g11.sqrt();
    let det = g11 * g22 - g12 * g12;
    let a = p[0] / r;
    let b = (p[1] - a * r * g12 / g11) * r / det.sqrt();
    b.atan2(a) / std::f64::consts::TAU
}

fn unwrap_near(theta: f64, reference: f64) -> f64 {
    theta + (reference - theta).round()
}

/// Canonical lift of a geodesic orbit `(x, y, u, v)` to the unit cotangent
/// chart `(x, y, θ)`, with residuals recomputed for the Reeb flow.
pub fn lift_geodesic_orbit(metric: &TorusMetric, orbit: &ClosedOrbit) -> Result<ClosedOrbit> {
    let sys = ReebFlow::new(ContactModel::unit_cotangent(metric.clone()));
    let mut prev = 0.0;
    let mut samples = Vec::with_capacity(orbit.samples.len());
    for (i, s) in orbit.samples.iter().enumerate() {
        let th = covector_angle(metric, &s[..2], &s[2..4]);
        let th = if i == 0 { th.rem_euclid(1.0) } else { unwrap_near(th, prev) };
        prev = th;
        samples.push(vec![s[0], s[1], th]);
    }
    let th_end = unwrap_near(covector_angle(metric, &samples[0][..2], &orbit.samples[0][2..4]), prev);
    let winding_theta = (th_end - samples[0][2]).round() as i64;
    let base = match &orbit.class_label {
        ClassLabel::Winding { winding } => [winding[0], winding[1]],
        ClassLabel::PeriodWindow { .. } => return Err(Error::InvalidInput("geodesic orbits carry winding labels".into())),
    };
    let mut lifted = ClosedOrbit {
        system: sys.system_id(),
        periodic: sys.periodic(),
        samples,
        period: orbit.period,
        class_label: ClassLabel::Winding { winding: vec![base[0], base[1], winding_theta] },
        closure_residual: orbit.closure_residual,
        flow_residual: 0.0,
    };
    lifted.flow_residual = lifted.compute_flow_residual(&sys)?;
    Ok(lifted)
}

/// Discrete loop energy `N/2 Σ g(m_i)(Δ_i, Δ_i)` of a closed polygon with
/// `x_N = x_0 + k`, and its gradient.
fn loop_energy(metric: &TorusMetric, pts: &[[f64; 2]], k: [f64; 2]) -> (f64, Vec<[f64; 2]>) {
    let n = pts.len();
    let nf = n as f64;
    let mut e = 0.0;
    let mut grad = vec![[0.0; 2]; n];
    for i in 0..n {
        let j = (i + 1) % n;
        let next = if j == 0 { [pts[0][0] + k[0], pts[0][1] + k[1]] } else { pts[j] };
        let d = [next[0] - pts[i][0], next[1] - pts[i][1]];
        let m: Vec<D1> = seed(&[0.5 * (pts[i][0] + next[0]), 0.5 * (pts[i][1] + next[1])]);
        let [a, b, c] = metric.components(&m);
        let q = a.value() * d[0] * d[0] + 2.0 * b.value() * d[0] * d[1] + c.value() * d[1] * d[1];
        e += 0.5 * nf * q;
        let gd = [a.value() * d[0] + b.value() * d[1], b.value() * d[0] + c.value() * d[1]];
        for l in 0..2 {
            let dq = a.eps[l] * d[0] * d[0] + 2.0 * b.eps[l] * d[0] * d[1] + c.eps[l] * d[1] * d[1];
            grad[i][l] += nf * (-gd[l] + 0.25 * dq);
            grad[j][l] += nf * (gd[l] + 0.25 * dq);
        }
    }
    (e, grad)
}

/// Gradient descent on the discrete loop energy starting from the straight loop.
fn relax_loop(metric: &TorusMetric, p: [f64; 2], k: [f64; 2], vertices: usize, iters: usize) -> (Vec<[f64; 2]>, f64) {
    let n = vertices;
    let mut pts: Vec<[f64; 2]> =
        (0..n).map(|i| [p[0] + k[0] * i as f64 / n as f64, p[1] + k[1] * i as f64 / n as f64]).collect();
    let gmax = pts
        .iter()
        .map(|x| {
            let [a, _, c] = metric.components(x);
            a + c
        })
        .fold(1e-3, f64::max);
    let eta = 0.1 / (n as f64 * gmax);
    let (mut e, _) = loop_energy(metric, &pts, k);
    for _ in 0..iters {
        let (_, g) = loop_energy(metric, &pts, k);
        for (x, gi) in pts.iter_mut().zip(&g) {
            x[0] -= eta * gi[0];
            x[1] -= eta * gi[1];
        }
        e = loop_energy(metric, &pts, k).0;
    }
    (pts, e)
}

fn geodesic_nodes_from_polygon(metric: &TorusMetric, pts: &[[f64; 2]], k: [f64; 2], segments: usize) -> Vec<Vec<f64>> {
    let n = pts.len();
    (0..segments)
        .map(|s| {
            let i = s * n / segments;
            let j = (i + 1) % n;
            let next = if j == 0 { [pts[0][0] + k[0], pts[0][1] + k[1]] } else { pts[j] };
            let d = [next[0] - pts[i][0], next[1] - pts[i][1]];
            let u = unit_velocity(metric, &pts[i], &d);
            vec![pts[i][0], pts[i][1], u[0], u[1]]
        })
        .collect()
}

fn straight_nodes(metric: &TorusMetric, p: [f64; 2], k: [f64; 2], segments: usize) -> Vec<Vec<f64>> {
    (0..segments)
        .map(|s| {
            let t = s as f64 / segments as f64;
            let x = [p[0] + k[0] * t, p[1] + k[1] * t];
            let u = unit_velocity(metric, &x, &k);
            vec![x[0], x[1], u[0], u[1]]
        })
        .collect()
}

fn shoot(
    sys: &dyn FlowSystem,
    nodes: Vec<Vec<f64>>,
    period: f64,
    shift: &[f64],
    torus_based: bool,
    c: &FinderControls,
) -> Option<(Vec<f64>, f64)> {
    let sec = choose_section(sys, &nodes[0], torus_based).ok()?;
    if let Some(r) = correct(sys, nodes.clone(), period, shift, &sec, &c.shooting) {
        return Some(r);
    }
    if torus_based {
        let sec = normal_section(sys, &nodes[0]).ok()?;
        return correct(sys, nodes, period, shift, &sec, &c.shooting);
    }
    None
}

fn accept(sys: &dyn FlowSystem, o: &ClosedOrbit, c: &FinderControls) -> bool {
    if !(o.flow_residual < c.tol_orbit && o.closure_residual < c.tol_orbit) {
        return false;
    }
    if let ClassLabel::Winding { winding } = &o.class_label {
        if &o.recomputed_winding() != winding {
            return false;
        }
    }
    o.samples
        .iter()
        .all(|p| sys.constraints(p).iter().all(|(v, _)| v.abs() < c.tol_orbit))
}

/// Sorts by `(period, basepoint)` and merges strings closer than `tol_match`,
/// keeping the representative with the smaller flow residual.
pub fn merge_orbits(mut found: Vec<ClosedOrbit>, tol_match: f64) -> Result<Vec<ClosedOrbit>> {
    let key = |a: &ClosedOrbit, b: &ClosedOrbit| {
        a.period
            .total_cmp(&b.period)
            .then_with(|| {
                a.basepoint()
                    .iter()
                    .zip(b.basepoint())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    };
    found.sort_by(key);
    let mut kept: Vec<ClosedOrbit> = Vec::new();
    for o in found {
        let mut dup = None;
        for (i, k) in kept.iter().enumerate() {
            if (k.period - o.period).abs() < tol_match && orbit_distance_with_shift(k, &o)?.0 < tol_match {
                dup = Some(i);
                break;
            }
        }
        match dup {
            Some(i) if o.flow_residual < kept[i].flow_residual => kept[i] = o,
            Some(_) => {}
            None => kept.push(o),
        }
    }
    kept.sort_by(key);
    Ok(kept)
}

fn family_report(
    sys: &dyn FlowSystem,
    contact_sys: &dyn FlowSystem,
    contact_orbits: &[ClosedOrbit],
    orbits: Vec<ClosedOrbit>,
    label: ClassLabel,
    c: &FinderControls,
) -> Result<OrbitFamilyReport> {
    let strings: Vec<OrbitString> = orbits.iter().map(|o| multiplicity(o, c.tol_match)).collect();
    let degenerate: Vec<bool> = contact_orbits
        .par_iter()
        .map(|o| monodromy(contact_sys, o, c.shooting.steps).map(|m| m.det_i_minus_p().abs() <= c.degeneracy_tol))
        .collect::<Result<Vec<_>>>()?;
    let components = detect_components(sys, &strings, &degenerate, c.tol_orbit, c.tol_match)?;
    let in_bounds = strings.iter().all(|s| {
        let p = s.representative.period;
        p <= c.shooting.period_cap
            && match &label {
                ClassLabel::PeriodWindow { min, max } => p >= *min && p <= *max,
                ClassLabel::Winding { .. } => true,
            }
    });
    let separated = min_component_separation(&components).is_none_or(|d| d > 10.0 * c.tol_match);
    Ok(OrbitFamilyReport {
        system: sys.system_id(),
        class_label: label,
        strings,
        components,
        observed_compact: in_bounds && separated,
    })
}

/// Closed unit-speed geodesics of `metric` in the torus class `class`.
pub fn find_geodesics(metric: &TorusMetric, class: [i64; 2], c: &FinderControls) -> Result<OrbitFamilyReport> {
    metric.validate_default()?;
    if class == [0, 0] {
        return Err(Error::InvalidInput("the zero class holds only constant loops".into()));
    }
    let sys = GeodesicFlow { metric: metric.clone() };
    let k = [class[0] as f64, class[1] as f64];
    let shift = [k[0], k[1], 0.0, 0.0];
    let label = ClassLabel::Winding { winding: vec![class[0], class[1], 0, 0] };
    let m = c.shooting.segments;
    let found: Vec<Option<ClosedOrbit>> = seed_base_points(class, c)
        .par_iter()
        .map(|&p| {
            let period = metric.straight_length(&p, &k, 64);
            let attempt = shoot(&sys, straight_nodes(metric, p, k, m), period, &shift, true, c).or_else(|| {
                let (poly, e) = relax_loop(metric, p, k, 32, 400);
                shoot(&sys, geodesic_nodes_from_polygon(metric, &poly, k, m), (2.0 * e).sqrt(), &shift, true, c)
            });
            let (p0, t) = attempt?;
            let o = assemble_orbit(&sys, &p0, t, label.clone(), c.shooting.steps, c.samples).ok()?;
            let unit = o.samples.iter().all(|s| (metric.inner(&s[..2], &s[2..], &s[2..]).sqrt() - 1.0).abs() < c.tol_orbit);
            (unit && accept(&sys, &o, c)).then_some(o)
        })
        .collect();
    let orbits = merge_orbits(found.into_iter().flatten().collect(), c.tol_match)?;
    let contact = ReebFlow::new(ContactModel::unit_cotangent(metric.clone()));
    let lifts = orbits.iter().map(|o| lift_geodesic_orbit(metric, o)).collect::<Result<Vec<_>>>()?;
    family_report(&sys, &contact, &lifts, orbits, label, c)
}

/// Points `(p, t)` where `‖Φ_t(p) − p − shift‖` has a local minimum in `[t_min, t_max]`.
fn near_returns(
    sys: &dyn FlowSystem,
    p: &[f64],
    shift: &[f64],
    t_min: f64,
    t_max: f64,
    keep: usize,
) -> Vec<(f64, f64)> {
    let samples = 512;
    let Ok((pts, end)) = trajectory(sys, p, t_max, 4 * samples, samples) else { return vec![] };
    let mut pts = pts;
    pts.push(end);
    let dist: Vec<f64> = pts
        .iter()
        .map(|q| q.iter().zip(p).zip(shift).map(|((a, b), s)| (a - b - s).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for i in 1..=samples {
        let t = t_max * i as f64 / samples as f64;
        let left = dist[i - 1];
        let right = if i < samples { dist[i + 1] } else { f64::INFINITY };
        if dist[i] <= left && dist[i] <= right && t >= 0.9 * t_min {
            cands.push((dist[i], t));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands.truncate(keep);
    cands
}

fn lattice_points(res: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..res {
        for j in 0..res {
            for l in 0..res {
                out.push(vec![
                    (i as f64 + 0.5) / res as f64,
                    (j as f64 + 0.5) / res as f64,
                    (l as f64 + 0.5) / res as f64,
                ]);
            }
        }
    }
    out
}

/// Closed Reeb orbits of a contact model in a class (torus-based models) or
/// a period window (the ellipsoid).
pub fn find_reeb_orbits(model: &ContactModel, target: &ReebTarget, c: &FinderControls) -> Result<OrbitFamilyReport> {
    let sys = ReebFlow::new(model.clone());
    let m = c.shooting.segments;
    match (model, target) {
        (ContactModel::UnitCotangentTorus { metric }, ReebTarget::Class { winding }) => {
            metric.validate_default()?;
            let (k2, wt) = match winding.as_slice() {
                [a, b] => ([*a, *b], 0),
                [a, b, t] => ([*a, *b], *t),
                _ => return Err(Error::InvalidInput(format!("class {winding:?} does not fit the chart"))),
            };
            if k2 == [0, 0] {
                return Err(Error::InvalidInput("the zero base class holds no Reeb orbits".into()));
            }
            let k = [k2[0] as f64, k2[1] as f64];
            let shift = [k[0], k[1], wt as f64];
            let label = ClassLabel::Winding { winding: vec![k2[0], k2[1], wt] };
            let found: Vec<Option<ClosedOrbit>> = seed_base_points(k2, c)
                .par_iter()
                .map(|&p| {
                    let period = metric.straight_length(&p, &k, 64);
                    let mut prev = 0.0;
                    let nodes: Vec<Vec<f64>> = (0..m)
                        .map(|s| {
                            let t = s as f64 / m as f64;
                            let x = [p[0] + k[0] * t, p[1] + k[1] * t];
                            let th = covector_angle(metric, &x, &k) + wt as f64 * t;
                            let th = if s == 0 { th } else { unwrap_near(th, prev) };
                            prev = th;
                            vec![x[0], x[1], th]
                        })
                        .collect();
                    let (p0, t) = shoot(&sys, nodes, period, &shift, true, c)?;
                    let o = assemble_orbit(&sys, &p0, t, label.clone(), c.shooting.steps, c.samples).ok()?;
                    accept(&sys, &o, c).then_some(o)
                })
                .collect();
            let orbits = merge_orbits(found.into_iter().flatten().collect(), c.tol_match)?;
            family_report(&sys, &sys, &orbits.clone(), orbits, label, c)
        }
        (ContactModel::EllipsoidS3 { .. }, ReebTarget::Window { min, max }) => {
            let (min, max) = (*min, *max);
            if !(min > 0.0 && min < max) {
                return Err(Error::InvalidInput(format!("period window [{min}, {max}]")));
            }
            model.validate(8, crate::fourier::DEFAULT_MAX_DEGREE)?;
            let mut rng = ChaCha8Rng::seed_from_u64(c.rng_seed);
            let points: Vec<Vec<f64>> = (0..c.seeds).map(|_| model.random_point(&mut rng)).collect();
            let label = ClassLabel::PeriodWindow { min, max };
            let zero = [0.0; 4];
            let found: Vec<Option<ClosedOrbit>> = points
                .par_iter()
                .flat_map_iter(|p| near_returns(&sys, p, &zero, min, max * 1.05, 3).into_iter().map(move |(_, t)| (p.clone(), t)))
                .map(|(p, t)| {
                    let nodes = trajectory_nodes(&sys, &p, t, m, c.shooting.steps).ok()?;
                    let (p0, t) = shoot(&sys, nodes, t, &zero, false, c)?;
                    if !(t >= min && t <= max) {
                        return None;
                    }
                    let o = assemble_orbit(&sys, &p0, t, label.clone(), c.shooting.steps, c.samples).ok()?;
                    accept(&sys, &o, c).then_some(o)
                })
                .collect();
            let orbits = merge_orbits(found.into_iter().flatten().collect(), c.tol_match)?;
            family_report(&sys, &sys, &orbits.clone(), orbits, label, c)
        }
        (ContactModel::Explicit { .. }, ReebTarget::Class { winding }) => {
            if winding.len() != 3 || winding.iter().all(|&k| k == 0) {
                return Err(Error::InvalidInput(format!("class {winding:?} for a 3-torus chart")));
            }
            model.validate(8, crate::fourier::DEFAULT_MAX_DEGREE)?;
            let shift: Vec<f64> = winding.iter().map(|&k| k as f64).collect();
            let label = ClassLabel::Winding { winding: winding.clone() };
            let res = ((c.seeds as f64).cbrt().ceil() as usize).max(1);
            let reach = shift.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
            let found: Vec<Option<ClosedOrbit>> = lattice_points(res)
                .par_iter()
                .flat_map_iter(|p| {
                    near_returns(&sys, p, &shift, 0.05 * reach, 4.0 * reach, 2).into_iter().map(move |(_, t)| (p.clone(), t))
                })
                .map(|(p, t)| {
                    let nodes = trajectory_nodes(&sys, &p, t, m, c.shooting.steps).ok()?;
                    let (p0, t) = shoot(&sys, nodes, t, &shift, true, c)?;
                    let o = assemble_orbit(&sys, &p0, t, label.clone(), c.shooting.steps, c.samples).ok()?;
                    accept(&sys, &o, c).then_some(o)
                })
                .collect();
            let orbits = merge_orbits(found.into_iter().flatten().collect(), c.tol_match)?;
            family_report(&sys, &sys, &orbits.clone(), orbits, label, c)
        }
        (_, t) => Err(Error::InvalidInput(format!("target {t:?} does not apply to {}", model.id()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_energy_gradient_matches_difference_quotient() {
        let g = TorusMetric::conformal_cos_y(0.1);
        let pts: Vec<[f64; 2]> = (0..16).map(|i| [i as f64 / 16.0, 0.2 + 0.05 * (i as f64).sin()]).collect();
        let (_, grad) = loop_energy(&g, &pts, [1.0, 0.0]);
        let h = 1e-6;
        for (i, l) in [(3, 1), (7, 0), (15, 1)] {
            let mut a = pts.clone();
            let mut b = pts.clone();
            a[i][l] += h;
            b[i][l] -= h;
            let fd = (loop_energy(&g, &a, [1.0, 0.0]).0 - loop_energy(&g, &b, [1.0, 0.0]).0) / (2.0 * h);
            assert!((fd - grad[i][l]).abs() < 1e-6 * (1.0 + fd.abs()), "{fd} {}", grad[i][l]);
        }
    }

    #[test]
    fn relaxation_moves_loops_towards_critical_circles() {
        let g = TorusMetric::conformal_cos_y(0.1);
        let (pts, e) = relax_loop(&g, [0.0, 0.3], [1.0, 0.0], 32, 400);
        let (_, e0) = relax_loop(&g, [0.0, 0.3], [1.0, 0.0], 32, 0);
        assert!(e < e0);
        let mean_y: f64 = pts.iter().map(|p| p[1]).sum::<f64>() / 32.0;
        assert!(mean_y > 0.3, "{mean_y}");
    }

    #[test]
    fn flat_class_one_zero_is_a_family_of_unit_period() {
        let c = FinderControls { seeds: 12, ..Default::default() };
        let r = find_geodesics(&TorusMetric::flat(), [1, 0], &c).unwrap();
        assert_eq!(r.strings.len(), 12);
        for s in &r.strings {
            assert!((s.representative.period - 1.0).abs() < 1e-8);
            assert_eq!(s.multiplicity, 1);
        }
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].topology, crate::orbit::Topology::Circle);
    }

    #[test]
    fn ellipsoid_window_has_two_simple_strings() {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let c = FinderControls { seeds: 12, ..Default::default() };
        let r = find_reeb_orbits(&ContactModel::ellipsoid(1.0, phi), &ReebTarget::Window { min: 0.5, max: 2.0 }, &c).unwrap();
        let simple: Vec<f64> =
            r.strings.iter().filter(|s| s.multiplicity == 1).map(|s| s.representative.period).collect();
        assert_eq!(simple.len(), 2, "{simple:?}");
        assert!((simple[1] / simple[0] - phi).abs() < 1e-8);
        let empty = find_reeb_orbits(&ContactModel::ellipsoid(1.0, phi), &ReebTarget::Window { min: 0.1, max: 0.2 }, &c).unwrap();
        assert!(empty.strings.is_empty());
    }
}
