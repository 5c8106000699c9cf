//! Pseudo-arclength continuation of a closed orbit in `(nodes, T, t)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::HomotopyFamily;
use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::models::ModelChecks;
use crate::orbit::shooting::{assemble_orbit, choose_section, correct, evaluate, sup, Section, ShootingControls};
use crate::orbit::{ClassLabel, ClosedOrbit, DEFAULT_SAMPLES, DEFAULT_TOL_ORBIT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationControls {
    /// Initial pseudo-arclength step.
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub grow: f64,
    pub shrink: f64,
    /// Consecutive successes before the step grows.
    pub grow_after: usize,
    /// Escape radius on the non-periodic chart coordinates.
    pub window: f64,
    pub period_cap: f64,
    pub shooting: ShootingControls,
    pub corrector_iters: usize,
    pub corrector_tol: f64,
    pub samples: usize,
    pub tol_orbit: f64,
    pub max_nodes: usize,
    /// Grid used for the validity checks of intermediate models.
    pub checks: ModelChecks,
}

impl Default for ContinuationControls {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            min_step: 1e-10,
            max_step: 0.05,
            grow: 1.3,
            shrink: 0.5,
            grow_after: 4,
            window: 10.0,
            period_cap: 1e3,
            shooting: ShootingControls::default(),
            corrector_iters: 8,
            corrector_tol: 1e-10,
            samples: DEFAULT_SAMPLES,
            tol_orbit: DEFAULT_TOL_ORBIT,
            max_nodes: 5000,
            checks: ModelChecks { grid: 12, ..ModelChecks::default() },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackStatus {
    /// The far endpoint of the family was reached.
    #[serde(rename = "reached-t1")]
    ReachedT1,
    #[serde(rename = "escaped-window")]
    EscapedWindow,
    #[serde(rename = "period-cap-hit")]
    PeriodCapHit,
    /// The track folded back to the endpoint it started from.
    #[serde(rename = "fold-turnback")]
    FoldTurnback,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ReachedT1 => "reached-t1",
            Self::EscapedWindow => "escaped-window",
            Self::PeriodCapHit => "period-cap-hit",
            Self::FoldTurnback => "fold-turnback",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackNode {
    pub t: f64,
    pub orbit: ClosedOrbit,
    /// Pseudo-arclength step that produced this node (0 for the start).
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrack {
    /// Parameter value of the start orbit, 0 or 1.
    pub start_t: f64,
    pub nodes: Vec<TrackNode>,
    pub status: TrackStatus,
    /// `(t, T)` at every node.
    pub period_profile: Vec<(f64, f64)>,
    pub window: f64,
    pub period_cap: f64,
    pub max_step: f64,
}

impl OrbitTrack {
    pub fn last(&self) -> &TrackNode {
        self.nodes.last().expect("tracks have a start node")
    }

    /// Largest `|coordinate|` over non-periodic coordinates at each node.
    pub fn excursion_profile(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| excursion(&n.orbit)).collect()
    }
}

fn excursion(o: &ClosedOrbit) -> f64 {
    o.samples
        .iter()
        .flat_map(|p| p.iter().zip(&o.periodic).filter(|(_, &per)| !per).map(|(x, _)| x.abs()))
        .fold(0.0, f64::max)
}

/// State of the continuation: `M` nodes, the period and the parameter.
#[derive(Clone, Debug)]
struct State {
    z: DVector<f64>,
    t: f64,
}

struct Problem<'a> {
    family: &'a HomotopyFamily,
    m: usize,
    d: usize,
    shift: Vec<f64>,
    steps_per: usize,
}

impl Problem<'_> {
    fn nodes(&self, z: &DVector<f64>) -> Vec<Vec<f64>> {
        (0..self.m).map(|s| (0..self.d).map(|i| z[s * self.d + i]).collect()).collect()
    }

    fn period(&self, z: &DVector<f64>) -> f64 {
        z[self.m * self.d]
    }

    fn residual(&self, z: &DVector<f64>, t: f64, section: &Section, jac: bool) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let sys = self.family.system_at(t)?;
        let period = self.period(z);
        if !(period > 0.0) {
            return Err(Error::InvalidInput("non-positive period".into()));
        }
        let ev = evaluate(sys.as_ref(), &self.nodes(z), period, &self.shift, section, self.steps_per, jac)?;
        Ok((ev.residual, ev.jac))
    }

    /// `[F_z F_t]` and `F` at `(z, t)`; `F_t` by a central difference in `t`,
    /// one-sided where the family is undefined on one side.
    fn jacobian(&self, z: &DVector<f64>, t: f64, section: &Section) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (f, fz) = self.residual(z, t, section, true)?;
        let h = 1e-6;
        let plus = self.residual(z, t + h, section, false).map(|r| r.0);
        let minus = self.residual(z, t - h, section, false).map(|r| r.0);
        let ft = match (plus, minus) {
            (Ok(p), Ok(m)) => (p - m) / (2.0 * h),
            (Ok(p), Err(_)) => (p - &f) / h,
            (Err(_), Ok(m)) => (&f - m) / h,
            (Err(e), Err(_)) => return Err(e),
        };
        let n = fz.ncols();
        let mut a = DMatrix::zeros(f.len(), n + 1);
        a.view_mut((0, 0), (f.len(), n)).copy_from(&fz);
        a.set_column(n, &ft);
        Ok((f, a))
    }
}

/// Unit tangent of the solution curve: the null space of `[F_z F_t]`, with the
/// reference direction projected onto it when the null space is larger than a line.
fn tangent(a: &DMatrix<f64>, reference: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let padded = if a.nrows() < n { a.clone().resize_vertically(n, 0.0) } else { a.clone() };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut basis: Vec<DVector<f64>> = order
        .iter()
        .filter(|&&i| svd.singular_values[i] < 1e-7 * smax)
        .map(|&i| v_t.row(i).transpose())
        .collect();
    if basis.is_empty() {
        basis.push(v_t.row(order[0]).transpose());
    }
    let mut tau = if basis.len() == 1 {
        basis[0].clone()
    } else {
        let mut p = DVector::zeros(n);
        for b in &basis {
            p += b * b.dot(reference);
        }
        if p.norm() < 1e-12 {
            basis[0].clone()
        } else {
            p
        }
    };
    tau /= tau.norm();
    if tau.dot(reference) < 0.0 {
        tau = -tau;
    }
    tau
}

/// Gauss–Newton on `F(z, t) = 0`, `τ · (u − u_pred) = 0`.
fn corrector(
    prob: &Problem,
    pred: &State,
    tau: &DVector<f64>,
    section: &Section,
    c: &ContinuationControls,
) -> Option<State> {
    let n = pred.z.len();
    let mut u = pred.clone();
    for _ in 0..c.corrector_iters {
        let (f, a) = prob.jacobian(&u.z, u.t, section).ok()?;
        let rows = f.len() + 1;
        let mut g = DVector::zeros(rows);
        g.rows_mut(0, f.len()).copy_from(&f);
        let mut arc = 0.0;
        for i in 0..n {
            arc += tau[i] * (u.z[i] - pred.z[i]);
        }
        arc += tau[n] * (u.t - pred.t);
        g[f.len()] = arc;
        if sup(&f) < c.corrector_tol && arc.abs() < c.corrector_tol {
            return Some(u);
        }
        let mut j = DMatrix::zeros(rows, n + 1);
        j.view_mut((0, 0), (f.len(), n + 1)).copy_from(&a);
        j.set_row(f.len(), &tau.transpose());
        let du = lstsq(&j, &(-g), 1e-11);
        if !du.iter().all(|x| x.is_finite()) {
            return None;
        }
        u.z += du.rows(0, n);
        u.t += du[n];
    }
    let (f, _) = prob.residual(&u.z, u.t, section, false).ok()?;
    (sup(&f) < c.corrector_tol).then_some(u)
}

/// Continues `start` (a closed orbit of the family's model at `from`, which is
/// 0 or 1) towards the other endpoint.
pub fn continue_orbit(
    family: &HomotopyFamily,
    start: &ClosedOrbit,
    from: f64,
    c: &ContinuationControls,
) -> Result<OrbitTrack> {
    if from != 0.0 && from != 1.0 {
        return Err(Error::InvalidInput(format!("tracks start at t = 0 or t = 1, got {from}")));
    }
    let dir = if from == 0.0 { 1.0 } else { -1.0 };
    let far = 1.0 - from;
    let sys0 = family.system_at(from)?;
    if start.system != sys0.system_id() {
        return Err(Error::MismatchedModels(start.system.clone(), sys0.system_id()));
    }
    let torus = family.torus_based();
    let label: ClassLabel = start.class_label.clone();
    let m = c.shooting.segments.max(1);
    let d = sys0.dim();
    let prob = Problem {
        family,
        m,
        d,
        shift: start.lift_shift(),
        steps_per: (c.shooting.steps / m).max(1),
    };
    let steps = prob.steps_per * m;

    // tighten the start orbit on the discretization used here
    let section0 = choose_section(sys0.as_ref(), start.basepoint(), torus)?;
    let n_s = start.samples.len();
    let seed_nodes: Vec<Vec<f64>> = (0..m).map(|s| start.samples[s * n_s / m].clone()).collect();
    let sc = ShootingControls { period_cap: c.period_cap * 4.0, ..c.shooting.clone() };
    let (p0, t0) = correct(sys0.as_ref(), seed_nodes, start.period, &prob.shift, &section0, &sc)
        .ok_or(Error::InvalidInput("start orbit does not close at its endpoint".into()))?;
    let start_orbit = assemble_orbit(sys0.as_ref(), &p0, t0, label.clone(), steps, c.samples)?;
    let mut state = State { z: pack(&crate::orbit::shooting::trajectory_nodes(sys0.as_ref(), &p0, t0, m, steps)?, t0), t: from };

    let mut nodes = vec![TrackNode { t: from, orbit: start_orbit, step: 0.0 }];
    let mut section = choose_section(sys0.as_ref(), &p0, torus)?;
    let n = state.z.len();
    let mut e_t = DVector::zeros(n + 1);
    e_t[n] = dir;
    let (_, a) = prob.jacobian(&state.z, state.t, &section)?;
    let mut tau = tangent(&a, &e_t);
    let mut step = c.initial_step;
    let mut successes = 0;

    let finish = |nodes: Vec<TrackNode>, status: TrackStatus| {
        let period_profile = nodes.iter().map(|n| (n.t, n.orbit.period)).collect();
        OrbitTrack { start_t: from, nodes, status, period_profile, window: c.window, period_cap: c.period_cap, max_step: c.max_step }
    };

    loop {
        if nodes.len() >= c.max_nodes {
            return Err(Error::Stall { t: state.t, step });
        }
        let pred = State {
            z: &state.z + tau.rows(0, n) * step,
            t: state.t + tau[n] * step,
        };
        let Some(next) = corrector(&prob, &pred, &tau, &section, c) else {
            successes = 0;
            step *= c.shrink;
            if step < c.min_step {
                return Err(Error::Stall { t: state.t, step });
            }
            continue;
        };

        // crossing the far endpoint: land on it at fixed t
        if dir * (next.t - far) >= 0.0 {
            let s = (far - state.t) / (next.t - state.t);
            let guess = &state.z + (&next.z - &state.z) * s;
            let sys = family.system_at(far)?;
            let landed = correct(sys.as_ref(), prob.nodes(&guess), prob.period(&guess), &prob.shift, &section, &sc);
            if let Some((p, tp)) = landed {
                let orbit = assemble_orbit(sys.as_ref(), &p, tp, label.clone(), steps, c.samples)?;
                if orbit_ok(&orbit, c) {
                    family.validate_at(far, c.checks)?;
                    nodes.push(TrackNode { t: far, orbit, step });
                    return Ok(finish(nodes, TrackStatus::ReachedT1));
                }
            }
            successes = 0;
            step *= c.shrink;
            if step < c.min_step {
                return Err(Error::Stall { t: state.t, step });
            }
            continue;
        }

        let sys = family.system_at(next.t)?;
        let orbit = assemble_orbit(sys.as_ref(), &prob.nodes(&next.z)[0], prob.period(&next.z), label.clone(), steps, c.samples)?;
        if !orbit_ok(&orbit, c) {
            successes = 0;
            step *= c.shrink;
            if step < c.min_step {
                return Err(Error::Stall { t: state.t, step });
            }
            continue;
        }
        family.validate_at(next.t, c.checks)?;
        let escaped = excursion(&orbit) > c.window;
        let capped = orbit.period > c.period_cap;
        let folded = dir * (next.t - from) <= 0.0;
        nodes.push(TrackNode { t: next.t, orbit, step });
        if escaped {
            return Ok(finish(nodes, TrackStatus::EscapedWindow));
        }
        if capped {
            return Ok(finish(nodes, TrackStatus::PeriodCapHit));
        }
        if folded {
            return Ok(finish(nodes, TrackStatus::FoldTurnback));
        }

        section = choose_section(sys.as_ref(), &prob.nodes(&next.z)[0], torus)?;
        let (_, a) = prob.jacobian(&next.z, next.t, &section)?;
        tau = tangent(&a, &tau);
        state = next;
        successes += 1;
        if successes >= c.grow_after {
            step = (step * c.grow).min(c.max_step);
            successes = 0;
        }
    }
}

fn pack(nodes: &[Vec<f64>], period: f64) -> DVector<f64> {
    let mut v: Vec<f64> = nodes.iter().flatten().copied().collect();
    v.push(period);
    DVector::from_vec(v)
}

fn orbit_ok(o: &ClosedOrbit, c: &ContinuationControls) -> bool {
    let scale = o.period.max(1.0);
    o.closure_residual < c.tol_orbit * scale && o.flow_residual < c.tol_orbit * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{cylinder_orbit, FixedModel};
    use crate::models::{GeodesicFlow, TorusMetric};
    use crate::orbit::{orbit_space_distance, OrbitString};

    /// The geodesic `y = 0` of a metric depending on `y` only.
    fn circle_y0(metric: &TorusMetric) -> ClosedOrbit {
        let [g11, _, _] = metric.components(&[0.0, 0.0]);
        let sys = GeodesicFlow { metric: metric.clone() };
        let label = ClassLabel::Winding { winding: vec![1, 0, 0, 0] };
        assemble_orbit(&sys, &[0.0, 0.0, 1.0 / g11.sqrt(), 0.0], g11.sqrt(), label, 1024, 128).unwrap()
    }

    #[test]
    fn constant_family_keeps_the_orbit() {
        let fam = HomotopyFamily::constant(FixedModel::Cylinder { c: 0.0 });
        let o = cylinder_orbit(0.0, 64).unwrap();
        let tr = continue_orbit(&fam, &o, 0.0, &ContinuationControls::default()).unwrap();
        assert_eq!(tr.status, TrackStatus::ReachedT1);
        assert_eq!(tr.last().t, 1.0);
        assert!((tr.last().orbit.period - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cylinder_orbit_escapes_the_window() {
        let o = cylinder_orbit(0.0, 64).unwrap();
        let c = ContinuationControls { samples: 64, ..Default::default() };
        let tr = continue_orbit(&HomotopyFamily::CylinderEscape, &o, 0.0, &c).unwrap();
        assert_eq!(tr.status, TrackStatus::EscapedWindow);
        let last = tr.last();
        assert!(last.t > 10.0 / 11.0 - 1e-3 && last.t < 1.0, "t = {}", last.t);
        // closed form r = t/(1 − t)
        for node in &tr.nodes {
            let r = node.orbit.samples[0][1];
            assert!((r - node.t / (1.0 - node.t)).abs() < 1e-8 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn metric_family_reaches_the_end_and_reverses() {
        let fam = HomotopyFamily::MetricInterpolation {
            start: TorusMetric::flat(),
            end: TorusMetric::conformal_cos_y(0.1),
            smooth: false,
        };
        let start = circle_y0(&TorusMetric::flat());
        let c = ContinuationControls::default();
        let tr = continue_orbit(&fam, &start, 0.0, &c).unwrap();
        assert_eq!(tr.status, TrackStatus::ReachedT1);
        let end = &tr.last().orbit;
        let y = end.samples[0][1].rem_euclid(1.0);
        assert!(y.min(1.0 - y) < 1e-6 || (y - 0.5).abs() < 1e-6, "y = {y}");

        let back = continue_orbit(&fam, end, 1.0, &c).unwrap();
        assert_eq!(back.status, TrackStatus::ReachedT1);
        let s = |o: &ClosedOrbit| OrbitString { representative: o.clone(), multiplicity: 1, simple_period: o.period };
        let dist = orbit_space_distance(&s(&tr.nodes[0].orbit), &s(&back.last().orbit)).unwrap();
        assert!(dist < 1e-6, "dist = {dist}");
    }
}
