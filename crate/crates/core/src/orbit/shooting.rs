//! Multiple-shooting Newton correction of closed orbits.
//!
//! Unknowns are `M` node points and the period `T`. Equations: consecutive
//! segment end points match the next node (the last one matches the first
//! node plus the lift shift), the first node lies on a Poincaré section, and
//! the first node satisfies the system's constraints. Steps are damped
//! Gauss–Newton steps with minimum-norm least squares, which also copes with
//! Morse–Bott families where the Jacobian is rank deficient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::{trajectory, variational, FlowSystem};
use crate::linalg::lstsq;
use crate::orbit::{ClassLabel, ClosedOrbit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingControls {
    pub segments: usize,
    /// RK4 steps over one full period.
    pub steps: usize,
    pub max_iter: usize,
    /// Residual (sup norm) at which Newton stops.
    pub tol: f64,
    pub period_cap: f64,
}

impl Default for ShootingControls {
    fn default() -> Self {
        Self { segments: 4, steps: 1024, max_iter: 30, tol: 1e-12, period_cap: 1e3 }
    }
}

/// Hyperplane `normal · (p − point) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

/// Hyperplane normal to `X` through `p`.
pub fn normal_section(sys: &dyn FlowSystem, p: &[f64]) -> Result<Section> {
    choose_section(sys, p, false)
}

/// Coordinate hyperplane through `p`, trying the last periodic coordinate
/// first and moving backwards until `|X_k| > 0.1 ‖X‖`; the normal hyperplane
/// of `X` if no coordinate is transverse or the model is not torus based.
pub fn choose_section(sys: &dyn FlowSystem, p: &[f64], torus_based: bool) -> Result<Section> {
    let x = sys.field(p)?;
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if torus_based {
        let periodic = sys.periodic();
        for k in (0..x.len()).rev().filter(|&k| periodic[k]) {
            if x[k].abs() > 0.1 * nx {
                let mut normal = vec![0.0; x.len()];
                normal[k] = 1.0;
                return Ok(Section { point: p.to_vec(), normal });
            }
        }
    }
    Ok(Section { point: p.to_vec(), normal: x.iter().map(|v| v / nx).collect() })
}

pub(crate) struct Eval {
    pub residual: DVector<f64>,
    pub jac: DMatrix<f64>,
}

pub(crate) fn evaluate(
    sys: &dyn FlowSystem,
    nodes: &[Vec<f64>],
    period: f64,
    shift: &[f64],
    section: &Section,
    steps_per: usize,
    want_jac: bool,
) -> Result<Eval> {
    let m = nodes.len();
    let d = sys.dim();
    let cons = sys.constraints(&nodes[0]);
    let rows = m * d + 1 + cons.len();
    let cols = m * d + 1;
    let mut r = DVector::zeros(rows);
    let mut j = DMatrix::zeros(if want_jac { rows } else { 0 }, if want_jac { cols } else { 0 });
    let seg_t = period / m as f64;
    for s in 0..m {
        let (end, y) = if want_jac {
            let v = variational(sys, &nodes[s], seg_t, steps_per, false)?;
            (v.end, Some(v.y))
        } else {
            (crate::flow::flow_end(sys, &nodes[s], seg_t, steps_per)?, None)
        };
        let next = (s + 1) % m;
        for i in 0..d {
            let target = nodes[next][i] + if next == 0 { shift[i] } else { 0.0 };
            r[s * d + i] = end[i] - target;
        }
        if let Some(y) = y {
            j.view_mut((s * d, s * d), (d, d)).copy_from(&y);
            for i in 0..d {
                j[(s * d + i, next * d + i)] -= 1.0;
            }
            let fx = sys.field(&end)?;
            for i in 0..d {
                j[(s * d + i, m * d)] = fx[i] / m as f64;
            }
        }
    }
    let row = m * d;
    r[row] = section
        .normal
        .iter()
        .zip(&nodes[0])
        .zip(&section.point)
        .map(|((n, a), b)| n * (a - b))
        .sum();
    if want_jac {
        for i in 0..d {
            j[(row, i)] = section.normal[i];
        }
    }
    for (c, (val, grad)) in cons.iter().enumerate() {
        r[row + 1 + c] = *val;
        if want_jac {
            for i in 0..d {
                j[(row + 1 + c, i)] = grad[i];
            }
        }
    }
    Ok(Eval { residual: r, jac: j })
}

pub(crate) fn sup(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton correction from initial nodes. Returns the corrected first node and
/// period, or `None` when the iteration does not converge.
pub fn correct(
    sys: &dyn FlowSystem,
    nodes: Vec<Vec<f64>>,
    period: f64,
    shift: &[f64],
    section: &Section,
    c: &ShootingControls,
) -> Option<(Vec<f64>, f64)> {
    let m = nodes.len();
    let d = sys.dim();
    let steps_per = (c.steps / m).max(1);
    let mut nodes = nodes;
    let mut period = period;
    let mut cur = evaluate(sys, &nodes, period, shift, section, steps_per, true).ok()?;
    for _ in 0..c.max_iter {
        let rn = sup(&cur.residual);
        if !rn.is_finite() {
            return None;
        }
        if rn < c.tol {
            return Some((nodes[0].clone(), period));
        }
        let delta = lstsq(&cur.jac, &(-&cur.residual), 1e-11);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1.0 / 64.0 {
            let trial_nodes: Vec<Vec<f64>> = (0..m)
                .map(|s| (0..d).map(|i| nodes[s][i] + alpha * delta[s * d + i]).collect())
                .collect();
            let trial_t = period + alpha * delta[m * d];
            if trial_t > 0.0 && trial_t < c.period_cap {
                if let Ok(ev) = evaluate(sys, &trial_nodes, trial_t, shift, section, steps_per, false) {
                    let tn = sup(&ev.residual);
                    if tn.is_finite() && (tn < rn || tn < c.tol) {
                        nodes = trial_nodes;
                        period = trial_t;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // stagnation at rounding level still counts as converged
            return (rn < 1e3 * c.tol).then(|| (nodes[0].clone(), period));
        }
        cur = evaluate(sys, &nodes, period, shift, section, steps_per, true).ok()?;
    }
    (sup(&cur.residual) < 1e3 * c.tol).then(|| (nodes[0].clone(), period))
}

/// Integrates from a corrected basepoint and packages the closed orbit with its residuals.
pub fn assemble_orbit(
    sys: &dyn FlowSystem,
    p0: &[f64],
    period: f64,
    label: ClassLabel,
    steps: usize,
    samples: usize,
) -> Result<ClosedOrbit> {
    let (pts, end) = trajectory(sys, p0, period, steps, samples)?;
    let periodic = sys.periodic();
    let mut orbit = ClosedOrbit {
        system: sys.system_id(),
        periodic,
        samples: pts,
        period,
        class_label: label,
        closure_residual: 0.0,
        flow_residual: 0.0,
    };
    let shift = orbit.lift_shift();
    orbit.closure_residual = end
        .iter()
        .zip(p0)
        .zip(&shift)
        .map(|((e, a), s)| (e - a - s).powi(2))
        .sum::<f64>()
        .sqrt();
    orbit.flow_residual = orbit.compute_flow_residual(sys)?;
    orbit.normalize_basepoint();
    Ok(orbit)
}

/// Nodes `Φ_{jT/M}(p)` along the trajectory of a seed point.
pub fn trajectory_nodes(sys: &dyn FlowSystem, p: &[f64], period: f64, segments: usize, steps: usize) -> Result<Vec<Vec<f64>>> {
    let (pts, _) = trajectory(sys, p, period, steps, segments)?;
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ContactModel, ReebFlow};

    #[test]
    fn newton_finds_ellipsoid_short_orbit_from_nearby_seed() {
        let sys = ReebFlow::new(ContactModel::ellipsoid(1.0, 1.618_033_988_749_895));
        let p = vec![0.99f64.sqrt(), 0.0, 0.1, 0.0];
        let c = ShootingControls::default();
        let nodes = trajectory_nodes(&sys, &p, 1.05, c.segments, c.steps).unwrap();
        let sec = choose_section(&sys, &p, false).unwrap();
        let (p0, t) = correct(&sys, nodes, 1.05, &[0.0; 4], &sec, &c).unwrap();
        assert!((t - 1.0).abs() < 1e-9, "{t}");
        assert!(p0[2].abs() < 1e-9 && p0[3].abs() < 1e-9);
        let o = assemble_orbit(&sys, &p0, t, ClassLabel::PeriodWindow { min: 0.5, max: 2.0 }, c.steps, 128).unwrap();
        assert!(o.closure_residual < 1e-8 && o.flow_residual < 1e-8, "{} {}", o.closure_residual, o.flow_residual);
    }
}
