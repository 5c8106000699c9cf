//! Fixed geodesic strings of torus isometries, their mapping-torus lifts and
//! the signed count GWF built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use crate::index::{index_record, rational_json, IndexControls, Rational};
use crate::models::{ContactModel, IsometryModel, MappingTorusModel, StrictMap, TorusMetric, XAlphaFlow};
use crate::orbit::loops::{aligned_distance, TrigLoop};
use crate::orbit::{find_geodesics, lift_geodesic_orbit, ClassLabel, ClosedOrbit, FinderControls, OrbitFamilyReport, OrbitString, Topology};

/// Strictness required of a lifted isometry.
pub const LIFT_TOL: f64 = 1e-10;

/// Grid used to verify isometries and strictness.
const CHECK_GRID: usize = 32;

/// `n` in `dim = 2n + 1` for the unit cotangent bundle of a surface.
pub const N_DIM: i64 = 1;

/// Strict contactomorphism of the unit cotangent bundle induced by an isometry.
pub fn lift_isometry(metric: &TorusMetric, phi: &IsometryModel) -> Result<StrictMap> {
    phi.verify(metric, CHECK_GRID, LIFT_TOL)?;
    let map = StrictMap::from_isometry(phi);
    let fiber = ContactModel::unit_cotangent(metric.clone());
    let r = map.strictness_residual(&fiber, &fiber.grid(CHECK_GRID / 2))?;
    if !(r < LIFT_TOL) {
        return Err(Error::StrictnessViolation { max_residual: r });
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwfQuery {
    pub metric: TorusMetric,
    pub phi: IsometryModel,
    pub class: [i64; 2],
    pub charge: u32,
}

impl GwfQuery {
    /// Class of the lifted strings on the unit cotangent bundle: the base
    /// class with zero turning of the unit covector.
    pub fn lifted_class(&self) -> [i64; 3] {
        [self.class[0], self.class[1], 0]
    }

    /// `φⁿ_* β̃ = β̃`. Isometries act on the fiber angle by a constant
    /// rotation or reflection, so the turning component is preserved and
    /// only the base class matters.
    pub fn class_condition(&self) -> bool {
        self.phi.power(self.charge).act_on_class(self.class) == self.class
    }

    fn check(&self) -> Result<()> {
        if self.class == [0, 0] {
            return Err(Error::InvalidInput("the zero class holds only constant loops".into()));
        }
        if self.charge == 0 {
            return Err(Error::InvalidInput("charge must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedString {
    pub string: OrbitString,
    pub charge: u32,
    /// `φⁿ(o(t)) = o(t + θ₀)`.
    pub theta0: f64,
    pub fixing_residual: f64,
    pub class: [i64; 2],
    pub lifted_class: [i64; 3],
    /// τ-winding of the closed loop on the mapping torus.
    pub tau_winding: i64,
    pub closure_defect: f64,
    pub det_i_minus_p: f64,
    pub nondegenerate: bool,
    pub cz_index: Option<i64>,
    #[serde(with = "rational_json")]
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedStringReport {
    pub query: GwfQuery,
    pub class_condition: bool,
    /// Strings of the class found on the base before filtering.
    pub candidates: usize,
    pub fixed: Vec<FixedString>,
    /// For every fixed string, whether it belongs to a circle family all of
    /// whose members are fixed.
    pub in_fixed_circle: Vec<bool>,
    /// Smallest fixing residual over candidates that were not fixed.
    pub min_unfixed_residual: Option<f64>,
}

/// Image of a geodesic loop `(x, v)` under `ψ`: `(A x + s, A v)`.
fn image_samples(psi: &IsometryModel, o: &ClosedOrbit) -> Vec<Vec<f64>> {
    o.samples
        .iter()
        .map(|p| {
            let x = psi.apply_point(&p[..2]);
            let v = psi.apply_vector(&p[2..4]);
            vec![x[0], x[1], v[0], v[1]]
        })
        .collect()
}

/// `(residual, θ₀)` for `ψ ∘ o` against shifts of `o`.
pub fn displacement(psi: &IsometryModel, o: &ClosedOrbit) -> (f64, f64) {
    let img = image_samples(psi, o);
    let (d, s) = aligned_distance(&o.trig(), &o.samples, &img, &o.periodic);
    (d, s.rem_euclid(1.0))
}

/// Distance between the point sets of `ψ ∘ o` and `o`, through the best
/// alignment of positions only.
pub fn position_displacement(psi: &IsometryModel, o: &ClosedOrbit) -> f64 {
    let pos: Vec<Vec<f64>> = o.samples.iter().map(|p| p[..2].to_vec()).collect();
    let img: Vec<Vec<f64>> = image_samples(psi, o).into_iter().map(|p| p[..2].to_vec()).collect();
    let shift = o.lift_shift();
    let tl = TrigLoop::new(&pos, &shift[..2]);
    aligned_distance(&tl, &pos, &img, &o.periodic[..2]).0
}

/// Walks `s ↦ (o(s θ₀), n s)` through the mapping-torus gluing; returns the
/// number of τ-wraps and the closure defect at `s = 1`.
fn charge_loop(model: &MappingTorusModel, lift: &ClosedOrbit, theta0: f64, n: u32) -> Result<(i64, f64)> {
    let steps = 64 * n as usize;
    let tl = lift.trig();
    let mut wraps = 0;
    let mut prev_tau = 0.0;
    let mut first: Option<Vec<f64>> = None;
    let mut last = Vec::new();
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        let mut p = tl.eval(s * theta0);
        p.push(n as f64 * s);
        let g = model.glue(&p)?;
        if i > 0 && g[3] < prev_tau - 0.5 {
            wraps += 1;
        }
        prev_tau = g[3];
        if first.is_none() {
            first = Some(g.clone());
        }
        last = g;
    }
    let first = first.expect("at least one sample");
    let periodic = [true, true, true, false];
    let defect = crate::orbit::loops::point_distance(&first, &last, &periodic);
    Ok((wraps, defect))
}

/// The lifted orbit as an `X_α` orbit at `τ = 0`.
fn mapping_torus_orbit(sys: &XAlphaFlow, lift: &ClosedOrbit) -> Result<ClosedOrbit> {
    let mut o = lift.clone();
    o.system = sys.system_id();
    o.periodic = sys.periodic();
    for s in o.samples.iter_mut() {
        s.push(0.0);
    }
    if let ClassLabel::Winding { winding } = &mut o.class_label {
        winding.push(0);
    }
    o.flow_residual = o.compute_flow_residual(sys)?;
    Ok(o)
}

/// Charge-`n` strings of the query class whose image is fixed by `φⁿ`.
pub fn find_fixed_strings(query: &GwfQuery, c: &FinderControls, ic: &IndexControls) -> Result<FixedStringReport> {
    query.check()?;
    if !query.class_condition() {
        return fixed_strings_among(query, None, c, ic);
    }
    let report = find_geodesics(&query.metric, query.class, c)?;
    fixed_strings_among(query, Some(&report), c, ic)
}

/// [`find_fixed_strings`] over an already computed geodesic search of the
/// query class.
pub fn fixed_strings_among(
    query: &GwfQuery,
    report: Option<&OrbitFamilyReport>,
    c: &FinderControls,
    ic: &IndexControls,
) -> Result<FixedStringReport> {
    query.check()?;
    let lift = lift_isometry(&query.metric, &query.phi)?;
    let class_condition = query.class_condition();
    let report = match report {
        Some(r) if class_condition => r,
        _ => {
            return Ok(FixedStringReport {
                query: query.clone(),
                class_condition,
                candidates: 0,
                fixed: Vec::new(),
                in_fixed_circle: Vec::new(),
                min_unfixed_residual: None,
            })
        }
    };
    let fiber = ContactModel::unit_cotangent(query.metric.clone());
    let model = MappingTorusModel::new(fiber, lift, CHECK_GRID / 4)?;
    let xa = XAlphaFlow { model: model.clone() };
    let psi = query.phi.power(query.charge);

    let evaluated: Vec<(f64, Option<FixedString>)> = report
        .strings
        .par_iter()
        .map(|s| -> Result<(f64, Option<FixedString>)> {
            let o = &s.representative;
            let (res, theta0) = displacement(&psi, o);
            if !(res < c.tol_match) {
                return Ok((res, None));
            }
            let lifted = lift_geodesic_orbit(&query.metric, o)?;
            let (tau_winding, closure_defect) = charge_loop(&model, &lifted, theta0, query.charge)?;
            let mt = mapping_torus_orbit(&xa, &lifted)?;
            let rec = index_record(&xa, &OrbitString { representative: mt, ..s.clone() }, ic)?;
            let sign = match rec.cz_index {
                Some(cz) => {
                    if (cz - N_DIM).rem_euclid(2) == 0 {
                        1
                    } else {
                        -1
                    }
                }
                None => rec.fixed_point_index as i64,
            };
            let weight = if rec.nondegenerate {
                Rational::new(sign, s.multiplicity as i64)
            } else {
                Rational::from_integer(0)
            };
            let winding = match &lifted.class_label {
                ClassLabel::Winding { winding } => winding.clone(),
                ClassLabel::PeriodWindow { .. } => unreachable!("geodesic lifts carry winding labels"),
            };
            Ok((
                res,
                Some(FixedString {
                    string: s.clone(),
                    charge: query.charge,
                    theta0,
                    fixing_residual: res,
                    class: query.class,
                    lifted_class: [winding[0], winding[1], winding[2]],
                    tau_winding,
                    closure_defect,
                    det_i_minus_p: rec.det_i_minus_p,
                    nondegenerate: rec.nondegenerate,
                    cz_index: rec.cz_index,
                    weight,
                }),
            ))
        })
        .collect::<Result<_>>()?;

    let fixed_idx: Vec<usize> = (0..evaluated.len()).filter(|&i| evaluated[i].1.is_some()).collect();
    let in_fixed_circle = fixed_idx
        .iter()
        .map(|&i| {
            report.components.iter().any(|comp| {
                comp.topology == Topology::Circle
                    && comp.members.contains(&i)
                    && comp.members.iter().all(|m| evaluated[*m].1.is_some())
            })
        })
        .collect();
    let min_unfixed_residual = evaluated.iter().filter(|e| e.1.is_none()).map(|e| e.0).reduce(f64::min);
    Ok(FixedStringReport {
        query: query.clone(),
        class_condition,
        candidates: report.strings.len(),
        fixed: evaluated.into_iter().filter_map(|e| e.1).collect(),
        in_fixed_circle,
        min_unfixed_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwfReport {
    #[serde(with = "rational_json")]
    pub value: Rational,
    pub class_condition: bool,
    pub fixed: FixedStringReport,
    /// Fixed strings discarded as members of fixed circle families.
    pub morse_bott_members: usize,
}

/// `Σ (−1)^{CZ − n}/m` over fixed strings; zero when the class condition fails.
/// Strings in fixed circle families contribute nothing; any other
/// degenerate fixed string is an error.
pub fn gwf_invariant(query: &GwfQuery, c: &FinderControls, ic: &IndexControls) -> Result<GwfReport> {
    let fixed = find_fixed_strings(query, c, ic)?;
    let mut value = Rational::from_integer(0);
    let mut morse_bott_members = 0;
    for (f, &circle) in fixed.fixed.iter().zip(&fixed.in_fixed_circle) {
        if circle {
            morse_bott_members += 1;
            continue;
        }
        if !f.nondegenerate {
            return Err(Error::Degenerate {
                string: format!(
                    "fixed string of period {:.12} at {:?}",
                    f.string.representative.period,
                    f.string.representative.basepoint()
                ),
                det: f.det_i_minus_p,
            });
        }
        value += f.weight;
    }
    Ok(GwfReport { value, class_condition: fixed.class_condition, fixed, morse_bott_members })
}

/// Orthogonal distance between a class-`k` line of the flat torus and its
/// translate by `s`: `dist(k₂s₁ − k₁s₂, Z)/|k|` for primitive `k`.
pub fn flat_line_displacement(k: [i64; 2], s: [f64; 2]) -> f64 {
    let g = num_integer::gcd(k[0], k[1]).max(1);
    let k = [k[0] / g, k[1] / g];
    let delta = k[1] as f64 * s[0] - k[0] as f64 * s[1];
    let d = (delta - delta.round()).abs();
    d / ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementBound {
    pub class: [i64; 2],
    pub charge: u32,
    pub closed_form: f64,
    /// Smallest position displacement over the strings found numerically.
    pub numerical: Option<f64>,
    pub fixed_strings: usize,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub shift: [f64; 2],
    pub classes: Vec<[i64; 2]>,
    pub charges: Vec<u32>,
    pub bounds: Vec<DisplacementBound>,
    pub total_fixed: usize,
    pub empty: bool,
}

impl CounterexampleReport {
    /// Smallest closed-form bound for a class over the scanned charges.
    pub fn class_bound(&self, class: [i64; 2]) -> Option<f64> {
        self.bounds.iter().filter(|b| b.class == class).map(|b| b.closed_form).reduce(f64::min)
    }

    pub fn bound(&self, class: [i64; 2], charge: u32) -> Option<&DisplacementBound> {
        self.bounds.iter().find(|b| b.class == class && b.charge == charge)
    }
}

pub const COUNTEREXAMPLE_CLASSES: [[i64; 2]; 3] = [[1, 0], [0, 1], [1, 1]];

/// Scans classes and charges on the flat torus for strings fixed by the
/// translation `shift`.
pub fn verify_counterexample(
    shift: [f64; 2],
    classes: &[[i64; 2]],
    charges: &[u32],
    c: &FinderControls,
    ic: &IndexControls,
) -> Result<CounterexampleReport> {
    let metric = TorusMetric::flat();
    let phi = IsometryModel::translation(shift);
    let mut bounds = Vec::new();
    for &class in classes {
        let report = find_geodesics(&metric, class, c)?;
        for &n in charges {
            let psi = phi.power(n);
            let q = GwfQuery { metric: metric.clone(), phi: phi.clone(), class, charge: n };
            let fixed = fixed_strings_among(&q, Some(&report), c, ic)?;
            let numerical = report
                .strings
                .iter()
                .map(|s| position_displacement(&psi, &s.representative))
                .reduce(f64::min);
            bounds.push(DisplacementBound {
                class,
                charge: n,
                closed_form: flat_line_displacement(class, psi.shift),
                numerical,
                fixed_strings: fixed.fixed.len(),
                candidates: fixed.candidates,
            });
        }
    }
    let total_fixed = bounds.iter().map(|b| b.fixed_strings).sum();
    Ok(CounterexampleReport {
        shift,
        classes: classes.to_vec(),
        charges: charges.to_vec(),
        bounds,
        total_fixed,
        empty: total_fixed == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn controls() -> FinderControls {
        FinderControls { seeds: 16, ..FinderControls::default() }
    }

    #[test]
    fn flat_translation_lifts_exactly() {
        let m = lift_isometry(&TorusMetric::flat(), &IsometryModel::translation([0.3, 0.1])).unwrap();
        let fiber = ContactModel::unit_cotangent(TorusMetric::flat());
        let p = m.apply(&fiber, &[0.2, 0.5, 0.7]).unwrap();
        assert_eq!(p, vec![0.2 + 0.3, 0.5 + 0.1, 0.7]);
        assert_eq!(lift_isometry(&TorusMetric::flat(), &IsometryModel::identity()).unwrap(), StrictMap::Identity);
        let bad = lift_isometry(&TorusMetric::conformal_cos_y(0.1), &IsometryModel::translation([0.0, 0.3]));
        assert!(matches!(bad, Err(Error::NotAnIsometry { .. })));
    }

    #[test]
    fn closed_form_displacements() {
        let s = [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
        assert!((flat_line_displacement([1, 0], s) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((flat_line_displacement([0, 1], s) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let d11 = flat_line_displacement([1, 1], s);
        assert!((d11 - (3f64.sqrt() - 2f64.sqrt()) / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn perturbed_translation_fixes_two_strings_with_opposite_signs() {
        let q = GwfQuery {
            metric: TorusMetric::conformal_cos_y(0.1),
            phi: IsometryModel::translation([0.25, 0.0]),
            class: [1, 0],
            charge: 1,
        };
        let r = gwf_invariant(&q, &controls(), &IndexControls::default()).unwrap();
        assert_eq!(r.fixed.fixed.len(), 2);
        for f in &r.fixed.fixed {
            assert!((f.theta0 - 0.25).abs() < 1e-6, "theta0 = {}", f.theta0);
            assert_eq!(f.tau_winding, 1);
            assert!(f.closure_defect < 1e-8);
        }
        assert_eq!(r.value, Rational::from_integer(0));
    }

    #[test]
    fn class_condition_failure_gives_zero() {
        let q = GwfQuery {
            metric: TorusMetric::flat(),
            phi: IsometryModel::linear([[0, 1], [1, 0]], [0.0, 0.0]),
            class: [1, 0],
            charge: 1,
        };
        assert!(!q.class_condition());
        let r = gwf_invariant(&q, &controls(), &IndexControls::default()).unwrap();
        assert_eq!(r.value, Rational::from_integer(0));
        let q2 = GwfQuery { charge: 2, ..q };
        assert!(q2.class_condition());
    }
}
