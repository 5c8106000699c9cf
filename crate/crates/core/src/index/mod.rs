//! Linearized return maps, fixed-point indices, Conley–Zehnder indices and
//! Fuller indices.

pub mod cz;

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{variational, FlowSystem};
use crate::linalg::{symplectic_defect, to_dmatrix};
use crate::orbit::{Component, OrbitString, Topology};

pub use cz::{conley_zehnder, CzResult, SymplecticPath};

/// Default `|det(I − P)|` threshold separating Morse–Bott from nondegenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-6;
/// Upper edge of the warning band above the degeneracy threshold.
pub const WARNING_BAND: f64 = 1e-4;

/// Exact rational stored as `{"num", "den"}`.
pub type Rational = Ratio<i64>;

pub mod rational_json {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Repr { num: *r.numer(), den: *r.denom() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(r.num, r.den))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            r.map(|r| Repr { num: *r.numer(), den: *r.denom() }).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Ok(Option::<Repr>::deserialize(d)?.map(|r| Rational::new(r.num, r.den.max(1))))
        }
    }
}

/// Linearized time-one map of `period·X` at the basepoint, and its restriction
/// to the transverse frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyData {
    pub full: Vec<Vec<f64>>,
    pub restricted: Vec<Vec<f64>>,
    pub frame_id: String,
    pub period: f64,
    /// `‖PᵀJ₀P − J₀‖`, `None` for non-symplectic frames.
    pub symplectic_defect: Option<f64>,
    /// `‖Y·X(o(0)) − X(o(1))‖`.
    pub flow_direction_defect: f64,
}

impl MonodromyData {
    pub fn restricted_matrix(&self) -> DMatrix<f64> {
        to_dmatrix(&self.restricted)
    }

    pub fn full_matrix(&self) -> DMatrix<f64> {
        to_dmatrix(&self.full)
    }

    /// `det(I − P)`.
    pub fn det_i_minus_p(&self) -> f64 {
        let p = self.restricted_matrix();
        (DMatrix::identity(p.nrows(), p.ncols()) - p).determinant()
    }

    /// Wraps a bare restricted matrix (for tests and algebraic inputs).
    pub fn from_restricted(p: &DMatrix<f64>) -> Self {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        Self {
            full: rows(p),
            restricted: rows(p),
            frame_id: "standard".into(),
            period: 0.0,
            symplectic_defect: Some(symplectic_defect(p)),
            flow_direction_defect: 0.0,
        }
    }
}

fn basis(sys: &dyn FlowSystem, p: &[f64]) -> Result<(DMatrix<f64>, usize)> {
    let d = sys.dim();
    let x = sys.field(p)?;
    let f = sys.transverse_frame(p)?;
    let comp = sys.complement_directions(p);
    let k = f.ncols();
    if 1 + k + comp.len() != d {
        return Err(Error::Frame(format!(
            "frame of size {} plus flow and {} complement directions does not span dimension {d}",
            k,
            comp.len()
        )));
    }
    let mut b = DMatrix::zeros(d, d);
    for i in 0..d {
        b[(i, 0)] = x[i];
    }
    b.view_mut((0, 1), (d, k)).copy_from(&f);
    for (c, v) in comp.iter().enumerate() {
        for i in 0..d {
            b[(i, 1 + k + c)] = v[i];
        }
    }
    Ok((b, k))
}

/// Coefficients of `Y·F₀` along the transverse frame at `p`.
fn restrict(sys: &dyn FlowSystem, p: &[f64], y: &DMatrix<f64>, f0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (b, k) = basis(sys, p)?;
    let lu = b.lu();
    let c = lu
        .solve(&(y * f0))
        .ok_or_else(|| Error::Frame(format!("frame degenerate at {p:?}")))?;
    Ok(c.rows(1, k).into_owned())
}

fn check_system(sys: &dyn FlowSystem, orbit: &crate::orbit::ClosedOrbit) -> Result<()> {
    if orbit.system != sys.system_id() {
        return Err(Error::MismatchedModels(orbit.system.clone(), sys.system_id()));
    }
    Ok(())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Integrates the variational equation along the orbit and restricts the
/// time-one map to the model's transverse frame at the basepoint.
pub fn monodromy(sys: &dyn FlowSystem, orbit: &crate::orbit::ClosedOrbit, steps: usize) -> Result<MonodromyData> {
    Ok(monodromy_with_path(sys, orbit, steps, false)?.0)
}

/// Monodromy together with the path `t ↦ Φ(t)` of restricted linearized maps.
pub fn monodromy_with_path(
    sys: &dyn FlowSystem,
    orbit: &crate::orbit::ClosedOrbit,
    steps: usize,
    with_path: bool,
) -> Result<(MonodromyData, Option<SymplecticPath>)> {
    check_system(sys, orbit)?;
    let p0 = orbit.basepoint();
    let track = variational(sys, p0, orbit.period, steps, with_path)?;
    let f0 = sys.transverse_frame(p0)?;
    let mut p_end = p0.to_vec();
    for (e, s) in p_end.iter_mut().zip(orbit.lift_shift()) {
        *e += s;
    }
    let restricted = restrict(sys, &p_end, &track.y, &f0)?;
    let x0 = nalgebra::DVector::from_vec(sys.field(p0)?);
    let x1 = nalgebra::DVector::from_vec(sys.field(&track.end)?);
    let flow_direction_defect = (&track.y * x0 - x1).norm();
    let symplectic = sys.symplectic_frame();
    let data = MonodromyData {
        full: rows(&track.y),
        restricted: rows(&restricted),
        frame_id: sys.frame_id(),
        period: orbit.period,
        symplectic_defect: symplectic.then(|| symplectic_defect(&restricted)),
        flow_direction_defect,
    };
    let path = if with_path {
        let mut mats = Vec::with_capacity(track.mats.len());
        for (p, y) in track.points.iter().zip(&track.mats) {
            mats.push(restrict(sys, p, y, &f0)?);
        }
        // the recorded end point uses the integrated frame, the monodromy the exact lift
        if let Some(last) = mats.last_mut() {
            *last = restricted.clone();
        }
        Some(SymplecticPath::new(track.times, mats))
    } else {
        None
    };
    Ok((data, path))
}

/// `|det(I − P)| > tol`.
pub fn nondegenerate(m: &MonodromyData, tol: f64) -> bool {
    m.det_i_minus_p().abs() > tol
}

/// Whether `|det(I − P)|` lies in the warning band just above `tol`.
pub fn in_warning_band(m: &MonodromyData, tol: f64) -> bool {
    let d = m.det_i_minus_p().abs();
    d > tol && d < WARNING_BAND
}

/// `sign det(I − P)`.
pub fn fixed_point_index(m: &MonodromyData, tol: f64) -> Result<i8> {
    let d = m.det_i_minus_p();
    if !(d.abs() > tol) {
        return Err(Error::Degenerate { string: format!("period {:.12}", m.period), det: d });
    }
    Ok(if d > 0.0 { 1 } else { -1 })
}

/// Dimension of the 1-eigenspace of the restricted monodromy.
pub fn kernel_dimension(m: &MonodromyData, tol: f64) -> usize {
    let p = m.restricted_matrix();
    let a = DMatrix::identity(p.nrows(), p.ncols()) - p;
    a.svd(false, false).singular_values.iter().filter(|&&s| s < tol).count()
}

/// `sign det(I − P) = (−1)^{cz − n}`.
pub fn sign_identity_check(m: &MonodromyData, cz: i64, n: i64) -> bool {
    let s = m.det_i_minus_p().signum() as i64;
    let parity = if (cz - n).rem_euclid(2) == 0 { 1 } else { -1 };
    s == parity
}

/// Per-string index data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub string: OrbitString,
    pub monodromy: MonodromyData,
    pub det_i_minus_p: f64,
    pub nondegenerate: bool,
    pub warning: bool,
    /// `±1`, or `0` for degenerate strings.
    pub fixed_point_index: i8,
    pub cz_index: Option<i64>,
    pub kernel_dimension: usize,
    #[serde(with = "rational_json")]
    pub weight: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexControls {
    pub steps: usize,
    pub degeneracy_tol: f64,
    pub kernel_tol: f64,
    pub cz: bool,
}

impl Default for IndexControls {
    fn default() -> Self {
        Self { steps: 1024, degeneracy_tol: DEFAULT_DEGENERACY_TOL, kernel_tol: 1e-5, cz: true }
    }
}

/// Computes monodromy, fixed-point index and (when requested and defined)
/// the Conley–Zehnder index of one string.
pub fn index_record(sys: &dyn FlowSystem, string: &OrbitString, c: &IndexControls) -> Result<IndexRecord> {
    let want_path = c.cz && sys.symplectic_frame();
    let (m, path) = monodromy_with_path(sys, &string.representative, c.steps, want_path)?;
    let det = m.det_i_minus_p();
    let nondeg = det.abs() > c.degeneracy_tol;
    let fpi: i8 = if nondeg { det.signum() as i8 } else { 0 };
    let cz_index = match (nondeg, path) {
        (true, Some(p)) => Some(conley_zehnder(&p)?.index),
        _ => None,
    };
    Ok(IndexRecord {
        string: string.clone(),
        det_i_minus_p: det,
        nondegenerate: nondeg,
        warning: in_warning_band(&m, c.degeneracy_tol),
        fixed_point_index: fpi,
        cz_index,
        kernel_dimension: kernel_dimension(&m, c.kernel_tol),
        weight: Rational::new(fpi as i64, string.multiplicity as i64),
        monodromy: m,
    })
}

/// `Σ i(o)/m(o)` over nondegenerate strings.
pub fn fuller_index(records: &[IndexRecord]) -> Result<Rational> {
    let mut acc = Rational::from_integer(0);
    for r in records {
        if !r.nondegenerate {
            return Err(Error::Degenerate {
                string: format!(
                    "period {:.12} at {:?}",
                    r.string.representative.period,
                    r.string.representative.basepoint()
                ),
                det: r.det_i_minus_p,
            });
        }
        acc += Rational::new(r.fixed_point_index as i64, r.string.multiplicity as i64);
    }
    Ok(acc)
}

/// Euler-characteristic rule: circle families contribute 0, point components
/// reduce to [`fuller_index`] of their members.
pub fn morse_bott_fuller(component: &Component, records: &[IndexRecord]) -> Result<Rational> {
    match component.topology {
        Topology::Circle => Ok(Rational::from_integer(0)),
        Topology::Point => {
            let members: Vec<IndexRecord> = component.members.iter().map(|&i| records[i].clone()).collect();
            fuller_index(&members)
        }
        Topology::Unknown => Err(Error::UnsupportedTopology(format!(
            "component with {} members is neither an isolated string nor a closed circle family",
            component.members.len()
        ))),
    }
}

/// Index data for a whole family report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub records: Vec<IndexRecord>,
    #[serde(with = "rational_json::option")]
    pub fuller: Option<Rational>,
    pub morse_bott: bool,
    pub kernel_dimension: usize,
}

/// Fuller index of all strings, or the Morse–Bott sum over components when
/// `morse_bott` is set.
pub fn index_report(
    sys: &dyn FlowSystem,
    strings: &[OrbitString],
    components: &[Component],
    c: &IndexControls,
    morse_bott: bool,
) -> Result<IndexReport> {
    use rayon::prelude::*;
    let records: Vec<IndexRecord> = strings
        .par_iter()
        .map(|s| index_record(sys, s, c))
        .collect::<Result<Vec<_>>>()?;
    let fuller = if morse_bott {
        let mut acc = Rational::from_integer(0);
        for comp in components {
            acc += morse_bott_fuller(comp, &records)?;
        }
        acc
    } else {
        fuller_index(&records)?
    };
    let kernel_dimension = records.iter().map(|r| r.kernel_dimension).max().unwrap_or(0);
    Ok(IndexReport { records, fuller: Some(fuller), morse_bott, kernel_dimension })
}

/// [`index_report`] for geodesic strings, computed on their canonical lifts
/// to the unit cotangent bundle.
pub fn geodesic_index_report(
    metric: &crate::models::TorusMetric,
    strings: &[OrbitString],
    components: &[Component],
    c: &IndexControls,
    morse_bott: bool,
) -> Result<IndexReport> {
    use crate::models::{ContactModel, ReebFlow};
    let sys = ReebFlow::new(ContactModel::unit_cotangent(metric.clone()));
    let lifted = strings
        .iter()
        .map(|s| {
            Ok(OrbitString {
                representative: crate::orbit::lift_geodesic_orbit(metric, &s.representative)?,
                ..s.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    index_report(&sys, &lifted, components, c, morse_bott)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;

    fn diag(a: f64, b: f64) -> MonodromyData {
        MonodromyData::from_restricted(&DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]))
    }

    #[test]
    fn fixed_point_indices_of_algebraic_examples() {
        assert_eq!(fixed_point_index(&diag(2.0, 0.5), 1e-6).unwrap(), -1);
        assert_eq!(fixed_point_index(&diag(-2.0, -0.5), 1e-6).unwrap(), 1);
        let rot = MonodromyData::from_restricted(&rotation2(0.3 * std::f64::consts::TAU));
        assert_eq!(fixed_point_index(&rot, 1e-6).unwrap(), 1);
        assert!(nondegenerate(&rot, 1e-6));
        assert!(!nondegenerate(&diag(1.0, 1.0), 1e-6));
        assert!(fixed_point_index(&diag(1.0, 1.0), 1e-6).is_err());
        let shear = MonodromyData::from_restricted(&DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]));
        assert!(!nondegenerate(&shear, 1e-6));
        assert_eq!(kernel_dimension(&shear, 1e-5), 1);
    }

    #[test]
    fn sign_identity_examples() {
        let rot = MonodromyData::from_restricted(&rotation2(0.3 * std::f64::consts::TAU));
        assert!(sign_identity_check(&rot, 1, 1));
        assert!(!sign_identity_check(&rot, 2, 1));
        assert!(sign_identity_check(&diag(2.0, 0.5), 0, 1));
    }

    #[test]
    fn rationals_serialize_as_num_den() {
        #[derive(Serialize, Deserialize)]
        struct W {
            #[serde(with = "rational_json")]
            r: Rational,
        }
        let s = serde_json::to_string(&W { r: Rational::new(2, 4) }).unwrap();
        assert_eq!(s, r#"{"r":{"num":1,"den":2}}"#);
        let w: W = serde_json::from_str(&s).unwrap();
        assert_eq!(w.r, Rational::new(1, 2));
    }
}
