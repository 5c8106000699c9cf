//! Contact models and their Reeb fields.
//!
//! The Reeb field is never hand-coded. At a point `p` with tangent frame
//! `E_1..E_{2n+1}` we form `ℓ_a = λ(E_a)`, `Ω_ab = dλ(E_a, E_b)` and solve
//! `(Ω + ℓ ℓᵀ) c = ℓ`; then `R = Σ c_a E_a`. A solution satisfies `Ω c = 0` and
//! `ℓ·c = 1`, and the matrix is invertible exactly when `λ ∧ dλ ≠ 0` at `p`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ad::{jacobian, seed, values, Dual, Real, D1, MAXD};
use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use crate::fourier::FourierSeries;
use crate::linalg::solve_generic;
use crate::models::metric::TorusMetric;
use crate::models::short_hash;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContactModel {
    /// Unit cotangent bundle of a torus metric in the chart `(x, y, θ)`, where
    /// θ is the angle of the covector against the orthonormal coframe.
    UnitCotangentTorus { metric: TorusMetric },
    /// Boundary of the ellipsoid `π|z₁|²/a + π|z₂|²/b = 1`, pulled back to the
    /// unit sphere `S³ ⊂ R⁴ = C²` by radial projection; chart `(x₁, y₁, x₂, y₂)`.
    EllipsoidS3 { a: f64, b: f64 },
    /// `λ = Σ λ_i dx_i` on `T³` with Fourier components. ξ is framed by the
    /// projections along R of two declared vector fields, `(∂x, ∂y)` when absent.
    Explicit {
        lambda: [FourierSeries; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<[[FourierSeries; 3]; 2]>,
    },
}

const SOLVE_TOL: f64 = 1e-12;

impl ContactModel {
    pub fn unit_cotangent(metric: TorusMetric) -> Self {
        Self::UnitCotangentTorus { metric }
    }

    pub fn ellipsoid(a: f64, b: f64) -> Self {
        Self::EllipsoidS3 { a, b }
    }

    pub fn explicit(lambda: [FourierSeries; 3]) -> Self {
        Self::Explicit { lambda, frame: None }
    }

    pub fn explicit_with_frame(lambda: [FourierSeries; 3], frame: [[FourierSeries; 3]; 2]) -> Self {
        Self::Explicit { lambda, frame: Some(frame) }
    }

    /// Dimension `2n + 1` of the contact manifold.
    /// Componentwise interpolation `(1 − s)·self + s·other` of models of the same kind.
    pub fn lerp(&self, other: &Self, s: f64) -> Result<Self> {
        match (self, other) {
            (Self::UnitCotangentTorus { metric: a }, Self::UnitCotangentTorus { metric: b }) => {
                Ok(Self::unit_cotangent(a.lerp(b, s)))
            }
            (Self::EllipsoidS3 { a: a0, b: b0 }, Self::EllipsoidS3 { a: a1, b: b1 }) => {
                Ok(Self::ellipsoid((1.0 - s) * a0 + s * a1, (1.0 - s) * b0 + s * b1))
            }
            (Self::Explicit { lambda: l0, frame: f0 }, Self::Explicit { lambda: l1, frame: f1 }) => {
                let lerp3 = |a: &[FourierSeries; 3], b: &[FourierSeries; 3]| {
                    [a[0].lerp(&b[0], s), a[1].lerp(&b[1], s), a[2].lerp(&b[2], s)]
                };
                let frame = match (f0, f1) {
                    (None, None) => None,
                    (Some(a), Some(b)) => Some([lerp3(&a[0], &b[0]), lerp3(&a[1], &b[1])]),
                    _ => return Err(Error::MismatchedModels(self.id(), other.id())),
                };
                Ok(Self::Explicit { lambda: lerp3(l0, l1), frame })
            }
            _ => Err(Error::MismatchedModels(self.id(), other.id())),
        }
    }

    pub fn manifold_dim(&self) -> usize {
        3
    }

    /// `n` in `2n + 1`.
    pub fn half_dim(&self) -> usize {
        (self.manifold_dim() - 1) / 2
    }

    /// Number of chart coordinates.
    pub fn chart_dim(&self) -> usize {
        match self {
            Self::EllipsoidS3 { .. } => 4,
            _ => 3,
        }
    }

    pub fn periodic(&self) -> Vec<bool> {
        match self {
            Self::EllipsoidS3 { .. } => vec![false; 4],
            _ => vec![true; 3],
        }
    }

    pub fn is_torus_based(&self) -> bool {
        !matches!(self, Self::EllipsoidS3 { .. })
    }

    pub fn metric(&self) -> Option<&TorusMetric> {
        match self {
            Self::UnitCotangentTorus { metric } => Some(metric),
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        let tag = match self {
            Self::UnitCotangentTorus { .. } => "unit-cotangent-torus",
            Self::EllipsoidS3 { .. } => "ellipsoid-s3",
            Self::Explicit { .. } => "explicit-t3",
        };
        format!("{tag}:{}", short_hash(&serde_json::to_string(self).unwrap_or_default()))
    }

    pub fn frame_id(&self) -> &'static str {
        match self {
            Self::UnitCotangentTorus { .. } => "coframe-angle:(-sinE1+cosE2, d/dtheta)",
            Self::EllipsoidS3 { .. } => "quaternion:(jq, kq)",
            Self::Explicit { frame: None, .. } => "projected:(d/dx, d/dy)",
            Self::Explicit { frame: Some(_), .. } => "projected:declared",
        }
    }

    /// Chart components of λ at `p`.
    pub fn lambda<S: Real>(&self, p: &[S]) -> Vec<S> {
        match self {
            Self::UnitCotangentTorus { metric } => {
                let e = metric.coframe(&p[..2]);
                let (s, c) = p[2].scale(TAU).sin_cos();
                vec![c * e[0][0] + s * e[1][0], c * e[0][1] + s * e[1][1], S::cst(0.0)]
            }
            Self::EllipsoidS3 { a, b } => {
                let r1 = p[0] * p[0] + p[1] * p[1];
                let r2 = p[2] * p[2] + p[3] * p[3];
                let h = r1.scale(std::f64::consts::PI / a) + r2.scale(std::f64::consts::PI / b);
                let k = h.recip().scale(0.5);
                vec![-p[1] * k, p[0] * k, -p[3] * k, p[2] * k]
            }
            Self::Explicit { lambda, .. } => lambda.iter().map(|f| f.eval(p)).collect(),
        }
    }

    /// A frame of the tangent space of the contact manifold at `p`, as chart vectors.
    pub fn tangent_frame<S: Real>(&self, p: &[S]) -> Vec<Vec<S>> {
        let z = S::cst(0.0);
        match self {
            Self::UnitCotangentTorus { metric } => {
                let f = metric.frame(&p[..2]);
                vec![
                    vec![f[0][0], f[0][1], z],
                    vec![f[1][0], f[1][1], z],
                    vec![z, z, S::cst(1.0)],
                ]
            }
            Self::EllipsoidS3 { .. } => quaternion_frame(p).to_vec(),
            Self::Explicit { .. } => (0..3)
                .map(|i| (0..3).map(|j| S::cst(if i == j { 1.0 } else { 0.0 })).collect())
                .collect(),
        }
    }

    /// `(λ_i, dΛ_ij)` with `dλ(u, v) = Σ dΛ_ij u^i v^j`, `dΛ_ij = ∂_i λ_j − ∂_j λ_i`.
    pub fn form_data<S: Real>(&self, p: &[S]) -> (Vec<S>, Vec<Vec<S>>) {
        let d = self.chart_dim();
        let ps: Vec<Dual<S, MAXD>> = seed(p);
        let lam = self.lambda(&ps);
        let jac = jacobian(&lam, d); // jac[j][i] = ∂_i λ_j
        let dl = (0..d)
            .map(|i| (0..d).map(|j| jac[j][i] - jac[i][j]).collect())
            .collect();
        (values(&lam), dl)
    }

    /// Reeb field at `p` over any scalar type.
    pub fn reeb<S: Real>(&self, p: &[S]) -> Result<Vec<S>> {
        let d = self.chart_dim();
        let (lam, dl) = self.form_data(p);
        let frame = self.tangent_frame(p);
        let k = frame.len();
        let ell: Vec<S> = frame.iter().map(|e| dot(&lam, e)).collect();
        let mut a = vec![vec![S::cst(0.0); k]; k];
        for r in 0..k {
            for c in 0..k {
                a[r][c] = bilinear(&dl, &frame[r], &frame[c]) + ell[r] * ell[c];
            }
        }
        let coef = solve_generic(a, ell, SOLVE_TOL).ok_or_else(|| {
            Error::DegenerateModel(format!(
                "contact condition fails at {:?}",
                p.iter().map(|x| x.value()).collect::<Vec<_>>()
            ))
        })?;
        let mut out = vec![S::cst(0.0); d];
        for (c, e) in coef.iter().zip(&frame) {
            for i in 0..d {
                out[i] += *c * e[i];
            }
        }
        Ok(out)
    }

    pub fn reeb_field(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.reeb(p)
    }

    pub fn reeb_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let d = self.chart_dim();
        let ps = seed(p);
        let r: Vec<D1> = self.reeb(&ps)?;
        let jac = jacobian(&r, d);
        Ok((values(&r), DMatrix::from_fn(d, d, |i, j| jac[i][j])))
    }

    /// Chart matrix of dλ at `p`.
    pub fn dlambda(&self, p: &[f64]) -> DMatrix<f64> {
        let d = self.chart_dim();
        let (_, dl) = self.form_data(p);
        DMatrix::from_fn(d, d, |i, j| dl[i][j])
    }

    /// `λ ∧ dλ` evaluated on the model's tangent frame.
    pub fn contact_volume(&self, p: &[f64]) -> f64 {
        let (lam, dl) = self.form_data(p);
        let e = self.tangent_frame(p);
        let l: Vec<f64> = e.iter().map(|v| dot(&lam, v)).collect();
        let w = |a: usize, b: usize| bilinear(&dl, &e[a], &e[b]);
        l[0] * w(1, 2) - l[1] * w(0, 2) + l[2] * w(0, 1)
    }

    /// Unnormalized spanning vectors of ξ = ker λ.
    fn xi_raw(&self, p: &[f64]) -> Result<[Vec<f64>; 2]> {
        match self {
            Self::UnitCotangentTorus { metric } => {
                let f = metric.frame(&p[..2]);
                let (s, c) = (TAU * p[2]).sin_cos();
                Ok([
                    vec![-s * f[0][0] + c * f[1][0], -s * f[0][1] + c * f[1][1], 0.0],
                    vec![0.0, 0.0, 1.0],
                ])
            }
            Self::EllipsoidS3 { .. } => {
                let q = quaternion_frame(p);
                Ok([q[1].clone(), q[2].clone()])
            }
            Self::Explicit { lambda, frame } => {
                let r = self.reeb_field(p)?;
                let lam: Vec<f64> = lambda.iter().map(|f| f.eval(p)).collect();
                let vectors: [Vec<f64>; 2] = match frame {
                    None => [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
                    Some(v) => [v[0].iter().map(|f| f.eval(p)).collect(), v[1].iter().map(|f| f.eval(p)).collect()],
                };
                let proj = |v: &[f64]| -> Vec<f64> {
                    let l = dot(&lam, v);
                    (0..3).map(|j| v[j] - l * r[j]).collect()
                };
                Ok([proj(&vectors[0]), proj(&vectors[1])])
            }
        }
    }

    /// Global frame `(f₁, f₂)` of ξ normalized so that `dλ(f₁, f₂) = 1`; columns of a `d × 2` matrix.
    pub fn xi_frame(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let [f1, f2] = self.xi_raw(p)?;
        let (_, dl) = self.form_data(p);
        let w = bilinear(&dl, &f1, &f2);
        if !(w.abs() > 1e-12) {
            return Err(Error::Frame(format!("dλ vanishes on the ξ frame at {p:?}")));
        }
        let d = self.chart_dim();
        Ok(DMatrix::from_fn(d, 2, |i, j| if j == 0 { f1[i] } else { f2[i] / w }))
    }

    /// Points of the validity grid, `res` per dimension.
    pub fn grid(&self, res: usize) -> Vec<Vec<f64>> {
        let r = res as f64;
        let mut out = Vec::new();
        match self {
            Self::EllipsoidS3 { .. } => {
                for i in 0..res {
                    let eta = (i as f64 + 0.5) / r * std::f64::consts::FRAC_PI_2;
                    for j in 0..res {
                        for k in 0..res {
                            let (s1, c1) = (TAU * j as f64 / r).sin_cos();
                            let (s2, c2) = (TAU * k as f64 / r).sin_cos();
                            let (se, ce) = eta.sin_cos();
                            out.push(vec![ce * c1, ce * s1, se * c2, se * s2]);
                        }
                    }
                }
            }
            _ => {
                for i in 0..res {
                    for j in 0..res {
                        for k in 0..res {
                            out.push(vec![i as f64 / r, j as f64 / r, k as f64 / r]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::EllipsoidS3 { .. } => loop {
                let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.1 && n <= 1.0 {
                    return v.iter().map(|x| x / n).collect();
                }
            },
            _ => (0..3).map(|_| rng.random::<f64>()).collect(),
        }
    }

    /// Parameter checks, contact condition and ξ-frame checks on a `res`-per-dimension grid.
    pub fn validate(&self, res: usize, max_degree: i32) -> Result<()> {
        match self {
            Self::UnitCotangentTorus { metric } => metric.validate(res.max(2), max_degree)?,
            Self::EllipsoidS3 { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "ellipsoid parameters must be positive, got a = {a}, b = {b}"
                    )));
                }
            }
            Self::Explicit { lambda, frame } => {
                for f in lambda.iter().chain(frame.iter().flatten().flatten()) {
                    f.check(3, max_degree)?;
                }
            }
        }
        for p in self.grid(res) {
            let (lam, dl) = self.form_data(&p);
            let scale = norm(&lam) * dl.iter().map(|r| norm(r)).fold(0.0, f64::max);
            let vol = self.contact_volume(&p);
            if !(vol.abs() > 1e-9 * scale.max(1.0)) {
                return Err(Error::DegenerateModel(format!(
                    "λ ∧ dλ = {vol:.3e} at {p:?}"
                )));
            }
            let xi = self.xi_frame(&p)?;
            for j in 0..2 {
                let v: Vec<f64> = xi.column(j).iter().copied().collect();
                let r = dot(&lam, &v);
                if r.abs() > 1e-10 {
                    return Err(Error::Frame(format!("ξ frame leaves ker λ by {r:.3e} at {p:?}")));
                }
            }
        }
        Ok(())
    }

    /// `(|λ(R) − 1|, ‖dλ(R, ·)‖)` at `p`.
    pub fn reeb_residuals(&self, p: &[f64]) -> Result<(f64, f64)> {
        let r = self.reeb_field(p)?;
        let (lam, dl) = self.form_data(p);
        let l = (dot(&lam, &r) - 1.0).abs();
        // dλ(R, ·) restricted to the tangent space of the manifold
        let frame = self.tangent_frame(p);
        let k = frame.iter().map(|e| bilinear(&dl, &r, e)).fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok((l, k))
    }
}

fn quaternion_frame<S: Real>(p: &[S]) -> [Vec<S>; 3] {
    let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
    [vec![-b, a, -d, c], vec![-c, d, a, -b], vec![-d, -c, b, a]]
}

fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    let mut s = S::cst(0.0);
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

fn bilinear<S: Real>(m: &[Vec<S>], u: &[S], v: &[S]) -> S {
    let mut s = S::cst(0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            s += u[i] * *mij * v[j];
        }
    }
    s
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The Reeb flow of a contact model as a [`FlowSystem`].
#[derive(Clone, Debug)]
pub struct ReebFlow {
    pub model: ContactModel,
}

impl ReebFlow {
    pub fn new(model: ContactModel) -> Self {
        Self { model }
    }
}

impl FlowSystem for ReebFlow {
    fn dim(&self) -> usize {
        self.model.chart_dim()
    }
    fn periodic(&self) -> Vec<bool> {
        self.model.periodic()
    }
    fn field(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.model.reeb_field(p)
    }
    fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.model.reeb_jacobian(p)
    }
    fn constraints(&self, p: &[f64]) -> Vec<(f64, Vec<f64>)> {
        match self.model {
            ContactModel::EllipsoidS3 { .. } => {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                vec![(r2 - 1.0, p.iter().map(|x| 2.0 * x).collect())]
            }
            _ => Vec::new(),
        }
    }
    fn transverse_frame(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.model.xi_frame(p)
    }
    fn frame_id(&self) -> String {
        self.model.frame_id().to_string()
    }
    fn system_id(&self) -> String {
        format!("reeb:{}", self.model.id())
    }
}

/// Closed-form Reeb field of the ellipsoid, used as an oracle.
pub fn ellipsoid_reeb_closed_form(a: f64, b: f64, p: &[f64]) -> DVector<f64> {
    DVector::from_vec(vec![
        -TAU / a * p[1],
        TAU / a * p[0],
        -TAU / b * p[3],
        TAU / b * p[2],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_reeb_field_is_the_unit_covector() {
        let m = ContactModel::unit_cotangent(TorusMetric::flat());
        for p in [[0.1, 0.2, 0.3], [0.7, 0.4, 0.91]] {
            let r = m.reeb_field(&p).unwrap();
            let (s, c) = (TAU * p[2]).sin_cos();
            assert!((r[0] - c).abs() < 1e-12 && (r[1] - s).abs() < 1e-12 && r[2].abs() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_reeb_field_matches_linear_flow() {
        let m = ContactModel::ellipsoid(1.0, 1.618_033_988_749_895);
        let p = [0.5, 0.1, -0.3, (1.0f64 - 0.35).sqrt()];
        let r = m.reeb_field(&p).unwrap();
        let exact = ellipsoid_reeb_closed_form(1.0, 1.618_033_988_749_895, &p);
        for i in 0..4 {
            assert!((r[i] - exact[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn reeb_jacobian_matches_finite_differences() {
        let g = TorusMetric::conformal_cos_y(0.1);
        let m = ContactModel::unit_cotangent(g);
        let p = [0.3, 0.2, 0.15];
        let (_, j) = m.reeb_jacobian(&p).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let fa = m.reeb_field(&a).unwrap();
            let fb = m.reeb_field(&b).unwrap();
            for i in 0..3 {
                assert!((j[(i, k)] - (fa[i] - fb[i]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn contact_condition_failure_is_reported() {
        let lam = [
            FourierSeries::zero(),
            FourierSeries::zero().with_term(&[1, 0, 0], 0.0, 0.5),
            FourierSeries::constant(1.0, 3),
        ];
        let m = ContactModel::explicit(lam);
        assert!(matches!(m.reeb_field(&[0.25, 0.3, 0.1]), Err(Error::DegenerateModel(_))));
        assert!(m.validate(8, 8).is_err());
    }

    #[test]
    fn standard_t3_form_needs_a_declared_frame() {
        let c = |k: [i32; 3], a: f64, b: f64| FourierSeries::zero().with_term(&k, a, b);
        let lam = [c([0, 0, 1], 1.0, 0.0), c([0, 0, 1], 0.0, 1.0), FourierSeries::zero()];
        assert!(ContactModel::explicit(lam.clone()).validate(6, 8).is_err());
        let frame = [
            [FourierSeries::zero(), FourierSeries::zero(), FourierSeries::constant(1.0, 3)],
            [c([0, 0, 1], 0.0, -1.0), c([0, 0, 1], 1.0, 0.0), FourierSeries::zero()],
        ];
        let m = ContactModel::explicit_with_frame(lam, frame);
        m.validate(6, 8).unwrap();
        let p = [0.3, 0.7, 0.15];
        let r = m.reeb_field(&p).unwrap();
        let (s, co) = (TAU * 0.15f64).sin_cos();
        assert!((r[0] - co).abs() < 1e-12 && (r[1] - s).abs() < 1e-12 && r[2].abs() < 1e-12);
    }

    #[test]
    fn xi_frame_is_symplectically_normalized() {
        let m = ContactModel::unit_cotangent(TorusMetric::conformal_cos_y(0.1));
        let p = [0.4, 0.3, 0.77];
        let f = m.xi_frame(&p).unwrap();
        let dl = m.dlambda(&p);
        let w = (f.column(0).transpose() * &dl * f.column(1))[(0, 0)];
        assert!((w - 1.0).abs() < 1e-13);
        m.validate(8, 8).unwrap();
        ContactModel::ellipsoid(1.0, 2.0).validate(6, 8).unwrap();
    }
}
