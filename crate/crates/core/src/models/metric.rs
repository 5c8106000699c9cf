//! Riemannian metrics on the 2-torus, their geodesic flows and isometries.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ad::{seed, Dual, Real, MAXD};
use crate::error::{Error, Result};
use crate::flow::{FlowSystem, GenericField};
use crate::fourier::{FourierSeries, DEFAULT_MAX_DEGREE};
use crate::models::short_hash;

/// `g = g11 dx² + 2 g12 dx dy + g22 dy²` with Fourier coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusMetric {
    pub g11: FourierSeries,
    #[serde(default)]
    pub g12: FourierSeries,
    pub g22: FourierSeries,
}

impl TorusMetric {
    pub fn flat() -> Self {
        Self {
            g11: FourierSeries::constant(1.0, 2),
            g12: FourierSeries::zero(),
            g22: FourierSeries::constant(1.0, 2),
        }
    }

    /// `f·δ` for a scalar Fourier factor `f`.
    pub fn conformal(f: FourierSeries) -> Self {
        Self { g11: f.clone(), g12: FourierSeries::zero(), g22: f }
    }

    /// `(1 + eps·cos 2πy)·δ`.
    pub fn conformal_cos_y(eps: f64) -> Self {
        Self::conformal(FourierSeries::constant(1.0, 2).with_term(&[0, 1], eps, 0.0))
    }

    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        Self {
            g11: self.g11.lerp(&other.g11, s),
            g12: self.g12.lerp(&other.g12, s),
            g22: self.g22.lerp(&other.g22, s),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.g11.is_constant() && self.g12.is_constant() && self.g22.is_constant()
    }

    /// `(g11, g12, g22)` at `x`.
    pub fn components<S: Real>(&self, x: &[S]) -> [S; 3] {
        [self.g11.eval(x), self.g12.eval(x), self.g22.eval(x)]
    }

    /// Structural checks plus positive-definiteness on a `grid × grid` lattice.
    pub fn validate(&self, grid: usize, max_degree: i32) -> Result<()> {
        for (name, s) in [("g11", &self.g11), ("g12", &self.g12), ("g22", &self.g22)] {
            s.check(2, max_degree)
                .map_err(|e| Error::InvalidMetric(format!("{name}: {e}")))?;
        }
        let mut worst = f64::INFINITY;
        for i in 0..grid {
            for j in 0..grid {
                let x = [i as f64 / grid as f64, j as f64 / grid as f64];
                let [a, b, c] = self.components(&x);
                let tr = a + c;
                let det = a * c - b * b;
                let lmin = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
                worst = worst.min(lmin);
                if !(lmin > 0.0) {
                    return Err(Error::InvalidMetric(format!(
                        "not positive definite at ({:.4}, {:.4}): smallest eigenvalue {lmin:.3e}",
                        x[0], x[1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate_default(&self) -> Result<()> {
        self.validate(64, DEFAULT_MAX_DEGREE)
    }

    /// `g_x(v, w)`.
    pub fn inner<S: Real>(&self, x: &[S], v: &[S], w: &[S]) -> S {
        let [a, b, c] = self.components(x);
        a * v[0] * w[0] + b * (v[0] * w[1] + v[1] * w[0]) + c * v[1] * w[1]
    }

    /// g-length of the straight segment from `x` to `x + k` by Gauss–Legendre-free
    /// midpoint quadrature.
    pub fn straight_length(&self, x: &[f64], k: &[f64], nodes: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..nodes {
            let s = (i as f64 + 0.5) / nodes as f64;
            let p = [x[0] + s * k[0], x[1] + s * k[1]];
            acc += self.inner(&p, k, k).sqrt();
        }
        acc / nodes as f64
    }

    /// Orthonormal coframe `e¹ = r(dx + g12/g11 dy)`, `e² = (√det / r) dy`,
    /// `r = √g11`, returned as rows `[e¹_x, e¹_y], [e²_x, e²_y]`.
    pub fn coframe<S: Real>(&self, x: &[S]) -> [[S; 2]; 2] {
        let [a, b, c] = self.components(x);
        let r = a.sqrt();
        let sd = (a * c - b * b).sqrt();
        [[r, b / r], [S::cst(0.0), sd / r]]
    }

    /// Dual frame `E_1, E_2` with `e^a(E_b) = δ^a_b`, as columns.
    pub fn frame<S: Real>(&self, x: &[S]) -> [[S; 2]; 2] {
        let [a, b, c] = self.components(x);
        let r = a.sqrt();
        let sd = (a * c - b * b).sqrt();
        let z = S::cst(0.0);
        // E_1 = (1/r, 0), E_2 = (-b/(r sd), r/sd)
        [[r.recip(), z], [-(b / (r * sd)), r / sd]]
    }

    pub fn id(&self) -> String {
        format!("torus-metric:{}", short_hash(&serde_json::to_string(self).unwrap_or_default()))
    }
}

/// Geodesic flow on `T T²` with state `(x, y, u, v)`.
#[derive(Clone, Debug)]
pub struct GeodesicFlow {
    pub metric: TorusMetric,
}

impl GenericField for GeodesicFlow {
    fn chart_dim(&self) -> usize {
        4
    }

    fn eval<S: Real>(&self, p: &[S]) -> Result<Vec<S>> {
        let xs: Vec<Dual<S, MAXD>> = seed(&p[..2]);
        let [a, b, c] = self.metric.components(&xs);
        let g = [[a.re, b.re], [b.re, c.re]];
        // dg[l][i][j] = ∂_l g_ij
        let dg = |l: usize| [[a.eps[l], b.eps[l]], [b.eps[l], c.eps[l]]];
        let dgs = [dg(0), dg(1)];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let inv = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
        let vel = [p[2], p[3]];
        let mut acc = [S::cst(0.0), S::cst(0.0)];
        for (k, acc_k) in acc.iter_mut().enumerate() {
            for l in 0..2 {
                let mut s = S::cst(0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        let gam = dgs[i][j][l] + dgs[j][i][l] - dgs[l][i][j];
                        s += gam * vel[i] * vel[j];
                    }
                }
                *acc_k -= inv[k][l] * s.scale(0.5);
            }
        }
        Ok(vec![p[2], p[3], acc[0], acc[1]])
    }
}

impl FlowSystem for GeodesicFlow {
    fn dim(&self) -> usize {
        4
    }
    fn periodic(&self) -> Vec<bool> {
        vec![true, true, false, false]
    }
    fn field(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.eval_f64(p)
    }
    fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.eval_with_jacobian(p)
    }
    fn constraints(&self, p: &[f64]) -> Vec<(f64, Vec<f64>)> {
        let s = seed(p);
        let e = self.metric.inner(&s[..2], &s[2..], &s[2..]);
        vec![(e.re - 1.0, e.eps.to_vec())]
    }
    fn transverse_frame(&self, _p: &[f64]) -> Result<DMatrix<f64>> {
        Err(Error::Frame(
            "geodesic flow has no contact frame; use the unit cotangent lift".into(),
        ))
    }
    fn frame_id(&self) -> String {
        "none".into()
    }
    fn system_id(&self) -> String {
        format!("geodesic:{}", self.metric.id())
    }
}

/// Torus isometry `x ↦ A x + s` with `A ∈ GL(2, Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryModel {
    #[serde(default = "identity_matrix")]
    pub linear: [[i64; 2]; 2],
    pub shift: [f64; 2],
}

fn identity_matrix() -> [[i64; 2]; 2] {
    [[1, 0], [0, 1]]
}

impl IsometryModel {
    pub fn identity() -> Self {
        Self { linear: identity_matrix(), shift: [0.0, 0.0] }
    }

    pub fn translation(s: [f64; 2]) -> Self {
        Self { linear: identity_matrix(), shift: s }
    }

    pub fn linear(a: [[i64; 2]; 2], s: [f64; 2]) -> Self {
        Self { linear: a, shift: s }
    }

    pub fn is_translation(&self) -> bool {
        self.linear == identity_matrix()
    }

    pub fn is_identity(&self) -> bool {
        self.is_translation() && self.shift.iter().all(|s| s.rem_euclid(1.0) == 0.0)
    }

    pub fn apply_point<S: Real>(&self, x: &[S]) -> [S; 2] {
        let a = &self.linear;
        [
            x[0].scale(a[0][0] as f64) + x[1].scale(a[0][1] as f64) + S::cst(self.shift[0]),
            x[0].scale(a[1][0] as f64) + x[1].scale(a[1][1] as f64) + S::cst(self.shift[1]),
        ]
    }

    pub fn apply_vector<S: Real>(&self, v: &[S]) -> [S; 2] {
        let a = &self.linear;
        [
            v[0].scale(a[0][0] as f64) + v[1].scale(a[0][1] as f64),
            v[0].scale(a[1][0] as f64) + v[1].scale(a[1][1] as f64),
        ]
    }

    /// `φ_*` on winding vectors.
    pub fn act_on_class(&self, k: [i64; 2]) -> [i64; 2] {
        let a = &self.linear;
        [a[0][0] * k[0] + a[0][1] * k[1], a[1][0] * k[0] + a[1][1] * k[1]]
    }

    pub fn compose(&self, other: &Self) -> Self {
        // self ∘ other
        let a = &self.linear;
        let b = &other.linear;
        let mut m = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let s = self.apply_point(&other.shift);
        Self { linear: m, shift: s }
    }

    pub fn power(&self, n: u32) -> Self {
        let mut out = Self::identity();
        for _ in 0..n {
            out = self.compose(&out);
        }
        out
    }

    pub fn det(&self) -> i64 {
        let a = &self.linear;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    /// Max over the grid of `|Aᵀ G(Ax+s) A − G(x)|` (entrywise).
    pub fn isometry_residual(&self, metric: &TorusMetric, grid: usize) -> f64 {
        if self.is_translation() && metric.is_constant() {
            return 0.0;
        }
        let a = self.linear.map(|r| r.map(|v| v as f64));
        let mut worst: f64 = 0.0;
        for i in 0..grid {
            for j in 0..grid {
                let x = [i as f64 / grid as f64, j as f64 / grid as f64];
                let [g11, g12, g22] = metric.components(&x);
                let y = self.apply_point(&x);
                let [h11, h12, h22] = metric.components(&y);
                let h = [[h11, h12], [h12, h22]];
                let g = [[g11, g12], [g12, g22]];
                for r in 0..2 {
                    for c in 0..2 {
                        let mut v = 0.0;
                        for k in 0..2 {
                            for l in 0..2 {
                                v += a[k][r] * h[k][l] * a[l][c];
                            }
                        }
                        worst = worst.max((v - g[r][c]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Fails unless `A` is unimodular and `φ*g = g` on the grid to `tol`.
    pub fn verify(&self, metric: &TorusMetric, grid: usize, tol: f64) -> Result<()> {
        if self.det().abs() != 1 {
            return Err(Error::InvalidInput(format!(
                "linear part has determinant {}, not a torus diffeomorphism",
                self.det()
            )));
        }
        let r = self.isometry_residual(metric, grid);
        if r > tol {
            return Err(Error::NotAnIsometry { max_residual: r });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow_end;

    #[test]
    fn flat_metric_is_valid_and_negative_one_is_not() {
        TorusMetric::flat().validate_default().unwrap();
        let bad = TorusMetric::conformal(FourierSeries::constant(0.5, 2).with_term(&[1, 0], 1.0, 0.0));
        assert!(matches!(bad.validate(64, 8), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn coframe_is_orthonormal() {
        let g = TorusMetric {
            g11: FourierSeries::constant(1.3, 2).with_term(&[1, 0], 0.1, 0.0),
            g12: FourierSeries::constant(0.2, 2).with_term(&[0, 1], 0.0, 0.05),
            g22: FourierSeries::constant(0.9, 2),
        };
        let x = [0.21, 0.67];
        let f = g.frame(&x);
        let e = g.coframe(&x);
        for a in 0..2 {
            let ea = [f[a][0], f[a][1]];
            for b in 0..2 {
                let eb = [f[b][0], f[b][1]];
                let ip = g.inner(&x, &ea, &eb);
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
                let pairing = e[a][0] * eb[0] + e[a][1] * eb[1];
                assert!((pairing - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn horizontal_lines_are_geodesics_of_conformal_metric() {
        let g = TorusMetric::conformal_cos_y(0.1);
        let sys = GeodesicFlow { metric: g.clone() };
        for y in [0.0, 0.5] {
            let f = 1.0 + 0.1 * (std::f64::consts::TAU * y).cos();
            let speed = 1.0 / f.sqrt();
            let end = flow_end(&sys, &[0.1, y, speed, 0.0], f.sqrt(), 400).unwrap();
            assert!((end[0] - 1.1).abs() < 1e-10);
            assert!((end[1] - y).abs() < 1e-12);
        }
    }

    #[test]
    fn isometry_checks() {
        let g = TorusMetric::conformal_cos_y(0.1);
        IsometryModel::translation([0.25, 0.0]).verify(&g, 64, 1e-10).unwrap();
        let err = IsometryModel::translation([0.0, 0.3]).verify(&g, 64, 1e-10);
        assert!(matches!(err, Err(Error::NotAnIsometry { .. })));
        let swap = IsometryModel::linear([[0, 1], [1, 0]], [0.0, 0.0]);
        swap.verify(&TorusMetric::flat(), 16, 1e-12).unwrap();
        assert_eq!(swap.act_on_class([1, 0]), [0, 1]);
        let t = IsometryModel::translation([0.3, 0.1]).power(3);
        assert!((t.shift[0] - 0.9).abs() < 1e-15 && (t.shift[1] - 0.3).abs() < 1e-15);
    }
}
