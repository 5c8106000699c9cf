//! Strict contactomorphisms and mapping tori `C × R / (x, τ) ∼ (φ(x), τ + 1)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ad::{jacobian, seed, values, Real, D1};
use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use crate::models::contact::ContactModel;
use crate::models::lcs::LcsStructure;
use crate::models::metric::IsometryModel;

/// Tolerance on `|φ*λ − λ|` for mapping-torus construction.
pub const STRICTNESS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrictMap {
    Identity,
    /// Cotangent lift of `x ↦ A x + s` on a unit cotangent torus, followed by
    /// radial normalization back to the unit cotangent bundle. Strict exactly
    /// when the base map is an isometry.
    TorusLift { linear: [[f64; 2]; 2], shift: [f64; 2] },
    /// `(z₁, z₂) ↦ (e^{2πi a₁} z₁, e^{2πi a₂} z₂)` on the sphere chart.
    HopfRotation { angles: [f64; 2] },
}

impl StrictMap {
    pub fn from_isometry(phi: &IsometryModel) -> Self {
        if phi.is_identity() {
            return Self::Identity;
        }
        Self::TorusLift {
            linear: phi.linear.map(|r| r.map(|v| v as f64)),
            shift: phi.shift,
        }
    }

    fn compatible(&self, fiber: &ContactModel) -> Result<()> {
        match (self, fiber) {
            (Self::Identity, _)
            | (Self::TorusLift { .. }, ContactModel::UnitCotangentTorus { .. })
            | (Self::HopfRotation { .. }, ContactModel::EllipsoidS3 { .. }) => Ok(()),
            _ => Err(Error::InvalidInput(format!(
                "map {self:?} does not act on {}",
                fiber.id()
            ))),
        }
    }

    /// Image of a chart point.
    pub fn apply<S: Real>(&self, fiber: &ContactModel, p: &[S]) -> Result<Vec<S>> {
        self.compatible(fiber)?;
        match self {
            Self::Identity => Ok(p.to_vec()),
            Self::HopfRotation { angles } => {
                let mut out = p.to_vec();
                for (k, a) in angles.iter().enumerate() {
                    let (s, c) = (TAU * a).sin_cos();
                    let (x, y) = (p[2 * k], p[2 * k + 1]);
                    out[2 * k] = x.scale(c) - y.scale(s);
                    out[2 * k + 1] = x.scale(s) + y.scale(c);
                }
                Ok(out)
            }
            Self::TorusLift { linear: a, shift } => {
                let metric = fiber.metric().expect("checked compatibility");
                let xn = [
                    p[0].scale(a[0][0]) + p[1].scale(a[0][1]) + S::cst(shift[0]),
                    p[0].scale(a[1][0]) + p[1].scale(a[1][1]) + S::cst(shift[1]),
                ];
                let lam = fiber.lambda(p);
                // covector pushforward: p' = A^{-T} p
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                if det.abs() < 1e-14 {
                    return Err(Error::InvalidInput("singular linear part".into()));
                }
                let inv_t = [[a[1][1] / det, -a[1][0] / det], [-a[0][1] / det, a[0][0] / det]];
                let q = [
                    lam[0].scale(inv_t[0][0]) + lam[1].scale(inv_t[0][1]),
                    lam[0].scale(inv_t[1][0]) + lam[1].scale(inv_t[1][1]),
                ];
                let f = metric.frame(&xn);
                let c1 = q[0] * f[0][0] + q[1] * f[0][1];
                let c2 = q[0] * f[1][0] + q[1] * f[1][1];
                let mut th = c2.atan2(c1).scale(1.0 / TAU);
                let k = (p[2].value() - th.value()).round();
                th += S::cst(k);
                Ok(vec![xn[0], xn[1], th])
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(match self {
            Self::Identity => Self::Identity,
            Self::HopfRotation { angles } => Self::HopfRotation { angles: [-angles[0], -angles[1]] },
            Self::TorusLift { linear: a, shift: s } => {
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                if (det.abs() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(
                        "only unimodular torus maps are invertible on the torus".into(),
                    ));
                }
                let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
                let shift = [
                    -(inv[0][0] * s[0] + inv[0][1] * s[1]),
                    -(inv[1][0] * s[0] + inv[1][1] * s[1]),
                ];
                Self::TorusLift { linear: inv, shift }
            }
        })
    }

    /// `max |(φ*λ)_i − λ_i|` over the points.
    pub fn strictness_residual(&self, fiber: &ContactModel, points: &[Vec<f64>]) -> Result<f64> {
        let d = fiber.chart_dim();
        let mut worst: f64 = 0.0;
        for p in points {
            let ps = seed(p);
            let img: Vec<D1> = self.apply(fiber, &ps)?;
            let j = jacobian(&img, d);
            let lam_img = fiber.lambda(&values(&img));
            let lam = fiber.lambda(p);
            for i in 0..d {
                let pulled: f64 = (0..d).map(|k| lam_img[k] * j[k][i]).sum();
                worst = worst.max((pulled - lam[i]).abs());
            }
        }
        Ok(worst)
    }
}

/// Mapping torus of a strict contactomorphism, in the chart `(p, τ)` with τ ∈ [0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingTorusModel {
    pub fiber: ContactModel,
    pub phi: StrictMap,
}

impl MappingTorusModel {
    /// Verifies strictness on the fiber grid (`res` per dimension).
    pub fn new(fiber: ContactModel, phi: StrictMap, res: usize) -> Result<Self> {
        let r = phi.strictness_residual(&fiber, &fiber.grid(res))?;
        if !(r <= STRICTNESS_TOL) {
            return Err(Error::StrictnessViolation { max_residual: r });
        }
        Ok(Self { fiber, phi })
    }

    pub fn chart_dim(&self) -> usize {
        self.fiber.chart_dim() + 1
    }

    /// Brings `τ` into `[0, 1)` using the gluing `(x, τ + 1) ∼ (φ⁻¹(x), τ)`.
    pub fn glue(&self, p: &[f64]) -> Result<Vec<f64>> {
        let d = self.fiber.chart_dim();
        let mut x = p[..d].to_vec();
        let mut tau = p[d];
        let inv = self.phi.inverse()?;
        while tau >= 1.0 {
            x = inv.apply(&self.fiber, &x)?;
            tau -= 1.0;
        }
        while tau < 0.0 {
            x = self.phi.apply(&self.fiber, &x)?;
            tau += 1.0;
        }
        x.push(tau);
        Ok(x)
    }

    pub fn lcs(&self) -> LcsStructure {
        LcsStructure::lcsfication(self.fiber.clone())
    }

    pub fn id(&self) -> String {
        format!(
            "mapping-torus:{}",
            crate::models::short_hash(&serde_json::to_string(self).unwrap_or_default())
        )
    }
}

/// Flow of `X_α = (R, 0)` on a mapping-torus chart.
#[derive(Clone, Debug)]
pub struct XAlphaFlow {
    pub model: MappingTorusModel,
}

impl FlowSystem for XAlphaFlow {
    fn dim(&self) -> usize {
        self.model.chart_dim()
    }
    fn periodic(&self) -> Vec<bool> {
        let mut p = self.model.fiber.periodic();
        p.push(false);
        p
    }
    fn field(&self, p: &[f64]) -> Result<Vec<f64>> {
        let d = self.model.fiber.chart_dim();
        let mut r = self.model.fiber.reeb_field(&p[..d])?;
        r.push(0.0);
        Ok(r)
    }
    fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let d = self.model.fiber.chart_dim();
        let (mut r, j) = self.model.fiber.reeb_jacobian(&p[..d])?;
        r.push(0.0);
        let mut m = DMatrix::zeros(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(&j);
        Ok((r, m))
    }
    fn constraints(&self, p: &[f64]) -> Vec<(f64, Vec<f64>)> {
        if matches!(self.model.fiber, ContactModel::EllipsoidS3 { .. }) {
            let d = self.model.fiber.chart_dim();
            let r2: f64 = p[..d].iter().map(|x| x * x).sum();
            let mut g: Vec<f64> = p[..d].iter().map(|x| 2.0 * x).collect();
            g.push(0.0);
            vec![(r2 - 1.0, g)]
        } else {
            Vec::new()
        }
    }
    fn complement_directions(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = self.model.fiber.chart_dim();
        let mut out: Vec<Vec<f64>> = self.constraints(p).into_iter().map(|(_, g)| g).collect();
        let mut t = vec![0.0; d + 1];
        t[d] = 1.0;
        out.push(t);
        out
    }
    fn transverse_frame(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.model.fiber.chart_dim();
        let f = self.model.fiber.xi_frame(&p[..d])?;
        let mut m = DMatrix::zeros(d + 1, 2);
        m.view_mut((0, 0), (d, 2)).copy_from(&f);
        Ok(m)
    }
    fn frame_id(&self) -> String {
        format!("fiber-{}", self.model.fiber.frame_id())
    }
    fn system_id(&self) -> String {
        format!("x-alpha:{}", self.model.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::metric::TorusMetric;

    #[test]
    fn translations_lift_strictly() {
        let fiber = ContactModel::unit_cotangent(TorusMetric::flat());
        let phi = StrictMap::from_isometry(&IsometryModel::translation([0.3, 0.7]));
        let r = phi.strictness_residual(&fiber, &fiber.grid(8)).unwrap();
        assert!(r < 1e-12);
        let img = phi.apply(&fiber, &[0.1, 0.2, 0.35]).unwrap();
        assert!((img[0] - 0.4).abs() < 1e-15 && (img[1] - 0.9).abs() < 1e-15);
        assert!((img[2] - 0.35).abs() < 1e-14);
    }

    #[test]
    fn scaling_is_rejected() {
        let fiber = ContactModel::unit_cotangent(TorusMetric::flat());
        let phi = StrictMap::TorusLift { linear: [[2.0, 0.0], [0.0, 2.0]], shift: [0.0, 0.0] };
        match MappingTorusModel::new(fiber, phi, 8) {
            Err(Error::StrictnessViolation { max_residual }) => assert!(max_residual > 0.5),
            other => panic!("expected strictness violation, got {other:?}"),
        }
    }

    #[test]
    fn swap_lift_is_strict_and_glue_roundtrips() {
        let fiber = ContactModel::unit_cotangent(TorusMetric::flat());
        let phi = StrictMap::from_isometry(&IsometryModel::linear([[0, 1], [1, 0]], [0.1, 0.0]));
        let m = MappingTorusModel::new(fiber.clone(), phi.clone(), 8).unwrap();
        let p = [0.2, 0.3, 0.1];
        let q = phi.apply(&fiber, &p).unwrap();
        // (φ(p), τ = 1) is identified with (p, 0)
        let g = m.glue(&[q[0], q[1], q[2], 1.25]).unwrap();
        for i in 0..3 {
            assert!((g[i] - p[i]).abs() < 1e-12);
        }
        assert!((g[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hopf_rotation_is_strict_on_ellipsoid() {
        let fiber = ContactModel::ellipsoid(1.0, 1.5);
        let phi = StrictMap::HopfRotation { angles: [0.2, 0.45] };
        MappingTorusModel::new(fiber, phi, 5).unwrap();
    }
}
