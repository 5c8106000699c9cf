//! Locally conformally symplectic structures on `C × S¹`.
//!
//! The structure is `(λ̃, α̃)` with `λ̃ = e^{f(θ)} λ`, `α̃ = (1 + f'(θ)) dθ` and
//! `ω = dλ̃ − α̃ ∧ λ̃ = e^{f}(dλ − dθ ∧ λ)`, where `λ` is a contact form on `C`
//! and `f` an optional gauge. `f = 0` is the lcs-fication of `C`. The vector
//! fields `X_λ`, `X_α` solve `ω(X, ·) = λ̃` and `ω(X, ·) = α̃` by a linear solve
//! in a tangent frame, the same way the Reeb field is computed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::linalg::{det_generic, solve_generic};
use crate::models::contact::ContactModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcsStructure {
    pub base: ContactModel,
    /// Conformal gauge `f(θ)` as a one-variable Fourier series; `None` means `f = 0`.
    pub gauge: Option<FourierSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebConditionReport {
    pub holds: bool,
    pub min_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcsCheck {
    /// Smallest `|det ω|` in the tangent frame over the grid.
    pub min_nondegeneracy: f64,
    /// `α̃` depends on θ alone, so `dα̃ = 0` identically.
    pub alpha_closed: bool,
    /// `X_λ`, `X_α` independent at every sample.
    pub first_kind: bool,
    /// Smallest Gram determinant of `(X_λ, X_α)` over the grid.
    pub min_span: f64,
}

impl LcsStructure {
    pub fn lcsfication(base: ContactModel) -> Self {
        Self { base, gauge: None }
    }

    pub fn with_gauge(mut self, f: FourierSeries) -> Self {
        self.gauge = Some(f);
        self
    }

    pub fn chart_dim(&self) -> usize {
        self.base.chart_dim() + 1
    }

    fn gauge_at(&self, theta: f64) -> (f64, f64) {
        match &self.gauge {
            None => (0.0, 0.0),
            Some(f) => (f.eval(&[theta]), f.derivative(0).eval(&[theta])),
        }
    }

    /// Chart components of λ̃.
    pub fn lambda(&self, p: &[f64]) -> Vec<f64> {
        let d = self.base.chart_dim();
        let (f, _) = self.gauge_at(p[d]);
        let mut l: Vec<f64> = self.base.lambda(&p[..d]).iter().map(|x| x * f.exp()).collect();
        l.push(0.0);
        l
    }

    /// Chart components of α̃.
    pub fn alpha(&self, p: &[f64]) -> Vec<f64> {
        let d = self.base.chart_dim();
        let (_, df) = self.gauge_at(p[d]);
        let mut a = vec![0.0; d];
        a.push(1.0 + df);
        a
    }

    /// Chart matrix `W_ij = ω(∂_i, ∂_j)`.
    pub fn omega(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = self.base.chart_dim();
        let (f, _) = self.gauge_at(p[d]);
        let ef = f.exp();
        let (lam, dl) = self.base.form_data(&p[..d]);
        let mut w = vec![vec![0.0; d + 1]; d + 1];
        for i in 0..d {
            for j in 0..d {
                w[i][j] = ef * dl[i][j];
            }
            // −(dθ ∧ λ)(∂_θ, ∂_i) = −λ_i and its transpose
            w[d][i] = -ef * lam[i];
            w[i][d] = ef * lam[i];
        }
        w
    }

    /// Tangent frame of `C × S¹`: the base frame followed by `∂_θ`.
    pub fn tangent_frame(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = self.base.chart_dim();
        let mut frame: Vec<Vec<f64>> = self
            .base
            .tangent_frame(&p[..d])
            .into_iter()
            .map(|mut v| {
                v.push(0.0);
                v
            })
            .collect();
        let mut t = vec![0.0; d + 1];
        t[d] = 1.0;
        frame.push(t);
        frame
    }

    fn frame_omega(&self, p: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let w = self.omega(p);
        let e = self.tangent_frame(p);
        let k = e.len();
        let mut m = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in 0..k {
                let mut s = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    for (j, wij) in wi.iter().enumerate() {
                        s += e[a][i] * wij * e[b][j];
                    }
                }
                m[a][b] = s;
            }
        }
        (e, m)
    }

    /// Solves `ω(X, ·) = β` for a chart covector `β`.
    pub fn dual_field(&self, p: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
        let (e, m) = self.frame_omega(p);
        let k = e.len();
        let rhs: Vec<f64> = e.iter().map(|v| v.iter().zip(beta).map(|(a, b)| a * b).sum()).collect();
        // Σ_a c_a ω(E_a, E_b) = β(E_b)  ⇔  Mᵀ c = rhs
        let mt: Vec<Vec<f64>> = (0..k).map(|r| (0..k).map(|c| m[c][r]).collect()).collect();
        let c = solve_generic(mt, rhs, 1e-12)
            .ok_or_else(|| Error::DegenerateModel(format!("ω degenerate at {p:?}")))?;
        let n = p.len();
        let mut x = vec![0.0; n];
        for (ca, ea) in c.iter().zip(&e) {
            for i in 0..n {
                x[i] += ca * ea[i];
            }
        }
        Ok(x)
    }

    pub fn x_lambda(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.dual_field(p, &self.lambda(p))
    }

    pub fn x_alpha(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.dual_field(p, &self.alpha(p))
    }

    /// `ω(u, v)`.
    pub fn omega_pair(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let w = self.omega(p);
        let mut s = 0.0;
        for (i, wi) in w.iter().enumerate() {
            for (j, wij) in wi.iter().enumerate() {
                s += u[i] * wij * v[j];
            }
        }
        s
    }

    /// Base grid (`res` per dimension) times `res` values of θ.
    pub fn grid(&self, res: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for b in self.base.grid(res) {
            for k in 0..res {
                let mut p = b.clone();
                p.push(k as f64 / res as f64);
                out.push(p);
            }
        }
        out
    }

    /// Nondegeneracy of ω, closedness of α̃ and the first-kind property on the grid.
    pub fn verify(&self, res: usize) -> Result<LcsCheck> {
        let mut min_nd = f64::INFINITY;
        let mut min_span = f64::INFINITY;
        for p in self.grid(res) {
            let (_, m) = self.frame_omega(&p);
            let det: f64 = det_generic(m);
            min_nd = min_nd.min(det.abs());
            if !(det.abs() > 1e-12) {
                return Err(Error::DegenerateModel(format!("ω degenerate at {p:?}")));
            }
            let a = self.x_lambda(&p)?;
            let b = self.x_alpha(&p)?;
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let bb: f64 = b.iter().map(|x| x * x).sum();
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            min_span = min_span.min(aa * bb - ab * ab);
        }
        Ok(LcsCheck {
            min_nondegeneracy: min_nd,
            alpha_closed: true,
            first_kind: min_span > 1e-12,
            min_span,
        })
    }

    /// `λ̃(X_α) > 0` on the grid.
    pub fn reeb_condition_check(&self, res: usize) -> Result<ReebConditionReport> {
        let mut min_value = f64::INFINITY;
        for p in self.grid(res) {
            let x = self.x_alpha(&p)?;
            let l = self.lambda(&p);
            let v: f64 = l.iter().zip(&x).map(|(a, b)| a * b).sum();
            min_value = min_value.min(v);
        }
        Ok(ReebConditionReport { holds: min_value > 0.0, min_value })
    }
}

/// Gauge `f(θ) = sin(2πθ)/π`, for which `λ̃(X_α) = 1 + 2cos 2πθ` changes sign.
pub fn sign_changing_gauge() -> FourierSeries {
    FourierSeries::zero().with_term(&[1], 0.0, 1.0 / std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::metric::TorusMetric;

    #[test]
    fn lcsfication_fields() {
        let s = LcsStructure::lcsfication(ContactModel::unit_cotangent(TorusMetric::flat()));
        let p = [0.2, 0.6, 0.3, 0.85];
        let xa = s.x_alpha(&p).unwrap();
        let r = s.base.reeb_field(&p[..3]).unwrap();
        for i in 0..3 {
            assert!((xa[i] - r[i]).abs() < 1e-12);
        }
        assert!(xa[3].abs() < 1e-12);
        let xl = s.x_lambda(&p).unwrap();
        // ω(X, ·) = λ forces X_λ = −∂_θ with ω = dλ − dθ∧λ
        assert!(xl[..3].iter().all(|v| v.abs() < 1e-12));
        assert!((xl[3] + 1.0).abs() < 1e-12);
        assert!((s.omega_pair(&p, &xl, &xa) - 1.0).abs() < 1e-12);
        let chk = s.verify(3).unwrap();
        assert!(chk.first_kind);
        let rc = s.reeb_condition_check(4).unwrap();
        assert!(rc.holds && (rc.min_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_changing_gauge_breaks_reeb_condition() {
        let s = LcsStructure::lcsfication(ContactModel::unit_cotangent(TorusMetric::flat()))
            .with_gauge(sign_changing_gauge());
        let rc = s.reeb_condition_check(6).unwrap();
        assert!(!rc.holds);
        assert!((rc.min_value + 1.0).abs() < 1e-9);
        assert!(s.verify(3).unwrap().min_nondegeneracy > 0.0);
    }
}
