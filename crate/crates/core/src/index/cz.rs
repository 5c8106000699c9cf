//! Robbin–Salamon index of symplectic paths via crossing forms.
//!
//! Conventions: `J₀ = [[0, −I], [I, 0]]`, `ω₀(u, v) = uᵀ J₀ᵀ v`, so a path
//! `Φ̇ = J₀ S Φ` has crossing form `Γ(v) = ω₀(v, Φ̇ v) = vᵀ S v` on
//! `ker(Φ(t) − I)`. The rotation `exp(2πθ t J₀)` has index `2⌊θ⌋ + 1` for
//! non-integer `θ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{j0, null_space};

/// Grid used to locate crossings before refinement.
pub const CROSSING_GRID: usize = 256;
/// Bisection stops at this resolution in `t`.
pub const BISECTION_RESOLUTION: f64 = 1e-12;
/// Size of the rotation used to break degenerate crossing forms.
pub const REGULARIZATION: f64 = 1e-9;

/// Samples `Φ(t_i)` of a path in `Sp(2n)` on an increasing grid of `[0, 1]`,
/// evaluated in between by cubic Hermite interpolation with finite-difference
/// slopes.
#[derive(Clone, Debug)]
pub struct SymplecticPath {
    pub times: Vec<f64>,
    pub mats: Vec<DMatrix<f64>>,
    /// Right factor `exp(ε J₀ t)` applied on evaluation.
    pub regularization: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzResult {
    pub index: i64,
    pub crossings: usize,
    pub regularized: bool,
}

fn exp_j0(two_n: usize, angle: f64) -> DMatrix<f64> {
    let n = two_n / 2;
    let (s, c) = angle.sin_cos();
    let mut m = DMatrix::identity(two_n, two_n) * c;
    for i in 0..n {
        m[(i, n + i)] = -s;
        m[(n + i, i)] = s;
    }
    m
}

impl SymplecticPath {
    pub fn new(times: Vec<f64>, mats: Vec<DMatrix<f64>>) -> Self {
        Self { times, mats, regularization: 0.0 }
    }

    /// Samples `f` on `samples + 1` equispaced times.
    pub fn from_fn(f: impl Fn(f64) -> DMatrix<f64>, samples: usize) -> Self {
        let times: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
        let mats = times.iter().map(|&t| f(t)).collect();
        Self::new(times, mats)
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// `Φ(1)`.
    pub fn end(&self) -> DMatrix<f64> {
        self.eval(1.0)
    }

    fn slope(&self, i: usize) -> DMatrix<f64> {
        let n = self.times.len();
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        (&self.mats[b] - &self.mats[a]) / (self.times[b] - self.times[a])
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    fn raw(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let i = self.locate(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (p0, p1) = (&self.mats[i], &self.mats[i + 1]);
        let (m0, m1) = (self.slope(i) * h, self.slope(i + 1) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let val = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + &m0 * (s3 - 2.0 * s2 + s)
            + p1 * (-2.0 * s3 + 3.0 * s2)
            + &m1 * (s3 - s2);
        let der = (p0 * (6.0 * s2 - 6.0 * s) + &m0 * (3.0 * s2 - 4.0 * s + 1.0) + p1 * (-6.0 * s2 + 6.0 * s)
            + &m1 * (3.0 * s2 - 2.0 * s))
            / h;
        (val, der)
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        self.eval_with_derivative(t).0
    }

    /// `(Φ(t), Φ̇(t))`.
    pub fn eval_with_derivative(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let (v, d) = self.raw(t);
        if self.regularization == 0.0 {
            return (v, d);
        }
        let k = self.dim();
        let e = exp_j0(k, self.regularization * t);
        let de = j0(k) * &e * self.regularization;
        (&v * &e, &d * &e + &v * de)
    }

    /// Path followed by `Φ₂(s)·Φ₁(1)`, reparametrized to `[0, 1]`.
    pub fn catenate(&self, other: &Self, samples: usize) -> Self {
        let end = self.end();
        Self::from_fn(
            |t| {
                if t <= 0.5 {
                    self.eval(2.0 * t)
                } else {
                    other.eval(2.0 * t - 1.0) * &end
                }
            },
            samples,
        )
    }
}

fn det_minus_identity(path: &SymplecticPath, t: f64) -> f64 {
    let p = path.eval(t);
    let k = p.nrows();
    (p - DMatrix::identity(k, k)).determinant()
}

fn signature(q: &DMatrix<f64>, tol: f64) -> Option<i64> {
    let s = (q + q.transpose()) * 0.5;
    let eig = s.symmetric_eigen().eigenvalues;
    let mut sig = 0;
    for &e in eig.iter() {
        if e.abs() <= tol {
            return None;
        }
        sig += if e > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}

/// Signature of the crossing form at `t`, `None` when it is degenerate.
fn crossing_signature(path: &SymplecticPath, t: f64, kernel_tol: f64) -> Option<(i64, usize)> {
    let (p, dp) = path.eval_with_derivative(t);
    let k = p.nrows();
    let jt = j0(k).transpose();
    let kernel = if t == 0.0 {
        DMatrix::identity(k, k)
    } else {
        null_space(&(&p - DMatrix::identity(k, k)), kernel_tol)
    };
    if kernel.ncols() == 0 {
        return Some((0, 0));
    }
    let q = kernel.transpose() * jt * dp * &kernel;
    let scale = q.norm().max(1e-300);
    signature(&q, 1e-8 * scale.max(1.0)).map(|s| (s, kernel.ncols()))
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > BISECTION_RESOLUTION {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Interior crossings: sign changes of `det(Φ − I)` refined by bisection, and
/// touching zeros found as local minima of `|det(Φ − I)|`.
fn crossings(path: &SymplecticPath) -> Vec<f64> {
    let f = |t: f64| det_minus_identity(path, t);
    let n = CROSSING_GRID;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut out: Vec<f64> = Vec::new();
    for i in 1..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a != 0.0 && b != 0.0 && a.signum() != b.signum() {
            let (mut lo, mut hi, mut flo) = (ts[i], ts[i + 1], a);
            while hi - lo > BISECTION_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        } else if a == 0.0 {
            out.push(ts[i]);
        }
    }
    let absf = |t: f64| f(t).abs();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 1..n {
        if vals[i].abs() <= vals[i - 1].abs() && vals[i].abs() <= vals[i + 1].abs() {
            let (t, v) = golden_min(&absf, ts[i - 1], ts[i + 1]);
            if v < 1e-9 * scale && t > 0.5 / n as f64 && t < 1.0 - 0.5 / n as f64 && !out.iter().any(|&c| (c - t).abs() < 1e-6) {
                out.push(t);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

fn try_index(path: &SymplecticPath) -> std::result::Result<CzResult, (f64, String)> {
    let (s0, _) = crossing_signature(path, 0.0, 0.0).ok_or((0.0, "degenerate crossing form at t = 0".to_string()))?;
    let mut twice = s0;
    let cs = crossings(path);
    for &t in &cs {
        let (s, _) =
            crossing_signature(path, t, 1e-6).ok_or((t, "degenerate crossing form".to_string()))?;
        twice += 2 * s;
    }
    if twice % 2 != 0 {
        return Err((0.0, format!("half-integer index {}/2", twice)));
    }
    Ok(CzResult { index: twice / 2, crossings: cs.len(), regularized: path.regularization != 0.0 })
}

/// Robbin–Salamon index of a path with nondegenerate end point.
pub fn conley_zehnder(path: &SymplecticPath) -> Result<CzResult> {
    let k = path.dim();
    let end = path.end();
    let d = (&end - DMatrix::identity(k, k)).determinant();
    if !(d.abs() > 1e-10) {
        return Err(Error::Degenerate { string: "path end point".into(), det: d });
    }
    match try_index(path) {
        Ok(r) => Ok(r),
        Err(_) => {
            let mut reg = path.clone();
            reg.regularization = REGULARIZATION;
            try_index(&reg).map_err(|(t, reason)| Error::Precision { t, reason })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use std::f64::consts::TAU;

    fn rotation_path(theta: f64) -> SymplecticPath {
        SymplecticPath::from_fn(|t| rotation2(TAU * theta * t), 2048)
    }

    #[test]
    fn rotation_paths() {
        for (theta, want) in [(0.3, 1), (1.7, 3), (2.5, 5), (-0.3, -1), (-1.2, -3)] {
            assert_eq!(conley_zehnder(&rotation_path(theta)).unwrap().index, want, "theta {theta}");
        }
    }

    #[test]
    fn hyperbolic_path() {
        let p = SymplecticPath::from_fn(
            |t| DMatrix::from_row_slice(2, 2, &[t.exp(), 0.0, 0.0, (-t).exp()]),
            256,
        );
        assert_eq!(conley_zehnder(&p).unwrap().index, 0);
    }

    #[test]
    fn transversal_parabolic_crossing() {
        // rotation followed by a path that leaves the identity through a shear
        let p = SymplecticPath::from_fn(
            |t| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -(t * 4.0).sin(), 1.0]) * rotation2(0.1 * t),
            1024,
        );
        let r = conley_zehnder(&p).unwrap();
        let end = p.end();
        let d = (DMatrix::identity(2, 2) - end).determinant();
        assert_eq!(d.signum() as i64, if (r.index - 1).rem_euclid(2) == 0 { 1 } else { -1 });
    }

    #[test]
    fn degenerate_end_point_is_rejected() {
        assert!(matches!(conley_zehnder(&rotation_path(1.0)), Err(Error::Degenerate { .. })));
    }
}
