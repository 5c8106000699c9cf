//! Truncated real Fourier series on the unit torus R^d / Z^d.
//!
//! A term `[k_1, ..., k_d, a, b]` contributes `a cos(2π k·x) + b sin(2π k·x)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;

use crate::ad::Real;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEGREE: i32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierTerm {
    pub k: Vec<i32>,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FourierSeries {
    pub terms: Vec<FourierTerm>,
}

impl FourierSeries {
    pub fn constant(c: f64, dim: usize) -> Self {
        Self { terms: vec![FourierTerm { k: vec![0; dim], cos: c, sin: 0.0 }] }
    }

    pub fn zero() -> Self {
        Self { terms: vec![] }
    }

    pub fn with_term(mut self, k: &[i32], cos: f64, sin: f64) -> Self {
        self.terms.push(FourierTerm { k: k.to_vec(), cos, sin });
        self
    }

    pub fn degree(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|t| t.k.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.k.iter().all(|&k| k == 0) || (t.cos == 0.0 && t.sin == 0.0))
    }

    pub fn check(&self, dim: usize, max_degree: i32) -> Result<()> {
        for t in &self.terms {
            if t.k.len() != dim {
                return Err(Error::Parse(format!(
                    "Fourier term has {} frequencies, expected {}",
                    t.k.len(),
                    dim
                )));
            }
            if !(t.cos.is_finite() && t.sin.is_finite()) {
                return Err(Error::Parse("non-finite Fourier coefficient".into()));
            }
        }
        if self.degree() > max_degree {
            return Err(Error::InvalidInput(format!(
                "Fourier degree {} exceeds configured maximum {}",
                self.degree(),
                max_degree
            )));
        }
        Ok(())
    }

    pub fn eval<S: Real>(&self, x: &[S]) -> S {
        let mut acc = S::cst(0.0);
        for t in &self.terms {
            if t.k.iter().all(|&k| k == 0) {
                acc += S::cst(t.cos);
                continue;
            }
            let mut phase = S::cst(0.0);
            for (k, xi) in t.k.iter().zip(x) {
                if *k != 0 {
                    phase += xi.scale(TAU * f64::from(*k));
                }
            }
            let (s, c) = phase.sin_cos();
            if t.cos != 0.0 {
                acc += c.scale(t.cos);
            }
            if t.sin != 0.0 {
                acc += s.scale(t.sin);
            }
        }
        acc
    }

    /// Analytic derivative with respect to coordinate `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.k[axis] != 0)
            .map(|t| {
                let w = TAU * f64::from(t.k[axis]);
                FourierTerm { k: t.k.clone(), cos: w * t.sin, sin: -w * t.cos }
            })
            .collect();
        Self { terms }
    }

    /// `(1 - s) self + s other`, termwise on the union of frequencies.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        let mut terms: Vec<FourierTerm> = self
            .terms
            .iter()
            .map(|t| FourierTerm { k: t.k.clone(), cos: (1.0 - s) * t.cos, sin: (1.0 - s) * t.sin })
            .collect();
        for t in &other.terms {
            match terms.iter_mut().find(|u| u.k == t.k) {
                Some(u) => {
                    u.cos += s * t.cos;
                    u.sin += s * t.sin;
                }
                None => terms.push(FourierTerm { k: t.k.clone(), cos: s * t.cos, sin: s * t.sin }),
            }
        }
        Self { terms }
    }
}

impl Serialize for FourierSeries {
    fn serialize<Se: Serializer>(&self, ser: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let rows: Vec<Vec<f64>> = self
            .terms
            .iter()
            .map(|t| {
                let mut r: Vec<f64> = t.k.iter().map(|&k| f64::from(k)).collect();
                r.push(t.cos);
                r.push(t.sin);
                r
            })
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FourierSeries {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<Vec<f64>> = Vec::deserialize(de)?;
        let mut terms = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() < 3 {
                return Err(D::Error::custom("Fourier term needs at least [k, cos, sin]"));
            }
            let n = r.len() - 2;
            let mut k = Vec::with_capacity(n);
            for &v in &r[..n] {
                if v.fract() != 0.0 || v.abs() > 1e6 {
                    return Err(D::Error::custom(format!("frequency {v} is not an integer")));
                }
                k.push(v as i32);
            }
            terms.push(FourierTerm { k, cos: r[n], sin: r[n + 1] });
        }
        Ok(Self { terms })
    }
}
