//! Closed orbits, orbit strings and the searches that produce them.

pub mod components;
pub mod finder;
pub mod loops;
pub mod shooting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use loops::{aligned_distance, sup_distance, TrigLoop};

pub use components::{Component, Topology};
pub use finder::{find_geodesics, find_reeb_orbits, lift_geodesic_orbit, FinderControls, ReebTarget};

pub const DEFAULT_SAMPLES: usize = 128;
pub const DEFAULT_TOL_ORBIT: f64 = 1e-8;
pub const DEFAULT_TOL_MATCH: f64 = 1e-6;

/// Homotopy-class tag of a loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassLabel {
    /// Winding of the lift on every chart coordinate (zero on non-periodic ones).
    Winding { winding: Vec<i64> },
    /// Simply connected models: the period window that was searched.
    PeriodWindow { min: f64, max: f64 },
}

/// A periodic trajectory sampled at `N` equispaced normalized times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    /// Identity of the flow system the orbit belongs to.
    pub system: String,
    pub periodic: Vec<bool>,
    /// Continuous lift `o(i/N)`, `i = 0..N`.
    pub samples: Vec<Vec<f64>>,
    pub period: f64,
    pub class_label: ClassLabel,
    pub closure_residual: f64,
    pub flow_residual: f64,
}

impl ClosedOrbit {
    pub fn dim(&self) -> usize {
        self.periodic.len()
    }

    /// `o(1) − o(0)` on the lift.
    pub fn lift_shift(&self) -> Vec<f64> {
        match &self.class_label {
            ClassLabel::Winding { winding } => winding.iter().map(|&k| k as f64).collect(),
            ClassLabel::PeriodWindow { .. } => vec![0.0; self.dim()],
        }
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.samples[0]
    }

    pub fn trig(&self) -> TrigLoop {
        TrigLoop::new(&self.samples, &self.lift_shift())
    }

    /// Winding numbers recounted from wrapped sample increments.
    pub fn recomputed_winding(&self) -> Vec<i64> {
        let n = self.samples.len();
        (0..self.dim())
            .map(|c| {
                if !self.periodic[c] {
                    return 0;
                }
                let mut acc = 0.0;
                for i in 0..n {
                    let mut d = self.samples[(i + 1) % n][c] - self.samples[i][c];
                    d -= d.round();
                    acc += d;
                }
                acc.round() as i64
            })
            .collect()
    }

    /// The orbit reparametrized by `t ↦ t + s`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut o = self.clone();
        o.samples = self.trig().shifted_samples(s);
        o.normalize_basepoint();
        o
    }

    /// Moves the lift so the basepoint's periodic coordinates lie in `[0, 1)`.
    pub fn normalize_basepoint(&mut self) {
        for c in 0..self.dim() {
            if self.periodic[c] {
                let k = self.samples[0][c].floor();
                if k != 0.0 {
                    for s in self.samples.iter_mut() {
                        s[c] -= k;
                    }
                }
            }
        }
    }

    /// `max_i ‖ȯ(t_i) − period·X(o(t_i))‖` with spectral differentiation.
    pub fn compute_flow_residual(&self, sys: &dyn FlowSystem) -> Result<f64> {
        let d = self.trig().derivative_samples();
        let mut worst: f64 = 0.0;
        for (p, dp) in self.samples.iter().zip(&d) {
            let x = sys.field(p)?;
            let r = x
                .iter()
                .zip(dp)
                .map(|(xi, di)| (di - self.period * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// A closed orbit modulo time shift, with its covering multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitString {
    pub representative: ClosedOrbit,
    pub multiplicity: u32,
    pub simple_period: f64,
}

/// Largest `m` such that shifting by `1/m` maps the loop to itself within `tol_match`.
pub fn multiplicity(orbit: &ClosedOrbit, tol_match: f64) -> OrbitString {
    let n = orbit.samples.len();
    let candidates: Vec<u32> = match &orbit.class_label {
        ClassLabel::Winding { winding } => {
            let g = winding.iter().fold(0i64, |g, &k| num_integer::gcd(g, k)).unsigned_abs();
            let g = if g == 0 { 16 } else { g.min(n as u64 / 4) };
            (1..=g as u32).rev().collect()
        }
        ClassLabel::PeriodWindow { .. } => (1..=16u32.min(n as u32 / 4)).rev().collect(),
    };
    let trig = orbit.trig();
    let mut m = 1;
    for c in candidates {
        if c == 1 {
            break;
        }
        let sh = trig.shifted_samples(1.0 / c as f64);
        if sup_distance(&sh, &orbit.samples, &orbit.periodic) < tol_match {
            m = c;
            break;
        }
    }
    OrbitString { representative: orbit.clone(), multiplicity: m, simple_period: orbit.period / m as f64 }
}

/// Distance in the orbit space: min over time shifts of the sup distance.
pub fn orbit_space_distance(a: &OrbitString, b: &OrbitString) -> Result<f64> {
    Ok(orbit_distance_with_shift(&a.representative, &b.representative)?.0)
}

/// `(min_s sup_t ‖a(t + s) − b(t)‖, s)`.
pub fn orbit_distance_with_shift(a: &ClosedOrbit, b: &ClosedOrbit) -> Result<(f64, f64)> {
    if a.system != b.system {
        return Err(Error::MismatchedModels(a.system.clone(), b.system.clone()));
    }
    Ok(aligned_distance(&a.trig(), &a.samples, &b.samples, &a.periodic))
}

impl OrbitString {
    pub fn equals(&self, other: &Self, tol_match: f64) -> Result<bool> {
        Ok(orbit_space_distance(self, other)? < tol_match)
    }
}

/// Orbit strings found in a class or window, with their Morse–Bott structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitFamilyReport {
    pub system: String,
    pub class_label: ClassLabel,
    pub strings: Vec<OrbitString>,
    pub components: Vec<Component>,
    /// All strings stay inside the search window and period cap and the
    /// components are mutually separated. Evidence only, never a proof.
    pub observed_compact: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horizontal(y: f64, cover: i64, n: usize) -> ClosedOrbit {
        ClosedOrbit {
            system: "test".into(),
            periodic: vec![true, true, false, false],
            samples: (0..n)
                .map(|i| vec![cover as f64 * i as f64 / n as f64, y, 1.0, 0.0])
                .collect(),
            period: cover as f64,
            class_label: ClassLabel::Winding { winding: vec![cover, 0, 0, 0] },
            closure_residual: 0.0,
            flow_residual: 0.0,
        }
    }

    #[test]
    fn multiplicities_of_covers() {
        for m in 1..=3 {
            let s = multiplicity(&horizontal(0.0, m, 128), 1e-6);
            assert_eq!(s.multiplicity, m as u32);
            assert!((s.simple_period - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn orbit_space_distance_examples() {
        let a = multiplicity(&horizontal(0.0, 1, 128), 1e-6);
        let b = multiplicity(&horizontal(0.5, 1, 128), 1e-6);
        assert!(orbit_space_distance(&a, &a).unwrap() < 1e-12);
        assert!((orbit_space_distance(&a, &b).unwrap() - 0.5).abs() < 1e-6);
        let half = OrbitString { representative: a.representative.shifted(0.5), ..a.clone() };
        assert!(orbit_space_distance(&a, &half).unwrap() < 1e-9);
        let mut other = b.clone();
        other.representative.system = "other".into();
        assert!(orbit_space_distance(&a, &other).is_err());
        assert_eq!(a.representative.recomputed_winding(), vec![1, 0, 0, 0]);
    }
}
