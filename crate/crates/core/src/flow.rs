//! Vector-field systems on coordinate charts and the fixed-step integrator used
//! for orbits, their variational equations and continuation.
//!
//! All integration happens in normalized time `t ∈ [0, 1]` with the field scaled
//! by the period, so a closed orbit of period `T` is a fixed point of the
//! time-one map of `T·X` (up to the integer lift shift on periodic coordinates).

use nalgebra::{DMatrix, DVector};

use crate::ad::{jacobian, seed, values, Real, D1};
use crate::error::{Error, Result};

/// A smooth vector field on an open chart, possibly carrying equality
/// constraints (e.g. the unit sphere inside R⁴) and a transverse frame.
pub trait FlowSystem: Send + Sync {
    fn dim(&self) -> usize;

    /// Which coordinates are periodic with period 1.
    fn periodic(&self) -> Vec<bool>;

    fn field(&self, p: &[f64]) -> Result<Vec<f64>>;

    fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)>;

    /// Equality constraints `c(p) = 0` cutting the phase space out of the chart,
    /// each with its gradient.
    fn constraints(&self, _p: &[f64]) -> Vec<(f64, Vec<f64>)> {
        Vec::new()
    }

    /// Directions that complete `X` and the transverse frame to a basis of the
    /// chart tangent space; monodromy components along them are discarded.
    fn complement_directions(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.constraints(p).into_iter().map(|(_, g)| g).collect()
    }

    /// Columns spanning a complement of the flow direction inside the phase
    /// space. For contact systems this is the normalized frame of ξ with
    /// `dλ(f_i, f_{n+i}) = 1`.
    fn transverse_frame(&self, p: &[f64]) -> Result<DMatrix<f64>>;

    /// Whether [`FlowSystem::transverse_frame`] is a symplectic frame.
    fn symplectic_frame(&self) -> bool {
        true
    }

    fn frame_id(&self) -> String;

    fn system_id(&self) -> String;
}

/// Fields written once generically over the scalar type.
pub trait GenericField: Send + Sync {
    fn chart_dim(&self) -> usize;
    fn eval<S: Real>(&self, p: &[S]) -> Result<Vec<S>>;

    fn eval_f64(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.eval(p)
    }

    fn eval_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let d = self.chart_dim();
        let s = seed(p);
        let v: Vec<D1> = self.eval(&s)?;
        let jac = jacobian(&v, d);
        let m = DMatrix::from_fn(v.len(), d, |i, j| jac[i][j]);
        Ok((values(&v), m))
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

fn check_finite(p: &[f64], t: f64) -> Result<()> {
    if p.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("trajectory left the domain at t = {t:.6}")))
    }
}

fn rk4_step(sys: &dyn FlowSystem, p: &[f64], period: f64, h: f64) -> Result<Vec<f64>> {
    let k1 = sys.field(p)?;
    let k2 = sys.field(&axpy(0.5 * h * period, &k1, p))?;
    let k3 = sys.field(&axpy(0.5 * h * period, &k2, p))?;
    let k4 = sys.field(&axpy(h * period, &k3, p))?;
    Ok((0..p.len())
        .map(|i| p[i] + h * period / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Time-`period` flow of `p0` using `steps` RK4 steps.
pub fn flow_end(sys: &dyn FlowSystem, p0: &[f64], period: f64, steps: usize) -> Result<Vec<f64>> {
    let h = 1.0 / steps as f64;
    let mut p = p0.to_vec();
    for k in 0..steps {
        p = rk4_step(sys, &p, period, h)?;
        check_finite(&p, (k + 1) as f64 * h)?;
    }
    Ok(p)
}

/// Integration step count rounded up to a multiple of `samples`.
pub fn aligned_steps(steps: usize, samples: usize) -> usize {
    steps.div_ceil(samples).max(1) * samples
}

/// `samples` equispaced points `o(i/samples)`, `i = 0..samples`, plus the end point `o(1)`.
pub fn trajectory(
    sys: &dyn FlowSystem,
    p0: &[f64],
    period: f64,
    steps: usize,
    samples: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let steps = aligned_steps(steps, samples);
    let per = steps / samples;
    let h = 1.0 / steps as f64;
    let mut out = Vec::with_capacity(samples);
    let mut p = p0.to_vec();
    for k in 0..steps {
        if k % per == 0 {
            out.push(p.clone());
        }
        p = rk4_step(sys, &p, period, h)?;
        check_finite(&p, (k + 1) as f64 * h)?;
    }
    Ok((out, p))
}

/// Solution of the variational equation `Ẏ = period·DX(o(t))·Y`, `Y(0) = I`.
#[derive(Clone, Debug)]
pub struct VariationalTrack {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub mats: Vec<DMatrix<f64>>,
    pub end: Vec<f64>,
    pub y: DMatrix<f64>,
}

/// Integrates orbit and variational equation together with the same RK4 scheme.
/// When `record` is set, every step's point and matrix is kept.
pub fn variational(
    sys: &dyn FlowSystem,
    p0: &[f64],
    period: f64,
    steps: usize,
    record: bool,
) -> Result<VariationalTrack> {
    let d = sys.dim();
    let h = 1.0 / steps as f64;
    let mut p = p0.to_vec();
    let mut y = DMatrix::<f64>::identity(d, d);
    let mut track = VariationalTrack {
        times: vec![],
        points: vec![],
        mats: vec![],
        end: vec![],
        y: y.clone(),
    };
    if record {
        track.times.push(0.0);
        track.points.push(p.clone());
        track.mats.push(y.clone());
    }
    let ev = |q: &[f64]| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (f, j) = sys.field_jacobian(q)?;
        Ok((DVector::from_vec(f) * period, j * period))
    };
    for k in 0..steps {
        let pv = DVector::from_column_slice(&p);
        let (f1, j1) = ev(&p)?;
        let y1 = &j1 * &y;
        let p2 = &pv + &f1 * (0.5 * h);
        let (f2, j2) = ev(p2.as_slice())?;
        let y2 = &j2 * (&y + &y1 * (0.5 * h));
        let p3 = &pv + &f2 * (0.5 * h);
        let (f3, j3) = ev(p3.as_slice())?;
        let y3 = &j3 * (&y + &y2 * (0.5 * h));
        let p4 = &pv + &f3 * h;
        let (f4, j4) = ev(p4.as_slice())?;
        let y4 = &j4 * (&y + &y3 * h);
        let pn = &pv + (&f1 + &f2 * 2.0 + &f3 * 2.0 + &f4) * (h / 6.0);
        y += (&y1 + &y2 * 2.0 + &y3 * 2.0 + &y4) * (h / 6.0);
        p = pn.as_slice().to_vec();
        check_finite(&p, (k + 1) as f64 * h)?;
        if record {
            track.times.push((k + 1) as f64 * h);
            track.points.push(p.clone());
            track.mats.push(y.clone());
        }
    }
    track.end = p;
    track.y = y;
    Ok(track)
}

/// Wraps a difference on periodic coordinates into `[-1/2, 1/2)`.
pub fn wrap_diff(d: &mut [f64], periodic: &[bool]) {
    for (x, &per) in d.iter_mut().zip(periodic) {
        if per {
            *x -= x.round();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Harmonic oscillator on R²; time-2π flow is the identity.
    struct Osc;
    impl GenericField for Osc {
        fn chart_dim(&self) -> usize {
            2
        }
        fn eval<S: Real>(&self, p: &[S]) -> Result<Vec<S>> {
            Ok(vec![-p[1], p[0]])
        }
    }
    impl FlowSystem for Osc {
        fn dim(&self) -> usize {
            2
        }
        fn periodic(&self) -> Vec<bool> {
            vec![false, false]
        }
        fn field(&self, p: &[f64]) -> Result<Vec<f64>> {
            self.eval_f64(p)
        }
        fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
            self.eval_with_jacobian(p)
        }
        fn transverse_frame(&self, _p: &[f64]) -> Result<DMatrix<f64>> {
            Err(Error::Frame("none".into()))
        }
        fn frame_id(&self) -> String {
            "none".into()
        }
        fn system_id(&self) -> String {
            "osc".into()
        }
    }

    #[test]
    fn oscillator_returns_after_two_pi() {
        let tau = std::f64::consts::TAU;
        let end = flow_end(&Osc, &[1.0, 0.0], tau, 2048).unwrap();
        assert!((end[0] - 1.0).abs() < 1e-9 && end[1].abs() < 1e-9);
        let v = variational(&Osc, &[1.0, 0.0], tau, 2048, false).unwrap();
        assert!((v.y.clone() - DMatrix::identity(2, 2)).norm() < 1e-9);
        let quarter = variational(&Osc, &[1.0, 0.0], tau / 4.0, 512, true).unwrap();
        assert_eq!(quarter.mats.len(), 513);
        assert!((quarter.y[(1, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trajectory_samples_are_equispaced() {
        let tau = std::f64::consts::TAU;
        let (s, end) = trajectory(&Osc, &[1.0, 0.0], tau, 500, 8).unwrap();
        assert_eq!(s.len(), 8);
        assert!((s[2][1] - 1.0).abs() < 1e-9);
        assert!((end[0] - 1.0).abs() < 1e-9);
    }
}
