//! Trigonometric interpolation of sampled loops.
//!
//! A sampled loop `o(t_i)`, `t_i = i/N`, on a chart with periodic coordinates is
//! split into its lift shift `o(1) − o(0)` (integers on periodic coordinates)
//! and a periodic remainder, which is interpolated by its discrete Fourier series.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Clone, Debug)]
pub struct TrigLoop {
    n: usize,
    shift: Vec<f64>,
    /// Per coordinate, DFT coefficients divided by `n`.
    coef: Vec<Vec<Complex<f64>>>,
}

impl TrigLoop {
    pub fn new(samples: &[Vec<f64>], shift: &[f64]) -> Self {
        let n = samples.len();
        let dim = shift.len();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut coef = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut buf: Vec<Complex<f64>> = samples
                .iter()
                .enumerate()
                .map(|(i, s)| Complex::new(s[c] - shift[c] * i as f64 / n as f64, 0.0))
                .collect();
            fft.process(&mut buf);
            for z in buf.iter_mut() {
                *z /= n as f64;
            }
            coef.push(buf);
        }
        Self { n, shift: shift.to_vec(), coef }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn freq(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    fn nyquist(&self) -> Option<usize> {
        (self.n % 2 == 0).then_some(self.n / 2)
    }

    /// Interpolated point at arbitrary `t`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let ny = self.nyquist();
        self.coef
            .iter()
            .enumerate()
            .map(|(c, co)| {
                let mut acc = 0.0;
                for (k, z) in co.iter().enumerate() {
                    if Some(k) == ny {
                        acc += z.re * (std::f64::consts::PI * self.n as f64 * t).cos();
                    } else {
                        let (s, cs) = (TAU * self.freq(k) * t).sin_cos();
                        acc += z.re * cs - z.im * s;
                    }
                }
                acc + self.shift[c] * t
            })
            .collect()
    }

    fn synthesize(&self, f: impl Fn(usize, Complex<f64>) -> Complex<f64>, linear: impl Fn(usize, f64) -> f64) -> Vec<Vec<f64>> {
        let mut planner = FftPlanner::<f64>::new();
        let ifft = planner.plan_fft_inverse(self.n);
        let mut out = vec![vec![0.0; self.shift.len()]; self.n];
        for (c, co) in self.coef.iter().enumerate() {
            let mut buf: Vec<Complex<f64>> = co.iter().enumerate().map(|(k, z)| f(k, *z)).collect();
            ifft.process(&mut buf);
            for (i, z) in buf.iter().enumerate() {
                out[i][c] = z.re + linear(c, i as f64 / self.n as f64);
            }
        }
        out
    }

    /// Samples of `t ↦ o(t + s)` on the grid `t_i`.
    pub fn shifted_samples(&self, s: f64) -> Vec<Vec<f64>> {
        let ny = self.nyquist();
        let n = self.n as f64;
        self.synthesize(
            |k, z| {
                if Some(k) == ny {
                    z * (std::f64::consts::PI * n * s).cos()
                } else {
                    z * Complex::from_polar(1.0, TAU * self.freq(k) * s)
                }
            },
            |c, t| self.shift[c] * (t + s),
        )
    }

    /// Samples of `ȯ(t_i)` by spectral differentiation.
    pub fn derivative_samples(&self) -> Vec<Vec<f64>> {
        let ny = self.nyquist();
        self.synthesize(
            |k, z| {
                if Some(k) == ny {
                    Complex::new(0.0, 0.0)
                } else {
                    z * Complex::new(0.0, TAU * self.freq(k))
                }
            },
            |c, _| self.shift[c],
        )
    }
}

/// `max_i ‖wrap(a_i − b_i)‖` with wrapping on periodic coordinates.
pub fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>], periodic: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| point_distance(x, y, periodic))
        .fold(0.0, f64::max)
}

pub fn point_distance(x: &[f64], y: &[f64], periodic: &[bool]) -> f64 {
    x.iter()
        .zip(y)
        .zip(periodic)
        .map(|((a, b), &p)| {
            let mut d = a - b;
            if p {
                d -= d.round();
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `min_s max_i ‖a(t_i + s) − b(t_i)‖` and the minimizing `s ∈ [0, 1)`.
///
/// A discrete scan over sample shifts brackets the minimum, which is then
/// refined by golden-section search on the interpolated loop.
pub fn aligned_distance(a: &TrigLoop, a_samples: &[Vec<f64>], b: &[Vec<f64>], periodic: &[bool]) -> (f64, f64) {
    let n = b.len();
    let same_grid = a_samples.len() == n;
    let base: Vec<Vec<f64>> = if same_grid {
        a_samples.to_vec()
    } else {
        (0..n).map(|i| a.eval(i as f64 / n as f64)).collect()
    };
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..n {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(point_distance(&base[(i + k) % n], &b[i], periodic));
            if worst >= best.0 {
                break;
            }
        }
        if worst < best.0 {
            best = (worst, k);
        }
    }
    let h = 1.0 / n as f64;
    let eval = |s: f64| -> f64 {
        if same_grid {
            sup_distance(&a.shifted_samples(s), b, periodic)
        } else {
            let pts: Vec<Vec<f64>> = (0..n).map(|i| a.eval(i as f64 / n as f64 + s)).collect();
            sup_distance(&pts, b, periodic)
        }
    };
    let s0 = best.1 as f64 * h;
    let (mut lo, mut hi) = (s0 - h, s0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..48 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        }
    }
    let (s, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let (s, f) = if best.0 <= f { (s0, best.0) } else { (s, f) };
    (f, s.rem_euclid(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, phase: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 + phase;
                vec![t, 0.3 + 0.1 * (TAU * t).sin()]
            })
            .collect()
    }

    #[test]
    fn shifting_and_differentiation_are_exact_for_trig_loops() {
        let s = circle(64, 0.0);
        let l = TrigLoop::new(&s, &[1.0, 0.0]);
        let sh = l.shifted_samples(0.123);
        let want = circle(64, 0.123);
        assert!(sup_distance(&sh, &want, &[false, false]) < 1e-13);
        let d = l.derivative_samples();
        for (i, v) in d.iter().enumerate() {
            let t = i as f64 / 64.0;
            assert!((v[0] - 1.0).abs() < 1e-12);
            assert!((v[1] - 0.1 * TAU * (TAU * t).cos()).abs() < 1e-12);
        }
        let p = l.eval(0.377);
        assert!((p[1] - (0.3 + 0.1 * (TAU * 0.377).sin())).abs() < 1e-13);
    }

    #[test]
    fn aligned_distance_recovers_shift() {
        let a = circle(64, 0.0);
        let b = circle(64, 0.2371);
        let la = TrigLoop::new(&a, &[1.0, 0.0]);
        let (d, s) = aligned_distance(&la, &a, &b, &[true, true]);
        assert!(d < 1e-9, "{d}");
        assert!((s - 0.2371).abs() < 1e-8, "{s}");
    }
}
