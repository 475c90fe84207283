//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 8(5,3)) for
//! complex-valued ODE systems `dy/dt = f(t, y)`.

use num_complex::Complex64;

use super::dop853::{A, B, C, E3, E5, STAGES};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

/// Counters reported after an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Dormand–Prince 8(5,3) with mixed absolute/relative local error control.
#[derive(Debug, Clone)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`; `None` means unbounded.
    pub max_step: Option<f64>,
    stages: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    y_new: Vec<Complex64>,
    f_new: Vec<Complex64>,
    h: Option<f64>,
    pub stats: IntegrationStats,
}

impl Dop853 {
    pub fn new(dim: usize, tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_step: None,
            stages: vec![vec![Complex64::default(); dim]; STAGES],
            scratch: vec![Complex64::default(); dim],
            y_new: vec![Complex64::default(); dim],
            f_new: vec![Complex64::default(); dim],
            h: None,
            stats: IntegrationStats::default(),
        }
    }

    /// Advance `y` from `t0` to `t1` (either direction). The step size carries
    /// over between calls so consecutive output intervals reuse it.
    pub fn integrate<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [Complex64]) -> Result<()>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        if t1 == t0 {
            return Ok(());
        }
        let dir = (t1 - t0).signum();
        let mut t = t0;
        f(t, y, &mut self.stages[0]);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h.abs(),
            None => self.initial_step(f, t, y, dir),
        };
        if let Some(m) = self.max_step {
            h = h.min(m);
        }
        let mut steps = 0usize;
        loop {
            let remaining = (t1 - t) * dir;
            if remaining <= 0.0 {
                break;
            }
            let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h < min_step {
                return Err(Error::StepUnderflow { t, h });
            }
            // Land exactly on t1 without leaving a sliver step behind.
            let (step, last) = if h * 1.01 >= remaining {
                (remaining, true)
            } else {
                (h, false)
            };
            let err = self.attempt(f, t, y, dir * step);
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepUnderflow { t, h });
            }
            if err <= 1.0 {
                self.stats.accepted += 1;
                t = if last { t1 } else { t + dir * step };
                y.copy_from_slice(&self.y_new);
                self.stages[0].copy_from_slice(&self.f_new);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                let grown = step * factor;
                // A step shortened to hit t1 says little about the natural size.
                h = if last && step < h {
                    grown.max(h)
                } else {
                    grown
                };
                if let Some(m) = self.max_step {
                    h = h.min(m);
                }
                self.h = Some(h);
            } else {
                self.stats.rejected += 1;
                h = step * (SAFETY * err.powf(-1.0 / 8.0)).max(MIN_FACTOR);
            }
        }
        Ok(())
    }

    /// One trial step of size `h` from `(t, y)`; fills `y_new`, `f_new` and
    /// returns the scaled error norm.
    fn attempt<F>(&mut self, f: &mut F, t: f64, y: &[Complex64], h: f64) -> f64
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = Complex64::default();
                for (k, stage) in self.stages.iter().enumerate().take(s) {
                    let a = A[s][k];
                    if a != 0.0 {
                        acc += stage[i] * a;
                    }
                }
                self.scratch[i] = y[i] + acc * h;
            }
            f(t + C[s] * h, &self.scratch, &mut self.stages[s]);
        }
        self.stats.evaluations += STAGES - 1;

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let mut acc = Complex64::default();
            let mut e5 = Complex64::default();
            let mut e3 = Complex64::default();
            for k in 0..STAGES {
                let ki = self.stages[k][i];
                acc += ki * B[k];
                e5 += ki * E5[k];
                e3 += ki * E3[k];
            }
            let yn = y[i] + acc * h;
            self.y_new[i] = yn;
            let scale = self.atol + self.rtol * y[i].norm().max(yn.norm());
            err5 += (e5.norm() / scale).powi(2);
            err3 += (e3.norm() / scale).powi(2);
        }
        f(t + h, &self.y_new, &mut self.f_new);
        self.stats.evaluations += 1;

        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        let denom = err5 + 0.01 * err3;
        h.abs() * err5 / (denom * n as f64).sqrt()
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[Complex64], dir: f64) -> f64
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len() as f64;
        let scale = |v: Complex64| self.atol + self.rtol * v.norm();
        let d0 = (y
            .iter()
            .map(|&v| (v.norm() / scale(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let d1 = (y
            .iter()
            .zip(&self.stages[0])
            .map(|(&v, &dv)| (dv.norm() / scale(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        for i in 0..y.len() {
            self.scratch[i] = y[i] + self.stages[0][i] * (dir * h0);
        }
        f(t + dir * h0, &self.scratch, &mut self.f_new);
        self.stats.evaluations += 1;
        let d2 = (y
            .iter()
            .zip(self.f_new.iter().zip(&self.stages[0]))
            .map(|(&v, (&a, &b))| ((a - b).norm() / scale(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = (-0.3 + 2i) y
        let lambda = Complex64::new(-0.3, 2.0);
        let mut f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = lambda * y[0];
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut rk = Dop853::new(1, 1e-12);
        rk.integrate(&mut f, 0.0, 5.0, &mut y).unwrap();
        let exact = (lambda * 5.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
        // and back
        rk.integrate(&mut f, 5.0, 0.0, &mut y).unwrap();
        assert!((y[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn eighth_order_convergence() {
        // Fixed large tolerance but max_step forces h; compare errors at h and h/2.
        let mut f = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, -1.0) * y[0] * t.cos();
        };
        let exact = Complex64::new(0.0, -(3.0f64).sin()).exp();
        let run = |h: f64, f: &mut dyn FnMut(f64, &[Complex64], &mut [Complex64])| {
            let mut rk = Dop853::new(1, 1.0);
            rk.max_step = Some(h);
            let mut y = vec![Complex64::new(1.0, 0.0)];
            let mut g = |t: f64, y: &[Complex64], dy: &mut [Complex64]| f(t, y, dy);
            rk.integrate(&mut g, 0.0, 3.0, &mut y).unwrap();
            (y[0] - exact).norm()
        };
        let e1 = run(0.3, &mut f);
        let e2 = run(0.15, &mut f);
        let ratio = e1 / e2;
        assert!(ratio > 100.0, "ratio {ratio} ({e1:e}, {e2:e})");
    }

    #[test]
    fn underflow_is_reported() {
        // Blows up in finite time at t = 1.
        let mut f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] * y[0];
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut rk = Dop853::new(1, 1e-10);
        let err = rk.integrate(&mut f, 0.0, 2.0, &mut y).unwrap_err();
        match err {
            Error::StepUnderflow { t, .. } => assert!(t > 0.9 && t < 1.01, "{t}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
