//! Kinematics of the harmonically breathing wall `r0(t) = a + b cos(ω0 t)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specialfn::{gauss_legendre, QuadratureRule};

/// Wall trajectory `r0(t) = a + b cos(ω0 t)` in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreathingLaw {
    /// Mean radius (bohr).
    pub a: f64,
    /// Oscillation amplitude (bohr).
    pub b: f64,
    /// Drive frequency.
    pub omega0: f64,
}

/// Fourier coefficients of the wall drive `r0³ r̈0` on `{1, cos kω0t}`, k = 1..4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultichromaticCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl MultichromaticCoefficients {
    /// `A + B cos ω0t + C cos 2ω0t + D cos 3ω0t + E cos 4ω0t`.
    pub fn eval(&self, omega0: f64, t: f64) -> f64 {
        let p = omega0 * t;
        self.a
            + self.b * p.cos()
            + self.c * (2.0 * p).cos()
            + self.d * (3.0 * p).cos()
            + self.e * (4.0 * p).cos()
    }
}

impl BreathingLaw {
    pub fn new(a: f64, b: f64, omega0: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && omega0.is_finite()) {
            return Err(Error::Domain(
                "breathing law parameters must be finite".into(),
            ));
        }
        if a <= 0.0 {
            return Err(Error::Domain(format!("mean radius a must be > 0, got {a}")));
        }
        if b < 0.0 {
            return Err(Error::Domain(format!("amplitude b must be >= 0, got {b}")));
        }
        if omega0 <= 0.0 {
            return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
        }
        if a - b <= 0.0 {
            return Err(Error::NonPositiveRadius(a - b));
        }
        Ok(Self { a, b, omega0 })
    }

    /// A static box of radius `a`.
    pub fn fixed(a: f64) -> Result<Self> {
        Self::new(a, 0.0, 1.0)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.a + self.b * (self.omega0 * t).cos()
    }

    /// `(ṙ0, r̈0)`.
    pub fn radius_derivatives(&self, t: f64) -> (f64, f64) {
        let w = self.omega0;
        let (s, c) = (w * t).sin_cos();
        (-self.b * w * s, -self.b * w * w * c)
    }

    /// `r0³ r̈0`, the strength of the `y²` term in the rescaled frame.
    pub fn drive(&self, t: f64) -> f64 {
        let r = self.radius(t);
        r * r * r * self.radius_derivatives(t).1
    }

    /// Expansion of `r0³ r̈0` into the constant and first four harmonics.
    ///
    /// Expanding `-b ω0² cos(p) (a + b cos p)³` with the power-reduction
    /// identities gives `B = -(a b ω0²/4)(4a² + 9b²)` for the fundamental.
    pub fn multichromatic_coefficients(&self) -> MultichromaticCoefficients {
        let (a, b, w2) = (self.a, self.b, self.omega0 * self.omega0);
        MultichromaticCoefficients {
            a: -3.0 * b * b * w2 / 8.0 * (4.0 * a * a + b * b),
            b: -a * b * w2 / 4.0 * (4.0 * a * a + 9.0 * b * b),
            c: -b * b * w2 / 2.0 * (3.0 * a * a + b * b),
            d: -3.0 * a * b * b * b * w2 / 4.0,
            e: -b * b * b * b * w2 / 8.0,
        }
    }

    /// Rescaled time `τ(t) = ∫₀ᵗ ds / r0(s)²`.
    pub fn tau_of_t(&self, t: f64) -> f64 {
        self.tau_between(0.0, t)
    }

    /// `∫_{t0}^{t1} ds / r0(s)²` by adaptive Gauss–Legendre quadrature
    /// (absolute tolerance 1e-13 per unit of `τ`).
    pub fn tau_between(&self, t0: f64, t1: f64) -> f64 {
        if t1 == t0 {
            return 0.0;
        }
        let (lo, hi, sign) = if t1 > t0 {
            (t0, t1, 1.0)
        } else {
            (t1, t0, -1.0)
        };
        let rule = gauss_legendre(10).expect("order 10 is valid");
        // Panels no longer than an eighth of a period keep the recursion shallow.
        let max_panel = self.period() / 8.0;
        let panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
        let width = (hi - lo) / panels as f64;
        let f = |s: f64| {
            let r = self.radius(s);
            1.0 / (r * r)
        };
        let tol = 1e-13 * (hi - lo) / (self.a - self.b).powi(2);
        let mut total = 0.0;
        for p in 0..panels {
            let x0 = lo + p as f64 * width;
            let x1 = if p + 1 == panels { hi } else { x0 + width };
            total += adaptive(&rule, &f, x0, x1, tol / panels as f64, 0);
        }
        sign * total
    }

    /// Invert `τ(t)`: returns `t` such that `tau_of_t(t) = tau`, starting from a
    /// known pair `anchor = (t_a, τ(t_a))` with `τ(t_a) <= tau`.
    pub fn t_of_tau(&self, tau: f64, anchor: (f64, f64)) -> Result<f64> {
        let (t_a, tau_a) = anchor;
        let target = tau - tau_a;
        if target < -1e-15 {
            return Err(Error::TauInversion(tau));
        }
        if target <= 0.0 {
            return Ok(t_a);
        }
        let rmin = self.a - self.b;
        let rmax = self.a + self.b;
        // dτ/dt lies in [1/rmax², 1/rmin²].
        let mut lo = t_a + target * rmin * rmin;
        let mut hi = t_a + target * rmax * rmax;
        let mut t = t_a + target * self.a * self.a;
        for _ in 0..100 {
            let g = self.tau_between(t_a, t) - target;
            if g.abs() <= 1e-15 * tau.abs().max(1e-300) {
                return Ok(t);
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let r = self.radius(t);
            let mut next = t - g * r * r;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::TauInversion(tau))
    }
}

fn adaptive<F: Fn(f64) -> f64>(
    rule: &QuadratureRule,
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let whole = panel(rule, f, lo, hi);
    let mid = 0.5 * (lo + hi);
    let left = panel(rule, f, lo, mid);
    let right = panel(rule, f, mid, hi);
    let split = left + right;
    if (split - whole).abs() <= tol || depth >= 30 {
        split
    } else {
        adaptive(rule, f, lo, mid, 0.5 * tol, depth + 1)
            + adaptive(rule, f, mid, hi, 0.5 * tol, depth + 1)
    }
}

fn panel<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: &F, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&y, &wt)| wt * f(lo + w * y))
        .sum::<f64>()
        * w
}
