//! Spherical Bessel functions of the first kind, their positive zeros, and
//! Gauss–Legendre quadrature on the unit interval.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest angular momentum supported by [`spherical_bessel_j`] and
/// [`bessel_zero`].
pub const L_MAX: usize = 20;

/// Largest zero index supported by [`bessel_zero`] / [`bessel_zeros`].
pub const MAX_ZERO_INDEX: usize = 4096;

/// Spherical Bessel function `j_l(x)` for `0 <= l <= L_MAX`, `x >= 0`.
pub fn spherical_bessel_j(l: usize, x: f64) -> Result<f64> {
    if l > L_MAX {
        return Err(Error::Domain(format!("l = {l} exceeds L_MAX = {L_MAX}")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "j_l requires finite x >= 0, got {x}"
        )));
    }
    Ok(sph_j(l, x))
}

/// Unchecked `j_l(x)`. Caller guarantees `x >= 0` and a modest `l`.
pub(crate) fn sph_j(l: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 || x < l as f64 {
        return series(l, x);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut jm = j0;
    let mut j = s / (x * x) - c / x;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * j - jm;
        jm = j;
        j = next;
    }
    j
}

/// Ascending power series, accurate for `x` below roughly `max(1, l)`.
fn series(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!!
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= x / (2 * k + 1) as f64;
    }
    let half_x2 = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= half_x2 / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// The `n`-th positive zero (`n >= 1`) of `j_l`.
pub fn bessel_zero(l: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("zero index n starts at 1".into()));
    }
    Ok(bessel_zeros(l, n)?[n - 1])
}

/// The first `count` positive zeros of `j_l`, ascending.
///
/// Zeros of `j_l` are bracketed by consecutive zeros of `j_{l-1}`, starting
/// from `n*pi` for `l = 0`, so no root can be skipped.
pub fn bessel_zeros(l: usize, count: usize) -> Result<Vec<f64>> {
    if l > L_MAX {
        return Err(Error::Domain(format!("l = {l} exceeds L_MAX = {L_MAX}")));
    }
    if count > MAX_ZERO_INDEX {
        return Err(Error::Domain(format!(
            "zero index {count} exceeds MAX_ZERO_INDEX = {MAX_ZERO_INDEX}"
        )));
    }
    let mut zeros: Vec<f64> = (1..=count + l).map(|n| n as f64 * PI).collect();
    for order in 1..=l {
        let needed = count + l - order;
        zeros = (0..needed)
            .map(|n| bisect_root(order, zeros[n], zeros[n + 1]))
            .collect();
    }
    zeros.truncate(count);
    Ok(zeros)
}

fn bisect_root(l: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = sph_j(l, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = sph_j(l, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Quadrature rule on `(0, 1)`: `panels` equal sub-intervals, each carrying an
/// `order`-point Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
    pub panels: usize,
}

impl QuadratureRule {
    /// Composite rule: `panels` copies of the `order`-point rule.
    pub fn composite(order: usize, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Domain("quadrature needs at least one panel".into()));
        }
        let base = gauss_legendre(order)?;
        let width = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        for p in 0..panels {
            let left = p as f64 * width;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(left + width * x);
                weights.push(width * w);
            }
        }
        Ok(Self {
            nodes,
            weights,
            order,
            panels,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫₀¹ f(y) dy`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Gauss–Legendre rule with `order` points mapped to `(0, 1)`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots are symmetric about 0; find the positive half by Newton iteration.
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1]; index from the left end.
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
        panels: 1,
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
