//! Eigenbasis of the unit spherical box at fixed angular momentum.
//!
//! `φ_n(y) = N_n · y · j_l(λ_n y)` are the reduced radial eigenfunctions with
//! `φ_n(1) = 0`; they are orthonormal on `(0, 1)` with unit weight.

use crate::error::{Error, Result};
use crate::specialfn::{bessel_zeros, sph_j, L_MAX, MAX_ZERO_INDEX};

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub l: usize,
    /// `λ_n`, the n-th zero of `j_l`.
    pub zeros: Vec<f64>,
    /// `ε_n = λ_n² / 2` (hartree, unit box).
    pub energies: Vec<f64>,
    /// `N_n > 0`.
    pub norms: Vec<f64>,
}

impl BasisSet {
    pub fn new(l: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("basis size must be >= 1".into()));
        }
        if l > L_MAX || size > MAX_ZERO_INDEX {
            return Err(Error::Domain(format!(
                "unsupported basis (l = {l}, N = {size}); limits are l <= {L_MAX}, N <= {MAX_ZERO_INDEX}"
            )));
        }
        let zeros = bessel_zeros(l, size)?;
        let energies = zeros.iter().map(|z| 0.5 * z * z).collect();
        // ∫₀¹ y² j_l(λy)² dy = ½ j_{l+1}(λ)² at a zero of j_l.
        let norms = zeros
            .iter()
            .map(|&z| std::f64::consts::SQRT_2 / sph_j(l + 1, z).abs())
            .collect();
        Ok(Self {
            l,
            zeros,
            energies,
            norms,
        })
    }

    pub fn size(&self) -> usize {
        self.zeros.len()
    }

    /// `φ_n(y)` for 1-based `n` and `y ∈ [0, 1]`.
    pub fn eval(&self, n: usize, y: f64) -> Result<f64> {
        if n == 0 || n > self.size() {
            return Err(Error::IndexOutOfRange {
                index: n,
                size: self.size(),
            });
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("y = {y} outside [0, 1]")));
        }
        Ok(self.value(n - 1, y))
    }

    /// Unchecked `φ` with a 0-based index.
    pub(crate) fn value(&self, idx: usize, y: f64) -> f64 {
        self.norms[idx] * y * sph_j(self.l, self.zeros[idx] * y)
    }

    /// All basis functions at `y`, 0-based.
    pub fn values_at(&self, y: f64) -> Vec<f64> {
        (0..self.size()).map(|i| self.value(i, y)).collect()
    }
}

/// Build the first `size` box eigenfunctions for angular momentum `l`.
pub fn build_basis(l: usize, size: usize) -> Result<BasisSet> {
    BasisSet::new(l, size)
}
