//! Spectral propagation of the expansion coefficients `C_n(t)`:
//!
//! `i dC_n/dt = r0(t)⁻² [ε_n C_n + Σ_m V_nm(t) C_m]`
//!
//! integrated in physical time with an adaptive 8th-order Runge–Kutta scheme,
//! plus diagonalization of the static confined atom.

mod dop853;
pub mod integrator;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::BasisSet;
use crate::boundary::BreathingLaw;
use crate::error::{Error, Result};
use crate::hamiltonian::{coupling_prefactors, HamiltonianMatrices, DEFAULT_QUADRATURE_ORDER};
use integrator::{Dop853, IntegrationStats};

/// Largest tolerated `max_k |‖C(t_k)‖² − 1|` for an accepted run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// How the coefficient vector is populated at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// A single box eigenmode `φ_n` (1-based).
    BoxMode { n: usize },
    /// The `k`-th (1-based, ascending energy) eigenstate of the static atom in
    /// a box of radius `r_ref`.
    Eigenstate { k: usize, r_ref: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub law: BreathingLaw,
    /// Nuclear charge.
    pub z: f64,
    pub l: usize,
    pub basis_size: usize,
    pub initial: InitialState,
    /// Interaction time `T`.
    pub total_time: f64,
    /// Number of output samples on `[0, T]`, endpoints included.
    pub samples: usize,
    /// Local error tolerance of the integrator.
    pub tolerance: f64,
    /// Gauss–Legendre points per panel for the matrix elements.
    pub quadrature_order: usize,
}

impl SimulationConfig {
    pub const DEFAULT_BASIS_SIZE: usize = 100;
    pub const DEFAULT_SAMPLES: usize = 4001;
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    /// `a = 100, b = 10, ω0 = 1, Z = 1, l = 0, T = 100`, box mode 1.
    pub fn baseline() -> Self {
        Self {
            law: BreathingLaw {
                a: 100.0,
                b: 10.0,
                omega0: 1.0,
            },
            z: 1.0,
            l: 0,
            basis_size: Self::DEFAULT_BASIS_SIZE,
            initial: InitialState::BoxMode { n: 1 },
            total_time: 100.0,
            samples: Self::DEFAULT_SAMPLES,
            tolerance: Self::DEFAULT_TOLERANCE,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        BreathingLaw::new(self.law.a, self.law.b, self.law.omega0)?;
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::Domain(format!(
                "nuclear charge Z must be >= 0, got {}",
                self.z
            )));
        }
        if self.basis_size == 0 {
            return Err(Error::Domain("basis size must be >= 1".into()));
        }
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(Error::Domain(format!(
                "T must be > 0, got {}",
                self.total_time
            )));
        }
        if self.samples < 2 {
            return Err(Error::Domain("need at least 2 output samples".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Domain(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.quadrature_order == 0 {
            return Err(Error::Domain("quadrature order must be >= 1".into()));
        }
        match self.initial {
            InitialState::BoxMode { n } if n == 0 || n > self.basis_size => {
                Err(Error::IndexOutOfRange {
                    index: n,
                    size: self.basis_size,
                })
            }
            InitialState::Eigenstate { k, .. } if k == 0 || k > self.basis_size => {
                Err(Error::IndexOutOfRange {
                    index: k,
                    size: self.basis_size,
                })
            }
            InitialState::Eigenstate { r_ref, .. } if !(r_ref.is_finite() && r_ref > 0.0) => Err(
                Error::Domain(format!("reference radius must be > 0, got {r_ref}")),
            ),
            _ => Ok(()),
        }
    }

    /// Uniform output grid `t_k = k T / (S − 1)`.
    pub fn sample_times(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|k| self.total_time * k as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub t: f64,
    pub coeffs: Vec<Complex64>,
}

impl CoefficientState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<CoefficientState>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// `max_k |‖C(t_k)‖² − 1|`.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &CoefficientState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Eigen-decomposition of the static Hamiltonian `[diag(ε) − Z r0 M_{1/y}] / r0²`.
#[derive(Debug, Clone)]
pub struct StaticSpectrum {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`.
    pub vectors: DMatrix<f64>,
}

pub fn diagonalize_static(
    basis: &BasisSet,
    matrices: &HamiltonianMatrices,
    z: f64,
    r0: f64,
) -> Result<StaticSpectrum> {
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("box radius must be > 0, got {r0}")));
    }
    let h = static_hamiltonian(basis, matrices, z, r0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = order.len();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(StaticSpectrum { energies, vectors })
}

pub(crate) fn static_hamiltonian(
    basis: &BasisSet,
    matrices: &HamiltonianMatrices,
    z: f64,
    r0: f64,
) -> DMatrix<f64> {
    let mut h = &matrices.inv_y * (-z * r0);
    for (i, e) in basis.energies.iter().enumerate() {
        h[(i, i)] += e;
    }
    h / (r0 * r0)
}

/// A configured system: basis, matrices and the breathing law.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub config: SimulationConfig,
    pub basis: BasisSet,
    pub matrices: HamiltonianMatrices,
}

impl Propagator {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let basis = BasisSet::new(config.l, config.basis_size)?;
        let matrices = HamiltonianMatrices::build(&basis, config.quadrature_order)?;
        Ok(Self {
            config,
            basis,
            matrices,
        })
    }

    pub fn initial_state(&self) -> Result<CoefficientState> {
        initial_state(&self.config, &self.basis, &self.matrices)
    }

    /// Writes `dC/dt` at time `t` into `out`.
    pub fn rhs_into(&self, t: f64, c: &[Complex64], out: &mut [Complex64]) {
        let law = &self.config.law;
        let r0 = law.radius(t);
        let (coulomb, quad) = coupling_prefactors(t, law, self.config.z);
        let scale = 1.0 / (r0 * r0);
        let n = c.len();
        let inv = self.matrices.inv_y.as_slice();
        let y2 = self.matrices.y2.as_slice();
        let eps = &self.basis.energies;
        for i in 0..n {
            // Symmetric storage: column i doubles as row i.
            let col_inv = &inv[i * n..(i + 1) * n];
            let col_y2 = &y2[i * n..(i + 1) * n];
            let (mut ar, mut ai, mut br, mut bi) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..n {
                let (cr, ci) = (c[j].re, c[j].im);
                ar += col_inv[j] * cr;
                ai += col_inv[j] * ci;
                br += col_y2[j] * cr;
                bi += col_y2[j] * ci;
            }
            let wr = eps[i] * c[i].re + coulomb * ar + quad * br;
            let wi = eps[i] * c[i].im + coulomb * ai + quad * bi;
            // -i w
            out[i] = Complex64::new(wi * scale, -wr * scale);
        }
    }

    pub fn rhs(&self, t: f64, c: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); c.len()];
        self.rhs_into(t, c, &mut out);
        out
    }

    /// Evolve `state` to `t_end` (forward or backward in time).
    pub fn evolve(&self, state: &CoefficientState, t_end: f64) -> Result<CoefficientState> {
        let mut rk = Dop853::new(state.coeffs.len(), self.config.tolerance);
        let mut y = state.coeffs.clone();
        let mut f = |t: f64, c: &[Complex64], out: &mut [Complex64]| self.rhs_into(t, c, out);
        rk.integrate(&mut f, state.t, t_end, &mut y)?;
        Ok(CoefficientState {
            t: t_end,
            coeffs: y,
        })
    }

    /// Integrate over `[0, T]`, recording the configured sample grid, without
    /// enforcing the norm-drift limit.
    pub fn run_unchecked(&self) -> Result<Trajectory> {
        let initial = self.initial_state()?;
        let times = self.config.sample_times();
        let mut rk = Dop853::new(initial.coeffs.len(), self.config.tolerance);
        let mut y = initial.coeffs.clone();
        let mut states = Vec::with_capacity(times.len());
        states.push(initial);
        let mut f = |t: f64, c: &[Complex64], out: &mut [Complex64]| self.rhs_into(t, c, out);
        for w in times.windows(2) {
            rk.integrate(&mut f, w[0], w[1], &mut y)?;
            states.push(CoefficientState {
                t: w[1],
                coeffs: y.clone(),
            });
        }
        Ok(Trajectory {
            states,
            stats: rk.stats,
        })
    }

    /// As [`Propagator::run_unchecked`], failing if the norm drifts by more
    /// than [`NORM_DRIFT_LIMIT`].
    pub fn run(&self) -> Result<Trajectory> {
        let traj = self.run_unchecked()?;
        let drift = traj.norm_drift();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        Ok(traj)
    }
}

pub fn initial_state(
    config: &SimulationConfig,
    basis: &BasisSet,
    matrices: &HamiltonianMatrices,
) -> Result<CoefficientState> {
    let n = basis.size();
    let mut coeffs = vec![Complex64::default(); n];
    match config.initial {
        InitialState::BoxMode { n: mode } => {
            if mode == 0 || mode > n {
                return Err(Error::IndexOutOfRange {
                    index: mode,
                    size: n,
                });
            }
            coeffs[mode - 1] = Complex64::new(1.0, 0.0);
        }
        InitialState::Eigenstate { k, r_ref } => {
            if k == 0 || k > n {
                return Err(Error::IndexOutOfRange { index: k, size: n });
            }
            let spec = diagonalize_static(basis, matrices, config.z, r_ref)?;
            let v = spec.vectors.column(k - 1);
            let norm = v.norm();
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for (c, &x) in coeffs.iter_mut().zip(v.iter()) {
                *c = Complex64::new(sign * x / norm, 0.0);
            }
        }
    }
    Ok(CoefficientState { t: 0.0, coeffs })
}

/// `dC/dt` for a configured system.
pub fn rhs(t: f64, c: &[Complex64], system: &Propagator) -> Vec<Complex64> {
    system.rhs(t, c)
}

/// Build the system described by `config` and integrate it over `[0, T]`.
pub fn propagate(config: &SimulationConfig) -> Result<Trajectory> {
    Propagator::new(config.clone())?.run()
}
