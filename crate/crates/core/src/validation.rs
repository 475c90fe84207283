//! Built-in self checks run by `hhgbox validate`: analytic limits, the
//! confined-hydrogen eigenvalue, the drive expansion, and a small-scale
//! comparison against the grid solver.

use std::time::Instant;

use rand::{Rng, SeedableRng};

use crate::basis::BasisSet;
use crate::boundary::BreathingLaw;
use crate::error::Result;
use crate::hamiltonian::{quadrature_panels, HamiltonianMatrices, DEFAULT_QUADRATURE_ORDER};
use crate::observables::{dipole_series, lab_frame_dipole_series};
use crate::oracle::{propagate_grid, richardson};
use crate::propagator::{diagonalize_static, Propagator, SimulationConfig, NORM_DRIFT_LIMIT};
use crate::simulation::{
    check_basis_convergence, compare_harmonics, simulate, spectrum_of, SpectrumOptions,
};
use crate::specialfn::QuadratureRule;

/// Grid points of the reference solver.
pub const ORACLE_GRID_POINTS: usize = 2000;
/// Rescaled-time step of the reference solver; halved once to confirm
/// convergence.
pub const ORACLE_TAU_STEP: f64 = 2e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Allowed distance of the confined ground state from `−1/8`.
    pub eigenvalue_tolerance: f64,
    /// Overrides the basis size of the small-scale dynamical checks.
    pub basis_size: Option<usize>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            eigenvalue_tolerance: 1e-5,
            basis_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// `a = 10, b = 1, ω0 = 1, Z = 1, l = 0`, box mode 1, `T = 20`, `N = 80`.
pub fn small_config() -> SimulationConfig {
    SimulationConfig {
        law: BreathingLaw {
            a: 10.0,
            b: 1.0,
            omega0: 1.0,
        },
        basis_size: 80,
        total_time: 20.0,
        ..SimulationConfig::baseline()
    }
}

type Check = fn(&ValidationOptions) -> Result<(bool, String)>;

pub fn run_validation(opts: &ValidationOptions) -> Vec<CheckOutcome> {
    let checks: [(&'static str, Check); 7] = [
        ("drive expansion", drive_expansion),
        ("static phase evolution", static_phases),
        ("confined hydrogen eigenvalue", confined_eigenvalue),
        ("large-box hydrogen limit", large_box_eigenvalue),
        ("norm conservation", norm_conservation),
        ("grid solver agreement", oracle_agreement),
        ("basis convergence", basis_convergence),
    ];
    checks
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let (passed, detail) = check(opts).unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Worst scaled deviation of the five-term cosine expansion of `½ r0³ r̈0`
/// over `samples` random `(a, b, ω0, t)` with `a > b > 0`.
pub fn drive_expansion_error(samples: usize, seed: u64) -> f64 {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let a = rng.random_range(1.0..200.0);
            let b = a * rng.random_range(0.001..0.99);
            let omega0 = rng.random_range(0.1..3.0);
            let t = rng.random_range(0.0..200.0);
            let law = BreathingLaw::new(a, b, omega0).expect("a > b > 0");
            let lhs = 0.5 * law.drive(t);
            let rhs = 0.5 * law.multichromatic_coefficients().eval(omega0, t);
            (lhs - rhs).abs() / lhs.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

fn drive_expansion(_: &ValidationOptions) -> Result<(bool, String)> {
    let err = drive_expansion_error(1000, 1);
    Ok((
        err <= 1e-9,
        format!("max scaled error {err:.2e} over 1000 samples (limit 1e-9)"),
    ))
}

fn static_phases(_: &ValidationOptions) -> Result<(bool, String)> {
    let config = SimulationConfig {
        law: BreathingLaw::fixed(100.0)?,
        z: 0.0,
        basis_size: 20,
        ..SimulationConfig::baseline()
    };
    let system = Propagator::new(config)?;
    let traj = system.run()?;
    let e1 = system.basis.energies[0];
    let want = num_complex::Complex64::from_polar(1.0, -e1 * 100.0 / 1e4);
    let last = traj.last();
    let err = (last.coeffs[0] - want).norm();
    let leak = last.coeffs[1..]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok((
        err <= 1e-8 && leak <= 1e-10,
        format!("|C_1 - exact| = {err:.2e}, max other |C_n| = {leak:.2e}"),
    ))
}

fn lowest_eigenvalue(z: f64, r0: f64, n: usize) -> Result<f64> {
    let basis = BasisSet::new(0, n)?;
    let m = HamiltonianMatrices::build(&basis, DEFAULT_QUADRATURE_ORDER)?;
    Ok(diagonalize_static(&basis, &m, z, r0)?.energies[0])
}

fn confined_eigenvalue(opts: &ValidationOptions) -> Result<(bool, String)> {
    let e = lowest_eigenvalue(1.0, 2.0, 100)?;
    let tol = opts.eigenvalue_tolerance;
    Ok((
        (e + 0.125).abs() <= tol,
        format!("r0 = 2, N = 100: E = {e:.10} (target -0.125 +/- {tol:e})"),
    ))
}

/// The box basis converges like `(r0 / N)³` on the Coulomb cusp, so a
/// 100 bohr box needs a few hundred modes to reach the free ground state.
fn large_box_eigenvalue(_: &ValidationOptions) -> Result<(bool, String)> {
    let e = lowest_eigenvalue(1.0, 100.0, 400)?;
    Ok((
        (e + 0.5).abs() <= 1e-3,
        format!("r0 = 100, N = 400: E = {e:.8} (target -0.5 +/- 1e-3)"),
    ))
}

fn forced(opts: &ValidationOptions) -> SimulationConfig {
    let mut config = small_config();
    if let Some(n) = opts.basis_size {
        config.basis_size = n;
    }
    config
}

fn norm_conservation(opts: &ValidationOptions) -> Result<(bool, String)> {
    let system = Propagator::new(forced(opts))?;
    let drift = system.run_unchecked()?.norm_drift();
    Ok((
        drift <= NORM_DRIFT_LIMIT,
        format!("max |norm - 1| = {drift:.2e} (limit {NORM_DRIFT_LIMIT:e})"),
    ))
}

/// Spectral and grid dipoles for the small configuration: relative L2
/// distance, the worst relative harmonic difference for `k = 1..=10`, and
/// the lab-frame dipole deviation.
pub struct OracleComparison {
    pub relative_l2: f64,
    pub worst_harmonic: (usize, f64),
    pub tau_step_change: f64,
    pub lab_frame_deviation: f64,
}

pub fn compare_with_oracle(config: &SimulationConfig) -> Result<OracleComparison> {
    let system = Propagator::new(config.clone())?;
    let traj = system.run()?;
    let spectral = dipole_series(&traj, &system.matrices.y, &config.law)?;

    let coarse = propagate_grid(config, ORACLE_GRID_POINTS, ORACLE_TAU_STEP)?;
    let fine = propagate_grid(config, ORACLE_GRID_POINTS, 0.5 * ORACLE_TAU_STEP)?;
    let tau_step_change = coarse.relative_l2(&fine);
    let grid = richardson(&coarse, &fine);

    let opts = SpectrumOptions {
        harmonics: 10,
        ..SpectrumOptions::default()
    };
    let (_, h_spec) = spectrum_of(&spectral, &config.law, &opts)?;
    let (_, h_grid) = spectrum_of(&grid, &config.law, &opts)?;

    let panels = quadrature_panels(&system.basis, DEFAULT_QUADRATURE_ORDER);
    let rule = QuadratureRule::composite(DEFAULT_QUADRATURE_ORDER, panels)?;
    let lab = lab_frame_dipole_series(&traj, &system.basis, &config.law, &rule);
    let lab_frame_deviation = spectral
        .values
        .iter()
        .zip(&lab.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(OracleComparison {
        relative_l2: grid.relative_l2(&spectral),
        worst_harmonic: compare_harmonics(&h_spec, &h_grid, 10),
        tau_step_change,
        lab_frame_deviation,
    })
}

fn oracle_agreement(opts: &ValidationOptions) -> Result<(bool, String)> {
    let c = compare_with_oracle(&forced(opts))?;
    let passed =
        c.relative_l2 <= 1e-3 && c.worst_harmonic.1 <= 0.01 && c.lab_frame_deviation <= 1e-6;
    Ok((
        passed,
        format!(
            "L2 {:.2e} (limit 1e-3), harmonic {} off by {:.2e} (limit 1e-2), lab-frame {:.2e} (limit 1e-6), dtau halving {:.2e}",
            c.relative_l2, c.worst_harmonic.0, c.worst_harmonic.1, c.lab_frame_deviation, c.tau_step_change
        ),
    ))
}

fn basis_convergence(opts: &ValidationOptions) -> Result<(bool, String)> {
    let spec_opts = SpectrumOptions::default();
    let run = simulate(&forced(opts), &spec_opts)?;
    let conv = check_basis_convergence(&run, &spec_opts)?;
    Ok((
        conv.converged,
        format!(
            "N = {} vs {}: harmonic {} changes by {:.2e} (limit 1e-2)",
            conv.basis_size, conv.reference_size, conv.worst_order, conv.max_relative_change
        ),
    ))
}
