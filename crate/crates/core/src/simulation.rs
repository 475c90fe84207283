//! End-to-end runs: propagate, extract the dipole, transform, and check the
//! result against the norm and basis-size convergence criteria.

use std::fmt;
use std::str::FromStr;

use crate::boundary::BreathingLaw;
use crate::error::{Error, Result};
use crate::observables::{dipole_series, DipoleSeries};
use crate::propagator::integrator::IntegrationStats;
use crate::propagator::{Propagator, SimulationConfig, NORM_DRIFT_LIMIT};
use crate::spectrum::{harmonic_grid, harmonic_peaks, power_spectrum, PowerSpectrum, Window};

/// Largest relative change of any reported harmonic under a 25% larger basis.
pub const BASIS_CONVERGENCE_LIMIT: f64 = 0.01;

/// Harmonic powers smaller than this fraction of the strongest line
/// (DC included) are compared against that floor instead of themselves.
pub const RELATIVE_POWER_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub window: Window,
    /// Highest frequency on the evaluation grid, in units of `ω0`.
    pub max_order: usize,
    /// Grid points per `ω0`.
    pub per_harmonic: usize,
    /// Harmonics `1..=harmonics` are reported and convergence-checked.
    pub harmonics: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            window: Window::None,
            max_order: 30,
            per_harmonic: 20,
            harmonics: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: SimulationConfig,
    pub dipole: DipoleSeries,
    pub spectrum: PowerSpectrum,
    /// `(k, |d̄(k ω0)|²)` for `k = 0 ..= harmonics`.
    pub harmonics: Vec<(usize, f64)>,
    pub norm_drift: f64,
    pub stats: IntegrationStats,
}

impl RunResult {
    pub fn norm_ok(&self) -> bool {
        self.norm_drift <= NORM_DRIFT_LIMIT
    }

    /// `Σ_{k=1..k_max} |d̄(k ω0)|²`.
    pub fn harmonic_sum(&self, k_max: usize) -> f64 {
        self.harmonics
            .iter()
            .filter(|(k, _)| (1..=k_max).contains(k))
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn spectrum_of(
    series: &DipoleSeries,
    law: &BreathingLaw,
    opts: &SpectrumOptions,
) -> Result<(PowerSpectrum, Vec<(usize, f64)>)> {
    let grid = harmonic_grid(law.omega0, opts.max_order, opts.per_harmonic);
    let spectrum = power_spectrum(series, &grid, opts.window)?;
    let harmonics = harmonic_peaks(&spectrum, law.omega0, opts.harmonics)?;
    Ok((spectrum, harmonics))
}

/// Propagates `config` and transforms the dipole. Norm drift is measured but
/// not enforced here; see [`RunResult::norm_ok`].
pub fn simulate(config: &SimulationConfig, opts: &SpectrumOptions) -> Result<RunResult> {
    let system = Propagator::new(config.clone())?;
    let traj = system.run_unchecked()?;
    let dipole = dipole_series(&traj, &system.matrices.y, &config.law)?;
    let (spectrum, harmonics) = spectrum_of(&dipole, &config.law, opts)?;
    Ok(RunResult {
        config: config.clone(),
        dipole,
        spectrum,
        harmonics,
        norm_drift: traj.norm_drift(),
        stats: traj.stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisConvergence {
    pub basis_size: usize,
    pub reference_size: usize,
    pub max_relative_change: f64,
    /// Harmonic order where the largest change occurred.
    pub worst_order: usize,
    pub converged: bool,
}

/// Relative change of each harmonic in `1..=k_max` between two runs. Returns
/// the worst `(order, change)`.
pub fn compare_harmonics(
    base: &[(usize, f64)],
    reference: &[(usize, f64)],
    k_max: usize,
) -> (usize, f64) {
    let strongest = reference.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    let floor = RELATIVE_POWER_FLOOR * strongest;
    base.iter()
        .zip(reference)
        .filter(|((k, _), _)| (1..=k_max).contains(k))
        .map(|(&(k, p), &(_, q))| (k, (p - q).abs() / q.abs().max(floor).max(f64::MIN_POSITIVE)))
        .fold(
            (0, 0.0),
            |worst, cur| if cur.1 > worst.1 { cur } else { worst },
        )
}

/// Reruns with `ceil(1.25 N)` basis functions and compares the harmonics.
pub fn check_basis_convergence(
    run: &RunResult,
    opts: &SpectrumOptions,
) -> Result<BasisConvergence> {
    let mut bigger = run.config.clone();
    bigger.basis_size = (run.config.basis_size * 5)
        .div_ceil(4)
        .max(run.config.basis_size + 1);
    let reference = simulate(&bigger, opts)?;
    let (worst_order, change) =
        compare_harmonics(&run.harmonics, &reference.harmonics, opts.harmonics);
    Ok(BasisConvergence {
        basis_size: run.config.basis_size,
        reference_size: bigger.basis_size,
        max_relative_change: change,
        worst_order,
        converged: change < BASIS_CONVERGENCE_LIMIT,
    })
}

/// Configuration parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    A,
    B,
    Z,
}

impl SweepParam {
    pub fn apply(self, base: &SimulationConfig, value: f64) -> Result<SimulationConfig> {
        let mut config = base.clone();
        let law = base.law;
        match self {
            Self::A => config.law = BreathingLaw::new(value, law.b, law.omega0)?,
            Self::B => config.law = BreathingLaw::new(law.a, value, law.omega0)?,
            Self::Z => config.z = value,
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "a",
            Self::B => "b",
            Self::Z => "Z",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "Z" | "z" => Ok(Self::Z),
            other => Err(Error::Domain(format!(
                "cannot sweep `{other}`; expected a, b or Z"
            ))),
        }
    }
}
