//! Quantum dynamics and high-harmonic spectra of a hydrogen-like atom inside a
//! spherical box whose radius oscillates as `r0(t) = a + b cos(ω0 t)`.
//!
//! The radial problem is mapped onto the unit sphere (`y = r / r0`), expanded
//! in box eigenfunctions `φ_n(y) = N_n y j_l(λ_n y)`, and the coefficient ODE
//! is integrated with an adaptive Runge–Kutta scheme. An independent
//! Crank–Nicolson grid solver in rescaled time cross-checks the result.
//!
//! All quantities are in atomic units.

pub mod basis;
pub mod boundary;
pub mod config;
pub mod error;
pub mod hamiltonian;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod simulation;
pub mod specialfn;
pub mod spectrum;
pub mod validation;

pub use basis::{build_basis, BasisSet};
pub use boundary::{BreathingLaw, MultichromaticCoefficients};
pub use config::{load_config, parse_config, render_config};
pub use error::{Error, Result};
pub use hamiltonian::{build_matrices, HamiltonianMatrices};
pub use observables::DipoleSeries;
pub use propagator::{
    diagonalize_static, propagate, CoefficientState, InitialState, Propagator, SimulationConfig,
    StaticSpectrum, Trajectory,
};
pub use simulation::{simulate, BasisConvergence, RunResult, SpectrumOptions, SweepParam};
pub use spectrum::{power_spectrum, PowerSpectrum, Window};
