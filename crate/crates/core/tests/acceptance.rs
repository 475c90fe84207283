//! Acceptance checks at production parameters. Each test writes one
//! `PASS`/`FAIL` line to stderr (uncaptured) before asserting.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hhgbox::hamiltonian::{quadrature_panels, DEFAULT_QUADRATURE_ORDER};
use hhgbox::observables::{dipole_series, lab_frame_dipole_series};
use hhgbox::oracle::{propagate_grid, richardson};
use hhgbox::simulation::{compare_harmonics, simulate, spectrum_of, RunResult, SpectrumOptions};
use hhgbox::specialfn::QuadratureRule;
use hhgbox::spectrum::local_maxima;
use hhgbox::validation::small_config;
use hhgbox::{
    diagonalize_static, BasisSet, BreathingLaw, HamiltonianMatrices, InitialState, Propagator,
    SimulationConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn report(name: &str, passed: bool, detail: &str, elapsed: Duration) {
    let status = if passed { "PASS" } else { "FAIL" };
    let line = format!(
        "[{status}] {name}: {detail} ({:.1} s)\n",
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn baseline_with(a: f64, b: f64) -> SimulationConfig {
    SimulationConfig {
        law: BreathingLaw::new(a, b, 1.0).unwrap(),
        ..SimulationConfig::baseline()
    }
}

struct Timed {
    run: RunResult,
    elapsed: Duration,
}

fn timed_run(config: &SimulationConfig) -> Timed {
    let start = Instant::now();
    let run = simulate(config, &SpectrumOptions::default()).unwrap();
    Timed {
        run,
        elapsed: start.elapsed(),
    }
}

/// `a = 100, b = 10, ω0 = 1, Z = 1, T = 100, N = 100`, shared by several tests.
fn shared_baseline() -> &'static Timed {
    static RUN: OnceLock<Timed> = OnceLock::new();
    RUN.get_or_init(|| timed_run(&SimulationConfig::baseline()))
}

fn harmonic_power(run: &RunResult, k: usize) -> f64 {
    run.harmonics
        .iter()
        .find(|(order, _)| *order == k)
        .unwrap()
        .1
}

#[test]
fn drive_expansion_identity() {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = rng.random_range(1.0..200.0);
        let b = a * rng.random_range(0.001..0.99);
        let omega0 = rng.random_range(0.1..3.0);
        let t = rng.random_range(0.0..200.0);
        let law = BreathingLaw::new(a, b, omega0).unwrap();
        let lhs = 0.5 * law.drive(t);
        let rhs = 0.5 * law.multichromatic_coefficients().eval(omega0, t);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    let elapsed = start.elapsed();
    let passed = worst <= 1e-9 && elapsed < Duration::from_secs(1);
    report(
        "drive expansion identity",
        passed,
        &format!("max scaled error {worst:.2e} over 1000 samples (limit 1e-9)"),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn static_free_box_phases() {
    let start = Instant::now();
    let config = SimulationConfig {
        law: BreathingLaw::fixed(100.0).unwrap(),
        z: 0.0,
        ..SimulationConfig::baseline()
    };
    let system = Propagator::new(config).unwrap();
    let traj = system.run().unwrap();
    let exact = Complex64::from_polar(1.0, -system.basis.energies[0] * 100.0 / 1e4);
    let last = traj.last();
    let err = (last.coeffs[0] - exact).norm();
    let leak = last.coeffs[1..]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let passed = err <= 1e-8 && leak <= 1e-10 && elapsed < Duration::from_secs(1);
    report(
        "static free-box phases",
        passed,
        &format!(
            "|C_1 - exact| = {err:.2e} (limit 1e-8), max other |C_n| = {leak:.2e} (limit 1e-10)"
        ),
        elapsed,
    );
    assert!(passed);
}

fn lowest_level(r0: f64, n: usize) -> f64 {
    let basis = BasisSet::new(0, n).unwrap();
    let m = HamiltonianMatrices::build(&basis, DEFAULT_QUADRATURE_ORDER).unwrap();
    diagonalize_static(&basis, &m, 1.0, r0).unwrap().energies[0]
}

#[test]
fn confined_hydrogen_levels() {
    let start = Instant::now();
    let small = lowest_level(2.0, 100);
    let large = lowest_level(100.0, 150);
    let elapsed = start.elapsed();
    let small_ok = (small + 0.125).abs() <= 1e-5;
    let large_ok = (large + 0.5).abs() <= 1e-3;
    let passed = small_ok && large_ok && elapsed < Duration::from_secs(10);
    report(
        "confined hydrogen levels",
        passed,
        &format!(
            "r0 = 2, N = 100: {small:.9} (-0.125 +/- 1e-5, {}); r0 = 100, N = 150: {large:.6} (-0.5 +/- 1e-3, {})",
            if small_ok { "ok" } else { "off" },
            if large_ok { "ok" } else { "off" }
        ),
        elapsed,
    );
    assert!(passed);
}

/// Spectral (N = 80) versus grid solver on the small configuration.
#[test]
fn grid_solver_agreement() {
    let start = Instant::now();
    let config = small_config();
    let system = Propagator::new(config.clone()).unwrap();
    let spectral = dipole_series(&system.run().unwrap(), &system.matrices.y, &config.law).unwrap();
    let coarse = propagate_grid(&config, 2000, 2e-5).unwrap();
    let fine = propagate_grid(&config, 2000, 1e-5).unwrap();
    let step_change = coarse.relative_l2(&fine);
    let grid = richardson(&coarse, &fine);
    let l2 = grid.relative_l2(&spectral);
    let opts = SpectrumOptions {
        harmonics: 10,
        ..SpectrumOptions::default()
    };
    let (_, h_spec) = spectrum_of(&spectral, &config.law, &opts).unwrap();
    let (_, h_grid) = spectrum_of(&grid, &config.law, &opts).unwrap();
    let (k, change) = compare_harmonics(&h_spec, &h_grid, 10);
    let elapsed = start.elapsed();
    let passed =
        l2 <= 1e-3 && change <= 0.01 && step_change <= 1e-4 && elapsed < Duration::from_secs(120);
    report(
        "spectral vs grid solver",
        passed,
        &format!("relative L2 {l2:.2e} (limit 1e-3), worst harmonic {k} off by {change:.2e} (limit 1e-2), tau-step halving changes grid dipole by {step_change:.2e}"),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn baseline_norm_conservation() {
    let base = shared_baseline();
    let passed = base.run.norm_drift <= 1e-6 && base.elapsed < Duration::from_secs(300);
    report(
        "baseline norm conservation",
        passed,
        &format!(
            "max |norm - 1| = {:.2e} (limit 1e-6), {} steps",
            base.run.norm_drift, base.run.stats.accepted
        ),
        base.elapsed,
    );
    assert!(passed);
}

#[test]
fn harmonic_yield_grows_with_amplitude() {
    let start = Instant::now();
    let sums: Vec<(f64, f64)> = [5.0, 10.0, 15.0]
        .iter()
        .map(|&b| {
            let sum = if b == 10.0 {
                shared_baseline().run.harmonic_sum(20)
            } else {
                timed_run(&baseline_with(100.0, b)).run.harmonic_sum(20)
            };
            (b, sum)
        })
        .collect();
    let passed = sums.windows(2).all(|w| w[1].1 > w[0].1);
    let detail = sums
        .iter()
        .map(|(b, s)| format!("b = {b}: {s:.4e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(
        "harmonic yield grows with b",
        passed,
        &format!("sum over k = 1..20 of power: {detail}"),
        start.elapsed(),
    );
    assert!(passed);
}

#[test]
fn harmonics_insensitive_to_box_size() {
    let start = Instant::now();
    let runs: Vec<RunResult> = [50.0, 100.0, 150.0]
        .iter()
        .map(|&a| {
            if a == 100.0 {
                shared_baseline().run.clone()
            } else {
                timed_run(&baseline_with(a, 10.0)).run
            }
        })
        .collect();
    let (worst_k, spread) = (1..=10)
        .map(|k| {
            let logs: Vec<f64> = runs.iter().map(|r| harmonic_power(r, k).log10()).collect();
            let hi = logs.iter().cloned().fold(f64::MIN, f64::max);
            let lo = logs.iter().cloned().fold(f64::MAX, f64::min);
            (k, hi - lo)
        })
        .fold((0, 0.0), |w, c| if c.1 > w.1 { c } else { w });
    let passed = spread < 1.0;
    report(
        "harmonics insensitive to a",
        passed,
        &format!("largest log10 power spread over a = 50, 100, 150 is {spread:.3} decades at k = {worst_k} (limit 1)"),
        start.elapsed(),
    );
    assert!(passed);
}

#[test]
fn spectral_comb_at_integer_harmonics() {
    let base = shared_baseline();
    let spec = &base.run.spectrum;
    let maxima = local_maxima(spec, 0.5, 20.5);
    let off: Vec<f64> = maxima
        .iter()
        .map(|&i| spec.omegas[i])
        .filter(|w| (w - w.round()).abs() > 1.0 / 20.0 + 1e-9)
        .collect();
    let passed = !maxima.is_empty() && off.is_empty();
    let sample = off
        .iter()
        .take(6)
        .map(|w| format!("{w:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(
        "spectral comb",
        passed,
        &format!("{} of {} local maxima on (0.5, 20.5) lie farther than omega0/20 from an integer (first: {sample})", off.len(), maxima.len()),
        base.elapsed,
    );
    assert!(passed);
}

#[test]
fn lab_frame_dipole_matches_coefficients() {
    let start = Instant::now();
    let config = small_config();
    assert!(matches!(config.initial, InitialState::BoxMode { n: 1 }));
    let system = Propagator::new(config.clone()).unwrap();
    let traj = system.run().unwrap();
    let from_coefficients = dipole_series(&traj, &system.matrices.y, &config.law).unwrap();
    let panels = quadrature_panels(&system.basis, DEFAULT_QUADRATURE_ORDER);
    let rule = QuadratureRule::composite(DEFAULT_QUADRATURE_ORDER, panels).unwrap();
    let lab = lab_frame_dipole_series(&traj, &system.basis, &config.law, &rule);
    let worst = from_coefficients
        .values
        .iter()
        .zip(&lab.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let passed = worst <= 1e-6;
    report(
        "lab-frame dipole",
        passed,
        &format!(
            "max |d_coeff - d_lab| = {worst:.2e} over {} samples (limit 1e-6)",
            lab.len()
        ),
        start.elapsed(),
    );
    assert!(passed);
}
