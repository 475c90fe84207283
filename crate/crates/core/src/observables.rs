//! Observables of a coefficient state: the average dipole `d̄ = −⟨r⟩`,
//! populations, and the instantaneous energy.

use num_complex::Complex64;

use crate::basis::BasisSet;
use crate::boundary::BreathingLaw;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrices;
use crate::propagator::{CoefficientState, Trajectory};
use crate::specialfn::QuadratureRule;
use nalgebra::DMatrix;

/// Imaginary residue above which a Hermitian expectation value is rejected.
const IMAG_LIMIT: f64 = 1e-10;

/// Sampled average dipole `d̄(t_k)` on a uniform time grid (bohr).
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DipoleSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Relative L2 distance `‖self − other‖ / ‖other‖` over matching samples.
    pub fn relative_l2(&self, other: &DipoleSeries) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let den: f64 = other.values.iter().map(|b| b * b).sum();
        (num / den).sqrt()
    }
}

/// `⟨C| M |C⟩` for a real symmetric `M`; returns `(re, im)`.
fn quadratic_form(m: &DMatrix<f64>, c: &[Complex64]) -> Complex64 {
    let n = c.len();
    let data = m.as_slice();
    let mut acc = Complex64::default();
    for j in 0..n {
        let col = &data[j * n..(j + 1) * n];
        let mut mc = Complex64::default();
        for i in 0..n {
            mc += c[i].conj() * col[i];
        }
        acc += mc * c[j];
    }
    acc
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_LIMIT {
        return Err(Error::Consistency(z.im));
    }
    Ok(z.re)
}

/// `d̄(t) = −r0(t) Σ C_n* C_m ⟨φ_n|y|φ_m⟩`.
pub fn dipole(state: &CoefficientState, m_y: &DMatrix<f64>, law: &BreathingLaw) -> Result<f64> {
    let ey = real_part(quadratic_form(m_y, &state.coeffs))?;
    Ok(-law.radius(state.t) * ey)
}

pub fn dipole_series(
    traj: &Trajectory,
    m_y: &DMatrix<f64>,
    law: &BreathingLaw,
) -> Result<DipoleSeries> {
    let values = traj
        .states
        .iter()
        .map(|s| dipole(s, m_y, law))
        .collect::<Result<Vec<_>>>()?;
    Ok(DipoleSeries {
        times: traj.times(),
        values,
    })
}

/// `|C_n|²`.
pub fn populations(state: &CoefficientState) -> Vec<f64> {
    state.coeffs.iter().map(|c| c.norm_sqr()).collect()
}

/// `⟨C| [diag(ε) + V(t)] / r0² |C⟩` at time `t`.
pub fn energy_expectation(
    state: &CoefficientState,
    basis: &BasisSet,
    matrices: &HamiltonianMatrices,
    law: &BreathingLaw,
    z: f64,
    t: f64,
) -> Result<f64> {
    let v = matrices.assemble_v(t, law, z);
    let coupling = real_part(quadratic_form(&v, &state.coeffs))?;
    let diag: f64 = state
        .coeffs
        .iter()
        .zip(&basis.energies)
        .map(|(c, e)| e * c.norm_sqr())
        .sum();
    let r0 = law.radius(t);
    Ok((diag + coupling) / (r0 * r0))
}

/// `⟨r⟩` and `∫|R|² r² dr` evaluated in the laboratory frame.
///
/// The radial wave function is rebuilt on a quadrature grid in `r`,
/// `R(r) = r0^{-3/2} y⁻¹ exp(½ i r0 ṙ0 y²) Φ(y)` with `y = r / r0`, and the
/// moments `∫|R|² r³ dr`, `∫|R|² r² dr` are integrated directly.
pub fn lab_frame_moments(
    state: &CoefficientState,
    basis: &BasisSet,
    law: &BreathingLaw,
    rule: &QuadratureRule,
) -> (f64, f64) {
    let r0 = law.radius(state.t);
    let (rdot, _) = law.radius_derivatives(state.t);
    let prefactor = r0.powf(-1.5);
    let mut mean_r = 0.0;
    let mut norm = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let r = r0 * x;
        let y = r / r0;
        let phi: Complex64 = state
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * basis.value(n, y))
            .sum();
        let phase = Complex64::from_polar(1.0, 0.5 * r0 * rdot * y * y);
        let radial = phase * phi * (prefactor / y);
        let density = radial.norm_sqr() * r * r;
        // dr = r0 dx
        mean_r += w * r0 * density * r;
        norm += w * r0 * density;
    }
    (mean_r, norm)
}

/// [`lab_frame_moments`] at every state of a trajectory, reusing the basis
/// values at the quadrature nodes. Returns `−⟨r⟩` per sample.
pub fn lab_frame_dipole_series(
    traj: &Trajectory,
    basis: &BasisSet,
    law: &BreathingLaw,
    rule: &QuadratureRule,
) -> DipoleSeries {
    let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| basis.values_at(x)).collect();
    let values = traj
        .states
        .iter()
        .map(|state| {
            let r0 = law.radius(state.t);
            let (rdot, _) = law.radius_derivatives(state.t);
            let prefactor = r0.powf(-1.5);
            let mut mean_r = 0.0;
            for ((&y, &w), phis) in rule.nodes.iter().zip(&rule.weights).zip(&table) {
                let r = r0 * y;
                let phi: Complex64 = state.coeffs.iter().zip(phis).map(|(c, &p)| c * p).sum();
                let phase = Complex64::from_polar(1.0, 0.5 * r0 * rdot * y * y);
                let radial = phase * phi * (prefactor / y);
                mean_r += w * r0 * radial.norm_sqr() * r * r * r;
            }
            -mean_r
        })
        .collect();
    DipoleSeries {
        times: traj.times(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::hamiltonian::build_matrices;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn unit(n: usize, k: usize, t: f64) -> CoefficientState {
        let mut coeffs = vec![Complex64::default(); n];
        coeffs[k] = Complex64::new(1.0, 0.0);
        CoefficientState { t, coeffs }
    }

    #[test]
    fn box_mode_dipole_is_half_radius() {
        let basis = build_basis(0, 6).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        let law = BreathingLaw::new(100.0, 10.0, 1.0).unwrap();
        for k in 0..6 {
            let t = 0.4 * k as f64;
            let d = dipole(&unit(6, k, t), &m.y, &law).unwrap();
            assert!((d + law.radius(t) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_superposition() {
        let basis = build_basis(0, 4).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        // ⟨φ1|y|φ2⟩ = 2∫ y sin(πy) sin(2πy) dy = −16/(9π²) by direct integration
        let rule = QuadratureRule::composite(50, 4).unwrap();
        let m12 = rule.integrate(|y| 2.0 * y * (PI * y).sin() * (2.0 * PI * y).sin());
        assert!((m12 + 16.0 / (9.0 * PI * PI)).abs() < 1e-13);
        let law = BreathingLaw::new(10.0, 1.0, 1.0).unwrap();
        let mut coeffs = vec![Complex64::default(); 4];
        coeffs[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        coeffs[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let state = CoefficientState { t: 0.3, coeffs };
        let d = dipole(&state, &m.y, &law).unwrap();
        let want = -law.radius(0.3) * (0.5 + m12);
        assert!((d - want).abs() < 1e-12);
    }

    #[test]
    fn populations_and_energy() {
        let basis = build_basis(0, 5).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        let p = populations(&unit(5, 0, 0.0));
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let still = BreathingLaw::new(7.0, 0.0, 1.0).unwrap();
        let e = energy_expectation(&unit(5, 0, 0.0), &basis, &m, &still, 0.0, 0.0).unwrap();
        assert!((e - PI * PI / (2.0 * 49.0)).abs() < 1e-13);
    }

    #[test]
    fn lab_frame_matches_coefficient_route() {
        let basis = build_basis(0, 10).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        let law = BreathingLaw::new(10.0, 1.0, 1.0).unwrap();
        let coeffs: Vec<Complex64> = (0..10)
            .map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), 0.7 * k as f64))
            .collect();
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let coeffs = coeffs.into_iter().map(|c| c / norm).collect();
        let state = CoefficientState { t: 1.1, coeffs };
        let rule = QuadratureRule::composite(64, 4).unwrap();
        let (mean_r, n2) = lab_frame_moments(&state, &basis, &law, &rule);
        assert!((n2 - 1.0).abs() < 1e-12);
        let d = dipole(&state, &m.y, &law).unwrap();
        assert!((d + mean_r).abs() < 1e-10);

        let traj = Trajectory {
            states: vec![state],
            stats: Default::default(),
        };
        let series = lab_frame_dipole_series(&traj, &basis, &law, &rule);
        assert!((series.values[0] + mean_r).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn expectations_are_real_and_bounded(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            let basis = build_basis(1, 8).unwrap();
            let m = build_matrices(&basis, 64).unwrap();
            let law = BreathingLaw::new(10.0, 2.0, 1.0).unwrap();
            let raw: Vec<Complex64> = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let state = CoefficientState { t: 0.9, coeffs: raw.iter().map(|c| c / norm).collect() };
            let q = quadratic_form(&m.y, &state.coeffs);
            prop_assert!(q.im.abs() < 1e-12);
            let d = dipole(&state, &m.y, &law).unwrap();
            prop_assert!(d < 0.0 && -d < law.radius(0.9));
            prop_assert!(energy_expectation(&state, &basis, &m, &law, 1.0, 0.9).is_ok());
            let p: f64 = populations(&state).iter().sum();
            prop_assert!((p - state.norm_sqr()).abs() < 1e-14);
        }
    }
}
