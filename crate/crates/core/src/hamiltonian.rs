//! Time-independent matrix elements in the box basis and assembly of the
//! coupling matrix `V(t) = -Z r0 ⟨1/y⟩ + ½ r0³ r̈0 ⟨y²⟩`.

use nalgebra::DMatrix;

use crate::basis::BasisSet;
use crate::boundary::BreathingLaw;
use crate::error::Result;
use crate::specialfn::QuadratureRule;

/// Default Gauss–Legendre points per panel.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

#[derive(Debug, Clone)]
pub struct HamiltonianMatrices {
    /// `⟨φ_m | 1/y | φ_n⟩`
    pub inv_y: DMatrix<f64>,
    /// `⟨φ_m | y² | φ_n⟩`
    pub y2: DMatrix<f64>,
    /// `⟨φ_m | y | φ_n⟩`
    pub y: DMatrix<f64>,
    pub basis_l: usize,
}

/// Panels needed so that each panel of an `order`-point rule sees at most
/// `order / 3` radians of the fastest product `cos(2 λ_N y)`.
pub fn quadrature_panels(basis: &BasisSet, order: usize) -> usize {
    let kmax = 2.0 * basis.zeros.last().copied().unwrap_or(0.0);
    ((3.0 * kmax / order as f64).ceil() as usize).max(1)
}

impl HamiltonianMatrices {
    pub fn build(basis: &BasisSet, order: usize) -> Result<Self> {
        let rule = QuadratureRule::composite(order, quadrature_panels(basis, order))?;
        let n = basis.size();
        let mut inv_y = DMatrix::zeros(n, n);
        let mut y2 = DMatrix::zeros(n, n);
        let mut y1 = DMatrix::zeros(n, n);
        let mut phi = vec![0.0; n];
        for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
            for (i, p) in phi.iter_mut().enumerate() {
                *p = basis.value(i, y);
            }
            let (wi, w2, w1) = (w / y, w * y * y, w * y);
            for j in 0..n {
                for i in j..n {
                    let pp = phi[i] * phi[j];
                    inv_y[(i, j)] += wi * pp;
                    y2[(i, j)] += w2 * pp;
                    y1[(i, j)] += w1 * pp;
                }
            }
        }
        for m in [&mut inv_y, &mut y2, &mut y1] {
            m.fill_upper_triangle_with_lower_triangle();
        }
        Ok(Self {
            inv_y,
            y2,
            y: y1,
            basis_l: basis.l,
        })
    }

    pub fn size(&self) -> usize {
        self.inv_y.nrows()
    }

    /// `V(t)` for nuclear charge `z`.
    pub fn assemble_v(&self, t: f64, law: &BreathingLaw, z: f64) -> DMatrix<f64> {
        let (coulomb, quad) = coupling_prefactors(t, law, z);
        &self.inv_y * coulomb + &self.y2 * quad
    }
}

/// `(−Z r0, ½ r0³ r̈0)`: the scalars multiplying `⟨1/y⟩` and `⟨y²⟩` in `V(t)`.
pub fn coupling_prefactors(t: f64, law: &BreathingLaw, z: f64) -> (f64, f64) {
    (-z * law.radius(t), 0.5 * law.drive(t))
}

pub fn build_matrices(basis: &BasisSet, order: usize) -> Result<HamiltonianMatrices> {
    HamiltonianMatrices::build(basis, order)
}

pub fn assemble_v(t: f64, law: &BreathingLaw, z: f64, m: &HamiltonianMatrices) -> DMatrix<f64> {
    m.assemble_v(t, law, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Cin(x) = ∫₀ˣ (1 − cos t)/t dt by its power series.
    fn cin(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0; // (2k)!
        let mut pow = 1.0; // x^{2k}
        for k in 1..60 {
            fact *= ((2 * k - 1) * (2 * k)) as f64;
            pow *= x * x;
            let term = pow / (2.0 * k as f64 * fact);
            sum += if k % 2 == 1 { term } else { -term };
        }
        sum
    }

    #[test]
    fn analytic_l0_elements() {
        let basis = build_basis(0, 10).unwrap();
        let m = build_matrices(&basis, DEFAULT_QUADRATURE_ORDER).unwrap();
        let want = 1.0 / 3.0 - 1.0 / (2.0 * PI * PI);
        assert!((m.y2[(0, 0)] - want).abs() < 1e-13);
        for n in 0..10 {
            assert!((m.y[(n, n)] - 0.5).abs() < 1e-13);
        }
        let want12 = cin(3.0 * PI) - cin(PI);
        assert!(
            (m.inv_y[(0, 1)] - want12).abs() < 1e-12,
            "{} vs {}",
            m.inv_y[(0, 1)],
            want12
        );
    }

    #[test]
    fn structural_invariants() {
        for l in [0usize, 1, 4] {
            let basis = build_basis(l, 30).unwrap();
            let m = build_matrices(&basis, DEFAULT_QUADRATURE_ORDER).unwrap();
            for mat in [&m.inv_y, &m.y2, &m.y] {
                assert!((mat - mat.transpose()).amax() <= 1e-12);
            }
            for i in 0..30 {
                assert!(m.y2[(i, i)] > 0.0 && m.y2[(i, i)] < 1.0);
                assert!(m.y[(i, i)] > 0.0 && m.y[(i, i)] < 1.0);
                assert!(m.inv_y[(i, i)] > 0.0);
            }
        }
    }

    #[test]
    fn converged_in_quadrature_order() {
        for (l, n) in [(0usize, 100usize), (2, 40)] {
            let basis = build_basis(l, n).unwrap();
            let a = build_matrices(&basis, 64).unwrap();
            let b = build_matrices(&basis, 128).unwrap();
            assert!((&a.inv_y - &b.inv_y).amax() <= 1e-10);
            assert!((&a.y2 - &b.y2).amax() <= 1e-10);
            assert!((&a.y - &b.y).amax() <= 1e-10);
        }
    }

    #[test]
    fn assemble_v_limits() {
        let basis = build_basis(0, 8).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        let still = BreathingLaw::new(10.0, 0.0, 1.0).unwrap();
        assert_eq!(m.assemble_v(0.3, &still, 0.0).amax(), 0.0);

        let law = BreathingLaw::new(10.0, 2.0, 1.5).unwrap();
        let t = PI / (2.0 * 1.5);
        let v = m.assemble_v(t, &law, 1.0);
        let want = &m.inv_y * (-10.0);
        assert!((v - want).amax() < 1e-12);
    }

    #[test]
    fn spot_entry_matches_direct_integral() {
        let basis = build_basis(1, 6).unwrap();
        let m = build_matrices(&basis, 64).unwrap();
        let law = BreathingLaw::new(10.0, 1.0, 1.0).unwrap();
        let (z, t) = (1.0, 0.7);
        let v = m.assemble_v(t, &law, z);
        let r0 = law.radius(t);
        let acc = law.radius_derivatives(t).1;
        let rule = QuadratureRule::composite(40, 13).unwrap();
        for (i, j) in [(0usize, 0usize), (2, 5), (4, 1)] {
            let direct = rule.integrate(|y| {
                basis.value(i, y)
                    * basis.value(j, y)
                    * (-z * r0 / y + 0.5 * r0.powi(3) * acc * y * y)
            });
            assert!((v[(i, j)] - direct).abs() < 1e-10 * direct.abs().max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn v_is_symmetric_and_affine_in_z(t in -20.0f64..20.0, z in 0.0f64..4.0) {
            let basis = build_basis(0, 12).unwrap();
            let m = build_matrices(&basis, 64).unwrap();
            let law = BreathingLaw::new(10.0, 1.0, 1.0).unwrap();
            let v = m.assemble_v(t, &law, z);
            prop_assert!((&v - v.transpose()).amax() <= 1e-12 * v.amax().max(1.0));
            let v0 = m.assemble_v(t, &law, 0.0);
            let v1 = m.assemble_v(t, &law, 1.0);
            let recomposed = &v0 + (&v1 - &v0) * z;
            prop_assert!((&v - recomposed).amax() <= 1e-14 * v.amax().max(1.0) * 8.0);
            let manual = &m.inv_y * (-z * law.radius(t)) + &m.y2 * (0.5 * law.drive(t));
            prop_assert!((&v - manual).amax() <= 1e-14 * v.amax().max(1.0));
        }
    }
}
