use serde::Serialize;

use crate::constants::TOL;
use crate::error::{Error, Result};
use crate::native_gates::{x_matrix, z_matrix};
use crate::qstate::{UnitaryMatrix, C64};

/// `U = e^{iα} · Z(φ1) · X(θ) · Z(φ2)` with `θ ∈ [0, π]`. In temporal order
/// `Z(φ2)` acts first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub phi1: f64,
    pub theta: f64,
    pub phi2: f64,
}

impl EulerAngles {
    pub fn unitary(&self) -> UnitaryMatrix {
        z_matrix(self.phi1)
            .mul(&x_matrix(self.theta))
            .and_then(|m| m.mul(&z_matrix(self.phi2)))
            .expect("2x2 products")
            .with_global_phase(self.alpha)
    }
}

/// ZXZ Euler decomposition of a one-qubit unitary.
///
/// With `V = e^{−iα}U ∈ SU(2)`,
/// `V = [[c·e^{−i(φ1+φ2)/2}, −i s·e^{−i(φ1−φ2)/2}], [−i s·e^{i(φ1−φ2)/2}, c·e^{i(φ1+φ2)/2}]]`
/// where `c = cos θ/2`, `s = sin θ/2`. When `s` or `c` vanishes only the sum or
/// the difference of the Z angles is defined; `φ2` is then set to 0.
pub fn euler_zxz(u: &UnitaryMatrix) -> Result<EulerAngles> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    let err = u.unitarity_error();
    if err > TOL.algebraic {
        return Err(Error::NotUnitary(err));
    }
    let alpha = u.determinant().arg() / 2.0;
    let strip = C64::from_polar(1.0, -alpha);
    let v00 = u.get(0, 0) * strip;
    let v10 = u.get(1, 0) * strip;

    let theta = 2.0 * v10.norm().atan2(v00.norm());
    // arg(v00) = −(φ1+φ2)/2, arg(v10) = −π/2 + (φ1−φ2)/2
    let (phi1, phi2) = if v10.norm() < TOL.euler_degenerate {
        (-2.0 * v00.arg(), 0.0)
    } else if v00.norm() < TOL.euler_degenerate {
        (2.0 * (v10.arg() + std::f64::consts::FRAC_PI_2), 0.0)
    } else {
        let sum = -2.0 * v00.arg();
        let diff = 2.0 * (v10.arg() + std::f64::consts::FRAC_PI_2);
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    Ok(EulerAngles {
        alpha,
        phi1,
        theta,
        phi2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::native_gates::{x_matrix, z_matrix};
    use crate::qstate::{
        hadamard, haar_special_unitary, haar_unitary, pauli_x, pauli_y, pauli_z, phase_distance,
    };
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Independent reconstruction by explicit 2×2 products.
    fn rebuild(a: &EulerAngles) -> DMatrix<C64> {
        let z1 = z_matrix(a.phi1).into_matrix();
        let x = x_matrix(a.theta).into_matrix();
        let z2 = z_matrix(a.phi2).into_matrix();
        z1 * x * z2 * C64::from_polar(1.0, a.alpha)
    }

    fn max_err(u: &UnitaryMatrix, a: &EulerAngles) -> f64 {
        let r = rebuild(a);
        u.matrix()
            .iter()
            .zip(r.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_is_all_zero() {
        let a = euler_zxz(&UnitaryMatrix::identity(2)).unwrap();
        assert_eq!(
            a,
            EulerAngles {
                alpha: 0.0,
                phi1: 0.0,
                theta: 0.0,
                phi2: 0.0
            }
        );
    }

    #[test]
    fn hadamard_reconstructs() {
        let h = hadamard();
        let a = euler_zxz(&h).unwrap();
        assert!(max_err(&h, &a) < 1e-12);
        let projective = z_matrix(a.phi1)
            .mul(&x_matrix(a.theta))
            .unwrap()
            .mul(&z_matrix(a.phi2))
            .unwrap();
        assert!(phase_distance(&projective, &h).unwrap() < 1e-12);
        // The textbook triple also works.
        let known = EulerAngles {
            alpha: FRAC_PI_2,
            phi1: FRAC_PI_2,
            theta: FRAC_PI_2,
            phi2: FRAC_PI_2,
        };
        assert!(max_err(&h, &known) < 1e-12);
    }

    #[test]
    fn degenerate_angles_are_canonical() {
        for u in [pauli_x(), pauli_y(), pauli_z(), z_matrix(0.7), x_matrix(PI)] {
            let a = euler_zxz(&u).unwrap();
            assert!(max_err(&u, &a) < 1e-12, "{a:?}");
            assert!((0.0..=PI).contains(&a.theta));
            if a.theta < 1e-9 || (PI - a.theta) < 1e-9 {
                assert_eq!(a.phi2, 0.0);
            }
        }
    }

    #[test]
    fn random_special_unitaries_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let worst = (0..1000)
            .map(|_| {
                let u = haar_special_unitary(2, &mut rng);
                let a = euler_zxz(&u).unwrap();
                assert!((0.0..=PI).contains(&a.theta));
                max_err(&u, &a)
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn random_unitaries_with_phase_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = haar_unitary(2, &mut rng);
            assert!(max_err(&u, &euler_zxz(&u).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(euler_zxz(&UnitaryMatrix::identity(4)).is_err());
    }
}
