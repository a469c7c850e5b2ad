use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Matrix exponential.
///
/// Backed by the scaling-and-squaring Padé evaluation in `nalgebra`, which
/// holds relative error at the 1e-12 contract for `||A|| <= 10` (the
/// contract is pinned by the tests below against a spectral-route oracle).
pub fn expm<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    assert!(a.is_square(), "expm expects a square matrix");
    assert!(
        a.nrows() >= 1 && a.nrows() <= super::MAX_DIM,
        "expm dimension outside supported range"
    );
    a.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigh;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!((expm(&z) - DMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::dvector![0.3, -1.7, 2.5]);
        let e = expm(&a);
        for (j, &v) in [0.3_f64, -1.7, 2.5].iter().enumerate() {
            assert!((e[(j, j)] - v.exp()).abs() < 1e-14 * v.exp());
        }
    }

    #[test]
    fn expm_nilpotent_series_terminates() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((expm(&a) - want).norm() < 1e-15);
    }

    #[test]
    fn expm_inverse_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let mut a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0_f64));
            a *= 5.0 / a.norm().max(1e-300);
            let prod = expm(&a) * expm(&(-&a));
            assert!((prod - DMatrix::<f64>::identity(5, 5)).norm() < 1e-10);
        }
    }

    #[test]
    fn expm_one_parameter_subgroup_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..8 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.5..0.5_f64));
            let s: f64 = rng.random_range(-2.0..2.0);
            let t: f64 = rng.random_range(-2.0..2.0);
            let lhs = expm(&(&a * (s + t)));
            let rhs = expm(&(&a * s)) * expm(&(&a * t));
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    // Spectral-route oracle for normal input: exp(A) = U diag(exp(lambda)) U^H.
    #[test]
    fn expm_matches_spectral_route_on_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..6 {
            let b = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0_f64));
            let mut a = (&b + b.transpose()) * 0.5;
            a *= 10.0 / a.norm().max(1e-300);
            let sf = eigh(&a).unwrap();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                5,
                sf.eigenvalues.iter().map(|&v| v.exp()),
            ));
            let oracle = &sf.frame * d * sf.frame.transpose();
            let rel = (expm(&a) - &oracle).norm() / oracle.norm();
            assert!(rel < 1e-12, "relative error {rel:.3e}");
        }
    }

    #[test]
    fn expm_skew_hermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let b = DMatrix::from_fn(3, 3, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let a = (&b - b.adjoint()) * Complex64::new(0.5, 0.0);
        let u = expm(&a);
        let id = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0, 0.0));
        assert!((u.adjoint() * &u - id).norm() < 1e-13);
    }
}
