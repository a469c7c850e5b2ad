use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Base field tag of a matrix family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Real,
    Complex,
}

/// Matrix entry type shared by the two realized algebra families: `f64` for
/// the split real family, `Complex64` for the complexified compact family.
///
/// Everything downstream (root decompositions, flag transport, flows) is
/// written once against this trait; the Cartan involution is `-adjoint` in
/// both cases.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    const FIELD: ScalarField;
    /// Real degrees of freedom per entry (1 or 2), used when flattening
    /// matrix states into real ODE coordinates.
    const DOF: usize;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn write_reals(self, out: &mut Vec<f64>);
    fn read_reals(buf: &[f64]) -> Self;
}

impl Scalar for f64 {
    const FIELD: ScalarField = ScalarField::Real;
    const DOF: usize = 1;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn write_reals(self, out: &mut Vec<f64>) {
        out.push(self);
    }

    fn read_reals(buf: &[f64]) -> Self {
        buf[0]
    }
}

impl Scalar for Complex64 {
    const FIELD: ScalarField = ScalarField::Complex;
    const DOF: usize = 2;

    // Unit-variance complex Gaussian.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn write_reals(self, out: &mut Vec<f64>) {
        out.push(self.re);
        out.push(self.im);
    }

    fn read_reals(buf: &[f64]) -> Self {
        Complex64::new(buf[0], buf[1])
    }
}

/// Flatten a matrix into real ODE coordinates (column-major, `DOF` reals per
/// entry).
pub fn flatten<S: Scalar>(m: &DMatrix<S>) -> DVector<f64> {
    let mut out = Vec::with_capacity(m.len() * S::DOF);
    for entry in m.iter() {
        entry.write_reals(&mut out);
    }
    DVector::from_vec(out)
}

/// Inverse of [`flatten`] for an `nrows x ncols` matrix.
pub fn unflatten<S: Scalar>(v: &DVector<f64>, nrows: usize, ncols: usize) -> DMatrix<S> {
    assert_eq!(v.len(), nrows * ncols * S::DOF, "flattened length mismatch");
    let buf = v.as_slice();
    DMatrix::from_fn(nrows, ncols, |r, c| {
        let k = (c * nrows + r) * S::DOF;
        S::read_reals(&buf[k..k + S::DOF])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_roundtrip_real() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let v = flatten(&m);
        assert_eq!(v.len(), 6);
        let back: DMatrix<f64> = unflatten(&v, 2, 3);
        assert_eq!(back, m);
    }

    #[test]
    fn flatten_roundtrip_complex() {
        let m = DMatrix::from_fn(3, 2, |r, c| Complex64::new(r as f64, c as f64 - 1.5));
        let v = flatten(&m);
        assert_eq!(v.len(), 12);
        let back: DMatrix<Complex64> = unflatten(&v, 3, 2);
        assert_eq!(back, m);
    }
}
