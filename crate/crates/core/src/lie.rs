//! Concrete matrix Lie algebra families with Cartan involution, bracket and
//! invariant inner product.
//!
//! Two families are registered: traceless real matrices with maximal compact
//! `SO(n)` (`Family::SlReal`, scalars `f64`), and traceless complex matrices
//! with maximal compact `SU(n)` (`Family::SuComplexified`, scalars
//! `Complex64`). In both the involution is `a -> -a^H`, its fixed set is the
//! skew-adjoint subalgebra `k` and its (-1)-eigenspace the self-adjoint
//! subspace `p`.

use crate::error::{Error, Result};
use crate::numerics::{check_dim, MAX_DIM};
use crate::scalar::{Scalar, ScalarField};
use nalgebra::DMatrix;

/// Registered matrix algebra families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Traceless real `n x n` matrices; maximal compact `SO(n)`.
    SlReal,
    /// Traceless complex `n x n` matrices; maximal compact `SU(n)`.
    SuComplexified,
}

impl Family {
    pub fn scalar_field(self) -> ScalarField {
        match self {
            Family::SlReal => ScalarField::Real,
            Family::SuComplexified => ScalarField::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::SlReal => "sl_real",
            Family::SuComplexified => "su_complexified",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sl_real" => Ok(Family::SlReal),
            "su_complexified" => Ok(Family::SuComplexified),
            other => Err(Error::Validation(format!(
                "unknown algebra family {other:?} (expected sl_real or su_complexified)"
            ))),
        }
    }
}

/// A concrete algebra family instance: family, dimension, and the scale of
/// the invariant trace form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraContext {
    pub family: Family,
    pub n: usize,
    /// Scale of the invariant form; the inner product is
    /// `b_scale * Re tr(a b^H)`. Default 1 (plain trace form).
    pub b_scale: f64,
}

impl AlgebraContext {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Validation(format!(
                "algebra dimension n = {n} outside supported range 2..={MAX_DIM}"
            )));
        }
        Ok(AlgebraContext {
            family,
            n,
            b_scale: 1.0,
        })
    }

    pub fn sl_real(n: usize) -> Result<Self> {
        Self::new(Family::SlReal, n)
    }

    pub fn su_complexified(n: usize) -> Result<Self> {
        Self::new(Family::SuComplexified, n)
    }

    pub fn with_b_scale(mut self, b_scale: f64) -> Result<Self> {
        if !(b_scale.is_finite() && b_scale > 0.0) {
            return Err(Error::Validation(format!(
                "b_scale must be positive and finite, got {b_scale}"
            )));
        }
        self.b_scale = b_scale;
        Ok(self)
    }

    pub(crate) fn check_scalar<S: Scalar>(&self) -> Result<()> {
        if self.family.scalar_field() != S::FIELD {
            return Err(Error::ContextMismatch(format!(
                "family {} requires {:?} scalars",
                self.family.name(),
                self.family.scalar_field()
            )));
        }
        Ok(())
    }

    fn check_same(&self, other: &AlgebraContext) -> Result<()> {
        if self != other {
            return Err(Error::ContextMismatch(format!(
                "{}(n={}, b={}) vs {}(n={}, b={})",
                self.family.name(),
                self.n,
                self.b_scale,
                other.family.name(),
                other.n,
                other.b_scale
            )));
        }
        Ok(())
    }
}

/// A traceless matrix belonging to an algebra family.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientElement<S: Scalar> {
    ctx: AlgebraContext,
    mat: DMatrix<S>,
}

impl<S: Scalar> AmbientElement<S> {
    /// Wrap a matrix after validating shape, scalar field and tracelessness
    /// (`|tr| <= 1e-12 * ||a||`).
    pub fn new(ctx: AlgebraContext, mat: DMatrix<S>) -> Result<Self> {
        ctx.check_scalar::<S>()?;
        check_dim(ctx.n)?;
        if mat.nrows() != ctx.n || mat.ncols() != ctx.n {
            return Err(Error::Validation(format!(
                "element shape {}x{} does not match context n = {}",
                mat.nrows(),
                mat.ncols(),
                ctx.n
            )));
        }
        let tr = mat.trace().modulus();
        if tr > 1e-12 * mat.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Validation(format!(
                "element is not traceless: |tr| = {tr:.3e}"
            )));
        }
        Ok(AmbientElement { ctx, mat })
    }

    /// Wrap an arbitrary matrix after removing its trace part.
    pub fn traceless(ctx: AlgebraContext, mut mat: DMatrix<S>) -> Result<Self> {
        let n = mat.nrows();
        let shift = mat.trace().unscale(n as f64);
        for j in 0..n.min(mat.ncols()) {
            mat[(j, j)] -= shift;
        }
        Self::new(ctx, mat)
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    pub fn mat(&self) -> &DMatrix<S> {
        &self.mat
    }

    pub fn into_mat(self) -> DMatrix<S> {
        self.mat
    }

    /// Cartan involution `a -> -a^H`; fixes `k`, negates `p`.
    pub fn sigma(&self) -> Self {
        AmbientElement {
            ctx: self.ctx,
            mat: -self.mat.adjoint(),
        }
    }

    /// Commutator `[a, b] = ab - ba`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let mat = &self.mat * &other.mat - &other.mat * &self.mat;
        Ok(AmbientElement { ctx: self.ctx, mat })
    }

    /// Component in `k` (skew-adjoint part), `(a + sigma(a)) / 2`.
    pub fn project_k(&self) -> Self {
        let mat = (&self.mat - self.mat.adjoint()).scale(0.5);
        AmbientElement { ctx: self.ctx, mat }
    }

    /// Component in `p` (self-adjoint part), `(a - sigma(a)) / 2`.
    pub fn project_p(&self) -> Self {
        let mat = (&self.mat + self.mat.adjoint()).scale(0.5);
        AmbientElement { ctx: self.ctx, mat }
    }

    /// Positive definite invariant inner product
    /// `b_scale * Re tr(a b^H)`; equals the invariant form on `p` and its
    /// negative on `k`, making the two orthogonal.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.ctx.check_same(&other.ctx)?;
        let mut s = 0.0;
        for (x, y) in self.mat.iter().zip(other.mat.iter()) {
            s += (*x * y.conjugate()).real();
        }
        Ok(self.ctx.b_scale * s)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same context").sqrt()
    }

    pub fn is_in_k(&self, rel_tol: f64) -> bool {
        let scale = self.mat.norm().max(f64::MIN_POSITIVE);
        (self.project_p().mat.norm()) <= rel_tol * scale
    }

    pub fn is_in_p(&self, rel_tol: f64) -> bool {
        let scale = self.mat.norm().max(f64::MIN_POSITIVE);
        (self.project_k().mat.norm()) <= rel_tol * scale
    }

    pub fn scale(&self, c: f64) -> Self {
        AmbientElement {
            ctx: self.ctx,
            mat: self.mat.map(|x| x * S::from_real(c)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        Ok(AmbientElement {
            ctx: self.ctx,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        Ok(AmbientElement {
            ctx: self.ctx,
            mat: &self.mat - &other.mat,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sl2() -> AlgebraContext {
        AlgebraContext::sl_real(2).unwrap()
    }

    #[test]
    fn bracket_root_vector_of_sl2() {
        let ctx = sl2();
        let h = AmbientElement::new(ctx, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
            .unwrap();
        let e =
            AmbientElement::new(ctx, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        let br = h.bracket(&e).unwrap();
        assert!((br.mat() - e.mat().scale(2.0)).norm() < 1e-15);
    }

    #[test]
    fn bracket_antisymmetric_and_jacobi() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let b = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let c = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            assert!(a.bracket(&a).unwrap().mat().norm() < 1e-14);
            // Jacobi: [a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0
            let j = a
                .bracket(&b.bracket(&c).unwrap())
                .unwrap()
                .add(&b.bracket(&c.bracket(&a).unwrap()).unwrap())
                .unwrap()
                .add(&c.bracket(&a.bracket(&b).unwrap()).unwrap())
                .unwrap();
            assert!(j.mat().norm() < 1e-12);
        }
    }

    #[test]
    fn sigma_fixes_k_flips_p() {
        let ctx = AlgebraContext::sl_real(3).unwrap();
        let skew = AmbientElement::new(
            ctx,
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0]),
        )
        .unwrap();
        assert!((skew.sigma().mat() - skew.mat()).norm() < 1e-15);

        let sym = AmbientElement::new(
            ctx,
            DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, -1.0, 0.2, 0.0, 0.2, 0.0]),
        )
        .unwrap();
        assert!((sym.sigma().mat() + sym.mat()).norm() < 1e-15);
    }

    #[test]
    fn sigma_is_involution_and_automorphism() {
        let ctx = AlgebraContext::su_complexified(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let a = instances::random_ambient::<Complex64, _>(ctx, &mut rng).unwrap();
            let b = instances::random_ambient::<Complex64, _>(ctx, &mut rng).unwrap();
            assert!((a.sigma().sigma().mat() - a.mat()).norm() < 1e-14);
            let lhs = a.bracket(&b).unwrap().sigma();
            let rhs = a.sigma().bracket(&b.sigma()).unwrap();
            assert!((lhs.mat() - rhs.mat()).norm() < 1e-12);
        }
    }

    #[test]
    fn projections_split_and_are_orthogonal() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..8 {
            let a = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let k = a.project_k();
            let p = a.project_p();
            let back = k.add(&p).unwrap();
            assert!((back.mat() - a.mat()).norm() < 1e-15 * a.mat().norm().max(1.0));
            assert!(k.inner(&p).unwrap().abs() < 1e-13);
            assert!(k.is_in_k(1e-14) && p.is_in_p(1e-14));
        }
    }

    #[test]
    fn inner_trace_values() {
        let ctx = sl2();
        let e12e21 =
            AmbientElement::new(ctx, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_relative_eq!(e12e21.inner(&e12e21).unwrap(), 2.0);
        let scaled_ctx = ctx.with_b_scale(3.5).unwrap();
        let e = AmbientElement::new(
            scaled_ctx,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap();
        assert_relative_eq!(e.inner(&e).unwrap(), 7.0);
    }

    #[test]
    fn inner_ad_invariance_on_k() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..8 {
            let c = instances::random_skew::<f64, _>(ctx, &mut rng).unwrap();
            let a = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let b = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let lhs = c.bracket(&a).unwrap().inner(&b).unwrap();
            let rhs = a.inner(&c.bracket(&b).unwrap()).unwrap();
            assert!((lhs + rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn ad_x_self_adjoint_for_x_in_p() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let x = instances::random_symmetric_traceless::<f64, _>(ctx, &mut rng).unwrap();
            let a = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let b = instances::random_ambient::<f64, _>(ctx, &mut rng).unwrap();
            let lhs = x.bracket(&a).unwrap().inner(&b).unwrap();
            let rhs = a.inner(&x.bracket(&b).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn bracket_closure_of_cartan_pieces() {
        let ctx = AlgebraContext::su_complexified(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..6 {
            let k1 = instances::random_skew::<Complex64, _>(ctx, &mut rng).unwrap();
            let k2 = instances::random_skew::<Complex64, _>(ctx, &mut rng).unwrap();
            let p1 = instances::random_symmetric_traceless::<Complex64, _>(ctx, &mut rng).unwrap();
            let p2 = instances::random_symmetric_traceless::<Complex64, _>(ctx, &mut rng).unwrap();
            // [k,k] in k, [k,p] in p, [p,p] in k
            assert!(k1.bracket(&k2).unwrap().project_p().mat().norm() < 1e-12);
            assert!(k1.bracket(&p1).unwrap().project_k().mat().norm() < 1e-12);
            assert!(p1.bracket(&p2).unwrap().project_p().mat().norm() < 1e-12);
        }
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = AmbientElement::new(sl2(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
            .unwrap();
        let ctx3 = AlgebraContext::sl_real(3).unwrap();
        let b = AmbientElement::new(ctx3, DMatrix::identity(3, 3) * 2.0 - DMatrix::identity(3, 3) * 2.0)
            .unwrap();
        assert!(matches!(a.bracket(&b), Err(Error::ContextMismatch(_))));
        assert!(matches!(a.inner(&b), Err(Error::ContextMismatch(_))));
    }

    #[test]
    fn wrong_scalar_field_rejected() {
        let ctx = AlgebraContext::su_complexified(2).unwrap();
        let real = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            AmbientElement::<f64>::new(ctx, real),
            Err(Error::ContextMismatch(_))
        ));
    }
}
