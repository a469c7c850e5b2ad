//! Dense small-matrix kernels with explicit accuracy contracts.
//!
//! Everything here works for both scalar fields through [`Scalar`]; the
//! self-adjoint eigensolver and the QR factorization are backed by
//! `nalgebra`, wrapped so that eigenvalue order (ascending) and the QR
//! uniqueness convention (positive real diagonal of the triangular factor)
//! are pinned once for the whole crate.

mod expm;
mod ode;

pub use expm::expm;
pub use ode::{ode_integrate, ode_integrate_projected, OdeOptions, OdeSolution, ProjectionHook};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Hard cap on matrix dimension; the kernels are desk-scale dense routines.
pub const MAX_DIM: usize = 64;

/// Eigendecomposition of a self-adjoint matrix with eigenvalues sorted
/// ascending and the j-th frame column an eigenvector for `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame<S: Scalar> {
    /// Ascending real eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal (orthogonal/unitary) matrix of eigenvectors.
    pub frame: DMatrix<S>,
}

impl<S: Scalar> SpectralFrame<S> {
    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// `frame * diag(eigenvalues) * frame^H`.
    pub fn reconstruct(&self) -> DMatrix<S> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&v| S::from_real(v)),
        ));
        &self.frame * d * self.frame.adjoint()
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Validation(format!(
            "matrix dimension {n} outside supported range 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

/// Eigendecomposition of a real symmetric / complex Hermitian matrix.
///
/// The input must be self-adjoint within `1e-12 * ||A||`. Eigenvalues come
/// back ascending; each column's phase is fixed by making its largest-modulus
/// entry positive real, which keeps frames reproducible run to run.
pub fn eigh<S: Scalar>(a: &DMatrix<S>) -> Result<SpectralFrame<S>> {
    if !a.is_square() {
        return Err(Error::Validation(format!(
            "eigh expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_dim(a.nrows())?;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let asym = (a - a.adjoint()).norm();
    if asym > 1e-12 * scale {
        return Err(Error::Precondition(format!(
            "matrix is not self-adjoint: ||A - A^H|| = {asym:.3e} > 1e-12 * ||A|| = {:.3e}",
            1e-12 * scale
        )));
    }

    let se = nalgebra::SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut frame = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        frame.set_column(dst, &se.eigenvectors.column(src));
    }
    canonicalize_columns(&mut frame);
    Ok(SpectralFrame { eigenvalues, frame })
}

// Fix each column's overall phase: the entry of largest modulus becomes
// positive real. Ties in modulus are broken by the first such entry.
fn canonicalize_columns<S: Scalar>(m: &mut DMatrix<S>) {
    for j in 0..m.ncols() {
        let mut best = 0;
        let mut best_mod = 0.0;
        for r in 0..m.nrows() {
            let md = m[(r, j)].modulus();
            if md > best_mod {
                best_mod = md;
                best = r;
            }
        }
        if best_mod > 0.0 {
            let phase = m[(best, j)].unscale(best_mod);
            let fix = phase.conjugate();
            for r in 0..m.nrows() {
                m[(r, j)] *= fix;
            }
        }
    }
}

/// QR-orthonormalize the columns of a full-column-rank matrix.
///
/// Returns the unique `Q` with `Q^H Q = I`, the same nested leading-column
/// spans as the input, and a triangular factor with positive real diagonal.
/// A column that is numerically dependent on its predecessors (relative to
/// its own norm) yields [`Error::Degenerate`] carrying that column index.
pub fn qr_orthonormalize<S: Scalar>(b: &DMatrix<S>) -> Result<DMatrix<S>> {
    let (nrows, ncols) = b.shape();
    check_dim(nrows)?;
    if ncols == 0 || ncols > nrows {
        return Err(Error::Validation(format!(
            "cannot orthonormalize {nrows}x{ncols}: need 1 <= ncols <= nrows"
        )));
    }
    let col_norms: Vec<f64> = (0..ncols).map(|j| b.column(j).norm()).collect();

    let qr = b.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..ncols {
        let d = r[(j, j)];
        let m = d.modulus();
        if m <= 1e-12 * col_norms[j].max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate { column: j });
        }
        let phase = d.unscale(m);
        for row in 0..nrows {
            q[(row, j)] *= phase;
        }
    }
    Ok(q)
}
