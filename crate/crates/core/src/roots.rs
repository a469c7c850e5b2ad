//! Root-space decomposition of the ambient algebra relative to a fixed
//! orbit point.
//!
//! In the eigenframe of `x` the algebra splits into block sectors: the
//! `(i, j)` sector (rows in eigenvalue block `i`, columns in block `j`) is
//! the common eigenspace of `ad(x)` with eigenvalue `mu_i - mu_j`. Sectors
//! with positive eigenvalue form `n_+`, the block diagonal is the
//! centralizer direction `c`, the rest is `n_-`.

use crate::error::{Error, Result};
use crate::lie::{AlgebraContext, AmbientElement};
use crate::numerics::SpectralFrame;
use crate::orbit::OrbitPoint;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use std::ops::Range;

/// Relative eigenvalue-grouping tolerance (times the spectral spread).
pub const GROUPING_REL_TOL: f64 = 1e-8;

/// One eigenvalue block of an orbit point: value, multiplicity and the
/// columns it occupies in the ascending spectral frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub value: f64,
    pub multiplicity: usize,
    pub col_start: usize,
}

impl Block {
    pub fn cols(&self) -> Range<usize> {
        self.col_start..self.col_start + self.multiplicity
    }
}

/// A positive root of the decomposition at `x`, identified by the ordered
/// block pair realizing it and its value `alpha(x) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveRoot {
    /// Block index with the larger eigenvalue.
    pub upper: usize,
    /// Block index with the smaller eigenvalue.
    pub lower: usize,
    /// `value(upper) - value(lower) > 0`.
    pub alpha: f64,
}

/// Group ascending eigenvalues into blocks. Gaps below a tenth of the
/// tolerance merge; gaps above ten times the tolerance separate; anything in
/// between is ambiguous and refuses to group silently.
pub fn group_blocks(eigs_ascending: &[f64]) -> Result<Vec<Block>> {
    let n = eigs_ascending.len();
    if n == 0 {
        return Err(Error::Validation("empty spectrum".into()));
    }
    let spread = eigs_ascending[n - 1] - eigs_ascending[0];
    let tol = GROUPING_REL_TOL * spread;
    let mut blocks: Vec<Block> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        let split = if k == n {
            true
        } else {
            let gap = eigs_ascending[k] - eigs_ascending[k - 1];
            if gap <= tol / 10.0 {
                false
            } else if gap < tol * 10.0 {
                return Err(Error::GroupingAmbiguous { gap, tol });
            } else {
                true
            }
        };
        if split {
            let members = &eigs_ascending[start..k];
            let value = members.iter().sum::<f64>() / members.len() as f64;
            blocks.push(Block {
                value,
                multiplicity: k - start,
                col_start: start,
            });
            start = k;
        }
    }
    Ok(blocks)
}

fn positive_roots_of(blocks: &[Block]) -> Vec<PositiveRoot> {
    let mut out = Vec::new();
    // blocks ascend, so i > j means value_i > value_j
    for i in 1..blocks.len() {
        for j in 0..i {
            out.push(PositiveRoot {
                upper: i,
                lower: j,
                alpha: blocks[i].value - blocks[j].value,
            });
        }
    }
    out
}

/// The root decomposition attached to an orbit point: its spectral frame,
/// eigenvalue blocks and positive roots.
#[derive(Debug, Clone)]
pub struct RootDecomposition<S: Scalar> {
    ctx: AlgebraContext,
    frame: SpectralFrame<S>,
    blocks: Vec<Block>,
    positive_roots: Vec<PositiveRoot>,
    block_of_col: Vec<usize>,
}

impl<S: Scalar> RootDecomposition<S> {
    pub(crate) fn from_frame_blocks(
        ctx: AlgebraContext,
        frame: SpectralFrame<S>,
        blocks: Vec<Block>,
    ) -> Self {
        let mut block_of_col = vec![0; frame.dim()];
        for (bi, b) in blocks.iter().enumerate() {
            for c in b.cols() {
                block_of_col[c] = bi;
            }
        }
        let positive_roots = positive_roots_of(&blocks);
        RootDecomposition {
            ctx,
            frame,
            blocks,
            positive_roots,
            block_of_col,
        }
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn frame(&self) -> &DMatrix<S> {
        &self.frame.frame
    }

    pub fn spectral_frame(&self) -> &SpectralFrame<S> {
        &self.frame
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn positive_roots(&self) -> &[PositiveRoot] {
        &self.positive_roots
    }

    pub fn block_of_col(&self, col: usize) -> usize {
        self.block_of_col[col]
    }

    /// Spectral diameter `max value - min value` (0 for a single block).
    pub fn spectral_diameter(&self) -> f64 {
        self.blocks.last().unwrap().value - self.blocks[0].value
    }

    /// Conjugate into the frame basis: `U^H m U`.
    pub fn to_frame_basis(&self, m: &DMatrix<S>) -> DMatrix<S> {
        self.frame.frame.adjoint() * m * &self.frame.frame
    }

    /// Conjugate out of the frame basis: `U m U^H`.
    pub fn from_frame_basis(&self, m: &DMatrix<S>) -> DMatrix<S> {
        &self.frame.frame * m * self.frame.frame.adjoint()
    }

    /// Entrywise sector scaling in the frame basis: entry `(r, c)` is
    /// multiplied by `f(block(r), block(c))`.
    pub fn scale_sectors(
        &self,
        m_frame: &DMatrix<S>,
        f: impl Fn(usize, usize) -> f64,
    ) -> DMatrix<S> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| {
            m_frame[(r, c)] * S::from_real(f(self.block_of_col[r], self.block_of_col[c]))
        })
    }

    /// Zero all entries whose sector fails the predicate (frame basis).
    pub fn restrict_sectors(
        &self,
        m_frame: &DMatrix<S>,
        keep: impl Fn(usize, usize) -> bool,
    ) -> DMatrix<S> {
        self.scale_sectors(m_frame, |i, j| if keep(i, j) { 1.0 } else { 0.0 })
    }

    /// Norm of the block-diagonal part of a frame-basis matrix.
    pub fn diag_sector_norm(&self, m_frame: &DMatrix<S>) -> f64 {
        self.restrict_sectors(m_frame, |i, j| i == j).norm()
    }

    /// Base-field dimensions of `(n_-, c, n_+)`, with the trace removed
    /// from the centralizer; they sum to `n^2 - 1`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let mut off = 0;
        for r in &self.positive_roots {
            off += self.blocks[r.upper].multiplicity * self.blocks[r.lower].multiplicity;
        }
        let diag: usize = self
            .blocks
            .iter()
            .map(|b| b.multiplicity * b.multiplicity)
            .sum();
        (off, diag - 1, off)
    }
}

/// The root decomposition of the ambient algebra relative to `x` (a clone
/// of the snapshot cached on the orbit point).
pub fn decompose<S: Scalar>(x: &OrbitPoint<S>) -> RootDecomposition<S> {
    x.decomposition().clone()
}

/// Unique splitting `a = a_minus + a_zero + a_plus` along the sign of the
/// root value: `a_plus` collects sectors whose row block has the larger
/// eigenvalue, `a_zero` the block diagonal, `a_minus` the rest.
pub fn triangular_split<S: Scalar>(
    a: &AmbientElement<S>,
    dec: &RootDecomposition<S>,
) -> Result<(AmbientElement<S>, AmbientElement<S>, AmbientElement<S>)> {
    if a.ctx() != dec.ctx() {
        return Err(Error::ContextMismatch(
            "element and decomposition come from different contexts".into(),
        ));
    }
    let at = dec.to_frame_basis(a.mat());
    let blocks = dec.blocks();
    let plus = dec.restrict_sectors(&at, |i, j| blocks[i].value > blocks[j].value);
    let zero = dec.restrict_sectors(&at, |i, j| i == j);
    let minus = dec.restrict_sectors(&at, |i, j| blocks[i].value < blocks[j].value);
    let ctx = a.ctx();
    // the parts are traceless in exact arithmetic; strip the rounding trace
    Ok((
        AmbientElement::traceless(ctx, dec.from_frame_basis(&minus))?,
        AmbientElement::traceless(ctx, dec.from_frame_basis(&zero))?,
        AmbientElement::traceless(ctx, dec.from_frame_basis(&plus))?,
    ))
}

/// Component of `a` in the real root space of one positive root: both the
/// `(upper, lower)` and `(lower, upper)` sectors are retained, everything
/// else is zeroed.
pub fn root_component<S: Scalar>(
    a: &AmbientElement<S>,
    root: PositiveRoot,
    dec: &RootDecomposition<S>,
) -> Result<AmbientElement<S>> {
    if a.ctx() != dec.ctx() {
        return Err(Error::ContextMismatch(
            "element and decomposition come from different contexts".into(),
        ));
    }
    let at = dec.to_frame_basis(a.mat());
    let kept = dec.restrict_sectors(&at, |i, j| {
        (i == root.upper && j == root.lower) || (i == root.lower && j == root.upper)
    });
    AmbientElement::traceless(a.ctx(), dec.from_frame_basis(&kept))
}
