/// Errors surfaced by the orbit and flow machinery.
///
/// Verification failures are *not* errors: flow comparisons report verdicts.
/// These variants cover contract violations and numerical breakdowns.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An operation precondition was violated (non-symmetric input,
    /// non-orthogonal frame, non-tangent vector, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Elements from different algebra contexts were mixed.
    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    /// Rank-deficient input to orthonormalization; `column` is the first
    /// column that collapsed into the span of its predecessors.
    #[error("rank-deficient input: column {column} is numerically dependent on earlier columns")]
    Degenerate { column: usize },

    /// An eigenvalue gap fell inside the exclusion zone around the grouping
    /// tolerance, so same-block vs distinct-block cannot be decided safely.
    #[error("eigenvalue grouping ambiguous: gap {gap:.3e} within a decade of tolerance {tol:.3e}")]
    GroupingAmbiguous { gap: f64, tol: f64 },

    /// The adaptive integrator drove the step size below the resolvable
    /// limit (stiffness or a finite-time singularity).
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}, |state| = {state_norm:.3e})")]
    StepSizeUnderflow { t: f64, h: f64, state_norm: f64 },

    /// A height matrix needed distinct eigenvalues but has a gap below the
    /// genericity threshold.
    #[error("height matrix not generic: eigenvalue gap {gap:.3e} below threshold {threshold:.3e}")]
    NonGeneric { gap: f64, threshold: f64 },

    /// Malformed input (dimension, spectrum, tolerance range, ...).
    #[error("invalid input: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
