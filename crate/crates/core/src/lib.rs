//! Gradient flows of height functions on flag manifolds, realized and
//! verified numerically for concrete matrix Lie groups.
//!
//! The crate builds isotropy orbits of `sl(n, R)` (sets of symmetric
//! traceless matrices with fixed spectrum) and adjoint orbits of `su(n)`,
//! computes the root-space decomposition attached to an orbit point, and
//! equips the orbit with the homogeneous metric that weights each root
//! component by the reciprocal root value. Under that metric the gradient
//! flow of any height function `f(x) = <q, x>` is the one-parameter
//! subgroup orbit `x(t) = exp(-tq).x(0)` of the extended noncompact group
//! action; on adjoint orbits the same metric is the Kähler metric and the
//! flow is `exp(itq).x(0)`. Every identity in that chain is checked at
//! machine precision by comparing closed-form flag transport against
//! adaptive ODE integration of the gradient field.
//!
//! Module map:
//! - [`numerics`]: dense kernels (eigh, QR, expm, embedded Runge-Kutta).
//! - [`lie`]: algebra families, Cartan involution, invariant inner product.
//! - [`roots`]: eigenvalue blocks, positive roots, triangular split.
//! - [`orbit`]: orbit points, flag transport, group and infinitesimal
//!   actions.
//! - [`flow`]: homogeneous metric, gradients, closed-form vs integrated
//!   flows.
//! - [`kahler`]: complex structure, Kähler form/metric, compact flows.
//! - [`analysis`]: critical sets, limit classification, extrinsic-symmetric
//!   detector.
//! - [`instances`]: seeded generation of well-conditioned test instances.

pub mod analysis;
pub mod check;
pub mod error;
pub mod flow;
pub mod instances;
pub mod kahler;
pub mod lie;
pub mod numerics;
pub mod orbit;
pub mod roots;
pub mod scalar;

pub use check::CheckItem;
pub use error::{Error, Result};
pub use flow::{FlowReport, HeightFunction, MetricS};
pub use lie::{AlgebraContext, AmbientElement, Family};
pub use orbit::{FlagFrame, OrbitPoint};
pub use roots::{Block, PositiveRoot, RootDecomposition};
pub use scalar::{Scalar, ScalarField};
