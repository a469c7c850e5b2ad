//! Critical sets of height functions, flow-limit classification (the
//! sorting behavior of the closed-form flow), and the extrinsic-symmetric
//! detector with its ambient-metric flow comparison.
//!
//! For a height matrix with distinct eigenvalues the critical points of
//! `f(x) = <q, x>` on the orbit are exactly the points commuting with `q`:
//! the spectrum of `x` distributed over the eigen-axes of `q` in every
//! distinct way, `n!/prod(m_i!)` of them. Generic flow trajectories converge
//! to the alignment pairing both spectra ascending (the rearrangement
//! maximizer of `f`).

use crate::error::{Error, Result};
use crate::flow::{
    ambient_gradient, closed_form_flow, compare_flows, s_gradient, sample_grid, FlowReport,
    GradientKind, HeightFunction,
};
use crate::lie::AlgebraContext;
use crate::numerics::{eigh, expm};
use crate::orbit::{k_act, OrbitPoint};
use crate::roots::Block;
use crate::scalar::{Scalar, ScalarField};
use nalgebra::DMatrix;

/// Minimum eigenvalue gap of a height matrix, relative to its spectral
/// diameter, below which critical-point enumeration refuses to run.
pub const GENERICITY_REL_GAP: f64 = 1e-6;

/// Largest critical set the enumerator will materialize.
const MAX_CRITICAL_POINTS: u128 = 100_000;

/// The enumerated critical set of a height function on an orbit.
#[derive(Debug, Clone)]
pub struct CriticalSet<S: Scalar> {
    pub points: Vec<OrbitPoint<S>>,
    pub f_values: Vec<f64>,
    /// Spectrum value assigned to each eigen-axis of the height matrix
    /// (axes in ascending height-eigenvalue order).
    pub assignments: Vec<Vec<f64>>,
    /// Largest homogeneous-gradient norm over the enumerated points.
    pub max_gradient_norm: f64,
}

impl<S: Scalar> CriticalSet<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the maximal height value.
    pub fn argmax_f(&self) -> usize {
        let mut best = 0;
        for (k, &f) in self.f_values.iter().enumerate() {
            if f > self.f_values[best] {
                best = k;
            }
        }
        best
    }
}

/// `n! / prod(m_i!)` computed without intermediate factorials; saturates at
/// `u128::MAX` on overflow.
pub fn multinomial_count(blocks: &[Block]) -> u128 {
    let mut count: u128 = 1;
    let mut placed: u128 = 0;
    for b in blocks {
        for k in 1..=b.multiplicity as u128 {
            placed += 1;
            count = match count.checked_mul(placed) {
                Some(c) => c / k,
                None => return u128::MAX,
            };
        }
    }
    count
}

// all distinct assignments of block indices to n axes, lexicographic
fn multiset_permutations(blocks: &[Block]) -> Vec<Vec<usize>> {
    let n: usize = blocks.iter().map(|b| b.multiplicity).sum();
    let mut remaining: Vec<usize> = blocks.iter().map(|b| b.multiplicity).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(
        remaining: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        n: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..remaining.len() {
            if remaining[b] > 0 {
                remaining[b] -= 1;
                cur.push(b);
                rec(remaining, cur, n, out);
                cur.pop();
                remaining[b] += 1;
            }
        }
    }
    rec(&mut remaining, &mut cur, n, &mut out);
    out
}

/// Enumerate the critical set of `h` on the orbit with the given spectrum:
/// every distinct assignment of the eigenvalue blocks to the eigen-axes of
/// the height matrix. Requires a generic (distinct-eigenvalue) height
/// matrix.
pub fn critical_points<S: Scalar>(
    h: &HeightFunction<S>,
    blocks: &[Block],
    ctx: AlgebraContext,
) -> Result<CriticalSet<S>> {
    if h.ctx() != ctx {
        return Err(Error::ContextMismatch(
            "height function belongs to a different context".into(),
        ));
    }
    let qsf = eigh(h.q().mat())?;
    let n = ctx.n;
    let diam = (qsf.eigenvalues[n - 1] - qsf.eigenvalues[0]).max(f64::MIN_POSITIVE);
    let threshold = GENERICITY_REL_GAP * diam;
    for w in qsf.eigenvalues.windows(2) {
        let gap = w[1] - w[0];
        if gap < threshold {
            return Err(Error::NonGeneric { gap, threshold });
        }
    }
    let count = multinomial_count(blocks);
    if count > MAX_CRITICAL_POINTS {
        return Err(Error::Validation(format!(
            "critical set has {count} points, above the {MAX_CRITICAL_POINTS} cap"
        )));
    }

    let mut ascending = vec![0.0; n];
    for b in blocks {
        for c in b.cols() {
            ascending[c] = b.value;
        }
    }

    let mut points = Vec::new();
    let mut f_values = Vec::new();
    let mut assignments = Vec::new();
    let mut max_grad = 0.0_f64;
    for assign in multiset_permutations(blocks) {
        let values: Vec<f64> = assign.iter().map(|&b| blocks[b].value).collect();
        // reorder the height frame columns so assigned values ascend
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut frame = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            frame.set_column(dst, &qsf.frame.column(src));
        }
        let point = OrbitPoint::from_spectrum(ctx, &ascending, frame)?;
        let f = h.value(&point);
        max_grad = max_grad.max(s_gradient(h, &point)?.norm());
        points.push(point);
        f_values.push(f);
        assignments.push(values);
    }
    Ok(CriticalSet {
        points,
        f_values,
        assignments,
        max_gradient_norm: max_grad,
    })
}

/// Outcome of following the closed-form flow to a long horizon and matching
/// the end state against the critical set.
#[derive(Debug, Clone)]
pub struct LimitReport<S: Scalar> {
    pub critical: CriticalSet<S>,
    /// Index of the critical point within `100 * tol` of the end state, if
    /// any (`None` is a non-convergence report, not an error).
    pub nearest: Option<usize>,
    /// Frobenius distance from the end state to the nearest critical point.
    pub distance: f64,
    pub f_trajectory: Vec<f64>,
    pub t_max: f64,
}

/// Run the closed-form flow to `t_max` and classify its limit.
pub fn classify_limit<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    t_max: f64,
    tol: f64,
) -> Result<LimitReport<S>> {
    let qsf = eigh(h.q().mat())?;
    let opnorm = qsf
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    if t_max * opnorm > 30.0 {
        return Err(Error::Validation(format!(
            "t_max * ||q|| = {:.2} exceeds the conditioning budget of 30",
            t_max * opnorm
        )));
    }
    let samples = 21.max(t_max.ceil() as usize + 1);
    let times = sample_grid(t_max, samples)?;
    let flow = closed_form_flow(h, x0, &times)?;
    let f_trajectory: Vec<f64> = flow.iter().map(|p| h.value(p)).collect();
    let end = flow.last().unwrap();

    let critical = critical_points(h, x0.blocks(), x0.ctx())?;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, p) in critical.points.iter().enumerate() {
        let d = (end.mat() - p.mat()).norm();
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    let nearest = (best_d < 100.0 * tol).then_some(best);
    Ok(LimitReport {
        critical,
        nearest,
        distance: best_d,
        f_trajectory,
        t_max,
    })
}

/// Report of the extrinsic-symmetric test: all root values within `tol` of
/// `{-1, 0, 1}`.
#[derive(Debug, Clone)]
pub struct ExtrinsicReport {
    pub is_extrinsic: bool,
    /// Positive root values `alpha(x)`.
    pub root_values: Vec<f64>,
    /// Largest distance of a root value from the set `{-1, 0, 1}`.
    pub max_deviation: f64,
}

/// Test whether the orbit of `x` is extrinsic symmetric: every eigenvalue
/// difference lies within `tol` of `{-1, 0, 1}`.
pub fn is_extrinsic_symmetric<S: Scalar>(x: &OrbitPoint<S>, tol: f64) -> ExtrinsicReport {
    let mut root_values = Vec::new();
    let mut max_dev = 0.0_f64;
    for r in x.decomposition().positive_roots() {
        root_values.push(r.alpha);
        let d = (r.alpha - 1.0).abs().min(r.alpha.abs());
        max_dev = max_dev.max(d);
    }
    ExtrinsicReport {
        is_extrinsic: max_dev <= tol,
        root_values,
        max_deviation: max_dev,
    }
}

/// Flow comparison for extrinsic-symmetric orbits plus the pointwise
/// identity between the two gradients.
#[derive(Debug, Clone)]
pub struct AmbientFlowReport<S: Scalar> {
    pub flow: FlowReport<S>,
    /// Largest pointwise `||s_gradient - tangent_project(q)||` along the
    /// closed-form trajectory.
    pub pointwise_identity_max: f64,
    pub identity_threshold: f64,
    pub pass: bool,
}

/// On an extrinsic-symmetric orbit the homogeneous metric coincides with
/// the ambient one (all root values are 1), so the closed-form flow must
/// also match the integrated *ambient*-metric gradient flow, and the two
/// gradient fields must agree pointwise.
pub fn verify_ambient_flow<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    t_end: f64,
    tol: f64,
    samples: usize,
    snap: bool,
) -> Result<AmbientFlowReport<S>> {
    let ext = is_extrinsic_symmetric(x0, 1e-9);
    if !ext.is_extrinsic {
        return Err(Error::Precondition(format!(
            "orbit is not extrinsic symmetric (max root-value deviation {:.3e})",
            ext.max_deviation
        )));
    }
    let flow = compare_flows(h, x0, GradientKind::Ambient, t_end, tol, samples, snap)?;
    let mut pointwise = 0.0_f64;
    for p in &flow.closed_form {
        let sg = s_gradient(h, p)?;
        let ag = ambient_gradient(h, p)?;
        pointwise = pointwise.max((sg - ag).norm());
    }
    let identity_threshold = 1e-10 * h.q().mat().norm().max(1.0);
    let pass = flow.pass && pointwise <= identity_threshold;
    Ok(AmbientFlowReport {
        flow,
        pointwise_identity_max: pointwise,
        identity_threshold,
        pass,
    })
}

/// Exploratory numerical Hessian signature of `f` at `x`: second central
/// differences of `f` along the canonical tangent directions (one-parameter
/// compact subgroups per root sector entry), classified by sign against
/// `1e-6 * scale`. Returns `(negative, zero, positive)` counts. Diagnostic
/// only — the counts are a Morse-index estimate at critical points and mere
/// direction statistics elsewhere.
pub fn hessian_signature<S: Scalar>(
    h: &HeightFunction<S>,
    x: &OrbitPoint<S>,
    step: f64,
) -> Result<(usize, usize, usize)> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Validation("hessian step must be positive".into()));
    }
    let dec = x.decomposition();
    let n = dec.dim();
    let mut generators: Vec<DMatrix<S>> = Vec::new();
    for root in dec.positive_roots() {
        let blocks = dec.blocks();
        for r in blocks[root.upper].cols() {
            for c in blocks[root.lower].cols() {
                let mut e = DMatrix::<S>::zeros(n, n);
                e[(r, c)] = S::from_real(1.0);
                e[(c, r)] = S::from_real(-1.0);
                generators.push(dec.from_frame_basis(&e));
                if S::FIELD == ScalarField::Complex {
                    // second real generator of the complex sector entry
                    let i_like = S::from_real(-1.0).sqrt();
                    let mut e2 = DMatrix::<S>::zeros(n, n);
                    e2[(r, c)] = i_like;
                    e2[(c, r)] = i_like;
                    generators.push(dec.from_frame_basis(&e2));
                }
            }
        }
    }
    let scale = h.q().mat().norm() * x.spectral_diameter().max(1.0) * x.ctx().b_scale.max(1.0);
    let zero_band = 1e-6 * scale.max(f64::MIN_POSITIVE);
    let f0 = {
        let xp = x.clone();
        h.value(&xp)
    };
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    for a in &generators {
        let gp = expm(&a.map(|v| v * S::from_real(step)));
        let gm = expm(&a.map(|v| v * S::from_real(-step)));
        let fp = h.value(&k_act(&gp, x)?);
        let fm = h.value(&k_act(&gm, x)?);
        let second = (fp - 2.0 * f0 + fm) / (step * step);
        if second < -zero_band {
            neg += 1;
        } else if second > zero_band {
            pos += 1;
        } else {
            zero += 1;
        }
    }
    Ok((neg, zero, pos))
}
