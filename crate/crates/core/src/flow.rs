//! Height functions, the homogeneous metric, its gradient, and the two
//! routes to the gradient flow: the closed form `x(t) = exp(-tq).x(0)`
//! (one-parameter subgroup orbit through flag transport) and direct
//! numerical integration of the gradient field. Their comparison is the
//! central verification of the crate.
//!
//! The homogeneous metric weights the component of a tangent vector in the
//! root space of `alpha` by `1/alpha(x)`. With that weighting the gradient
//! of `f(x) = <q, x>` scales the frame-basis sector `(i, j)` of `q` by
//! `|mu_i - mu_j|`, which is exactly the derivative field of
//! `exp(-tq).x(0)`; height values are nondecreasing along the flow.

use crate::error::{Error, Result};
use crate::lie::{AlgebraContext, AmbientElement};
use crate::numerics::{eigh, expm, ode_integrate_projected, OdeOptions};
use crate::orbit::{group_act, OrbitPoint};
use crate::roots::RootDecomposition;
use crate::scalar::{flatten, unflatten, Scalar};
use nalgebra::{DMatrix, DVector};

/// Per-hop conditioning budget for flag transport: consecutive samples are
/// sub-split so one QR never sees more than this many e-folds of column
/// growth (`dt * spectral spread of q`).
const MAX_HOP_EFOLDS: f64 = 12.0;

/// A height function `f(x) = <q, x>` with self-adjoint traceless `q`.
#[derive(Debug, Clone)]
pub struct HeightFunction<S: Scalar> {
    q: AmbientElement<S>,
}

impl<S: Scalar> HeightFunction<S> {
    pub fn new(q: AmbientElement<S>) -> Result<Self> {
        if !q.is_in_p(1e-12) {
            return Err(Error::Precondition(
                "height matrix must be sigma-odd (self-adjoint)".into(),
            ));
        }
        Ok(HeightFunction { q })
    }

    pub fn q(&self) -> &AmbientElement<S> {
        &self.q
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.q.ctx()
    }

    /// `f(x) = <q, x>`.
    pub fn value(&self, x: &OrbitPoint<S>) -> f64 {
        self.q.inner(x.element()).expect("shared context")
    }

    /// `<q, v>` against a raw ambient direction.
    pub fn pair(&self, v: &DMatrix<S>) -> f64 {
        ambient_inner(self.q.ctx(), self.q.mat(), v)
    }
}

/// `b_scale * Re tr(a b^H)` on raw matrices.
pub fn ambient_inner<S: Scalar>(ctx: AlgebraContext, a: &DMatrix<S>, b: &DMatrix<S>) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += (*x * y.conjugate()).real();
    }
    ctx.b_scale * s
}

/// The homogeneous metric at an orbit point: per positive root the weight
/// `1/alpha(x)`. The weights depend only on the spectrum, so they are
/// constant along the orbit.
#[derive(Debug, Clone)]
pub struct MetricS<S: Scalar> {
    dec: RootDecomposition<S>,
    weights: Vec<f64>,
}

impl<S: Scalar> MetricS<S> {
    pub fn at(x: &OrbitPoint<S>) -> Self {
        let dec = x.decomposition().clone();
        let weights = dec.positive_roots().iter().map(|r| 1.0 / r.alpha).collect();
        MetricS { dec, weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn decomposition(&self) -> &RootDecomposition<S> {
        &self.dec
    }

    pub fn inner(&self, v: &DMatrix<S>, w: &DMatrix<S>) -> Result<f64> {
        s_inner_with(&self.dec, v, w)
    }
}

fn check_tangent<S: Scalar>(
    dec: &RootDecomposition<S>,
    m_frame: &DMatrix<S>,
    what: &str,
) -> Result<()> {
    let scale = m_frame.norm();
    if scale == 0.0 {
        return Ok(());
    }
    let diag = dec.diag_sector_norm(m_frame);
    if diag > 1e-10 * scale {
        return Err(Error::Precondition(format!(
            "{what} is not tangent: block-diagonal residual {:.3e} (relative)",
            diag / scale
        )));
    }
    Ok(())
}

/// Orthogonal projection of an ambient self-adjoint direction onto the
/// tangent space at `x`: zero the block-diagonal frame sectors.
pub fn tangent_project<S: Scalar>(v: &DMatrix<S>, x: &OrbitPoint<S>) -> Result<DMatrix<S>> {
    let scale = v.norm().max(f64::MIN_POSITIVE);
    if (v - v.adjoint()).norm() > 1e-10 * scale {
        return Err(Error::Precondition(
            "direction must be self-adjoint (ambient p direction)".into(),
        ));
    }
    let dec = x.decomposition();
    let vt = dec.to_frame_basis(v);
    let off = dec.restrict_sectors(&vt, |i, j| i != j);
    Ok(dec.from_frame_basis(&off))
}

fn s_inner_with<S: Scalar>(
    dec: &RootDecomposition<S>,
    v: &DMatrix<S>,
    w: &DMatrix<S>,
) -> Result<f64> {
    let vt = dec.to_frame_basis(v);
    let wt = dec.to_frame_basis(w);
    check_tangent(dec, &vt, "first argument")?;
    check_tangent(dec, &wt, "second argument")?;
    let blocks = dec.blocks();
    let n = dec.dim();
    let mut sum = 0.0;
    for r in 0..n {
        let bi = dec.block_of_col(r);
        for c in 0..n {
            let bj = dec.block_of_col(c);
            if bi == bj {
                continue;
            }
            let alpha = (blocks[bi].value - blocks[bj].value).abs();
            sum += (vt[(r, c)] * wt[(r, c)].conjugate()).real() / alpha;
        }
    }
    Ok(dec.ctx().b_scale * sum)
}

/// The homogeneous-metric inner product of two tangent vectors at `x`.
pub fn s_inner<S: Scalar>(v: &DMatrix<S>, w: &DMatrix<S>, x: &OrbitPoint<S>) -> Result<f64> {
    s_inner_with(x.decomposition(), v, w)
}

/// Gradient of the height function under the homogeneous metric: in the
/// frame basis of `x`, the `(i, j)` sector of `q` scaled by `|mu_i - mu_j|`.
/// Defining property: `s_inner(s_gradient, v) = <q, v>` for all tangent `v`.
pub fn s_gradient<S: Scalar>(h: &HeightFunction<S>, x: &OrbitPoint<S>) -> Result<DMatrix<S>> {
    if h.ctx() != x.ctx() {
        return Err(Error::ContextMismatch(
            "height function and orbit point contexts differ".into(),
        ));
    }
    let dec = x.decomposition();
    let blocks = dec.blocks();
    let qt = dec.to_frame_basis(h.q().mat());
    let scaled = dec.scale_sectors(&qt, |i, j| {
        if i == j {
            0.0
        } else {
            (blocks[i].value - blocks[j].value).abs()
        }
    });
    Ok(dec.from_frame_basis(&scaled))
}

/// Gradient of the height function under the ambient (induced) metric: the
/// plain tangent projection of `q`. On extrinsic-symmetric orbits (all root
/// values 1) it coincides with [`s_gradient`].
pub fn ambient_gradient<S: Scalar>(h: &HeightFunction<S>, x: &OrbitPoint<S>) -> Result<DMatrix<S>> {
    if h.ctx() != x.ctx() {
        return Err(Error::ContextMismatch(
            "height function and orbit point contexts differ".into(),
        ));
    }
    tangent_project(h.q().mat(), x)
}

/// Which gradient field a flow comparison integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    /// The homogeneous metric (sector scaling `|mu_i - mu_j|`).
    Homogeneous,
    /// The ambient induced metric (plain tangent projection).
    Ambient,
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Validation("empty sample-time grid".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() || t < prev {
            return Err(Error::Validation(
                "sample times must be finite, nonnegative and ascending".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Uniform grid `0..=t_end` with `samples` points.
pub fn sample_grid(t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::Validation("need at least 2 samples".into()));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Validation("t_end must be finite and >= 0".into()));
    }
    Ok((0..samples)
        .map(|k| t_end * k as f64 / (samples - 1) as f64)
        .collect())
}

/// Closed-form flow `x(t) = exp(-tq).x(0)` evaluated on an ascending time
/// grid. Consecutive samples are propagated compositionally (one-parameter
/// subgroup law), sub-splitting hops so the QR transport stays well
/// conditioned at large `t * ||q||`.
pub fn closed_form_flow<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    times: &[f64],
) -> Result<Vec<OrbitPoint<S>>> {
    if h.ctx() != x0.ctx() {
        return Err(Error::ContextMismatch(
            "height function and orbit point contexts differ".into(),
        ));
    }
    validate_times(times)?;
    let qsf = eigh(h.q().mat())?;
    let spread = qsf.eigenvalues.last().unwrap() - qsf.eigenvalues.first().unwrap();

    let mut out = Vec::with_capacity(times.len());
    let mut cur = x0.clone();
    let mut t_prev = 0.0;
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            let hops = ((dt * spread / MAX_HOP_EFOLDS).ceil() as usize).max(1);
            let h_hop = dt / hops as f64;
            let g = expm(&h.q().mat().map(|v| v * S::from_real(-h_hop)));
            for _ in 0..hops {
                cur = group_act(&g, &cur)?;
            }
        }
        out.push(cur.clone());
        t_prev = t;
    }
    Ok(out)
}

/// Numerically integrated gradient flow in ambient coordinates.
#[derive(Debug, Clone)]
pub struct NumericFlow<S: Scalar> {
    pub times: Vec<f64>,
    /// Raw ambient states at the sample times (self-adjoint up to
    /// integration error; exactly isospectral when snapping is on).
    pub states: Vec<DMatrix<S>>,
    /// Largest absolute eigenvalue drift away from the declared spectrum
    /// seen during integration (pre-snap values when snapping).
    pub spectral_drift_abs: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

fn gradient_field<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    kind: GradientKind,
    m: &DMatrix<S>,
) -> Result<DMatrix<S>> {
    // guard the self-adjointness drift that integration accumulates
    let msym = (m + m.adjoint()).scale(0.5);
    let sf = eigh(&msym)?;
    let n = msym.nrows();
    let qt = sf.frame.adjoint() * h.q().mat() * &sf.frame;
    // the block layout (multiplicities, values, column ranges) is a flow
    // invariant: reuse the declared one from x0
    let dec = x0.decomposition();
    let blocks = dec.blocks();
    let scaled = DMatrix::from_fn(n, n, |r, c| {
        let bi = dec.block_of_col(r);
        let bj = dec.block_of_col(c);
        let factor = if bi == bj {
            0.0
        } else {
            match kind {
                GradientKind::Homogeneous => (blocks[bi].value - blocks[bj].value).abs(),
                GradientKind::Ambient => 1.0,
            }
        };
        qt[(r, c)] * S::from_real(factor)
    });
    Ok(&sf.frame * scaled * sf.frame.adjoint())
}

/// Integrate the gradient flow of `h` from `x0` with the given field kind.
pub fn numeric_flow_kind<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    kind: GradientKind,
    times: &[f64],
    tol: f64,
    snap: bool,
) -> Result<NumericFlow<S>> {
    if h.ctx() != x0.ctx() {
        return Err(Error::ContextMismatch(
            "height function and orbit point contexts differ".into(),
        ));
    }
    validate_times(times)?;
    let n = x0.ctx().n;
    let declared = x0.spectrum_values();
    let y0 = flatten(x0.mat());
    let opts = OdeOptions {
        tol,
        sample_times: times.to_vec(),
    };

    let field = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let m: DMatrix<S> = unflatten(y, n, n);
        Ok(flatten(&gradient_field(h, x0, kind, &m)?))
    };

    let sol = if snap {
        let declared_ref = &declared;
        let mut hook = |y: &mut DVector<f64>| -> Result<f64> {
            let m: DMatrix<S> = unflatten(y, n, n);
            let msym = (&m + m.adjoint()).scale(0.5);
            let sf = eigh(&msym)?;
            let drift = sf
                .eigenvalues
                .iter()
                .zip(declared_ref.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                declared_ref.iter().map(|&v| S::from_real(v)),
            ));
            let snapped = &sf.frame * d * sf.frame.adjoint();
            let snapped = (&snapped + snapped.adjoint()).scale(0.5);
            *y = flatten(&snapped);
            Ok(drift)
        };
        ode_integrate_projected(field, Some(&mut hook), &y0, &opts)?
    } else {
        ode_integrate_projected(field, None, &y0, &opts)?
    };

    let mut states = Vec::with_capacity(sol.states.len());
    let mut drift = sol.max_projection_drift;
    for y in &sol.states {
        let m: DMatrix<S> = unflatten(y, n, n);
        if !snap {
            let msym = (&m + m.adjoint()).scale(0.5);
            let sf = eigh(&msym)?;
            let d = sf
                .eigenvalues
                .iter()
                .zip(declared.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            drift = drift.max(d);
        }
        states.push(m);
    }
    Ok(NumericFlow {
        times: sol.times,
        states,
        spectral_drift_abs: drift,
        steps_accepted: sol.steps_accepted,
        steps_rejected: sol.steps_rejected,
    })
}

/// Integrate the homogeneous-metric gradient flow (the default field).
pub fn numeric_flow<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    t_end: f64,
    tol: f64,
    samples: usize,
    snap: bool,
) -> Result<NumericFlow<S>> {
    let times = sample_grid(t_end, samples)?;
    numeric_flow_kind(h, x0, GradientKind::Homogeneous, &times, tol, snap)
}

/// Verification record of one closed-form vs integrated flow comparison.
#[derive(Debug, Clone)]
pub struct FlowReport<S: Scalar> {
    pub sample_times: Vec<f64>,
    pub closed_form: Vec<OrbitPoint<S>>,
    /// Raw integrated ambient states on the same grid.
    pub integrated: Vec<DMatrix<S>>,
    /// Height values along the closed-form trajectory.
    pub f_values: Vec<f64>,
    /// Max Frobenius deviation between the two routes, relative to the
    /// spectral diameter.
    pub max_deviation: f64,
    /// Max eigenvalue drift of the integrated states, relative to the
    /// spectral diameter.
    pub spectral_drift: f64,
    pub f_monotone: bool,
    pub snap: bool,
    pub ode_tol: f64,
    /// Pass threshold on `max_deviation` (50 times the ODE tolerance).
    pub threshold: f64,
    pub pass: bool,
}

/// Run both flow routes of the given kind on a shared grid (at least 20
/// samples) and fill a [`FlowReport`]. Verdict: `max_deviation < 50 * tol`
/// and nondecreasing height values.
pub fn compare_flows<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    kind: GradientKind,
    t_end: f64,
    tol: f64,
    samples: usize,
    snap: bool,
) -> Result<FlowReport<S>> {
    let times = sample_grid(t_end, samples.max(20))?;
    let closed = closed_form_flow(h, x0, &times)?;
    let numeric = numeric_flow_kind(h, x0, kind, &times, tol, snap)?;

    let diam = x0.spectral_diameter().max(f64::MIN_POSITIVE);
    let mut max_dev = 0.0_f64;
    for (c, s) in closed.iter().zip(numeric.states.iter()) {
        max_dev = max_dev.max((c.mat() - s).norm() / diam);
    }
    let f_values: Vec<f64> = closed.iter().map(|x| h.value(x)).collect();
    let slack = 1e-10 * h.q().mat().norm() * diam * x0.ctx().b_scale.max(1.0);
    let f_monotone = f_values.windows(2).all(|w| w[1] >= w[0] - slack);

    let threshold = 50.0 * tol;
    let pass = max_dev < threshold && f_monotone;
    Ok(FlowReport {
        sample_times: times,
        closed_form: closed,
        integrated: numeric.states,
        f_values,
        max_deviation: max_dev,
        spectral_drift: numeric.spectral_drift_abs / diam,
        f_monotone,
        snap,
        ode_tol: tol,
        threshold,
        pass,
    })
}

/// The central verification: the homogeneous-metric gradient flow equals
/// the one-parameter subgroup orbit `exp(-tq).x(0)`.
pub fn verify_gradient_flow<S: Scalar>(
    h: &HeightFunction<S>,
    x0: &OrbitPoint<S>,
    t_end: f64,
    tol: f64,
    samples: usize,
    snap: bool,
) -> Result<FlowReport<S>> {
    compare_flows(h, x0, GradientKind::Homogeneous, t_end, tol, samples, snap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_point(values: &[f64]) -> OrbitPoint<f64> {
        let n = values.len();
        let ctx = AlgebraContext::sl_real(n).unwrap();
        let elem = AmbientElement::new(
            ctx,
            DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values)),
        )
        .unwrap();
        OrbitPoint::new(elem).unwrap()
    }

    fn sl2_worked_case() -> (HeightFunction<f64>, OrbitPoint<f64>) {
        let ctx = AlgebraContext::sl_real(2).unwrap();
        let x0 = OrbitPoint::new(
            AmbientElement::new(ctx, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
                .unwrap(),
        )
        .unwrap();
        let q = HeightFunction::new(
            AmbientElement::new(ctx, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
                .unwrap(),
        )
        .unwrap();
        (q, x0)
    }

    fn tanh_sech_state(t: f64) -> DMatrix<f64> {
        let th = (2.0 * t).tanh();
        let se = 1.0 / (2.0 * t).cosh();
        DMatrix::from_row_slice(2, 2, &[th, se, se, -th])
    }

    #[test]
    fn tangent_project_examples() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();

        // commuting direction (the point itself) projects to zero
        assert!(tangent_project(x.mat(), &x).unwrap().norm() < 1e-12);

        // already-tangent input is unchanged
        let v = instances::random_tangent(&x, &mut rng).unwrap();
        assert!((tangent_project(&v, &x).unwrap() - &v).norm() < 1e-12);

        // orthogonality of the complement: <v - Pv, Pw> = 0
        let raw_v = instances::random_symmetric_traceless::<f64, _>(ctx, &mut rng).unwrap();
        let raw_w = instances::random_symmetric_traceless::<f64, _>(ctx, &mut rng).unwrap();
        let pv = tangent_project(raw_v.mat(), &x).unwrap();
        let pw = tangent_project(raw_w.mat(), &x).unwrap();
        let residual = raw_v.mat() - &pv;
        assert!(ambient_inner(ctx, &residual, &pw).abs() < 1e-12);
    }

    #[test]
    fn s_inner_hand_value_symmetry_positivity() {
        let x = diag_point(&[1.0, -1.0]);
        let v = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        // single root alpha = 2, <v,v> = 2, so <v,v>_s = 1
        assert_relative_eq!(s_inner(&v, &v, &x).unwrap(), 1.0, epsilon = 1e-14);

        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        for _ in 0..5 {
            let v = instances::random_tangent(&x, &mut rng).unwrap();
            let w = instances::random_tangent(&x, &mut rng).unwrap();
            assert_relative_eq!(
                s_inner(&v, &w, &x).unwrap(),
                s_inner(&w, &v, &x).unwrap(),
                epsilon = 1e-12
            );
            assert!(s_inner(&v, &v, &x).unwrap() > 0.0);
        }
    }

    // Gram matrix of the canonical tangent sector basis is positive definite
    #[test]
    fn s_inner_gram_positive_definite() {
        let x = diag_point(&[1.0, 0.0, -1.0]);
        let dec = x.decomposition();
        let mut basis: Vec<DMatrix<f64>> = Vec::new();
        for r in 0..3 {
            for c in 0..r {
                if dec.block_of_col(r) != dec.block_of_col(c) {
                    let mut e = DMatrix::<f64>::zeros(3, 3);
                    e[(r, c)] = 1.0;
                    e[(c, r)] = 1.0;
                    basis.push(dec.from_frame_basis(&e));
                }
            }
        }
        let d = basis.len();
        let gram = DMatrix::from_fn(d, d, |i, j| s_inner(&basis[i], &basis[j], &x).unwrap());
        let sf = eigh(&gram).unwrap();
        assert!(sf.eigenvalues[0] > 1e-12);
    }

    #[test]
    fn s_inner_rejects_non_tangent() {
        let x = diag_point(&[1.0, -1.0]);
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]); // commutes with x
        assert!(matches!(
            s_inner(&v, &v, &x),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn s_gradient_trivial_and_hand_cases() {
        // commuting height: critical point, gradient zero
        let x = diag_point(&[1.0, 0.0, -1.0]);
        let hq = HeightFunction::new(x.element().clone()).unwrap();
        assert!(s_gradient(&hq, &x).unwrap().norm() < 1e-13);

        // diagonal x, q = E13 + E31 bridges mu = 1 and mu = -1: alpha = 2
        let ctx = x.ctx();
        let mut qm = DMatrix::<f64>::zeros(3, 3);
        qm[(0, 2)] = 1.0;
        qm[(2, 0)] = 1.0;
        let h = HeightFunction::new(AmbientElement::new(ctx, qm.clone()).unwrap()).unwrap();
        let grad = s_gradient(&h, &x).unwrap();
        assert!((grad - qm.scale(2.0)).norm() < 1e-13);

        // the worked sl(2) case
        let (h, x0) = sl2_worked_case();
        let grad = s_gradient(&h, &x0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -2.0]);
        assert!((grad - want).norm() < 1e-12);
    }

    #[test]
    fn s_gradient_defining_property() {
        let ctx = AlgebraContext::sl_real(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let spec = instances::random_spectrum(5, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let grad = s_gradient(&h, &x).unwrap();
        for _ in 0..20 {
            let v = instances::random_tangent(&x, &mut rng).unwrap();
            let lhs = s_inner(&grad, &v, &x).unwrap();
            let rhs = h.pair(&v);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn s_gradient_matches_infinitesimal_action() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let grad = s_gradient(&h, &x).unwrap();
        // gradient equals the infinitesimal action of -q
        let qdot = crate::orbit::infinitesimal_act_fd(h.q(), &x).unwrap();
        assert!((grad + qdot).norm() < 1e-7);
    }

    #[test]
    fn s_gradient_invariant_under_b_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let frame = instances::haar_frame::<f64, _>(4, &mut rng).unwrap();
        let qraw = {
            let ctx = AlgebraContext::sl_real(4).unwrap();
            instances::random_symmetric_traceless::<f64, _>(ctx, &mut rng)
                .unwrap()
                .into_mat()
        };
        let mut grads = Vec::new();
        for b in [1.0, 3.7] {
            let ctx = AlgebraContext::sl_real(4).unwrap().with_b_scale(b).unwrap();
            let x = OrbitPoint::from_spectrum(ctx, &spec, frame.clone()).unwrap();
            let h =
                HeightFunction::new(AmbientElement::new(ctx, qraw.clone()).unwrap()).unwrap();
            let g = s_gradient(&h, &x).unwrap();
            // the defining property holds at every scale
            let v = instances::random_tangent(&x, &mut rng).unwrap();
            assert!((s_inner(&g, &v, &x).unwrap() - h.pair(&v)).abs() < 1e-10);
            grads.push(g);
        }
        assert!((&grads[0] - &grads[1]).norm() < 1e-12);
    }

    // directional derivative of f along compact directions matches <q, a.x>
    #[test]
    fn height_directional_derivative() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let a = instances::random_skew::<f64, _>(ctx, &mut rng).unwrap();
        let t = 1e-5;
        let gp = group_act(&expm(&a.mat().scale(t)), &x).unwrap();
        let gm = group_act(&expm(&a.mat().scale(-t)), &x).unwrap();
        let fd = (h.value(&gp) - h.value(&gm)) / (2.0 * t);
        let v = crate::orbit::infinitesimal_act(&a, &x).unwrap();
        assert!((fd - h.pair(&v)).abs() < 1e-7);
    }

    // the homogeneous gradient sits at power 1 of alpha between the ambient
    // projection (power 0) and the double-bracket field (power 2)
    #[test]
    fn alpha_power_anchor_against_double_bracket() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let dec = x.decomposition();
        let blocks = dec.blocks().to_vec();
        let qt = dec.to_frame_basis(h.q().mat());

        let db = x
            .element()
            .bracket(&x.element().bracket(h.q()).unwrap())
            .unwrap();
        let dbt = dec.to_frame_basis(db.mat());
        let want_db = dec.scale_sectors(&qt, |i, j| {
            let d = blocks[i].value - blocks[j].value;
            d * d
        });
        assert!((dbt - want_db).norm() < 1e-10);

        let grad_t = dec.to_frame_basis(&s_gradient(&h, &x).unwrap());
        let want_grad = dec.scale_sectors(&qt, |i, j| {
            if i == j {
                0.0
            } else {
                (blocks[i].value - blocks[j].value).abs()
            }
        });
        assert!((grad_t - want_grad).norm() < 1e-12);

        let amb_t = dec.to_frame_basis(&ambient_gradient(&h, &x).unwrap());
        let want_amb = dec.scale_sectors(&qt, |i, j| if i == j { 0.0 } else { 1.0 });
        assert!((amb_t - want_amb).norm() < 1e-12);
    }

    #[test]
    fn closed_form_flow_constant_cases() {
        let ctx = AlgebraContext::sl_real(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let spec = instances::random_spectrum(3, 1e-2, &mut rng);
        let x0 = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();

        // zero height: constant trajectory
        let zero =
            HeightFunction::new(AmbientElement::new(ctx, DMatrix::zeros(3, 3)).unwrap()).unwrap();
        let times = sample_grid(2.0, 5).unwrap();
        for p in closed_form_flow(&zero, &x0, &times).unwrap() {
            assert!((p.mat() - x0.mat()).norm() < 1e-12);
        }

        // commuting height (the point itself): fixed point
        let hq = HeightFunction::new(x0.element().clone()).unwrap();
        for p in closed_form_flow(&hq, &x0, &times).unwrap() {
            assert!((p.mat() - x0.mat()).norm() < 1e-10);
        }
    }

    #[test]
    fn closed_form_flow_matches_tanh_sech() {
        let (h, x0) = sl2_worked_case();
        let times = sample_grid(2.0, 21).unwrap();
        let flow = closed_form_flow(&h, &x0, &times).unwrap();
        for (t, p) in times.iter().zip(flow.iter()) {
            assert!((p.mat() - tanh_sech_state(*t)).norm() < 1e-12);
        }
    }

    #[test]
    fn numeric_flow_matches_closed_form_sl2() {
        let (h, x0) = sl2_worked_case();
        let times = sample_grid(2.0, 21).unwrap();
        let nf = numeric_flow(&h, &x0, 2.0, 1e-10, 21, true).unwrap();
        for (t, s) in times.iter().zip(nf.states.iter()) {
            assert!((s - tanh_sech_state(*t)).norm() < 1e-8);
        }
    }

    #[test]
    fn numeric_flow_drift_without_snapping() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x0 = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let nf = numeric_flow(&h, &x0, 2.0, 1e-10, 11, false).unwrap();
        assert!(
            nf.spectral_drift_abs < 1e-7,
            "drift {:.3e}",
            nf.spectral_drift_abs
        );
    }

    #[test]
    fn verify_flow_commuting_case() {
        let x0 = diag_point(&[1.0, 0.0, -1.0]);
        let h = HeightFunction::new(x0.element().clone()).unwrap();
        let report = verify_gradient_flow(&h, &x0, 2.0, 1e-10, 21, true).unwrap();
        assert!(report.pass);
        assert!(report.max_deviation < 1e-10);
    }

    #[test]
    fn verify_flow_sl2_worked_case() {
        let (h, x0) = sl2_worked_case();
        let report = verify_gradient_flow(&h, &x0, 2.0, 1e-10, 21, true).unwrap();
        assert!(report.pass, "max_deviation = {:.3e}", report.max_deviation);
        assert!(report.f_monotone);
    }

    // partial flags: repeated eigenvalues, tangent sectors only across
    // distinct blocks
    #[test]
    fn verify_flow_degenerate_spectrum() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let x0 = instances::random_orbit_point::<f64, _>(ctx, &[-1.0, -1.0, 0.25, 1.75], &mut rng)
            .unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let report = verify_gradient_flow(&h, &x0, 2.0, 1e-10, 21, true).unwrap();
        assert!(report.pass, "max_deviation = {:.3e}", report.max_deviation);
    }

    #[test]
    fn verify_flow_random_n5() {
        let ctx = AlgebraContext::sl_real(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let spec = instances::random_spectrum(5, 1e-2, &mut rng);
        let x0 = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let report = verify_gradient_flow(&h, &x0, 2.0, 1e-9, 21, true).unwrap();
        assert!(report.pass, "max_deviation = {:.3e}", report.max_deviation);
    }

    // the gradient field is realized by a compact generator: with z_alpha
    // the upper-sector part of q per positive root, r = sum(z_alpha +
    // sigma-mirror) lies in k, [r, x] = -s_gradient, and r generates the
    // same infinitesimal motion as q (their difference stabilizes the flag)
    #[test]
    fn compact_generator_realizes_the_gradient() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let dec = x.decomposition();
        let qt = dec.to_frame_basis(h.q().mat());
        let blocks = dec.blocks().to_vec();
        // upper sectors kept, lower sectors negated: z + z^sigma per root
        let rt = dec.scale_sectors(&qt, |i, j| {
            if i == j {
                0.0
            } else {
                (blocks[i].value - blocks[j].value).signum()
            }
        });
        let r = AmbientElement::traceless(ctx, dec.from_frame_basis(&rt)).unwrap();
        assert!(r.is_in_k(1e-12));
        let bracket = r.bracket(x.element()).unwrap();
        let grad = s_gradient(&h, &x).unwrap();
        assert!((bracket.mat() + &grad).norm() < 1e-12);
        let q_dot = crate::orbit::infinitesimal_act_fd(h.q(), &x).unwrap();
        let r_dot = crate::orbit::infinitesimal_act(&r, &x).unwrap();
        assert!((q_dot - r_dot).norm() < 1e-7);
    }

    #[test]
    fn metric_weights_constant_along_orbit() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let g = instances::random_group_element::<f64, _>(ctx, 1.0, &mut rng).unwrap();
        let y = group_act(&g, &x).unwrap();
        assert_eq!(MetricS::at(&x).weights(), MetricS::at(&y).weights());
        for w in MetricS::at(&x).weights() {
            assert!(*w > 0.0 && w.is_finite());
        }
    }

    #[test]
    fn f_strictly_increasing_away_from_critical_points() {
        let ctx = AlgebraContext::sl_real(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let spec = instances::random_spectrum(4, 1e-2, &mut rng);
        let x0 = instances::random_orbit_point::<f64, _>(ctx, &spec, &mut rng).unwrap();
        let h = instances::random_height::<f64, _>(ctx, &mut rng).unwrap();
        let times = sample_grid(2.0, 21).unwrap();
        let flow = closed_form_flow(&h, &x0, &times).unwrap();
        let f: Vec<f64> = flow.iter().map(|p| h.value(p)).collect();
        assert!(f.windows(2).all(|w| w[1] > w[0]), "{f:?}");
    }
}
