//! Adjoint orbits of the compact unitary family: complex structure, Kähler
//! form and metric, and the one-parameter flow `x(t) = exp(itq).x(0)`.
//!
//! A point here is skew-Hermitian traceless. All frame and flag machinery is
//! reused from the self-adjoint side through the correspondence
//! `x <-> -i x`: the Hermitian matrix `-i x` carries the blocks, roots and
//! transport, while brackets, inner products, `J` and `omega` are evaluated
//! on the skew-Hermitian side. With root value `alpha`, `ad(x)` acts on the
//! `(r, c)` frame sector as multiplication by `i (mu_r - mu_c)`, so
//! `J = ad(x)/alpha` is `+-i` per sector and the Kähler metric weights
//! sectors by `1/alpha` — the homogeneous metric of the flow module.

use crate::check::CheckItem;
use crate::error::{Error, Result};
use crate::flow::{
    ambient_inner, closed_form_flow, s_inner, verify_gradient_flow, FlowReport, HeightFunction,
};
use crate::instances;
use crate::lie::{AlgebraContext, AmbientElement, Family};
use crate::orbit::{k_act, OrbitPoint};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of an adjoint orbit: skew-Hermitian traceless, with the
/// Hermitian companion `-i x` carrying frame and block data. The spectrum
/// of `x` is `i mu` for the ascending real `mu` stored on the companion.
#[derive(Debug, Clone)]
pub struct CompactOrbitPoint {
    mat: CMatrix,
    hermitian: OrbitPoint<Complex64>,
}

fn check_su_ctx(ctx: AlgebraContext) -> Result<()> {
    if ctx.family != Family::SuComplexified {
        return Err(Error::Validation(
            "adjoint-orbit machinery requires the su_complexified family".into(),
        ));
    }
    Ok(())
}

fn check_skew(m: &CMatrix, what: &str) -> Result<()> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if (m + m.adjoint()).norm() > 1e-12 * scale {
        return Err(Error::Precondition(format!(
            "{what} must be skew-Hermitian"
        )));
    }
    Ok(())
}

impl CompactOrbitPoint {
    pub fn new(ctx: AlgebraContext, mat: CMatrix) -> Result<Self> {
        check_su_ctx(ctx)?;
        check_skew(&mat, "adjoint-orbit point")?;
        let h = mat.map(|z| z * (-I));
        let h = (&h + h.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
        let hermitian = OrbitPoint::new(AmbientElement::new(ctx, h)?)?;
        Ok(CompactOrbitPoint { mat, hermitian })
    }

    /// Build from declared ascending `mu` values and a unitary frame; the
    /// point is `i F diag(mu) F^H`.
    pub fn from_spectrum(
        ctx: AlgebraContext,
        mu_ascending: &[f64],
        frame: CMatrix,
    ) -> Result<Self> {
        check_su_ctx(ctx)?;
        let hermitian = OrbitPoint::from_spectrum(ctx, mu_ascending, frame)?;
        let mat = hermitian.mat().map(|z| z * I);
        Ok(CompactOrbitPoint { mat, hermitian })
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.hermitian.ctx()
    }

    /// The skew-Hermitian point itself.
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    /// The Hermitian companion `-i x` (which owns frame, blocks, roots).
    pub fn hermitian_point(&self) -> &OrbitPoint<Complex64> {
        &self.hermitian
    }

    pub fn blocks(&self) -> &[crate::roots::Block] {
        self.hermitian.blocks()
    }

    fn check_tangent(&self, v: &CMatrix, what: &str) -> Result<CMatrix> {
        check_skew(v, what)?;
        let dec = self.hermitian.decomposition();
        let vt = dec.to_frame_basis(v);
        let scale = vt.norm();
        if scale > 0.0 && dec.diag_sector_norm(&vt) > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "{what} is not tangent to the orbit"
            )));
        }
        Ok(vt)
    }
}

/// Orthogonal tangent basis at `x`, organized per positive root: for each
/// frame sector entry the pair `U (E_rc - E_cr) U^H`, `U i(E_rc + E_cr) U^H`
/// (both skew-Hermitian). Dimension is `n^2 - sum(m_i^2)`.
pub fn tangent_space_basis(x: &CompactOrbitPoint) -> Vec<CMatrix> {
    let dec = x.hermitian.decomposition();
    let n = dec.dim();
    let blocks = dec.blocks();
    let mut out = Vec::new();
    for root in dec.positive_roots() {
        for r in blocks[root.upper].cols() {
            for c in blocks[root.lower].cols() {
                let mut e1 = CMatrix::zeros(n, n);
                e1[(r, c)] = Complex64::new(1.0, 0.0);
                e1[(c, r)] = Complex64::new(-1.0, 0.0);
                out.push(dec.from_frame_basis(&e1));
                let mut e2 = CMatrix::zeros(n, n);
                e2[(r, c)] = I;
                e2[(c, r)] = I;
                out.push(dec.from_frame_basis(&e2));
            }
        }
    }
    out
}

/// The invariant complex structure: per root sector, `J = ad(x)/alpha(x)`,
/// i.e. multiplication by `+-i` according to the sign of `mu_r - mu_c`.
pub fn complex_structure(x: &CompactOrbitPoint, v: &CMatrix) -> Result<CMatrix> {
    let vt = x.check_tangent(v, "complex-structure argument")?;
    let dec = x.hermitian.decomposition();
    let blocks = dec.blocks();
    let n = dec.dim();
    let jt = CMatrix::from_fn(n, n, |r, c| {
        let (bi, bj) = (dec.block_of_col(r), dec.block_of_col(c));
        if bi == bj {
            Complex64::new(0.0, 0.0)
        } else {
            vt[(r, c)] * I * Complex64::new((blocks[bi].value - blocks[bj].value).signum(), 0.0)
        }
    });
    Ok(dec.from_frame_basis(&jt))
}

/// The Kähler form `omega(v, w) = <v, ad(x)^{-1} w>`; `ad(x)^{-1}` is
/// applied per root sector (division by `i (mu_r - mu_c)`), never formed as
/// a matrix. Antisymmetric and nondegenerate on the tangent space.
pub fn kahler_form(x: &CompactOrbitPoint, v: &CMatrix, w: &CMatrix) -> Result<f64> {
    let vt = x.check_tangent(v, "first form argument")?;
    let wt = x.check_tangent(w, "second form argument")?;
    let dec = x.hermitian.decomposition();
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
            let adinv = wt[(r, c)] / (I * Complex64::new(blocks[bi].value - blocks[bj].value, 0.0));
            sum += (vt[(r, c)] * adinv.conj()).re;
        }
    }
    Ok(x.ctx().b_scale * sum)
}

/// The Kähler metric `(v, w) = omega(v, Jw)`; positive definite, and per
/// root equal to `1/alpha(x) <v_alpha, w_alpha>` — the homogeneous metric.
pub fn kahler_metric(x: &CompactOrbitPoint, v: &CMatrix, w: &CMatrix) -> Result<f64> {
    let jw = complex_structure(x, w)?;
    kahler_form(x, v, &jw)
}

/// Closed-form flow `x(t) = exp(itq).x(0)` for `q` in the compact algebra:
/// flag transport of the Hermitian companion by `exp(itq)` (equivalently the
/// companion's closed-form flow with height matrix `-i q`).
pub fn compact_flow(
    q: &CMatrix,
    x0: &CompactOrbitPoint,
    times: &[f64],
) -> Result<Vec<CompactOrbitPoint>> {
    let h = compact_height(x0.ctx(), q)?;
    let herm = closed_form_flow(&h, &x0.hermitian, times)?;
    Ok(herm
        .into_iter()
        .map(|p| {
            let mat = p.mat().map(|z| z * I);
            CompactOrbitPoint { mat, hermitian: p }
        })
        .collect())
}

/// The height function on the Hermitian side matching `f(x) = <q, x>` on
/// the adjoint orbit: `q_H = -i q`.
pub fn compact_height(ctx: AlgebraContext, q: &CMatrix) -> Result<HeightFunction<Complex64>> {
    check_su_ctx(ctx)?;
    check_skew(q, "compact height matrix")?;
    let qh = q.map(|z| z * (-I));
    let qh = (&qh + qh.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
    HeightFunction::new(AmbientElement::new(ctx, qh)?)
}

/// Verify that the Kähler gradient flow equals `exp(itq).x(0)` by running
/// the Hermitian-side comparison (the Kähler metric equals the homogeneous
/// metric there; the equality itself is a separate battery item).
pub fn verify_kahler_flow(
    q: &CMatrix,
    x0: &CompactOrbitPoint,
    t_end: f64,
    tol: f64,
    samples: usize,
    snap: bool,
) -> Result<FlowReport<Complex64>> {
    let h = compact_height(x0.ctx(), q)?;
    verify_gradient_flow(&h, &x0.hermitian, t_end, tol, samples, snap)
}

/// The full invariant battery on a seeded random adjoint orbit of `su(n)`:
/// `J^2 = -id`, `J` orthogonality, antisymmetry / nondegeneracy /
/// `Ad(K)`-invariance of `omega`, Kähler metric = homogeneous metric, and
/// the closed-form vs integrated flow comparison.
pub fn kahler_battery(
    n: usize,
    seed: u64,
    tol: f64,
    t_end: f64,
    samples: usize,
    snap: bool,
) -> Result<Vec<CheckItem>> {
    let ctx = AlgebraContext::su_complexified(n)?;
    let mut rng = instances::rng(seed);
    let spec = instances::random_spectrum(n, 1e-2, &mut rng);
    let frame = instances::haar_frame::<Complex64, _>(n, &mut rng)?;
    let x = CompactOrbitPoint::from_spectrum(ctx, &spec, frame)?;
    let basis = tangent_space_basis(&x);
    let d = basis.len();

    let mut items = Vec::new();

    let mut j_sq = 0.0_f64;
    let mut j_orth = 0.0_f64;
    for v in &basis {
        let jv = complex_structure(&x, v)?;
        let jjv = complex_structure(&x, &jv)?;
        j_sq = j_sq.max((jjv + v).norm() / v.norm());
    }
    for _ in 0..20 {
        let v = random_compact_tangent(&x, &mut rng)?;
        let w = random_compact_tangent(&x, &mut rng)?;
        let jv = complex_structure(&x, &v)?;
        let jw = complex_structure(&x, &w)?;
        let lhs = ambient_inner(ctx, &jv, &jw);
        let rhs = ambient_inner(ctx, &v, &w);
        j_orth = j_orth.max((lhs - rhs).abs());
    }
    items.push(CheckItem::threshold("j_squared", j_sq, 1e-10, String::new()));
    items.push(CheckItem::threshold(
        "j_orthogonal",
        j_orth,
        1e-10,
        String::new(),
    ));

    let mut antisym = 0.0_f64;
    for _ in 0..20 {
        let v = random_compact_tangent(&x, &mut rng)?;
        let w = random_compact_tangent(&x, &mut rng)?;
        antisym = antisym.max((kahler_form(&x, &v, &w)? + kahler_form(&x, &w, &v)?).abs());
        antisym = antisym.max(kahler_form(&x, &v, &v)?.abs());
    }
    items.push(CheckItem::threshold(
        "omega_antisymmetric",
        antisym,
        1e-9,
        String::new(),
    ));

    // nondegeneracy: the Gram matrix of omega in the tangent basis has full
    // rank; report its condition number
    let gram = DMatrix::<f64>::from_fn(d, d, |i, j| {
        kahler_form(&x, &basis[i], &basis[j]).expect("basis is tangent")
    });
    let svd = gram.svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    let smin = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s));
    let cond = smax / smin.max(f64::MIN_POSITIVE);
    items.push(CheckItem::threshold(
        "omega_nondegenerate",
        cond,
        1e8,
        format!("sigma_min={smin:.3e} sigma_max={smax:.3e}"),
    ));

    // Ad(K)-invariance under simultaneous transport of x, v, w
    let mut inv = 0.0_f64;
    for _ in 0..5 {
        let k = instances::random_rotation::<Complex64, _>(ctx, &mut rng)?;
        let kx = CompactOrbitPoint {
            mat: {
                let m = &k * &x.mat * k.adjoint();
                (&m - m.adjoint()).map(|z| z * Complex64::new(0.5, 0.0))
            },
            hermitian: k_act(&k, &x.hermitian)?,
        };
        for _ in 0..4 {
            let v = random_compact_tangent(&x, &mut rng)?;
            let w = random_compact_tangent(&x, &mut rng)?;
            let kv = &k * &v * k.adjoint();
            let kw = &k * &w * k.adjoint();
            let a = kahler_form(&x, &v, &w)?;
            let b = kahler_form(&kx, &kv, &kw)?;
            inv = inv.max((a - b).abs());
        }
    }
    items.push(CheckItem::threshold(
        "omega_ad_invariant",
        inv,
        1e-9,
        String::new(),
    ));

    // Kähler metric = homogeneous metric through v <-> -i v
    let mut eq = 0.0_f64;
    let mut j_herm = 0.0_f64;
    for _ in 0..20 {
        let v = random_compact_tangent(&x, &mut rng)?;
        let w = random_compact_tangent(&x, &mut rng)?;
        let km = kahler_metric(&x, &v, &w)?;
        let vh = v.map(|z| z * (-I));
        let wh = w.map(|z| z * (-I));
        let sm = s_inner(&vh, &wh, &x.hermitian)?;
        eq = eq.max((km - sm).abs());
        let jv = complex_structure(&x, &v)?;
        let jw = complex_structure(&x, &w)?;
        j_herm = j_herm.max((kahler_metric(&x, &jv, &jw)? - km).abs());
    }
    items.push(CheckItem::threshold(
        "metric_equals_s",
        eq,
        1e-12,
        String::new(),
    ));
    items.push(CheckItem::threshold(
        "metric_j_hermitian",
        j_herm,
        1e-10,
        String::new(),
    ));

    // closed-form flow vs integrated Kähler gradient flow
    let q = instances::random_skew::<Complex64, _>(ctx, &mut rng)?;
    let report = verify_kahler_flow(q.mat(), &x, t_end, tol, samples, snap)?;
    items.push(CheckItem::threshold(
        "flow_match",
        report.max_deviation,
        500.0 * tol,
        format!(
            "spectral_drift={:.3e} f_monotone={}",
            report.spectral_drift, report.f_monotone
        ),
    ));

    Ok(items)
}

/// Random tangent vector at a compact orbit point (skew-Hermitian,
/// off-block in the frame), unit norm.
pub fn random_compact_tangent<R: Rng + ?Sized>(
    x: &CompactOrbitPoint,
    rng: &mut R,
) -> Result<CMatrix> {
    let raw = instances::random_skew::<Complex64, _>(x.ctx(), rng)?;
    let dec = x.hermitian.decomposition();
    let rt = dec.to_frame_basis(raw.mat());
    let off = dec.restrict_sectors(&rt, |i, j| i != j);
    let v = dec.from_frame_basis(&off);
    let v = (&v - v.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
    let n = v.norm().max(f64::MIN_POSITIVE);
    Ok(v.map(|z| z / n))
}
