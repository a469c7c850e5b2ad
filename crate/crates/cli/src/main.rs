//! Command-line verification suites for flag-manifold gradient flows.
//!
//! Exit codes: 0 all checks pass; 1 verdict failure; 2 validation error;
//! 3 degeneracy (rank collapse or ambiguous eigenvalue grouping). The
//! battery commands (`kahler-check`, `extrinsic-check`, `morse`) exit with
//! the number of failed items, capped at 125.

mod report;

use clap::{Args, Parser, Subcommand};
use flagflow::analysis::{
    classify_limit, critical_points, hessian_signature, is_extrinsic_symmetric,
    multinomial_count, verify_ambient_flow,
};
use flagflow::flow::verify_gradient_flow;
use flagflow::instances;
use flagflow::kahler::kahler_battery;
use flagflow::roots::decompose;
use flagflow::{AlgebraContext, Error, Family, HeightFunction, OrbitPoint, Scalar};
use num_complex::Complex64;
use report::{OutputFormat, Record};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "flagflow",
    version,
    about = "Verification suites for gradient flows on flag manifolds and adjoint orbits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Root-space decomposition of a seeded orbit point: blocks, positive
    /// roots, dimension audit.
    Decompose(CommonArgs),
    /// Compare the closed-form flow exp(-tq).x(0) against the integrated
    /// homogeneous-metric gradient flow.
    VerifyFlow(CommonArgs),
    /// Adjoint-orbit battery on su(n): complex structure, Kähler form and
    /// metric, closed-form vs integrated flow.
    KahlerCheck(CommonArgs),
    /// Extrinsic-symmetric detector and the ambient-metric flow comparison.
    ExtrinsicCheck(CommonArgs),
    /// Critical points of a seeded height function with multinomial count
    /// audit and flow-limit classification.
    Morse {
        #[command(flatten)]
        common: CommonArgs,
        /// Also report the numerical Hessian signature at each critical
        /// point (exploratory; never affects the exit code).
        #[arg(long)]
        hessian: bool,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Algebra family: sl_real | su_complexified
    /// (default sl_real; kahler-check defaults to su_complexified)
    #[arg(long)]
    algebra: Option<String>,
    /// Matrix dimension, 2..=64 (inferred from --spectrum when given)
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated eigenvalues; must sum to zero. Sorted ascending.
    #[arg(long, allow_hyphen_values = true)]
    spectrum: Option<String>,
    /// Seed, or inclusive seed range `a..b`
    #[arg(long, default_value = "0")]
    seed: String,
    /// ODE local error tolerance, in [1e-13, 1e-3]
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Flow horizon
    #[arg(long = "t-end", default_value_t = 2.0)]
    t_end: f64,
    /// Number of samples on the time grid (>= 2)
    #[arg(long, default_value_t = 21)]
    samples: usize,
    /// Disable per-step spectral re-snapping in the integrator
    #[arg(long = "no-snap")]
    no_snap: bool,
    /// Output format: json | csv
    #[arg(long, default_value = "json")]
    output: String,
    /// Write the report to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Config {
    family: Family,
    n: usize,
    spectrum: Option<Vec<f64>>,
    seeds: Vec<u64>,
    tol: f64,
    t_end: f64,
    samples: usize,
    snap: bool,
    format: OutputFormat,
    out: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a
            .parse()
            .map_err(|_| Error::Validation(format!("bad seed range start {a:?}")))?;
        let b: u64 = b
            .parse()
            .map_err(|_| Error::Validation(format!("bad seed range end {b:?}")))?;
        if b < a || b - a > 10_000 {
            return Err(Error::Validation(format!(
                "seed range {a}..{b} must be ascending and span at most 10000 seeds"
            )));
        }
        Ok((a..=b).collect())
    } else {
        let v: u64 = s
            .parse()
            .map_err(|_| Error::Validation(format!("bad seed {s:?}")))?;
        Ok(vec![v])
    }
}

fn parse_spectrum(s: &str) -> Result<Vec<f64>, Error> {
    let mut v = Vec::new();
    for part in s.split(',') {
        let x: f64 = part
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("bad spectrum entry {part:?}")))?;
        if !x.is_finite() {
            return Err(Error::Validation("spectrum entries must be finite".into()));
        }
        v.push(x);
    }
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let trace: f64 = v.iter().sum();
    if trace.abs() > 1e-9 * scale * v.len() as f64 {
        return Err(Error::Validation(format!(
            "spectrum must be traceless, got trace = {trace:e}"
        )));
    }
    Ok(v)
}

fn resolve(common: &CommonArgs, default_family: Family) -> Result<Config, Error> {
    let family = match &common.algebra {
        None => default_family,
        Some(s) => s.parse::<Family>()?,
    };
    let spectrum = common.spectrum.as_deref().map(parse_spectrum).transpose()?;
    let n = match (&spectrum, common.n) {
        (Some(sp), Some(n)) if sp.len() != n => {
            return Err(Error::Validation(format!(
                "--n {n} conflicts with a spectrum of {} values",
                sp.len()
            )))
        }
        (Some(sp), _) => sp.len(),
        (None, Some(n)) => n,
        (None, None) => 4,
    };
    if !(2..=64).contains(&n) {
        return Err(Error::Validation(format!("n = {n} outside 2..=64")));
    }
    if !(1e-13..=1e-3).contains(&common.tol) {
        return Err(Error::Validation(format!(
            "tol = {:e} outside [1e-13, 1e-3]",
            common.tol
        )));
    }
    if common.samples < 2 {
        return Err(Error::Validation("need at least 2 samples".into()));
    }
    if !(common.t_end.is_finite() && common.t_end >= 0.0) {
        return Err(Error::Validation("t-end must be finite and >= 0".into()));
    }
    let format = common
        .output
        .parse::<OutputFormat>()
        .map_err(Error::Validation)?;
    Ok(Config {
        family,
        n,
        spectrum,
        seeds: parse_seeds(&common.seed)?,
        tol: common.tol,
        t_end: common.t_end,
        samples: common.samples,
        snap: !common.no_snap,
        format,
        out: common.out.clone(),
    })
}

impl Config {
    fn ctx(&self) -> Result<AlgebraContext, Error> {
        AlgebraContext::new(self.family, self.n)
    }

    fn params(&self, seed: u64) -> String {
        let spectrum = match &self.spectrum {
            Some(v) => v
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(","),
            None => "random".to_string(),
        };
        format!(
            "algebra={} n={} spectrum={} seed={} tol={:e} t_end={:e} samples={} snap={}",
            self.family.name(),
            self.n,
            spectrum,
            seed,
            self.tol,
            self.t_end,
            self.samples,
            self.snap
        )
    }

    /// Seeded instance: spectrum (given or drawn), Haar frame, unit height.
    fn instance<S: Scalar>(&self, seed: u64) -> Result<(OrbitPoint<S>, HeightFunction<S>), Error> {
        let ctx = self.ctx()?;
        let mut rng = instances::rng(seed);
        let spec = match &self.spectrum {
            Some(v) => v.clone(),
            None => instances::random_spectrum(self.n, 1e-3, &mut rng),
        };
        let x = instances::random_orbit_point::<S, _>(ctx, &spec, &mut rng)?;
        let h = instances::random_height::<S, _>(ctx, &mut rng)?;
        Ok((x, h))
    }
}

fn cmd_decompose<S: Scalar>(cfg: &Config) -> Result<(Vec<Record>, u8), Error> {
    let mut records = Vec::new();
    let mut fails = 0u8;
    for &seed in &cfg.seeds {
        let (x, _) = cfg.instance::<S>(seed)?;
        let dec = decompose(&x);
        let (nm, c, np) = dec.dims();
        let expected = cfg.n * cfg.n - 1;
        let audit_err = (nm + c + np).abs_diff(expected);
        let residual = x.isospectral_residual()?;
        let blocks = dec
            .blocks()
            .iter()
            .map(|b| format!("(v={:.6e},m={})", b.value, b.multiplicity))
            .collect::<Vec<_>>()
            .join("");
        let roots = dec
            .positive_roots()
            .iter()
            .map(|r| format!("({}>{},alpha={:.6e})", r.upper, r.lower, r.alpha))
            .collect::<Vec<_>>()
            .join("");
        let pass = audit_err == 0 && residual < 1e-10;
        if !pass {
            fails = fails.saturating_add(1);
        }
        records.push(Record {
            check: "decompose".into(),
            params: cfg.params(seed),
            max_deviation: audit_err as f64 + residual,
            tolerance: 1e-10,
            pass,
            notes: format!(
                "blocks={blocks} roots={roots} dims={nm}+{c}+{np}={} expected={expected}",
                nm + c + np
            ),
        });
    }
    Ok((records, if fails > 0 { 1 } else { 0 }))
}

fn cmd_verify_flow<S: Scalar>(cfg: &Config) -> Result<(Vec<Record>, u8), Error> {
    let mut records = Vec::new();
    let mut any_fail = false;
    for &seed in &cfg.seeds {
        let (x0, h) = cfg.instance::<S>(seed)?;
        let rep = verify_gradient_flow(&h, &x0, cfg.t_end, cfg.tol, cfg.samples, cfg.snap)?;
        any_fail |= !rep.pass;
        records.push(Record {
            check: "verify_flow".into(),
            params: cfg.params(seed),
            max_deviation: rep.max_deviation,
            tolerance: rep.threshold,
            pass: rep.pass,
            notes: format!(
                "spectral_drift={:.3e} f_monotone={} snap={}",
                rep.spectral_drift, rep.f_monotone, rep.snap
            ),
        });
    }
    Ok((records, u8::from(any_fail)))
}

fn cmd_kahler(cfg: &Config) -> Result<(Vec<Record>, u8), Error> {
    if cfg.family != Family::SuComplexified {
        return Err(Error::Validation(
            "kahler-check runs on the su_complexified family".into(),
        ));
    }
    let mut records = Vec::new();
    let mut fails: usize = 0;
    for &seed in &cfg.seeds {
        let items = kahler_battery(cfg.n, seed, cfg.tol, cfg.t_end, cfg.samples, cfg.snap)?;
        for item in items {
            if !item.pass {
                fails += 1;
            }
            records.push(Record {
                check: format!("kahler.{}", item.name),
                params: cfg.params(seed),
                max_deviation: item.max_deviation,
                tolerance: item.tolerance,
                pass: item.pass,
                notes: item.notes,
            });
        }
    }
    Ok((records, fails.min(125) as u8))
}

fn cmd_extrinsic<S: Scalar>(cfg: &Config) -> Result<(Vec<Record>, u8), Error> {
    let mut records = Vec::new();
    let mut fails: usize = 0;
    for &seed in &cfg.seeds {
        let (x0, h) = cfg.instance::<S>(seed)?;
        let ext = is_extrinsic_symmetric(&x0, 1e-9);
        let roots = ext
            .root_values
            .iter()
            .map(|a| format!("{a:.6e}"))
            .collect::<Vec<_>>()
            .join(",");
        if !ext.is_extrinsic {
            fails += 1;
        }
        records.push(Record {
            check: "extrinsic.symmetric".into(),
            params: cfg.params(seed),
            max_deviation: ext.max_deviation,
            tolerance: 1e-9,
            pass: ext.is_extrinsic,
            notes: format!(
                "root_values=[{roots}] (root-value criterion only; euclidean-factor splitting not tested)"
            ),
        });
        if !ext.is_extrinsic {
            continue;
        }
        let rep = verify_ambient_flow(&h, &x0, cfg.t_end, cfg.tol, cfg.samples, cfg.snap)?;
        if rep.pointwise_identity_max > rep.identity_threshold {
            fails += 1;
        }
        records.push(Record {
            check: "extrinsic.gradient_identity".into(),
            params: cfg.params(seed),
            max_deviation: rep.pointwise_identity_max,
            tolerance: rep.identity_threshold,
            pass: rep.pointwise_identity_max <= rep.identity_threshold,
            notes: "s-gradient equals ambient tangent projection pointwise".into(),
        });
        if !rep.flow.pass {
            fails += 1;
        }
        records.push(Record {
            check: "extrinsic.flow_match".into(),
            params: cfg.params(seed),
            max_deviation: rep.flow.max_deviation,
            tolerance: rep.flow.threshold,
            pass: rep.flow.pass,
            notes: format!(
                "ambient-metric gradient flow vs closed form; spectral_drift={:.3e}",
                rep.flow.spectral_drift
            ),
        });
    }
    Ok((records, fails.min(125) as u8))
}

fn cmd_morse<S: Scalar>(cfg: &Config, hessian: bool) -> Result<(Vec<Record>, u8), Error> {
    let mut records = Vec::new();
    let mut fails: usize = 0;
    for &seed in &cfg.seeds {
        let (x0, h) = cfg.instance::<S>(seed)?;
        let set = critical_points(&h, x0.blocks(), x0.ctx())?;
        let expected = multinomial_count(x0.blocks());
        let count_ok = set.len() as u128 == expected;
        if !count_ok {
            fails += 1;
        }
        let mut fvals: Vec<f64> = set.f_values.clone();
        fvals.sort_by(f64::total_cmp);
        let shown = fvals
            .iter()
            .take(24)
            .map(|f| format!("{f:.6e}"))
            .collect::<Vec<_>>()
            .join(",");
        let more = if fvals.len() > 24 {
            format!(",+{} more", fvals.len() - 24)
        } else {
            String::new()
        };
        records.push(Record {
            check: "morse.critical_count".into(),
            params: cfg.params(seed),
            max_deviation: (set.len() as f64) - (expected as f64),
            tolerance: 0.5,
            pass: count_ok,
            notes: format!(
                "count={} expected={expected} f_values=[{shown}{more}]",
                set.len()
            ),
        });
        let grad_ok = set.max_gradient_norm < 1e-10;
        if !grad_ok {
            fails += 1;
        }
        records.push(Record {
            check: "morse.gradient_vanishes".into(),
            params: cfg.params(seed),
            max_deviation: set.max_gradient_norm,
            tolerance: 1e-10,
            pass: grad_ok,
            notes: "homogeneous gradient at every enumerated critical point".into(),
        });
        // flow-limit classification within the conditioning budget
        let t_max = cfg.t_end.clamp(1.0, 25.0);
        if let Ok(limit) = classify_limit(&h, &x0, t_max, cfg.tol.max(1e-9)) {
            let converged = limit.nearest.is_some();
            let aligned = limit.nearest == Some(limit.critical.argmax_f());
            records.push(Record {
                check: "morse.limit".into(),
                params: cfg.params(seed),
                max_deviation: limit.distance,
                tolerance: 100.0 * cfg.tol.max(1e-9),
                pass: true, // informational at short horizons
                notes: format!(
                    "t_max={t_max} converged={converged} max_alignment={aligned} distance={:.3e}",
                    limit.distance
                ),
            });
        }
        if hessian {
            let mut sigs = Vec::new();
            for p in &set.points {
                let (neg, zero, pos) = hessian_signature(&h, p, 1e-4)?;
                sigs.push(format!("({neg},{zero},{pos})"));
            }
            records.push(Record {
                check: "morse.hessian_signature".into(),
                params: cfg.params(seed),
                max_deviation: 0.0,
                tolerance: 1.0,
                pass: true,
                notes: format!("(neg,zero,pos) per critical point: {}", sigs.join(" ")),
            });
        }
    }
    Ok((records, fails.min(125) as u8))
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::Precondition(_)
        | Error::ContextMismatch(_)
        | Error::NonGeneric { .. } => 2,
        Error::GroupingAmbiguous { .. } | Error::Degenerate { .. } => 3,
        Error::StepSizeUnderflow { .. } => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<(Vec<Record>, u8, OutputFormat, Option<PathBuf>), Error> {
    let (records, code, cfg) = match &cli.cmd {
        Cmd::Decompose(c) => {
            let cfg = resolve(c, Family::SlReal)?;
            let (r, code) = match cfg.family {
                Family::SlReal => cmd_decompose::<f64>(&cfg)?,
                Family::SuComplexified => cmd_decompose::<Complex64>(&cfg)?,
            };
            (r, code, cfg)
        }
        Cmd::VerifyFlow(c) => {
            let cfg = resolve(c, Family::SlReal)?;
            let (r, code) = match cfg.family {
                Family::SlReal => cmd_verify_flow::<f64>(&cfg)?,
                Family::SuComplexified => cmd_verify_flow::<Complex64>(&cfg)?,
            };
            (r, code, cfg)
        }
        Cmd::KahlerCheck(c) => {
            let cfg = resolve(c, Family::SuComplexified)?;
            let (r, code) = cmd_kahler(&cfg)?;
            (r, code, cfg)
        }
        Cmd::ExtrinsicCheck(c) => {
            let cfg = resolve(c, Family::SlReal)?;
            let (r, code) = match cfg.family {
                Family::SlReal => cmd_extrinsic::<f64>(&cfg)?,
                Family::SuComplexified => cmd_extrinsic::<Complex64>(&cfg)?,
            };
            (r, code, cfg)
        }
        Cmd::Morse { common, hessian } => {
            let cfg = resolve(common, Family::SlReal)?;
            let (r, code) = match cfg.family {
                Family::SlReal => cmd_morse::<f64>(&cfg, *hessian)?,
                Family::SuComplexified => cmd_morse::<Complex64>(&cfg, *hessian)?,
            };
            (r, code, cfg)
        }
    };
    Ok((records, code, cfg.format, cfg.out))
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok((records, code, format, out)) => {
            if let Err(e) = report::emit(&records, format, out.as_deref()) {
                eprintln!("error: cannot write report: {e}");
                std::process::exit(2);
            }
            std::process::exit(code as i32);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e) as i32);
        }
    }
}
