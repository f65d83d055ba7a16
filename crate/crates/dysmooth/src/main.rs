//! The `dysmooth` command line: analyze / certify / cascade / verify.
//!
//! Exit codes: 0 success, 2 validation error, 3 capacity error, 4 internal
//! invariant violation. Errors are also printed as single-line JSON on
//! stderr. Identical configs (including seed) produce byte-identical JSON.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dysmooth::io::{decay_svg, load_samples, profile_csv};
use dysmooth::report::{
    error_line, weighting_name, AnalyzeReport, Artifact, CascadeJson, CascadeReportJson,
    CertifyReport, CertifyRow, ConfigEcho, FitJson, GeometricJson, ProfileJson, SaturationJson,
    VerifyJson, VerifyReportJson,
};
use dysmooth_core::analysis::{
    fit_exponent, geometric_decay_check, saturation_test, theorem_verification,
};
use dysmooth_core::cascade::cascade_reconstruct;
use dysmooth_core::certificates::{constant_ledger, lemma_constant_dd};
use dysmooth_core::mesh::{Catalog, FunctionSource};
use dysmooth_core::moduli::{modulus_profile, Weighting};
use dysmooth_core::{Error, Result};

#[derive(Parser)]
#[command(name = "dysmooth", version, about = "Discrete moduli of smoothness on dyadic meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a modulus profile with decay fit and classification
    Analyze(AnalyzeArgs),
    /// Exact determinant certificates and constructive lemma constants
    Certify(CertifyArgs),
    /// Spline-cascade reconstruction of one finite difference
    Cascade(CascadeArgs),
    /// Compare continuous-modulus estimators against the assembled bounds
    Verify(VerifyArgs),
}

/// Where the function comes from: a catalog entry or a sample file.
#[derive(Args)]
struct SourceArgs {
    /// Catalog entry: poly, abs-power, radial-power, diag-bilinear, weierstrass
    #[arg(long, conflicts_with = "input")]
    function: Option<String>,
    /// Sample JSON file instead of a catalog function
    #[arg(long)]
    input: Option<PathBuf>,
    /// Dimension (required with --function)
    #[arg(long)]
    d: Option<usize>,
    /// Axis for abs-power, 1-based
    #[arg(long, default_value_t = 1)]
    axis: usize,
    /// Center: scalar for abs-power, comma-separated point for radial-power
    #[arg(long)]
    center: Option<String>,
    /// Exponent for abs-power / radial-power
    #[arg(long)]
    alpha: Option<f64>,
    /// Poly terms as `e1,..,ed:coeff` joined by `;`
    #[arg(long)]
    coeffs: Option<String>,
    /// Weierstrass amplitude base, in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Weierstrass frequency base, with a*b >= 1
    #[arg(long, default_value_t = 3.0)]
    b: f64,
    /// Weierstrass truncation length
    #[arg(long, default_value_t = 12)]
    terms: u32,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Difference order
    #[arg(long)]
    r: u32,
    /// Level range `a..b` (inclusive) or a single level
    #[arg(long)]
    n: String,
    /// Output format: json, csv (profile rows) or svg (decay chart)
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Order range `a..b` (inclusive) or a single order
    #[arg(long)]
    r: String,
    /// Largest dimension for the assembled constants
    #[arg(long, default_value_t = 3)]
    d_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CascadeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    r: u32,
    /// Mesh level of the basic cube
    #[arg(long)]
    n: String,
    /// Base point, comma-separated coordinates
    #[arg(long)]
    u: String,
    /// Axis of the difference step, 1-based
    #[arg(long, default_value_t = 1)]
    along: usize,
    /// Step size, in (0, 2^-n-1]
    #[arg(long)]
    t: f64,
    /// Number of refinement stages
    #[arg(long, default_value_t = 6)]
    stages: u32,
    /// Output format: json or csv (per-stage rows)
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    r: u32,
    /// Level range `a..b` (inclusive)
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random directions for the omega estimator (min 2d)
    #[arg(long, default_value_t = 16)]
    dirs: usize,
    /// Base lattice resolution of the estimators
    #[arg(long, default_value_t = 16)]
    base_res: u32,
    /// Middle-sum weighting: theorem or proof
    #[arg(long, default_value = "theorem")]
    weighting: String,
    /// Output format: json or csv (per-level summary)
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn validation(detail: String) -> Error {
    Error::Validation { detail }
}

fn parse_range(text: &str, what: &str) -> Result<(u32, u32)> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| validation(format!("invalid {what} bound {s:?}")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse_one(a)?, parse_one(b)?),
        None => {
            let v = parse_one(text)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(validation(format!("empty {what} range {text:?}")));
    }
    Ok((lo, hi))
}

fn parse_point(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("invalid {what} coordinate {s:?}")))
        })
        .collect()
}

fn parse_poly_terms(text: &str) -> Result<Vec<(Vec<u32>, f64)>> {
    let mut terms = Vec::new();
    for part in text.split(';') {
        let (exps, coeff) = part
            .split_once(':')
            .ok_or_else(|| validation(format!("poly term {part:?} lacks `exponents:coeff`")))?;
        let exps: Vec<u32> = exps
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| validation(format!("invalid exponent {s:?}")))
            })
            .collect::<Result<_>>()?;
        let coeff: f64 = coeff
            .trim()
            .parse()
            .map_err(|_| validation(format!("invalid coefficient {coeff:?}")))?;
        terms.push((exps, coeff));
    }
    Ok(terms)
}

fn parse_weighting(text: &str) -> Result<Weighting> {
    match text {
        "theorem" | "theorem-statement" => Ok(Weighting::TheoremStatement),
        "proof" | "proof-final-line" => Ok(Weighting::ProofFinalLine),
        other => Err(validation(format!(
            "unknown weighting {other:?}; use theorem or proof"
        ))),
    }
}

/// Worker cap from DYSMOOTH_THREADS (0 = auto). Execution is sequential
/// with deterministic reduction order; the cap is validated and echoed.
fn thread_cap() -> Result<usize> {
    match std::env::var("DYSMOOTH_THREADS") {
        Err(_) => Ok(1),
        Ok(text) => {
            let v: usize = text
                .parse()
                .map_err(|_| validation(format!("DYSMOOTH_THREADS={text:?} is not a number")))?;
            Ok(if v == 0 { 1 } else { v })
        }
    }
}

struct BuiltSource {
    source: FunctionSource,
    /// Human-readable description echoed into reports.
    description: Option<String>,
    input: Option<String>,
}

fn build_source(args: &SourceArgs) -> Result<BuiltSource> {
    if let Some(path) = &args.input {
        let field = load_samples(path)?;
        if let Some(d) = args.d {
            if d != field.grid().dimension() {
                return Err(validation(format!(
                    "--d {d} contradicts the file's dimension {}",
                    field.grid().dimension()
                )));
            }
        }
        return Ok(BuiltSource {
            source: FunctionSource::Sampled(field),
            description: None,
            input: Some(path.display().to_string()),
        });
    }
    let name = args
        .function
        .as_deref()
        .ok_or_else(|| validation("one of --function or --input is required".into()))?;
    let d = args
        .d
        .ok_or_else(|| validation("--d is required with --function".into()))?;
    let center_point = |dim: usize| -> Result<Vec<f64>> {
        match &args.center {
            None => Ok(vec![0.5; dim]),
            Some(text) => {
                let p = parse_point(text, "center")?;
                if p.len() == dim {
                    Ok(p)
                } else {
                    Err(validation(format!(
                        "center needs {dim} coordinates, got {}",
                        p.len()
                    )))
                }
            }
        }
    };
    let f = match name {
        "poly" => {
            let text = args
                .coeffs
                .as_deref()
                .ok_or_else(|| validation("poly needs --coeffs".into()))?;
            Catalog::poly(parse_poly_terms(text)?)
        }
        "abs-power" => {
            if args.axis < 1 || args.axis > d {
                return Err(validation(format!(
                    "--axis {} out of range 1..={d}",
                    args.axis
                )));
            }
            Catalog::AbsPower {
                axis: args.axis - 1,
                center: center_point(1)?[0],
                alpha: args
                    .alpha
                    .ok_or_else(|| validation("abs-power needs --alpha".into()))?,
            }
        }
        "radial-power" => Catalog::RadialPower {
            center: center_point(d)?,
            alpha: args
                .alpha
                .ok_or_else(|| validation("radial-power needs --alpha".into()))?,
        },
        "diag-bilinear" => Catalog::DiagBilinear,
        "weierstrass" | "weierstrass-truncated" => Catalog::WeierstrassTruncated {
            a: args.a,
            b: args.b,
            terms: args.terms,
        },
        other => {
            return Err(validation(format!(
                "unknown function {other:?}; available: poly, abs-power, radial-power, diag-bilinear, weierstrass"
            )))
        }
    };
    let description = format!("{name}{}", describe_params(name, args));
    Ok(BuiltSource {
        source: FunctionSource::analytic(d, f)?,
        description: Some(description),
        input: None,
    })
}

fn describe_params(name: &str, args: &SourceArgs) -> String {
    match name {
        "poly" => format!("({})", args.coeffs.as_deref().unwrap_or("")),
        "abs-power" => format!(
            "(axis={}, center={}, alpha={})",
            args.axis,
            args.center.as_deref().unwrap_or("0.5"),
            args.alpha.unwrap_or(f64::NAN)
        ),
        "radial-power" => format!(
            "(center={}, alpha={})",
            args.center.as_deref().unwrap_or("0.5.."),
            args.alpha.unwrap_or(f64::NAN)
        ),
        "weierstrass" | "weierstrass-truncated" => {
            format!("(a={}, b={}, terms={})", args.a, args.b, args.terms)
        }
        _ => String::new(),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            validation(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let threads = thread_cap()?;
    let built = build_source(&args.source)?;
    let (n_min, n_max) = parse_range(&args.n, "level")?;
    let profile = modulus_profile(&built.source, args.r, n_min, n_max)?;
    let (fit, fit_error) = match fit_exponent(&profile) {
        Ok(f) => (Some(FitJson::from_core(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let saturation = saturation_test(&profile, args.r);
    let (geometric, geometric_error) = match geometric_decay_check(&profile, args.r) {
        Ok(g) => (Some(GeometricJson::from_core(&g)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let text = match args.format.as_str() {
        "json" => {
            let report = AnalyzeReport {
                artifact: Artifact::default(),
                config: ConfigEcho {
                    command: "analyze".into(),
                    function: built.description,
                    input: built.input,
                    r: Some(args.r),
                    d: Some(profile.d),
                    n_min: Some(n_min),
                    n_max: Some(n_max),
                    threads,
                    ..ConfigEcho::default()
                },
                profile: ProfileJson::from_core(&profile),
                fit,
                fit_error,
                saturation: SaturationJson::from_core(&saturation),
                geometric_decay: geometric,
                geometric_decay_error: geometric_error,
            };
            json_line(&report)
        }
        "csv" => profile_csv(&profile),
        "svg" => {
            let core_fit = fit_exponent(&profile).ok();
            decay_svg(&profile, core_fit.as_ref())
        }
        other => return Err(validation(format!("unknown format {other:?}"))),
    };
    emit(&text, args.out.as_deref())
}

fn run_certify(args: CertifyArgs) -> Result<()> {
    let threads = thread_cap()?;
    let (r_min, r_max) = parse_range(&args.r, "order")?;
    let mut rows = Vec::new();
    for r in r_min..=r_max {
        rows.push(CertifyRow::from_core(&constant_ledger(r, args.d_max)?));
    }
    let report = CertifyReport {
        artifact: Artifact::default(),
        config: ConfigEcho {
            command: "certify".into(),
            r: Some(r_min),
            r_max: Some(r_max),
            d_max: Some(args.d_max),
            threads,
            ..ConfigEcho::default()
        },
        rows,
    };
    emit(&json_line(&report), args.out.as_deref())
}

fn run_cascade(args: CascadeArgs) -> Result<()> {
    let threads = thread_cap()?;
    let built = build_source(&args.source)?;
    let (n, n_hi) = parse_range(&args.n, "level")?;
    if n != n_hi {
        return Err(validation("cascade takes a single level, not a range".into()));
    }
    let u = parse_point(&args.u, "base point")?;
    let d = built.source.dimension();
    if u.len() != d {
        return Err(validation(format!(
            "base point needs {d} coordinates, got {}",
            u.len()
        )));
    }
    if args.along < 1 || args.along > d {
        return Err(validation(format!(
            "--along {} out of range 1..={d}",
            args.along
        )));
    }
    let axis = args.along - 1;
    let report = cascade_reconstruct(&built.source, &u, axis, args.t, args.r, n, args.stages)?;
    let constant = lemma_constant_dd(args.r, d)?.constant();
    // Psi_r(n + k - 1) for the stage bounds
    let psi: Vec<f64> = if args.stages > 0 {
        let profile = modulus_profile(&built.source, args.r, n, n + args.stages - 1)?;
        profile.psi.clone()
    } else {
        Vec::new()
    };
    let cascade = CascadeJson::from_core(&report, constant, &psi);
    let text = match args.format.as_str() {
        "json" => json_line(&CascadeReportJson {
            artifact: Artifact::default(),
            config: ConfigEcho {
                command: "cascade".into(),
                function: built.description,
                input: built.input,
                r: Some(args.r),
                d: Some(d),
                n_min: Some(n),
                n_max: Some(n),
                u: Some(u),
                along: Some(args.along),
                t: Some(args.t),
                stages: Some(args.stages),
                threads,
                ..ConfigEcho::default()
            },
            cascade,
        }),
        "csv" => cascade.stage_csv(),
        other => return Err(validation(format!("unknown format {other:?}"))),
    };
    emit(&text, args.out.as_deref())
}

fn run_verify(args: VerifyArgs) -> Result<()> {
    let threads = thread_cap()?;
    let built = build_source(&args.source)?;
    let (n_lo, n_hi) = parse_range(&args.n, "level")?;
    let weighting = parse_weighting(&args.weighting)?;
    let report = theorem_verification(
        &built.source,
        args.r,
        n_lo,
        n_hi,
        args.seed,
        args.dirs,
        args.base_res,
        weighting,
    )?;
    let verification = VerifyJson::from_core(&report);
    let text = match args.format.as_str() {
        "json" => json_line(&VerifyReportJson {
            artifact: Artifact::default(),
            config: ConfigEcho {
                command: "verify".into(),
                function: built.description,
                input: built.input,
                r: Some(args.r),
                d: Some(report.d),
                n_min: Some(n_lo),
                n_max: Some(n_hi),
                weighting: Some(weighting_name(weighting).into()),
                seed: Some(args.seed),
                dirs: Some(args.dirs),
                base_res: Some(args.base_res),
                threads,
                ..ConfigEcho::default()
            },
            verification,
        }),
        "csv" => verification.summary_csv(),
        other => return Err(validation(format!("unknown format {other:?}"))),
    };
    emit(&text, args.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Certify(args) => run_certify(args),
        Command::Cascade(args) => run_cascade(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let err = validation(e.to_string().lines().next().unwrap_or("bad arguments").into());
            eprintln!("{}", error_line(&err));
            std::process::exit(err.exit_code());
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("{}", error_line(&err));
        std::process::exit(err.exit_code());
    }
}
