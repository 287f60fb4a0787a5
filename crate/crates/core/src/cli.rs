//! Command-line front end: `spectrum`, `verify`, `profile` and `trace`.
//!
//! A potential is given either by inline flags (`--family`, `--variant`,
//! couplings, `--alpha` or `--period`, `--q`, `--hbar`, `--mass`) or by a
//! JSON file passed with `--spec`. The JSON schema is the serialized
//! [`PotentialSpec`]:
//!
//! ```json
//! {
//!   "family": "manning-rosen",
//!   "variant": "nonpt",
//!   "params": { "A1": 1.0, "A2": 0.0, "B1": 1.0, "B2": 0.0, "alpha": 1.0, "q": 1.0 },
//!   "hbar": 1.0,
//!   "mass": 0.5
//! }
//! ```
//!
//! Couplings are plain numbers or `[re, im]` pairs. Only the couplings used by
//! the family/variant pair may appear. The defaults `hbar = 1`, `mass = 0.5`
//! give `hbar^2 / 2m = 1`.
//!
//! Data files are deterministic. With `--out FILE` the data is written
//! atomically and run metadata goes to the sidecar `FILE.meta.json`.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 validity warnings
//! under `--strict`, 3 numerical non-convergence or no admissible branch,
//! 4 verification mismatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::math::{re, C64};
use crate::nu::{self, HypergeometricForm, NuTrace, TauTildeForm};
use crate::oracle::{self, ConjugationReport, LevelMatch};
use crate::potentials::{
    self, DomainKind, Family, Params, PotentialSpec, PtSymmetryReport, Variant,
};
use crate::spectra::{self, LevelEntry, SpectrumResult, DEFAULT_N_MAX};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STRICT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// Default number of profile samples.
pub const DEFAULT_POINTS: usize = 801;
/// Default grid size of `verify`.
pub const DEFAULT_GRID: usize = 3000;
/// Default truncation length of `verify`.
pub const DEFAULT_LENGTH: f64 = 20.0;
/// Default relative tolerance of the conjugation-pair check.
pub const DEFAULT_CONJUGATION_TOL: f64 = 1e-8;
/// A matched level passes when its deviation from the Richardson value is
/// within this multiple of the Richardson step.
pub const BOUND_FACTOR: f64 = 10.0;

#[derive(Debug, Parser)]
#[command(
    name = "nuspec",
    version,
    about = "Spectra of Scarf and Manning-Rosen potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form (or pipeline) energy levels.
    Spectrum(SpectrumArgs),
    /// Formula levels against the finite-difference oracle.
    Verify(VerifyArgs),
    /// Potential samples on a grid, including the fig1..fig8 presets.
    Profile(ProfileArgs),
    /// Derivation record of the Nikiforov-Uvarov pipeline.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed-form expressions.
    ClosedForm,
    /// Secant solution of the quantization condition.
    Numeric,
}

/// Parameter sets of the eight reference profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Potential family.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Variant of the family.
    #[arg(long, value_enum, default_value = "base")]
    pub variant: Variant,
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long = "A1", allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long = "A2", allow_negative_numbers = true)]
    pub a2: Option<f64>,
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long = "B1", allow_negative_numbers = true)]
    pub b1: Option<f64>,
    #[arg(long = "B2", allow_negative_numbers = true)]
    pub b2: Option<f64>,
    #[arg(long = "V0", allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long = "V1", allow_negative_numbers = true)]
    pub v1: Option<f64>,
    #[arg(long = "V2", allow_negative_numbers = true)]
    pub v2: Option<f64>,
    /// Inverse length scale (default 1 unless --period is given).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "period")]
    pub alpha: Option<f64>,
    /// Period of the trigonometric Scarf potential (alpha = pi / period).
    #[arg(long)]
    pub period: Option<f64>,
    /// Deformation parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mass: f64,
    /// Potential spec as a JSON file instead of inline flags.
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with_all = [
            "family", "a", "a1", "a2", "b", "b1", "b2", "v0", "v1", "v2",
            "alpha", "period", "q", "hbar", "mass",
        ]
    )]
    pub spec: Option<PathBuf>,
    /// Also write the canonical JSON of the potential spec to this file.
    #[arg(long, value_name = "FILE")]
    pub save_spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (stdout when absent).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Highest level index.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: u32,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub method: Method,
    /// Exit with code 2 when the parameters violate a validity condition.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 5)]
    pub n_max: u32,
    /// Interior grid points of the fine grid (the coarse grid has half).
    #[arg(long = "N", default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Truncation length of unbounded domains.
    #[arg(long = "L", default_value_t = DEFAULT_LENGTH)]
    pub length: f64,
    /// Relative tolerance of the conjugation-pair check.
    #[arg(long, default_value_t = DEFAULT_CONJUGATION_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Reference parameter set (replaces the potential flags).
    #[arg(
        long,
        value_enum,
        conflicts_with_all = [
            "family", "spec", "a", "a1", "a2", "b", "b1", "b2", "v0", "v1", "v2",
            "alpha", "period", "q",
        ]
    )]
    pub preset: Option<Preset>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    /// Truncation length used for the default range of unbounded domains.
    #[arg(long = "L", default_value_t = 10.0)]
    pub length: f64,
    /// Drop samples that fall on a pole instead of failing.
    #[arg(long)]
    pub skip_poles: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Hypergeometric form as JSON (`sigma`, `tau_tilde`, `sigma_tilde`), traced without a potential.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["family", "spec"])]
    pub form: Option<PathBuf>,
    /// Level whose quantization condition is solved.
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// Trace at this reduced energy instead of solving for a level.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Imaginary part of `--epsilon`.
    #[arg(
        long,
        allow_negative_numbers = true,
        requires = "epsilon",
        default_value_t = 0.0
    )]
    pub epsilon_im: f64,
    /// First-derivative coefficient of the Manning-Rosen reduced equation.
    #[arg(long, value_enum, default_value = "printed")]
    pub tau_form: TauTildeForm,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    fn from_error(error: Error) -> Self {
        Self {
            code: exit_code(&error),
            error: error.into(),
        }
    }
}

/// Exit code associated with a library error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::RootNotConverged { .. }
        | Error::BranchMismatch { .. }
        | Error::EigenNotConverged { .. }
        | Error::CertificationFailed { .. }
        | Error::NoAdmissibleBranch { .. }
        | Error::DegenerateDiscriminant
        | Error::NonIntegrableWeight(_)
        | Error::NotNormalizable(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &argv) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli, argv: &[String]) -> CmdResult {
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, argv),
        Command::Verify(a) => cmd_verify(a, argv),
        Command::Profile(a) => cmd_profile(a, argv),
        Command::Trace(a) => cmd_trace(a, argv),
    }
}

fn flag_for(message: &str) -> Option<String> {
    if let Some(rest) = message.split("parameter ").nth(1) {
        let name: String = rest
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect();
        if !name.is_empty() {
            return Some(format!("--{name}"));
        }
    }
    let words: Vec<&str> = message
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    for (word, flag) in [
        ("period", "--period"),
        ("alpha", "--alpha"),
        ("q", "--q"),
        ("hbar", "--hbar"),
        ("mass", "--mass"),
    ] {
        if words.contains(&word) {
            return Some(flag.to_string());
        }
    }
    None
}

impl SpecArgs {
    /// Builds and validates the potential spec.
    pub fn resolve(&self) -> std::result::Result<PotentialSpec, Failure> {
        let spec = if let Some(path) = &self.spec {
            let text = fs::read_to_string(path)
                .with_context(|| format!("--spec: cannot read {}", path.display()))
                .map_err(Failure::usage)?;
            PotentialSpec::from_json(&text)
                .map_err(|e| Failure::usage(anyhow!("--spec {}: {e}", path.display())))?
        } else {
            let family = self
                .family
                .ok_or_else(|| Failure::usage(anyhow!("--family is required (or --spec FILE)")))?;
            let params = Params {
                a: self.a.map(re),
                a1: self.a1.map(re),
                a2: self.a2.map(re),
                b: self.b.map(re),
                b1: self.b1.map(re),
                b2: self.b2.map(re),
                v0: self.v0.map(re),
                v1: self.v1.map(re),
                v2: self.v2.map(re),
                alpha: match self.period {
                    Some(_) => None,
                    None => Some(self.alpha.unwrap_or(1.0)),
                },
                q: self.q,
                period: self.period,
            };
            let spec = PotentialSpec {
                family,
                variant: self.variant,
                params,
                hbar: self.hbar,
                mass: self.mass,
            };
            if let Err(e) = spec.validate() {
                let message = e.to_string();
                return Err(Failure::usage(match flag_for(&message) {
                    Some(flag) => anyhow!("{flag}: {message}"),
                    None => anyhow!("{message}"),
                }));
            }
            spec
        };
        if let Some(path) = &self.save_spec {
            write_atomic(path, spec.to_canonical_json().as_bytes()).map_err(Failure::usage)?;
        }
        Ok(spec)
    }
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f =
        fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}

/// Path of the metadata sidecar of an output file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    command: &'a str,
    version: &'a str,
    created_unix: u64,
    argv: &'a [String],
    format: &'a str,
    spec: Option<&'a PotentialSpec>,
}

fn emit(
    out: Option<&Path>,
    data: &str,
    command: &str,
    format: Format,
    argv: &[String],
    spec: Option<&PotentialSpec>,
) -> std::result::Result<(), Failure> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(data.as_bytes())
                .and_then(|_| stdout.flush())
                .context("cannot write to stdout")
                .map_err(Failure::usage)?;
        }
        Some(path) => {
            write_atomic(path, data.as_bytes()).map_err(Failure::usage)?;
            let meta = RunMetadata {
                command,
                version: env!("CARGO_PKG_VERSION"),
                created_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                argv,
                format: match format {
                    Format::Json => "json",
                    Format::Csv => "csv",
                },
                spec,
            };
            let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
            write_atomic(&sidecar_path(path), text.as_bytes()).map_err(Failure::usage)?;
        }
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Computes the spectrum of the potential.
pub fn cmd_spectrum(args: &SpectrumArgs, argv: &[String]) -> CmdResult {
    let spec = args.spec.resolve()?;
    let result = match args.method {
        Method::ClosedForm => spectra::closed_form_spectrum(&spec, args.n_max),
        Method::Numeric => nu::solve_spectrum_numeric(&spec, args.n_max),
    }
    .map_err(Failure::from_error)?;
    let data = match args.output.format {
        Format::Json => with_newline(result.to_json()),
        Format::Csv => result.to_csv(),
    };
    emit(
        args.output.out.as_deref(),
        &data,
        "spectrum",
        args.output.format,
        argv,
        Some(&spec),
    )?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if args.strict && !result.warnings.is_empty() {
        return Ok(EXIT_STRICT);
    }
    Ok(EXIT_OK)
}

/// Richardson check of one matched level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBound {
    pub n: u32,
    pub formula: C64,
    pub coarse: C64,
    pub fine: C64,
    pub extrapolated: C64,
    /// `BOUND_FACTOR * |extrapolated - fine|` plus a roundoff floor.
    pub bound: f64,
    pub deviation: f64,
    pub within: bool,
}

/// Output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub spec: PotentialSpec,
    pub domain: potentials::DomainSpec,
    pub sizes: [usize; 2],
    pub summary: String,
    pub formula: LevelMatch,
    pub bounds: Vec<LevelBound>,
    /// Levels of the numerical pipeline, as far as it converges.
    pub pipeline: Vec<LevelEntry>,
    pub pipeline_match: Option<LevelMatch>,
    pub pipeline_stop: Option<String>,
    pub conjugation: Option<ConjugationReport>,
    pub pt_symmetry: Option<PtSymmetryReport>,
    pub convention_note: String,
    pub failures: Vec<String>,
}

impl VerifyReport {
    /// CSV projection `n,re_formula,im_formula,re_oracle,im_oracle,rel_err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re_formula,im_formula,re_oracle,im_oracle,rel_err\n");
        for p in &self.formula.pairs {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.n, p.formula.re, p.formula.im, p.oracle.re, p.oracle.im, p.rel_err
            ));
        }
        out
    }
}

fn nearest(values: &[C64], z: C64) -> C64 {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
        .unwrap_or(z)
}

/// Builds the verification report (shared by the CLI and tests).
pub fn verify_report(
    spec: &PotentialSpec,
    n_max: u32,
    grid: usize,
    length: f64,
    tol: f64,
) -> crate::Result<VerifyReport> {
    if !matches!(spec.variant, Variant::Base | Variant::Pt) {
        return Err(Error::UnsupportedVariant(format!(
            "verify supports base and pt variants, not {}",
            spec.variant
        )));
    }
    if grid < 2 * oracle::MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "--N must be at least {}",
            2 * oracle::MIN_POINTS
        )));
    }
    let domain = potentials::natural_domain(spec, length);
    domain.validate()?;
    let formula = spectra::closed_form_spectrum(spec, n_max)?;
    let sizes = [grid / 2, grid];
    let (coarse, fine) = std::thread::scope(|scope| {
        let c = scope.spawn(|| {
            let h = oracle::discretize(spec, &domain, sizes[0])?;
            oracle::eigenvalues(&h).map(|e| (h, e))
        });
        let f = scope.spawn(|| {
            let h = oracle::discretize(spec, &domain, sizes[1])?;
            oracle::eigenvalues(&h).map(|e| (h, e))
        });
        (
            c.join().expect("coarse eigen worker panicked"),
            f.join().expect("fine eigen worker panicked"),
        )
    });
    let (h_coarse, coarse) = coarse?;
    let (h_fine, fine) = fine?;
    let threshold = potentials::continuum_threshold(spec);
    let matched = oracle::match_levels(&formula, &fine, threshold);
    let ratio = h_coarse.h / h_fine.h;
    let mut failures = Vec::new();
    let bounds: Vec<LevelBound> = matched
        .pairs
        .iter()
        .map(|p| {
            let c = nearest(&coarse, p.oracle);
            let extrapolated = oracle::richardson(c, p.oracle, ratio, 2.0);
            let bound =
                BOUND_FACTOR * (extrapolated - p.oracle).norm() + 1e-10 * (1.0 + p.formula.norm());
            let deviation = (p.formula - extrapolated).norm();
            LevelBound {
                n: p.n,
                formula: p.formula,
                coarse: c,
                fine: p.oracle,
                extrapolated,
                bound,
                deviation,
                within: deviation <= bound,
            }
        })
        .collect();
    for b in bounds.iter().filter(|b| !b.within) {
        failures.push(format!(
            "level {}: |formula - extrapolated| = {:e} exceeds bound {:e}",
            b.n, b.deviation, b.bound
        ));
    }
    let mut pipeline = Vec::new();
    let mut pipeline_stop = None;
    for n in 0..=n_max {
        match nu::solve_level(spec, n) {
            Ok(sol) => pipeline.push(LevelEntry::new(n, sol.energy)),
            Err(e) => {
                pipeline_stop = Some(format!("level {n}: {e}"));
                break;
            }
        }
    }
    let pipeline_match = (!pipeline.is_empty()).then(|| {
        let result = SpectrumResult::new(spec, pipeline.clone());
        oracle::match_levels(&result, &fine, threshold)
    });
    let conjugation = (!h_fine.is_real()).then(|| {
        let r = oracle::conjugation_pair_check(&fine, tol);
        if !r.closed {
            failures.push(format!(
                "spectrum not closed under conjugation: mismatch {:e} > {:e}",
                r.max_mismatch, r.tol
            ));
        }
        r
    });
    let pt_symmetry = if spec.variant == Variant::Pt && domain.kind != DomainKind::HalfLine {
        let nodes = h_fine.nodes();
        let scale = h_fine.diagonal.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let r = potentials::pt_symmetry_check(spec, &nodes, 1e-12 * scale)?;
        if !r.verdict {
            failures.push(format!("PT defect {:e} exceeds {:e}", r.max_defect, r.tol));
        }
        Some(r)
    } else {
        None
    };
    let summary = format!(
        "{} matched levels, {} unmatched formula levels, max rel err {}",
        matched.pairs.len(),
        matched.unmatched_formula.len(),
        matched
            .max_rel_err
            .map_or_else(|| "n/a".to_string(), |e| format!("{e:e}"))
    );
    Ok(VerifyReport {
        spec: spec.clone(),
        domain,
        sizes,
        summary,
        formula: matched,
        bounds,
        pipeline,
        pipeline_match,
        pipeline_stop,
        conjugation,
        pt_symmetry,
        convention_note: formula.convention_note,
        failures,
    })
}

/// Compares formula levels with the oracle.
pub fn cmd_verify(args: &VerifyArgs, argv: &[String]) -> CmdResult {
    let spec = args.spec.resolve()?;
    let report = verify_report(&spec, args.n_max, args.grid, args.length, args.tol)
        .map_err(Failure::from_error)?;
    let data = match args.output.format {
        Format::Json => {
            with_newline(serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Format::Csv => report.to_csv(),
    };
    emit(
        args.output.out.as_deref(),
        &data,
        "verify",
        args.output.format,
        argv,
        Some(&spec),
    )?;
    eprintln!("verify: {}", report.summary);
    for f in &report.failures {
        eprintln!("failure: {f}");
    }
    Ok(if report.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}

/// Potential spec and sampling range of a preset.
pub fn preset(p: Preset) -> (PotentialSpec, f64, f64) {
    let hyperbolic = PotentialSpec::hyperbolic_scarf(10.0, 15.0, 10.0, 10.0, 1.0);
    let mr = PotentialSpec::manning_rosen(1.0, 1.0, 1.0, 1.0);
    let to = |s: &PotentialSpec, v| potentials::apply_variant(s, v).expect("preset variant exists");
    let pi = std::f64::consts::PI;
    match p {
        Preset::Fig1 => (hyperbolic, 1.25, 6.0),
        Preset::Fig2 => (
            to(
                &PotentialSpec::hyperbolic_scarf(1.0, 1.0, 1.0, 1.0, 1.0),
                Variant::Pt,
            ),
            -2.0 * pi,
            2.0 * pi,
        ),
        Preset::Fig3 => (to(&hyperbolic, Variant::NonPt), -1.0, 5.0),
        Preset::Fig4 => (
            PotentialSpec::manning_rosen(10.0, 1.0, -4.0, 1.0),
            -4.0,
            4.0,
        ),
        Preset::Fig5 | Preset::Fig6 => (to(&mr, Variant::Pt), 0.1, pi - 0.1),
        Preset::Fig7 | Preset::Fig8 => (to(&mr, Variant::NonPt), -2.0, 4.0),
    }
}

/// Sampled potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub spec: PotentialSpec,
    pub x: Vec<f64>,
    pub re_v: Vec<f64>,
    pub im_v: Vec<f64>,
    /// Sample positions dropped because they hit a pole.
    pub skipped: Vec<f64>,
}

impl Profile {
    /// CSV with header `x,re_V,im_V`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "re_V", "im_V"])
            .expect("in-memory write");
        for ((x, r), i) in self.x.iter().zip(&self.re_v).zip(&self.im_v) {
            w.write_record([x.to_string(), r.to_string(), i.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Samples `V` at `points` equally spaced positions of `[x_min, x_max]`.
pub fn sample_profile(
    spec: &PotentialSpec,
    x_min: f64,
    x_max: f64,
    points: usize,
    skip_poles: bool,
) -> crate::Result<Profile> {
    if points < 2 || !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
        return Err(Error::InvalidArgument(
            "profile needs x_min < x_max and at least two points".into(),
        ));
    }
    let step = (x_max - x_min) / (points - 1) as f64;
    let mut out = Profile {
        spec: spec.clone(),
        x: Vec::with_capacity(points),
        re_v: Vec::with_capacity(points),
        im_v: Vec::with_capacity(points),
        skipped: Vec::new(),
    };
    for i in 0..points {
        let x = if i + 1 == points {
            x_max
        } else {
            x_min + step * i as f64
        };
        match potentials::evaluate(spec, x) {
            Ok(v) => {
                out.x.push(x);
                out.re_v.push(v.re + 0.0);
                out.im_v.push(v.im + 0.0);
            }
            Err(Error::Singularity { .. }) if skip_poles => out.skipped.push(x),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Emits the potential profile.
pub fn cmd_profile(args: &ProfileArgs, argv: &[String]) -> CmdResult {
    let (spec, lo, hi) = match args.preset {
        Some(p) => {
            let (spec, lo, hi) = preset(p);
            if let Some(path) = &args.spec.save_spec {
                write_atomic(path, spec.to_canonical_json().as_bytes()).map_err(Failure::usage)?;
            }
            (spec, lo, hi)
        }
        None => {
            let spec = args.spec.resolve()?;
            let d = potentials::natural_domain(&spec, args.length);
            let inset = 0.01 * d.length();
            (spec, d.left + inset, d.right - inset)
        }
    };
    let x_min = args.x_min.unwrap_or(lo);
    let x_max = args.x_max.unwrap_or(hi);
    let profile = sample_profile(&spec, x_min, x_max, args.points, args.skip_poles).map_err(|e| {
        match e {
            Error::Singularity { x } => Failure::usage(anyhow!(
                "pole at x = {x} inside [{x_min}, {x_max}]; pass --skip-poles or change --x-min/--x-max"
            )),
            other => Failure::from_error(other),
        }
    })?;
    let data = match args.format {
        Format::Csv => profile.to_csv(),
        Format::Json => {
            with_newline(serde_json::to_string_pretty(&profile).expect("profile serializes"))
        }
    };
    emit(
        args.out.as_deref(),
        &data,
        "profile",
        args.format,
        argv,
        Some(&spec),
    )?;
    if !profile.skipped.is_empty() {
        eprintln!(
            "profile: skipped {} sample(s) on poles",
            profile.skipped.len()
        );
    }
    Ok(EXIT_OK)
}

/// Trace of a hypergeometric form without an underlying potential.
pub fn trace_form(form: &HypergeometricForm) -> crate::Result<NuTrace> {
    let ks = nu::k_candidates(form)?;
    nu::select_branch(form, ks)
}

fn trace_json(trace: &NuTrace) -> String {
    with_newline(serde_json::to_string_pretty(trace).expect("trace serializes"))
}

/// Level `n` under the Manning-Rosen `tau~` not used by the trace.
fn other_tau_form_note(spec: &PotentialSpec, n: u32, used: TauTildeForm) -> String {
    let (other, name) = match used {
        TauTildeForm::Printed => (TauTildeForm::Alternative, "1 - 2 q s"),
        TauTildeForm::Alternative => (TauTildeForm::Printed, "1 - q s"),
    };
    match nu::solve_level_with(spec, n, other) {
        Ok(sol) => format!("with tau~ = {name}: E_{n} = {}", sol.energy),
        Err(e) => format!("with tau~ = {name}: {e}"),
    }
}

/// Emits the derivation record; the trace is written even when no branch is admissible.
pub fn cmd_trace(args: &TraceArgs, argv: &[String]) -> CmdResult {
    let (spec, outcome) = if let Some(path) = &args.form {
        let text = fs::read_to_string(path)
            .with_context(|| format!("--form: cannot read {}", path.display()))
            .map_err(Failure::usage)?;
        let form: HypergeometricForm = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(anyhow!("--form {}: {e}", path.display())))?;
        (None, trace_form(&form))
    } else {
        let spec = args.spec.resolve()?;
        let outcome = match args.epsilon {
            Some(eps) => nu::trace_at(&spec, C64::new(eps, args.epsilon_im), args.tau_form),
            None => nu::solve_level_with(&spec, args.n, args.tau_form).map(|s| {
                let mut trace = s.trace;
                if spec.family == Family::ManningRosen {
                    trace
                        .notes
                        .push(other_tau_form_note(&spec, args.n, args.tau_form));
                }
                trace
            }),
        };
        (Some(spec), outcome)
    };
    let (trace, code) = match outcome {
        Ok(t) => (t, EXIT_OK),
        Err(Error::NoAdmissibleBranch { trace }) => {
            eprintln!("error: no admissible branch; all four candidates were rejected");
            (*trace, EXIT_NUMERIC)
        }
        Err(e @ (Error::RootNotConverged { .. } | Error::BranchMismatch { .. })) => {
            let spec = spec.as_ref().expect("root finding needs a spec");
            let seed = spectra::closed_form_energy(spec, args.n)
                .map(|e| nu::energy_map(spec).to_epsilon(e))
                .ok()
                .filter(|z| z.re.is_finite() && z.im.is_finite())
                .unwrap_or_default();
            match nu::trace_at(spec, seed, args.tau_form) {
                Ok(mut t) => {
                    t.notes.push(format!("trace at the seed; {e}"));
                    eprintln!("error: {e}");
                    (t, EXIT_NUMERIC)
                }
                Err(Error::NoAdmissibleBranch { trace }) => {
                    let mut t = *trace;
                    t.notes.push(format!("trace at the seed; {e}"));
                    eprintln!("error: {e}");
                    (t, EXIT_NUMERIC)
                }
                Err(_) => return Err(Failure::from_error(e)),
            }
        }
        Err(e) => return Err(Failure::from_error(e)),
    };
    emit(
        args.out.as_deref(),
        &trace_json(&trace),
        "trace",
        Format::Json,
        argv,
        spec.as_ref(),
    )?;
    Ok(code)
}
