//! Command-line front end: basis dumps, Gram verification, expansions and
//! Parseval reports.
//!
//! Exit codes: 0 success, 1 numerical failure or a check above tolerance,
//! 2 configuration or parse errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use crate::ballbasis::basis;
use crate::error::Error;
use crate::expansion::{
    expand, expand_sampled, parseval_annihilated, parseval_gradient, parseval_sphere, NamedFunction, ParsevalReport,
};
use crate::harmonics::set_cache_dir;
use crate::innerprod::{gram_report, InnerProductSpec, IpFamily, Path, DELTA_DEFAULT_C};
use crate::polyalg::MultiPoly;

pub const CACHE_ENV: &str = "SOBOLEV_BALL_CACHE";

#[derive(Parser, Debug)]
#[command(name = "sobolev-ball", version, about = "Sobolev orthogonal polynomials on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the basis of one degree.
    Basis(Args),
    /// Gram matrix of a basis family across degrees.
    Gram(Args),
    /// Coefficient table of a polynomial or a built-in function.
    Expand(Args),
    /// Parseval relation report for a polynomial.
    Parseval(Args),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum FamilyArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "S")]
    S,
    #[value(name = "Delta")]
    Delta,
    #[value(name = "Wmu")]
    Wmu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramPath {
    Exact,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gradient,
    Annihilated,
    Sphere,
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Args {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    d: Option<usize>,
    /// Degree (basis) or maximal degree (other commands).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Constant of the Δ inner product.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    quad_degree: Option<usize>,
    /// Polynomial file, text or JSON encoding.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Inline polynomial in the text encoding, terms separated by `;`.
    #[arg(long)]
    poly: Option<String>,
    /// Built-in function to expand by quadrature.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Gram route: exact moments or quadrature.
    #[arg(long, value_enum)]
    path: Option<GramPath>,
    /// Parseval relation to report.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// JSON file with any of the above as snake_case keys; flags win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Basis,
    Gram,
    Expand,
    Parseval,
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub spec: InnerProductSpec,
    pub max_degree: usize,
    pub quad_degree: Option<usize>,
    pub input: Option<PathBuf>,
    pub poly: Option<String>,
    pub function: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tolerance: f64,
    pub threads: Option<usize>,
    pub path: GramPath,
    pub variant: Variant,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch { .. } | Error::InvalidParameter(_) | Error::Parse(_) | Error::Json(_) => 2,
            Error::Io(_) | Error::Numerical(_) | Error::InsufficientExactness { .. } | Error::IndexOutOfRange(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn merge(flags: Args) -> Result<Args, Failure> {
    let Some(path) = flags.config.clone() else { return Ok(flags) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    let file: Args =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("bad config {}: {e}", path.display())))?;
    Ok(Args {
        family: flags.family.or(file.family),
        d: flags.d.or(file.d),
        n: flags.n.or(file.n),
        max_degree: flags.max_degree.or(file.max_degree),
        lambda: flags.lambda.or(file.lambda),
        mu: flags.mu.or(file.mu),
        c: flags.c.or(file.c),
        quad_degree: flags.quad_degree.or(file.quad_degree),
        input: flags.input.or(file.input),
        poly: flags.poly.or(file.poly),
        function: flags.function.or(file.function),
        output: flags.output.or(file.output),
        format: flags.format.or(file.format),
        tolerance: flags.tolerance.or(file.tolerance),
        threads: flags.threads.or(file.threads),
        path: flags.path.or(file.path),
        variant: flags.variant.or(file.variant),
        config: None,
    })
}

fn resolve(command: CommandKind, args: Args) -> Result<RunConfig, Failure> {
    let a = merge(args)?;
    let d = a.d.unwrap_or(2);
    let lambda = a.lambda.unwrap_or(1.0);
    let family = match a.family.unwrap_or(FamilyArg::I) {
        FamilyArg::I => IpFamily::I { lambda },
        FamilyArg::II => IpFamily::II { lambda },
        FamilyArg::S => IpFamily::S { lambda },
        FamilyArg::Delta => IpFamily::Delta { c: a.c.unwrap_or(DELTA_DEFAULT_C) },
        FamilyArg::Wmu => IpFamily::Wmu { mu: a.mu.unwrap_or(0.0) },
    };
    let spec = InnerProductSpec::new(family, d)?;
    let max_degree = match command {
        CommandKind::Basis => a.n.or(a.max_degree),
        _ => a.max_degree.or(a.n),
    }
    .unwrap_or(4);
    let tolerance = a.tolerance.unwrap_or(1e-9);
    if !(tolerance >= 0.0) {
        return Err(Failure::config("tolerance must be non-negative"));
    }
    if a.threads == Some(0) {
        return Err(Failure::config("threads must be positive"));
    }
    if a.input.is_some() as u8 + a.poly.is_some() as u8 + a.function.is_some() as u8 > 1 {
        return Err(Failure::config("give at most one of --input, --poly, --function"));
    }
    Ok(RunConfig {
        command,
        spec,
        max_degree,
        quad_degree: a.quad_degree,
        input: a.input,
        poly: a.poly,
        function: a.function,
        output: a.output,
        format: a.format.unwrap_or(Format::Json),
        tolerance,
        threads: a.threads,
        path: a.path.unwrap_or(GramPath::Exact),
        variant: a.variant.unwrap_or(Variant::Gradient),
    })
}

/// Compact JSON with sorted keys and every float written with 17
/// significant digits, so equal inputs give byte-identical files.
pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s.push('\n');
    s
}

fn write_value(s: &mut String, v: &Value) {
    match v {
        Value::Null => s.push_str("null"),
        Value::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                s.push_str(&format_float(n.as_f64().unwrap()));
            } else {
                s.push_str(&n.to_string());
            }
        }
        Value::String(t) => s.push_str(&Value::String(t.clone()).to_string()),
        Value::Array(items) => {
            s.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write_value(s, item);
            }
            s.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            s.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&Value::String(k.clone()).to_string());
                s.push(':');
                write_value(s, &map[k]);
            }
            s.push('}');
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn read_polynomial(cfg: &RunConfig) -> Result<Option<MultiPoly>, Failure> {
    let text = match (&cfg.input, &cfg.poly) {
        (Some(p), _) => std::fs::read_to_string(p)
            .map_err(|e| Failure::config(format!("cannot read input {}: {e}", p.display())))?,
        (None, Some(inline)) => inline.replace(';', "\n"),
        (None, None) => return Ok(None),
    };
    let f = MultiPoly::parse_any(&text, Some(cfg.spec.d))?;
    if f.dim() != cfg.spec.d {
        return Err(Error::DimensionMismatch { expected: cfg.spec.d, found: f.dim() }.into());
    }
    Ok(Some(f))
}

fn require_polynomial(cfg: &RunConfig) -> Result<MultiPoly, Failure> {
    read_polynomial(cfg)?.ok_or_else(|| Failure::config("an input polynomial is required (--input or --poly)"))
}

struct Outcome {
    body: String,
    /// Summary for stderr.
    summary: String,
    code: i32,
}

fn cmd_basis(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let elems = basis(cfg.spec.basis_family(), cfg.max_degree, cfg.spec.d)?;
    let body = match cfg.format {
        Format::Json => canonical_json(&Value::Array(elems.iter().map(|e| e.to_json_value()).collect())),
        Format::Csv => {
            let mut s = String::from("n,j,nu,norm_lambda_coef,norm_constant,coef,exponent\n");
            for e in &elems {
                for (exp, c) in e.poly.terms() {
                    let exps: Vec<String> = exp.as_slice().iter().map(|k| k.to_string()).collect();
                    writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        e.n,
                        e.j,
                        e.nu,
                        format_float(e.closed_norm.lambda_coef),
                        format_float(e.closed_norm.constant),
                        format_float(c),
                        exps.join(" ")
                    )
                    .unwrap();
                }
            }
            s
        }
    };
    let summary = format!("{} elements of degree {} ({}, d={})", elems.len(), cfg.max_degree, cfg.spec.basis_family().name(), cfg.spec.d);
    Ok(Outcome { body, summary, code: 0 })
}

fn cmd_gram(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let path = match cfg.path {
        GramPath::Exact => Path::Exact,
        GramPath::Quadrature => Path::Quadrature,
    };
    let r = gram_report(&cfg.spec, cfg.max_degree, path)?;
    let body = match cfg.format {
        Format::Json => canonical_json(&r.to_json_value()),
        Format::Csv => {
            let mut s = String::from("n,j,nu,measured,closed,ratio\n");
            for (&(n, j, nu), &(m, c)) in r.labels.iter().zip(&r.diagonal) {
                writeln!(s, "{n},{j},{nu},{},{},{}", format_float(m), format_float(c), format_float(m / c)).unwrap();
            }
            s
        }
    };
    let summary = format!(
        "max_offdiag {} max_diag_err vs closed form {}",
        format_float(r.max_offdiag),
        format_float(r.max_diag_rel_err())
    );
    let code = if r.max_offdiag <= cfg.tolerance { 0 } else { 1 };
    Ok(Outcome { body, summary, code })
}

fn cmd_expand(cfg: &RunConfig) -> Result<Outcome, Failure> {
    if let Some(name) = &cfg.function {
        let f = NamedFunction::parse(name, cfg.spec.d)?;
        let q = cfg.quad_degree.ok_or_else(|| Failure::config("--function needs --quad-degree"))?;
        let t = expand_sampled(&f, &cfg.spec, cfg.max_degree, q)?;
        let body = render_table(cfg, &t);
        return Ok(Outcome { body, summary: format!("{} coefficients of {name}", t.entries.len()), code: 0 });
    }
    let f = require_polynomial(cfg)?;
    let t = expand(&f, &cfg.spec, cfg.max_degree)?;
    let body = render_table(cfg, &t);
    let residual = t.reconstruct()?.relative_distance(&f);
    let mut code = 0;
    let mut summary = format!("reconstruction residual {}", format_float(residual));
    if cfg.max_degree < f.degree() {
        summary.push_str(" (truncated below the input degree)");
    } else if !(residual <= cfg.tolerance) {
        code = 1;
    }
    Ok(Outcome { body, summary, code })
}

fn render_table(cfg: &RunConfig, t: &crate::expansion::CoefficientTable) -> String {
    match cfg.format {
        Format::Json => canonical_json(&t.to_json_value()),
        Format::Csv => t.to_csv(),
    }
}

fn cmd_parseval(cfg: &RunConfig) -> Result<Outcome, Failure> {
    if cfg.function.is_some() {
        return Err(Failure::config("parseval needs a polynomial input"));
    }
    let f = require_polynomial(cfg)?;
    let d = cfg.spec.d;
    let r: ParsevalReport = match cfg.variant {
        Variant::Gradient => parseval_gradient(&f, d, cfg.max_degree)?,
        Variant::Annihilated => parseval_annihilated(&f, d, cfg.max_degree)?,
        Variant::Sphere => parseval_sphere(&f, d, cfg.max_degree)?,
    };
    let body = match cfg.format {
        Format::Json => canonical_json(&r.to_json_value()),
        Format::Csv => r.to_csv(),
    };
    let mut summary = format!(
        "lhs {} rhs {} relative_gap {}",
        format_float(r.lhs),
        format_float(r.rhs_total),
        format_float(r.relative_gap)
    );
    if r.truncated {
        summary.push_str(" (series truncated below the input degree)");
    }
    let code = if r.relative_gap <= cfg.tolerance { 0 } else { 1 };
    Ok(Outcome { body, summary, code })
}

fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let go = || match cfg.command {
        CommandKind::Basis => cmd_basis(cfg),
        CommandKind::Gram => cmd_gram(cfg),
        CommandKind::Expand => cmd_expand(cfg),
        CommandKind::Parseval => cmd_parseval(cfg),
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::numeric(format!("cannot start thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        set_cache_dir(Some(PathBuf::from(dir)));
    }
    let (kind, args) = match cli.command {
        Command::Basis(a) => (CommandKind::Basis, a),
        Command::Gram(a) => (CommandKind::Gram, a),
        Command::Expand(a) => (CommandKind::Expand, a),
        Command::Parseval(a) => (CommandKind::Parseval, a),
    };
    let result = resolve(kind, args).and_then(|cfg| {
        let out = execute(&cfg)?;
        match &cfg.output {
            Some(p) => std::fs::write(p, &out.body)
                .map_err(|e| Failure::numeric(format!("cannot write {}: {e}", p.display())))?,
            None => print!("{}", out.body),
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            eprintln!("{}", out.summary);
            if out.code != 0 {
                eprintln!("error: check exceeds tolerance");
            }
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
