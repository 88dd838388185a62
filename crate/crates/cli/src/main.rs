use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use soncbound::certify::{classify_circuit, CertifyError};
use soncbound::constrained::{constrained_bound, ConstrainedError, ConstrainedProblem, ProgramClass};
use soncbound::geometry::{parse_vertex_list, GeometryError};
use soncbound::gpbuild::{lower_bound_with, BoundError, BoundResult};
use soncbound::mediated::{maximal_mediated_set, MediatedError};
use soncbound::oracle::{approx_min, check_lower_bound, SamplingMethod};
use soncbound::poly::PolyError;
use soncbound::{parse_polynomial, Polynomial};

mod fmt;

use fmt::{sig10, Report};

const VERIFY_SAMPLES: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "soncbound", version, about = "Certified lower bounds for sparse polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower bound f_gp from the geometric program
    Bound(BoundArgs),
    /// Lower bound plus an explicit SONC certificate
    Certify(BoundArgs),
    /// Maximal mediated set of a simplex
    Mediated(MediatedArgs),
    /// Lower bound over {x : g_i(x) >= 0}
    ConstrainedBound(ConstrainedArgs),
    /// Sampling estimate of the minimum (an upper bound on it)
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Number of variables; inferred from the highest x<i> when omitted
    #[arg(long)]
    nvars: Option<usize>,
    #[arg(long, default_value_t = 1e-9, value_parser = positive_f64)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BoundArgs {
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Check the bound against random samples of f
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Debug)]
struct MediatedArgs {
    /// Simplex vertices, e.g. "0,0;6,0;0,6"
    #[arg(long)]
    vertices: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct ConstrainedArgs {
    input: PathBuf,
    /// Constraint polynomial file, meaning g(x) >= 0; repeatable
    #[arg(long = "g")]
    g: Vec<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1000..))]
    budget: u64,
    #[arg(long = "box-radius", default_value_t = 10.0, value_parser = positive_f64)]
    box_radius: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive and finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
enum Failure {
    /// Unreadable or malformed input.
    Input(String),
    /// Input outside the supported class (non-simplex support, odd vertex, ...).
    Assumption(String),
    /// The solver did not produce an optimal point.
    Solver { msg: String, status: Option<String> },
    /// The computed bound failed the sampling check.
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Assumption(_) => 3,
            Failure::Solver { .. } => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Input(_) => "parse",
            Failure::Assumption(_) => "assumption",
            Failure::Solver { .. } => "solver",
            Failure::Verification(_) => "verification",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Assumption(m) | Failure::Verification(m) => m,
            Failure::Solver { msg, .. } => msg,
        }
    }
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::VertexSyntax { .. } | GeometryError::DimensionMismatch => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Assumption(e.to_string()),
        }
    }
}

impl From<MediatedError> for Failure {
    fn from(e: MediatedError) -> Self {
        Failure::Assumption(e.to_string())
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Geometry(g) => g.into(),
            BoundError::SolverStatus(ref s) => Failure::Solver {
                status: Some(s.status.to_string()),
                msg: e.to_string(),
            },
            BoundError::Certificate(CertifyError::InfeasibleSolution(_)) | BoundError::Solver(_) => {
                Failure::Solver {
                    msg: e.to_string(),
                    status: None,
                }
            }
            _ => Failure::Assumption(e.to_string()),
        }
    }
}

impl From<ConstrainedError> for Failure {
    fn from(e: ConstrainedError) -> Self {
        match e {
            ConstrainedError::SupportNotSimplex(g) => g.into(),
            ConstrainedError::Bound(b) => (*b).into(),
            ConstrainedError::DimensionMismatch { .. } => Failure::Input(e.to_string()),
            ConstrainedError::NonpositiveMu => Failure::Assumption(e.to_string()),
            ConstrainedError::SolverStatus(ref s) => Failure::Solver {
                status: Some(s.status.to_string()),
                msg: e.to_string(),
            },
            ConstrainedError::InnerInfeasible | ConstrainedError::Solver(_) => Failure::Solver {
                msg: e.to_string(),
                status: None,
            },
        }
    }
}

/// Highest `x<i>` index in the text, at least 1.
fn infer_nvars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if let Ok(k) = text[start..end].parse::<usize>() {
                best = best.max(k);
            }
            i = end.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_polynomial(path: &Path, nvars: Option<usize>) -> Result<Polynomial, Failure> {
    let text = read_text(path)?;
    let n = nvars.unwrap_or_else(|| infer_nvars(&text));
    parse_polynomial(&text, n).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn exponent_json(e: &[u32]) -> Value {
    json!(e)
}

fn bound_report(r: &BoundResult, elapsed_ms: f64) -> Report {
    let mut rep = Report::new();
    rep.num("f_gp", r.f_gp);
    rep.num("m_star", r.m_star);
    rep.text("status", r.solver.status.to_string());
    rep.int("iterations", r.solver.iterations as u64);
    rep.num("duality_gap", r.solver.duality_gap_estimate);
    rep.num("time_ms", elapsed_ms);
    let vertices: Vec<Value> = r.profile.vertices.iter().map(|v| exponent_json(v)).collect();
    rep.raw("vertices", Value::Array(vertices), None);
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (alpha, vals) in &r.a_star {
        let shown: Vec<f64> = vals.iter().map(|v| sig10(*v)).collect();
        rows.push(json!({ "alpha": alpha.0, "a": shown }));
        let cells: Vec<String> = vals.iter().map(|v| fmt::fmt10(*v)).collect();
        lines.push(format!("  {alpha}: {}", cells.join(" ")));
    }
    let text = if lines.is_empty() {
        "a_star: (none)".to_string()
    } else {
        format!("a_star:\n{}", lines.join("\n"))
    };
    rep.raw("a_star", Value::Array(rows), Some(text));
    rep
}

fn verify_step(rep: &mut Report, f: &Polynomial, r: f64, seed: u64) -> Result<(), Failure> {
    let ok = check_lower_bound(f, r, VERIFY_SAMPLES, seed);
    rep.flag("verified", ok);
    rep.int("verify_samples", VERIFY_SAMPLES as u64);
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "sampling found f(x) < {} - 1e-6",
            fmt::fmt10(r)
        )))
    }
}

fn run_bound(args: &BoundArgs, certify: bool) -> Result<(Report, Option<Failure>), Failure> {
    let c = &args.common;
    let f = read_polynomial(&args.input, c.nvars)?;
    let start = Instant::now();
    let mut result = lower_bound_with(&f, c.tol, c.max_iter)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut rep = bound_report(&result, elapsed);
    if certify {
        result
            .certificate
            .verify(&f)
            .map_err(|e| Failure::Solver {
                msg: e.to_string(),
                status: None,
            })?;
        result.certificate.upgrade();
        let mut classes = Vec::new();
        let mut lines = Vec::new();
        for cc in &result.certificate.circuits {
            let class = match maximal_mediated_set(cc.circuit.vertices()) {
                Ok(ms) => format!("{:?}", classify_circuit(&cc.circuit, &ms)),
                Err(_) => "Unknown".to_string(),
            };
            let class = fmt::snake(&class);
            lines.push(format!(
                "  {}: {} ({})",
                cc.circuit.beta(),
                cc.status.as_str(),
                class
            ));
            classes.push(json!({
                "beta": cc.circuit.beta().0,
                "status": cc.status.as_str(),
                "class": class,
            }));
        }
        let text = if lines.is_empty() {
            "circuits: (none)".to_string()
        } else {
            format!("circuits:\n{}", lines.join("\n"))
        };
        rep.raw("classification", Value::Array(classes), Some(text));
        rep.num("reconstruction_error", result.certificate.reconstruction_error(&f));
        let cert = result.certificate.to_json_string();
        let value: Value = serde_json::from_str(&cert).expect("certificate JSON is well formed");
        rep.raw("certificate", value, Some(format!("certificate:\n{cert}")));
    }
    let failure = if args.verify {
        verify_step(&mut rep, &f, result.f_gp, c.seed).err()
    } else {
        None
    };
    Ok((rep, failure))
}

fn run_mediated(args: &MediatedArgs) -> Result<Report, Failure> {
    let vertices = parse_vertex_list(&args.vertices)?;
    let ms = maximal_mediated_set(&vertices)?;
    let mut rep = Report::new();
    rep.flag("h_simplex", ms.is_h_simplex);
    rep.int("lattice_points", ms.lattice_count as u64);
    rep.int("size", ms.pstar.len() as u64);
    let pts: Vec<Value> = ms.pstar.iter().map(|p| exponent_json(p)).collect();
    let text = ms
        .pstar
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    rep.raw("pstar", Value::Array(pts), Some(format!("pstar: {text}")));
    Ok(rep)
}

fn run_constrained(args: &ConstrainedArgs) -> Result<Report, Failure> {
    let c = &args.common;
    let f_text = read_text(&args.input)?;
    let mut texts = vec![f_text];
    for p in &args.g {
        texts.push(read_text(p)?);
    }
    let n = c
        .nvars
        .unwrap_or_else(|| texts.iter().map(|t| infer_nvars(t)).max().unwrap_or(1));
    let paths = std::iter::once(&args.input).chain(&args.g);
    let mut polys = Vec::new();
    for (t, p) in texts.iter().zip(paths) {
        polys.push(parse_polynomial(t, n).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?);
    }
    let f = polys.remove(0);
    let problem = ConstrainedProblem::new(f, polys)?;
    let start = Instant::now();
    let r = constrained_bound(&problem, c.tol)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut rep = Report::new();
    rep.num("bound", r.bound);
    rep.text(
        "class",
        match r.class {
            ProgramClass::Geometric => "geometric",
            ProgramClass::Signomial => "signomial",
        }
        .to_string(),
    );
    let mu: Vec<f64> = r.mu.iter().map(|m| sig10(*m)).collect();
    let mu_text = r.mu.iter().map(|m| fmt::fmt10(*m)).collect::<Vec<_>>().join(" ");
    rep.raw("mu", json!(mu), Some(format!("mu: {mu_text}")));
    if let Some(inner) = &r.inner {
        rep.num("inner_f_gp", inner.f_gp);
    }
    rep.int("evaluations", r.evaluations as u64);
    rep.num("time_ms", elapsed);
    Ok(rep)
}

fn run_oracle(args: &OracleArgs) -> Result<Report, Failure> {
    let c = &args.common;
    let f = read_polynomial(&args.input, c.nvars)?;
    let rep_data = approx_min(&f, args.budget as usize, args.box_radius, c.seed);
    let mut rep = Report::new();
    rep.num("best_value", rep_data.best_value);
    let pt: Vec<f64> = rep_data.best_point.iter().map(|x| sig10(*x)).collect();
    let pt_text = rep_data
        .best_point
        .iter()
        .map(|x| fmt::fmt10(*x))
        .collect::<Vec<_>>()
        .join(" ");
    rep.raw("best_point", json!(pt), Some(format!("best_point: {pt_text}")));
    rep.int("evaluations", rep_data.evaluations as u64);
    rep.text(
        "method",
        match rep_data.method {
            SamplingMethod::Grid => "grid",
            SamplingMethod::MultistartDescent => "multistart-descent",
        }
        .to_string(),
    );
    rep.int("seed", rep_data.seed);
    Ok(rep)
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: &'a str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<&'a str>,
}

fn emit_error(f: &Failure, format: Format) {
    match format {
        Format::Json => {
            let status = match f {
                Failure::Solver { status, .. } => status.as_deref(),
                _ => None,
            };
            let e = ErrorJson {
                error: f.kind(),
                message: f.message(),
                exit_code: f.exit_code(),
                status,
            };
            println!("{}", serde_json::to_string(&e).expect("error JSON"));
        }
        Format::Text => eprintln!("error ({}): {}", f.kind(), f.message()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match &cli.command {
        Command::Bound(a) | Command::Certify(a) => a.common.format,
        Command::Mediated(a) => a.format,
        Command::ConstrainedBound(a) => a.common.format,
        Command::Oracle(a) => a.common.format,
    };
    let outcome = match &cli.command {
        Command::Bound(a) => run_bound(a, false),
        Command::Certify(a) => run_bound(a, true),
        Command::Mediated(a) => run_mediated(a).map(|r| (r, None)),
        Command::ConstrainedBound(a) => run_constrained(a).map(|r| (r, None)),
        Command::Oracle(a) => run_oracle(a).map(|r| (r, None)),
    };
    match outcome {
        Ok((rep, failure)) => {
            rep.print(format == Format::Json);
            match failure {
                Some(f) => {
                    if format == Format::Text {
                        emit_error(&f, format);
                    }
                    ExitCode::from(f.exit_code())
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            emit_error(&f, format);
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nvars_inference() {
        assert_eq!(infer_nvars("1 + x1^2"), 1);
        assert_eq!(infer_nvars("x3*x12 - 4"), 12);
        assert_eq!(infer_nvars("7"), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
