//! `ratcert`: exact rational arithmetic queries and sweeps from the command
//! line. Every run is deterministic: identical arguments produce
//! byte-identical output, in plain text by default or JSON behind `--json`.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ratcert_core::catalan::{
    catalan, check_identity_bin, check_identity_cm, check_identity_k,
    vectors_with_node_sum_at_most, CatalanError, DegreeVector,
};
use ratcert_core::divpow::{divide_via_powers, powers_via_division, DivPowError};
use ratcert_core::exact::{ExactError, ExactInt, ExactRat};
use ratcert_core::formula::{
    min_sat_with, normalize_formula_with, parse as parse_formula, FormulaError, MinSatOptions,
    NormalizeOptions,
};
use ratcert_core::lif::{coefficients, LifError};
use ratcert_core::poly::Polynomial;
use ratcert_core::roots::{
    approx_root_with, refine_sign_change, ApproxMethod, ApproxOptions, RootError,
    SignChangeInterval,
};

#[derive(Parser)]
#[command(
    name = "ratcert",
    version,
    about = "Exact rational arithmetic: certified roots, generalized Catalan numbers, \
             division reductions, and bounded-formula normalization"
)]
struct Cli {
    /// Emit structured JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on the number of series terms in partial-sum routines.
    #[arg(long, global = true, default_value_t = 64)]
    max_terms: usize,
    /// Iteration and assignment budget for normalization and minimization.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generalized Catalan numbers and their identity sweeps.
    Catalan(CatalanArgs),
    /// Inverse-series coefficients and their checks.
    Lif(LifArgs),
    /// Certified root bracketing.
    Root(RootArgs),
    /// Quotient and remainder, optionally through the powering reduction.
    Divide(DivideArgs),
    /// Power sequence, optionally through the single-division reduction.
    Powers(PowersArgs),
    /// Formula normalization and minimization.
    Formula(FormulaArgs),
}

#[derive(Args)]
struct CatalanArgs {
    #[command(subcommand)]
    action: Option<CatalanAction>,
    /// Polynomial degree d (the vector has entries for out-degrees 2..=d).
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated entries m2,..,md; omit for d = 1.
    #[arg(long)]
    m: Option<String>,
}

#[derive(Subcommand)]
enum CatalanAction {
    /// Sweep the three identities over all vectors with bounded node sum.
    Verify {
        #[arg(long)]
        d: usize,
        /// Largest total number of internal nodes in the sweep.
        #[arg(long)]
        weight_max: usize,
    },
}

#[derive(Args)]
struct LifArgs {
    #[command(subcommand)]
    action: LifAction,
}

#[derive(Subcommand)]
enum LifAction {
    /// Expand the first N inverse-series coefficients.
    Coeffs {
        /// Coefficients a0,a1,..,ad (fractions or decimals).
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        n: usize,
    },
    /// Check the recurrence and the coefficient bound; report bound ratios.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct RootArgs {
    #[command(subcommand)]
    action: RootAction,
}

#[derive(Subcommand)]
enum RootAction {
    /// Certificate of width below eps for a sign-change bracket.
    Approx {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long, allow_hyphen_values = true)]
        lo: String,
        #[arg(long, allow_hyphen_values = true)]
        hi: String,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Skip series acceleration and bisect only.
        #[arg(long)]
        bisect_only: bool,
    },
}

#[derive(Args)]
struct DivideArgs {
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Use the powering reduction instead of native division.
    #[arg(long)]
    via_powers: bool,
}

#[derive(Args)]
struct PowersArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    n: usize,
    /// Reconstruct the whole sequence from a single division.
    #[arg(long)]
    via_division: bool,
}

#[derive(Args)]
struct FormulaArgs {
    #[command(subcommand)]
    action: FormulaAction,
}

#[derive(Subcommand)]
enum FormulaAction {
    /// Residue-class polynomial normal form of the formula in a file.
    Normalize {
        #[arg(long)]
        file: std::path::PathBuf,
        /// Collapse each branch matrix to a single inequality.
        #[arg(long)]
        collapse: bool,
    },
    /// Least satisfying value of the single free variable below a bound.
    Minsat {
        #[arg(long)]
        file: std::path::PathBuf,
        #[arg(long)]
        bound: String,
    },
}

/// Failure with the documented exit code: 2 usage, 3 precondition violation,
/// 4 budget exhaustion.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
    fn precondition(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
    fn budget(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

impl From<ExactError> for Failure {
    fn from(e: ExactError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<LifError> for Failure {
    fn from(e: LifError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<CatalanError> for Failure {
    fn from(e: CatalanError) -> Self {
        match e {
            CatalanError::EnumerationBudget(..) => Failure::budget(e.to_string()),
            _ => Failure::precondition(e.to_string()),
        }
    }
}

impl From<DivPowError> for Failure {
    fn from(e: DivPowError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<RootError> for Failure {
    fn from(e: RootError) -> Self {
        match e {
            RootError::NormalizationBudget(_) => Failure::budget(e.to_string()),
            _ => Failure::precondition(e.to_string()),
        }
    }
}

impl From<FormulaError> for Failure {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::Syntax { .. }
            | FormulaError::UnboundVariable { .. }
            | FormulaError::UnboundedQuantifier { .. }
            | FormulaError::InvalidResidue { .. }
            | FormulaError::ResidueArity { .. } => Failure::usage(e.to_string()),
            FormulaError::BudgetExceeded(_) => Failure::budget(e.to_string()),
            FormulaError::HalfOfPow2 | FormulaError::FreeVariableCount(_) => {
                Failure::precondition(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Catalan(args) => run_catalan(cli, args),
        Command::Lif(args) => match &args.action {
            LifAction::Coeffs { poly, n } => run_lif_coeffs(cli, poly, *n),
            LifAction::Check { poly, n } => run_lif_check(cli, poly, *n),
        },
        Command::Root(args) => match &args.action {
            RootAction::Approx { poly, lo, hi, eps, bisect_only } => {
                run_root_approx(cli, poly, lo, hi, eps, *bisect_only)
            }
        },
        Command::Divide(args) => run_divide(cli, args),
        Command::Powers(args) => run_powers(cli, args),
        Command::Formula(args) => match &args.action {
            FormulaAction::Normalize { file, collapse } => run_normalize(cli, file, *collapse),
            FormulaAction::Minsat { file, bound } => run_minsat(cli, file, bound),
        },
    }
}

fn parse_degree_vector(d: usize, m: Option<&str>) -> Result<DegreeVector, Failure> {
    if d == 0 {
        return Err(Failure::usage("degree must be at least 1"));
    }
    let entries: Vec<usize> = match m {
        None | Some("") => vec![],
        Some(list) => list
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::usage(format!("bad vector entry {part:?}")))
            })
            .collect::<Result<_, _>>()?,
    };
    if entries.len() != d - 1 {
        return Err(Failure::usage(format!(
            "degree {d} needs {} entries m2,..,md, got {}",
            d - 1,
            entries.len()
        )));
    }
    Ok(DegreeVector::new(entries))
}

#[derive(Serialize)]
struct CatalanValueOut {
    command: &'static str,
    d: usize,
    m: Vec<usize>,
    value: ExactInt,
}

#[derive(Serialize)]
struct CatalanVerifyOut {
    command: &'static str,
    d: usize,
    weight_max: usize,
    vectors: usize,
    cm_holds: bool,
    bin_holds: bool,
    k_holds: bool,
}

fn run_catalan(cli: &Cli, args: &CatalanArgs) -> Result<String, Failure> {
    match &args.action {
        Some(CatalanAction::Verify { d, weight_max }) => {
            let vectors = vectors_with_node_sum_at_most(*d, *weight_max);
            let mut cm_holds = true;
            let mut bin_holds = true;
            let mut k_holds = true;
            for m in &vectors {
                if !m.is_zero() {
                    cm_holds &= check_identity_cm(m)?;
                }
                bin_holds &= check_identity_bin(m);
                for k in 1..=*d {
                    k_holds &= check_identity_k(m, k)?;
                }
            }
            let out = CatalanVerifyOut {
                command: "catalan-verify",
                d: *d,
                weight_max: *weight_max,
                vectors: vectors.len(),
                cm_holds,
                bin_holds,
                k_holds,
            };
            if cli.json {
                return Ok(to_json(&out));
            }
            Ok(format!(
                "vectors: {}\ncm: {}\nbin: {}\nk: {}",
                out.vectors,
                verdict(out.cm_holds),
                verdict(out.bin_holds),
                verdict(out.k_holds)
            ))
        }
        None => {
            let d = args.d.ok_or_else(|| Failure::usage("--d is required"))?;
            let m = parse_degree_vector(d, args.m.as_deref())?;
            let value = catalan(&m);
            if cli.json {
                let out = CatalanValueOut {
                    command: "catalan",
                    d,
                    m: m.entries().to_vec(),
                    value,
                };
                return Ok(to_json(&out));
            }
            Ok(value.to_string())
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok { "ok" } else { "FAILED" }
}

#[derive(Serialize)]
struct LifCoeffsOut {
    command: &'static str,
    series: ratcert_core::lif::LifSeries,
}

fn run_lif_coeffs(cli: &Cli, poly: &str, n: usize) -> Result<String, Failure> {
    if n > cli.max_terms {
        return Err(Failure::budget(format!(
            "{n} terms exceed --max-terms {}",
            cli.max_terms
        )));
    }
    let f: Polynomial = poly.parse()?;
    let series = coefficients(&f, n)?;
    if cli.json {
        let out = LifCoeffsOut { command: "lif-coeffs", series };
        return Ok(to_json(&out));
    }
    Ok(join_rats(series.coeffs()))
}

#[derive(Serialize)]
struct LifCheckOut {
    command: &'static str,
    poly: Polynomial,
    terms: usize,
    recurrence_holds: bool,
    bound_holds: bool,
    bound_ratios: Vec<ExactRat>,
}

fn run_lif_check(cli: &Cli, poly: &str, n: usize) -> Result<String, Failure> {
    if n > cli.max_terms {
        return Err(Failure::budget(format!(
            "{n} terms exceed --max-terms {}",
            cli.max_terms
        )));
    }
    let f: Polynomial = poly.parse()?;
    let series = coefficients(&f, n)?;
    let out = LifCheckOut {
        command: "lif-check",
        poly: f,
        terms: n,
        recurrence_holds: series.satisfies_recurrence(),
        bound_holds: series.bound_holds(),
        bound_ratios: series.bound_ratios(),
    };
    if cli.json {
        return Ok(to_json(&out));
    }
    Ok(format!(
        "recurrence: {}\nbound: {}\nratios: {}",
        verdict(out.recurrence_holds),
        verdict(out.bound_holds),
        join_rats(&out.bound_ratios)
    ))
}

#[derive(Serialize)]
struct RootApproxOut {
    command: &'static str,
    poly: Polynomial,
    negated: bool,
    certificate: ratcert_core::roots::RootCertificate,
    method: String,
}

fn run_root_approx(
    cli: &Cli,
    poly: &str,
    lo: &str,
    hi: &str,
    eps: &str,
    bisect_only: bool,
) -> Result<String, Failure> {
    let parsed: Polynomial = poly.parse()?;
    let lo: ExactRat = lo.parse()?;
    let hi: ExactRat = hi.parse()?;
    let eps: ExactRat = eps.parse()?;
    if lo >= hi {
        return Err(Failure::precondition("need lo < hi"));
    }
    // Orient so the polynomial is negative at lo; roots are unchanged.
    let (f, negated) = if parsed.eval(&lo).is_negative() {
        (parsed, false)
    } else {
        (parsed.negate(), true)
    };
    let iv = SignChangeInterval::new(f.clone(), lo, hi)?;
    let (cert, method) = if bisect_only {
        (refine_sign_change(&iv, &eps)?, ApproxMethod::BisectionOnly)
    } else {
        let options =
            ApproxOptions { max_terms: cli.max_terms, normalize_budget: cli.budget.min(1 << 16) as usize };
        approx_root_with(&f, &iv, &eps, &options)?
    };
    let method_desc = match method {
        ApproxMethod::SeriesAccelerated { terms, .. } => format!("series({terms} terms)"),
        ApproxMethod::BisectionOnly => "bisection".to_owned(),
    };
    if cli.json {
        let out = RootApproxOut {
            command: "root-approx",
            poly: f,
            negated,
            certificate: cert,
            method: method_desc,
        };
        return Ok(to_json(&out));
    }
    let mut text = String::new();
    if negated {
        writeln!(text, "negated: true").unwrap();
    }
    write!(
        text,
        "z_minus={} z_plus={} width={} method={method_desc}",
        cert.z_minus, cert.z_plus, cert.width
    )
    .unwrap();
    Ok(text)
}

#[derive(Serialize)]
struct DivideOut {
    command: &'static str,
    y: ExactInt,
    x: ExactInt,
    via_powers: bool,
    q: ExactInt,
    r: ExactInt,
}

fn run_divide(cli: &Cli, args: &DivideArgs) -> Result<String, Failure> {
    let y: ExactInt = args.y.parse()?;
    let x: ExactInt = args.x.parse()?;
    let (q, r) = if args.via_powers {
        divide_via_powers(&y, &x)?
    } else {
        if x < ExactInt::one() || y.is_negative() {
            return Err(Failure::precondition("need x >= 1 and y >= 0"));
        }
        y.div_rem_floor(&x)
    };
    if cli.json {
        let out = DivideOut { command: "divide", y, x, via_powers: args.via_powers, q, r };
        return Ok(to_json(&out));
    }
    Ok(format!("q={q} r={r}"))
}

#[derive(Serialize)]
struct PowersOut {
    command: &'static str,
    x: ExactInt,
    n: usize,
    via_division: bool,
    powers: Vec<ExactInt>,
}

fn run_powers(cli: &Cli, args: &PowersArgs) -> Result<String, Failure> {
    let x: ExactInt = args.x.parse()?;
    let powers = if args.via_division {
        powers_via_division(&x, args.n)?
    } else {
        let mut acc = ExactInt::one();
        let mut out = Vec::with_capacity(args.n + 1);
        for _ in 0..=args.n {
            out.push(acc.clone());
            acc = &acc * &x;
        }
        out
    };
    if cli.json {
        let out = PowersOut {
            command: "powers",
            x,
            n: args.n,
            via_division: args.via_division,
            powers,
        };
        return Ok(to_json(&out));
    }
    Ok(powers.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
}

fn read_formula(path: &std::path::Path) -> Result<ratcert_core::formula::FormulaAst, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    // A formula file may spread one formula over several lines; comments
    // start with '#'.
    let src: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(parse_formula(&src)?)
}

#[derive(Serialize)]
struct NormalizeOut {
    command: &'static str,
    collapse: bool,
    normal_form: ratcert_core::formula::ResidueNormalForm,
}

fn run_normalize(cli: &Cli, file: &std::path::Path, collapse: bool) -> Result<String, Failure> {
    let phi = read_formula(file)?;
    let rnf = normalize_formula_with(
        &phi,
        &NormalizeOptions { collapse_single_inequality: collapse },
    )?;
    if cli.json {
        let out = NormalizeOut { command: "formula-normalize", collapse, normal_form: rnf };
        return Ok(to_json(&out));
    }
    Ok(rnf.render().trim_end().to_owned())
}

#[derive(Serialize)]
struct MinsatOut {
    command: &'static str,
    bound: ExactInt,
    min: Option<ExactInt>,
}

fn run_minsat(cli: &Cli, file: &std::path::Path, bound: &str) -> Result<String, Failure> {
    let phi = read_formula(file)?;
    let a: ExactInt = bound.parse()?;
    let options = MinSatOptions {
        assignment_budget: cli.budget,
        normalize: NormalizeOptions::default(),
    };
    let min = min_sat_with(&phi, &a, &options)?;
    if cli.json {
        let out = MinsatOut { command: "formula-minsat", bound: a, min };
        return Ok(to_json(&out));
    }
    Ok(match min {
        Some(x) => format!("min={x}"),
        None => "min=none".to_owned(),
    })
}

fn join_rats(values: &[ExactRat]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output structures serialize cleanly")
}
