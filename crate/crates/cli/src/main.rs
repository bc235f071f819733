use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use etaseries::bounds::{cstar_abs_bound, BoundProfile};
use etaseries::coefficients::{CoefficientTable, PochhammerRatio};
use etaseries::decimal::{format_bound, format_fixed, parse_complex};
use etaseries::scaling::scaling_report;
use etaseries::series::{Evaluator, Function, Mutation, SeriesConfig, DEFAULT_MAX_TERMS};
use etaseries::verify::{run_all, VerifyOptions};
use etaseries::{CComplex, Error, PrecisionContext};

/// Significant digits printed for upper bounds.
const BOUND_DIGITS: usize = 6;

#[derive(Parser)]
#[command(name = "etaseries", version, about = "Extended-precision eta, eta_b and zeta on Re s > 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function at one point.
    Eval(EvalArgs),
    /// Dump the coefficients c*_m(s) with their bounds.
    Coeffs(TableArgs),
    /// Dump the coefficient bounds for Re s.
    Bounds(TableArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
    /// Term-count and timing sweeps in |t| and in digits.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FnArg {
    Eta,
    Etab,
    Zeta,
}

impl From<FnArg> for Function {
    fn from(f: FnArg) -> Self {
        match f {
            FnArg::Eta => Function::Eta,
            FnArg::Etab => Function::EtaB,
            FnArg::Zeta => Function::Zeta,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    DropSign,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "fn", value_enum, default_value = "eta")]
    function: FnArg,
    /// Point as RE, RE+IMi or RE-IMi.
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 2)]
    b: u32,
    /// Block parameter; 0 picks one automatically.
    #[arg(long, default_value_t = 0)]
    ell: u32,
    #[arg(long, default_value_t = 30)]
    digits: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
    max_terms: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 2)]
    b: u32,
    #[arg(long, default_value_t = 30)]
    digits: u32,
    /// Last index m printed.
    #[arg(long, default_value_t = 20)]
    terms: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 30)]
    digits: u32,
    /// Reduced grid.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Machine-readable report instead of the table.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Args)]
struct BenchArgs {
    /// Block parameter; 0 picks one automatically.
    #[arg(long, default_value_t = 0)]
    ell: u32,
    /// Each point is timed this many times and the fastest run kept.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
    ChecksFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Core(e) => match e {
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::InvalidBase(_)
                | Error::InvalidEll(_)
                | Error::NonPositiveRealPart => 2,
                Error::PlanFailure { .. }
                | Error::MaxTermsExceeded { .. }
                | Error::BaseExhausted
                | Error::NearPole { .. } => 3,
                Error::PoleAtOne => 4,
            },
            Failure::Io(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => format!("output error: {e}"),
            Failure::ChecksFailed(n) => format!("{n} check(s) failed"),
        }
    }
}

fn round_ms(ms: f64) -> f64 {
    (ms * 1e3).round() / 1e3
}

fn parse_point(text: &str, ctx: &PrecisionContext) -> Result<CComplex, Failure> {
    let s = parse_complex(text, ctx.mantissa_bits() * 2)?;
    if s.re <= 0 {
        return Err(Error::NonPositiveRealPart.into());
    }
    Ok(s)
}

fn mutation(f: Option<Fault>) -> Mutation {
    match f {
        Some(Fault::DropSign) => Mutation::DropAlternatingSign,
        None => Mutation::None,
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut impl Write) -> Result<(), Failure> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalRecord {
    function: &'static str,
    s: String,
    b: u32,
    ell: u32,
    value_re: String,
    value_im: String,
    terms_used: usize,
    remainder_bound: String,
    elapsed_ms: f64,
}

fn cmd_eval(args: &EvalArgs, out: &mut impl Write) -> Result<(), Failure> {
    let ctx = PrecisionContext::new(args.digits)?;
    let s = parse_point(&args.s, &ctx)?;
    let mut cfg = SeriesConfig::new(args.b, ctx)?
        .with_max_terms(args.max_terms)
        .with_mutation(mutation(args.inject_fault));
    if args.ell != 0 {
        cfg = cfg.with_ell(args.ell)?;
    }
    let function = Function::from(args.function);
    let start = Instant::now();
    let r = Evaluator::new().evaluate(function, &s, &cfg, &ctx.tolerance())?;
    let elapsed = start.elapsed();
    let record = EvalRecord {
        function: function.name(),
        s: args.s.trim().to_string(),
        b: r.base,
        ell: r.ell,
        value_re: format_fixed(&r.value.re, args.digits),
        value_im: format_fixed(&r.value.im, args.digits),
        terms_used: r.terms_used,
        remainder_bound: format_bound(&r.remainder_bound, BOUND_DIGITS),
        elapsed_ms: round_ms(elapsed.as_secs_f64() * 1e3),
    };
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &record)?;
            writeln!(out)?;
        }
        Format::Csv => write_rows(&[record], Format::Csv, out)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CoeffRow {
    m: usize,
    re_cstar: String,
    im_cstar: String,
    abs_cstar: String,
    bound_sigma: String,
}

fn cmd_coeffs(args: &TableArgs, out: &mut impl Write) -> Result<(), Failure> {
    let ctx = PrecisionContext::new(args.digits)?;
    let s = parse_point(&args.s, &ctx)?.with_prec(ctx.mantissa_bits());
    let mut table = CoefficientTable::new(args.b, &s, &ctx)?;
    table.cstar_extend(args.terms);
    let profile = BoundProfile::new(args.b, &s.re, args.terms, &ctx)?;
    let mut poch = PochhammerRatio::new(&s, &ctx)?;
    poch.extend(args.terms);
    let rows: Vec<CoeffRow> = (0..=args.terms)
        .map(|m| {
            let c = table.cstar(m);
            CoeffRow {
                m,
                re_cstar: format_fixed(&c.re, args.digits),
                im_cstar: format_fixed(&c.im, args.digits),
                abs_cstar: format_fixed(&c.abs(), args.digits),
                bound_sigma: format_bound(&cstar_abs_bound(m, &profile, &poch), BOUND_DIGITS),
            }
        })
        .collect();
    write_rows(&rows, args.format, out)
}

#[derive(Serialize)]
struct BoundRow {
    m: usize,
    upper_sigma: String,
    abs_bound: String,
    lower: String,
}

fn cmd_bounds(args: &TableArgs, out: &mut impl Write) -> Result<(), Failure> {
    let ctx = PrecisionContext::new(args.digits)?;
    let s = parse_point(&args.s, &ctx)?.with_prec(ctx.mantissa_bits());
    let profile = BoundProfile::new(args.b, &s.re, args.terms, &ctx)?;
    let mut poch = PochhammerRatio::new(&s, &ctx)?;
    poch.extend(args.terms);
    let lower = format_fixed(profile.lower(), args.digits);
    let rows: Vec<BoundRow> = (0..=args.terms)
        .map(|m| BoundRow {
            m,
            upper_sigma: format_bound(&profile.upper(m), BOUND_DIGITS),
            abs_bound: format_bound(&cstar_abs_bound(m, &profile, &poch), BOUND_DIGITS),
            lower: lower.clone(),
        })
        .collect();
    write_rows(&rows, args.format, out)
}

#[derive(Serialize)]
struct CheckRow<'a> {
    check: &'a str,
    passed: bool,
    detail: &'a str,
}

fn cmd_verify(args: &VerifyArgs, out: &mut impl Write) -> Result<(), Failure> {
    let opts = VerifyOptions { digits: args.digits, quick: args.quick, seed: args.seed, mutation: mutation(args.inject_fault) };
    let outcomes = run_all(&opts)?;
    match args.format {
        None => {
            for o in &outcomes {
                writeln!(out, "{o}")?;
            }
        }
        Some(f) => {
            let rows: Vec<CheckRow> =
                outcomes.iter().map(|o| CheckRow { check: o.name, passed: o.passed, detail: &o.detail }).collect();
            write_rows(&rows, f, out)?;
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    t: f64,
    digits: u32,
    #[serde(rename = "M")]
    m: usize,
    elapsed_ms: f64,
}

fn cmd_bench(args: &BenchArgs, out: &mut impl Write) -> Result<(), Failure> {
    let ell = (args.ell != 0).then_some(args.ell);
    let report = scaling_report(ell, args.repeats)?;
    let rows: Vec<BenchRow> = report
        .rows()
        .map(|r| BenchRow { t: r.t, digits: r.digits, m: r.terms, elapsed_ms: round_ms(r.elapsed_ms()) })
        .collect();
    write_rows(&rows, args.format, out)?;
    for c in &report.checks {
        let verdict = if c.passed() { "ok" } else { "outside" };
        eprintln!("soft check {} = {:.3} (expected [{}, {}]): {verdict}", c.name, c.value, c.low, c.high);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, &mut out),
        Command::Coeffs(a) => cmd_coeffs(a, &mut out),
        Command::Bounds(a) => cmd_bounds(a, &mut out),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Bench(a) => cmd_bench(a, &mut out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
