//! Command-line front end: argument parsing, dispatch and text rendering.
//!
//! Exit codes: 0 on success, 1 when a computation aborts (the partial trace
//! is still printed), 2 on usage, parse and output errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nsroot_core::bench::{
    builtin_suite, case_def, coc_estimate, reference_residuals, refine_root, render_report,
    run_table2, BenchReport, Coc, ReportFormat, TestCase, BUILTIN_CASES,
};
use nsroot_core::expr::{derive, parse, Expr};
use nsroot_core::methods::{
    solve_with_derivative, IterationTrace, MethodSpec, StopRule, Termination,
};
use nsroot_core::numerics::{display_magnitude, make_context, PrecReal, PrecisionContext};
use nsroot_core::series::verify_order;

/// Iteration cap for residual-tolerance runs, which may never reach a
/// tolerance finer than the working precision.
pub const MAX_TOLERANCE_ITERATIONS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "nsroot", version, about = "High-precision k-step root finding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the k-step method from a starting point.
    Solve(SolveArgs),
    /// Run the benchmark grid over the built-in functions.
    Bench(BenchArgs),
    /// Estimate the computational order of convergence of a run.
    Coc(CocArgs),
    /// Print the symbolic error expansion of one k-step iteration.
    VerifyOrder(VerifyArgs),
    /// List the built-in test functions.
    ListFunctions(OutputArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write output to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Built-in function id (f1..f8).
    #[arg(long = "fn", conflicts_with = "expr")]
    function: Option<String>,
    /// Function of x, e.g. "x^3 - 10".
    #[arg(long)]
    expr: Option<String>,
    /// Starting point (defaults to the first built-in guess with --fn).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Evaluation budget; takes precedence over --tol-exp.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    tnfe: Option<u32>,
    /// Stop once |f(x_n)| <= 10^-TOL_EXP.
    #[arg(long, default_value_t = 10000, value_parser = clap::value_parser!(u32).range(1..))]
    tol_exp: u32,
    #[arg(long, default_value_t = 10000)]
    digits: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct CocArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Root to measure errors against; by default the run's final iterate
    /// is refined by Newton iteration.
    #[arg(long, allow_hyphen_values = true)]
    root: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Restrict to these function ids (repeatable or comma separated).
    #[arg(long = "fn", value_delimiter = ',')]
    functions: Vec<String>,
    /// Methods to run (repeatable or comma separated).
    #[arg(long, value_delimiter = ',', default_value = "3", value_parser = clap::value_parser!(u32).range(1..))]
    k: Vec<u32>,
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u32).range(1..))]
    tnfe: u32,
    #[arg(long, default_value_t = 10000)]
    digits: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Truncation order D (default k + 2).
    #[arg(long)]
    order: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Solve,
    Bench,
    Coc,
    VerifyOrder,
    ListFunctions,
}

/// Parsed command line, with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub subcommand: SubcommandKind,
    pub digits: u32,
    /// Built-in function ids (`--fn`).
    pub functions: Vec<String>,
    pub expr: Option<String>,
    pub x0: Option<String>,
    pub k: Vec<u32>,
    pub tnfe: Option<u32>,
    pub tol_exp: Option<u32>,
    pub order: Option<usize>,
    pub root: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl CliConfig {
    fn from_cli(cli: Cli) -> Self {
        let blank = |subcommand, out: OutputArgs| CliConfig {
            subcommand,
            digits: 10000,
            functions: Vec::new(),
            expr: None,
            x0: None,
            k: vec![3],
            tnfe: None,
            tol_exp: None,
            order: None,
            root: None,
            output: out.output,
            format: out.format,
        };
        let with_run = |subcommand, run: RunArgs, root| CliConfig {
            digits: run.digits,
            functions: run.function.into_iter().collect(),
            expr: run.expr,
            x0: run.x0,
            k: vec![run.k],
            tnfe: run.tnfe,
            tol_exp: Some(run.tol_exp),
            root,
            ..blank(subcommand, run.out)
        };
        match cli.command {
            Command::Solve(a) => with_run(SubcommandKind::Solve, a.run, None),
            Command::Coc(a) => with_run(SubcommandKind::Coc, a.run, a.root),
            Command::Bench(a) => CliConfig {
                digits: a.digits,
                functions: a.functions,
                k: a.k,
                tnfe: Some(a.tnfe),
                ..blank(SubcommandKind::Bench, a.out)
            },
            Command::VerifyOrder(a) => CliConfig {
                k: vec![a.k],
                order: a.order,
                ..blank(SubcommandKind::VerifyOrder, a.out)
            },
            Command::ListFunctions(out) => blank(SubcommandKind::ListFunctions, out),
        }
    }

    /// Parses `argv` (including the program name).
    pub fn parse_from<I, T>(argv: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Cli::try_parse_from(argv).map(Self::from_cli)
    }

    fn steps(&self) -> u32 {
        self.k.first().copied().unwrap_or(3)
    }

    /// `--tnfe` if given, else `--tol-exp` with an iteration cap.
    pub fn stop_rule(&self) -> StopRule {
        match self.tnfe {
            Some(budget) => StopRule::tnfe_budget(budget),
            None => StopRule::residual_tolerance(self.tol_exp.unwrap_or(10000))
                .or_max_iterations(MAX_TOLERANCE_ITERATIONS),
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    /// The run aborted; `output` is still printed.
    Aborted {
        output: String,
        reason: String,
    },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the CLI on `argv`, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return 2;
        }
    };
    match execute(&config) {
        Ok(text) => deliver(&config, &text, out, err, 0),
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Aborted { output, reason }) => {
            let code = deliver(&config, &output, out, err, 1);
            let _ = writeln!(err, "aborted: {reason}");
            code
        }
    }
}

fn deliver(
    config: &CliConfig,
    text: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
    code: i32,
) -> i32 {
    match &config.output {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                2
            }
        },
        None => {
            let _ = out.write_all(text.as_bytes());
            code
        }
    }
}

fn context(digits: u32) -> Result<PrecisionContext, CliError> {
    make_context(digits).map_err(|e| usage(e.to_string()))
}

fn execute(config: &CliConfig) -> Result<String, CliError> {
    match config.subcommand {
        SubcommandKind::Solve => solve_cmd(config),
        SubcommandKind::Coc => coc_cmd(config),
        SubcommandKind::Bench => bench_cmd(config),
        SubcommandKind::VerifyOrder => verify_cmd(config),
        SubcommandKind::ListFunctions => list_cmd(config),
    }
}

/// The function to solve and its starting point.
struct Target {
    label: String,
    expr: Expr,
    derivative: Expr,
    x0: PrecReal,
}

fn target(config: &CliConfig, ctx: PrecisionContext) -> Result<Target, CliError> {
    let (label, text, default_x0) = match (config.functions.first(), &config.expr) {
        (Some(id), None) => {
            let def = case_def(id).ok_or_else(|| usage(format!("unknown function id `{id}`")))?;
            (def.id.to_string(), def.expression, Some(def.guesses[0]))
        }
        (None, Some(text)) => (text.clone(), text.as_str(), None),
        _ => return Err(usage("give either --fn ID or --expr TEXT")),
    };
    let expr = parse(text).map_err(|e| usage(format!("in `{text}`: {e}")))?;
    let derivative = derive(&expr).map_err(|e| usage(format!("in `{text}`: {e}")))?;
    let x0_text = config
        .x0
        .as_deref()
        .or(default_x0)
        .ok_or_else(|| usage("--x0 is required with --expr"))?;
    let x0 = PrecReal::parse(x0_text, ctx).map_err(|e| usage(format!("--x0: {e}")))?;
    Ok(Target {
        label,
        expr,
        derivative,
        x0,
    })
}

fn run_target(
    config: &CliConfig,
    ctx: PrecisionContext,
) -> Result<(Target, IterationTrace), CliError> {
    let t = target(config, ctx)?;
    let method = MethodSpec::new(config.steps()).map_err(|e| usage(e.to_string()))?;
    let trace = solve_with_derivative(
        &t.expr,
        &t.derivative,
        &t.x0,
        method,
        config.stop_rule(),
        ctx,
    );
    Ok((t, trace))
}

fn magnitude_text(x: Option<&PrecReal>) -> String {
    x.and_then(display_magnitude)
        .map_or_else(|| "n/a".to_string(), |m| m.to_string())
}

fn finish(output: String, trace: &IterationTrace) -> Result<String, CliError> {
    match &trace.termination {
        Termination::Aborted(reason) => Err(CliError::Aborted {
            output,
            reason: reason.clone(),
        }),
        _ => Ok(output),
    }
}

fn solve_cmd(config: &CliConfig) -> Result<String, CliError> {
    let ctx = context(config.digits)?;
    let (t, trace) = run_target(config, ctx)?;
    let mut s = String::new();
    match config.format {
        Format::Text => {
            let k = trace.method.steps();
            writeln!(s, "function: {}", t.label).unwrap();
            writeln!(
                s,
                "method: k = {k}, order {}, {} evaluations per iteration",
                k + 1,
                k + 1
            )
            .unwrap();
            writeln!(s, "digits: {}", ctx.decimal_digits()).unwrap();
            writeln!(s, "{:>4} {:>6}  residual", "n", "tnfe").unwrap();
            writeln!(
                s,
                "{:>4} {:>6}  {}",
                0,
                0,
                magnitude_text(trace.initial_residual.as_ref())
            )
            .unwrap();
            for (i, r) in trace.iterations.iter().enumerate() {
                writeln!(
                    s,
                    "{:>4} {:>6}  {}",
                    i + 1,
                    r.tnfe,
                    magnitude_text(Some(&r.residual))
                )
                .unwrap();
            }
            writeln!(s, "status: {}", trace.termination.label()).unwrap();
            writeln!(s, "x = {}", trace.final_iterate().to_decimal_full()).unwrap();
        }
        Format::Csv => {
            writeln!(s, "n,tnfe,x,residual").unwrap();
            writeln!(
                s,
                "0,0,{},{}",
                trace.x0.to_decimal_full(),
                magnitude_text(trace.initial_residual.as_ref())
            )
            .unwrap();
            for (i, r) in trace.iterations.iter().enumerate() {
                writeln!(
                    s,
                    "{},{},{},{}",
                    i + 1,
                    r.tnfe,
                    r.x_next().to_decimal_full(),
                    magnitude_text(Some(&r.residual))
                )
                .unwrap();
            }
        }
        Format::Json => {
            let iterations: Vec<_> = trace
                .iterations
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    json!({
                        "n": i + 1,
                        "tnfe": r.tnfe,
                        "x": r.x_next().to_decimal_full(),
                        "residual": magnitude_text(Some(&r.residual)),
                    })
                })
                .collect();
            let doc = json!({
                "function": t.label,
                "k": trace.method.steps(),
                "digits": ctx.decimal_digits(),
                "x0": trace.x0.to_decimal_full(),
                "initial_residual": magnitude_text(trace.initial_residual.as_ref()),
                "iterations": iterations,
                "status": trace.termination.label(),
                "tnfe": trace.tnfe(),
                "x": trace.final_iterate().to_decimal_full(),
            });
            s = serde_json::to_string_pretty(&doc).expect("JSON value serialises");
            s.push('\n');
        }
    }
    finish(s, &trace)
}

fn coc_cmd(config: &CliConfig) -> Result<String, CliError> {
    let ctx = context(config.digits)?;
    let (t, trace) = run_target(config, ctx)?;
    let root = match &config.root {
        Some(text) => Some(PrecReal::parse(text, ctx).map_err(|e| usage(format!("--root: {e}")))?),
        None => refine_root(&t.expr, &t.derivative, trace.final_iterate(), ctx).ok(),
    };
    let coc = match &root {
        Some(r) => coc_estimate(&trace, r),
        None => Coc::Undefined("could not locate the root near the final iterate".into()),
    };
    let errors: Vec<String> = match &root {
        Some(r) => trace
            .iterates()
            .into_iter()
            .map(|x| magnitude_text(Some(&(x - r).abs())))
            .collect(),
        None => Vec::new(),
    };
    let mut s = String::new();
    match config.format {
        Format::Json => {
            let doc = json!({
                "function": t.label,
                "k": trace.method.steps(),
                "digits": ctx.decimal_digits(),
                "root": root.as_ref().map(|r| r.to_decimal(30)),
                "errors": errors,
                "coc": coc.value(),
                "status": trace.termination.label(),
            });
            s = serde_json::to_string_pretty(&doc).expect("JSON value serialises");
            s.push('\n');
        }
        Format::Csv => {
            writeln!(s, "n,error").unwrap();
            for (i, e) in errors.iter().enumerate() {
                writeln!(s, "{i},{e}").unwrap();
            }
        }
        Format::Text => {
            writeln!(s, "function: {}", t.label).unwrap();
            writeln!(s, "method: k = {}", trace.method.steps()).unwrap();
            if let Some(r) = &root {
                writeln!(s, "root: {}", r.to_decimal(30)).unwrap();
            }
            writeln!(s, "{:>4}  |x_n - root|", "n").unwrap();
            for (i, e) in errors.iter().enumerate() {
                writeln!(s, "{i:>4}  {e}").unwrap();
            }
            match &coc {
                Coc::Value(v) => writeln!(s, "coc: {v:.6}").unwrap(),
                Coc::Undefined(why) => writeln!(s, "coc: undefined ({why})").unwrap(),
            }
        }
    }
    finish(s, &trace)
}

fn bench_cmd(config: &CliConfig) -> Result<String, CliError> {
    let ctx = context(config.digits)?;
    for id in &config.functions {
        if case_def(id).is_none() {
            return Err(usage(format!("unknown function id `{id}`")));
        }
    }
    let methods = config
        .k
        .iter()
        .map(|&k| MethodSpec::new(k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let budget = config.tnfe.unwrap_or(24);
    let defs: Vec<_> = BUILTIN_CASES
        .iter()
        .filter(|d| config.functions.is_empty() || config.functions.iter().any(|f| f == d.id))
        .collect();
    let cases = if defs.len() == BUILTIN_CASES.len() {
        builtin_suite(ctx)
    } else {
        defs.into_iter().map(|d| TestCase::load(d, ctx)).collect()
    }
    .map_err(|e| CliError::Aborted {
        output: String::new(),
        reason: e.to_string(),
    })?;
    let report = run_table2(&cases, &methods, budget, ctx).map_err(|e| usage(e.to_string()))?;
    Ok(match config.format {
        Format::Text => render_bench_text(&report),
        format => render_report(&report, report_format(format)),
    })
}

fn report_format(format: Format) -> ReportFormat {
    match format {
        Format::Json => ReportFormat::Json,
        _ => ReportFormat::Csv,
    }
}

/// Aligned table with the published residual alongside where one exists.
pub fn render_bench_text(report: &BenchReport) -> String {
    let published = reference_residuals();
    let mut s = String::new();
    writeln!(
        s,
        "digits: {}, evaluation budget: {}",
        report.digits, report.budget
    )
    .unwrap();
    writeln!(
        s,
        "{:<4} {:>6} {:>2} {:>4} {:>4}  {:<16} {:<16} {:>8}  status",
        "case", "guess", "k", "iter", "tnfe", "residual", "published", "coc"
    )
    .unwrap();
    for c in &report.cells {
        let reference = published
            .iter()
            .find(|e| e.case == c.case && e.guess == c.guess && e.k == Some(c.k))
            .map_or("-".to_string(), |e| e.raw.clone());
        let residual = c
            .residual
            .as_ref()
            .map_or("n/a".to_string(), |m| m.to_string());
        let coc = c.coc.map_or("-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            s,
            "{:<4} {:>6} {:>2} {:>4} {:>4}  {:<16} {:<16} {:>8}  {}",
            c.case,
            c.guess,
            c.k,
            c.iterations,
            c.tnfe,
            residual,
            reference,
            coc,
            c.status.label()
        )
        .unwrap();
    }
    s
}

fn verify_cmd(config: &CliConfig) -> Result<String, CliError> {
    let k = config.steps() as usize;
    let order = config.order.unwrap_or(k + 2);
    let report = verify_order(k, order).map_err(|e| usage(e.to_string()))?;
    let mut s = String::new();
    match config.format {
        Format::Text => {
            writeln!(s, "e' = {}", report.error_series).unwrap();
            writeln!(s, "leading term: {}", report.leading_term()).unwrap();
            writeln!(s, "order: {}", report.leading_power).unwrap();
        }
        Format::Json => {
            let coefficients: Vec<String> = report
                .error_series
                .coeffs()
                .iter()
                .map(|c| c.to_string())
                .collect();
            let doc = json!({
                "k": k,
                "truncation_order": order,
                "series": report.error_series.to_string(),
                "coefficients": coefficients,
                "leading_power": report.leading_power,
                "leading_coeff": report.leading_coeff.to_string(),
            });
            s = serde_json::to_string_pretty(&doc).expect("JSON value serialises");
            s.push('\n');
        }
        Format::Csv => {
            writeln!(s, "power,coefficient").unwrap();
            for (p, c) in report.error_series.coeffs().iter().enumerate() {
                writeln!(s, "{p},\"{c}\"").unwrap();
            }
        }
    }
    Ok(s)
}

fn list_cmd(config: &CliConfig) -> Result<String, CliError> {
    let mut s = String::new();
    match config.format {
        Format::Text => {
            writeln!(s, "{:<3}  {:<42} {:<24} guesses", "id", "function", "root").unwrap();
            for d in &BUILTIN_CASES {
                writeln!(
                    s,
                    "{:<3}  {:<42} {:<24} {}",
                    d.id,
                    d.expression,
                    d.root_seed,
                    d.guesses.join(", ")
                )
                .unwrap();
            }
        }
        Format::Csv => {
            writeln!(s, "id,function,root,guesses").unwrap();
            for d in &BUILTIN_CASES {
                writeln!(
                    s,
                    "{},{},{},{}",
                    d.id,
                    d.expression,
                    d.root_seed,
                    d.guesses.join(" ")
                )
                .unwrap();
            }
        }
        Format::Json => {
            let rows: Vec<_> = BUILTIN_CASES
                .iter()
                .map(|d| json!({"id": d.id, "function": d.expression, "root": d.root_seed, "guesses": d.guesses}))
                .collect();
            s = serde_json::to_string_pretty(&rows).expect("JSON value serialises");
            s.push('\n');
        }
    }
    Ok(s)
}
