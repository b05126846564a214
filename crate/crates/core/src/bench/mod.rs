//! Built-in test functions, the reference benchmark grid, and order
//! estimation.
//!
//! [`builtin_suite`] parses the eight registry functions and refines each
//! seed root by Newton iteration at working precision. [`run_table2`] runs
//! every (function, guess, method) cell under a fixed evaluation budget and
//! collects a [`BenchReport`]; [`report`] handles CSV and JSON output.

mod reference;
pub mod report;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{derive, parse, Expr, ExprError};
use crate::methods::{solve_with_derivative, IterationTrace, MethodSpec, StopRule, Termination};
use crate::numerics::{display_magnitude, make_context, PrecReal, PrecisionContext};

pub use reference::{reference_residuals, ReferenceEntry, ReferenceStatus};
pub use report::{
    emit_report, parse_report_csv, parse_report_json, render_report, BenchCell, BenchReport,
    Provenance, ReportFormat, CSV_COLUMNS,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("case {case}: {source}")]
    Expression {
        case: String,
        #[source]
        source: ExprError,
    },
    #[error("case {case}: root refinement failed: {reason}")]
    Refinement { case: String, reason: String },
    #[error("budget {budget} is below the {needed} evaluations of one k = {steps} iteration")]
    BudgetTooSmall {
        budget: u32,
        needed: u32,
        steps: u32,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Format(String),
}

/// Static description of a registry function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseDef {
    pub id: &'static str,
    pub expression: &'static str,
    /// 20-digit root used as the refinement seed.
    pub root_seed: &'static str,
    pub guesses: [&'static str; 3],
}

pub const BUILTIN_CASES: [CaseDef; 8] = [
    CaseDef {
        id: "f1",
        expression: "sin(x)^2 - x^2 + 1",
        root_seed: "1.4044916482153412260",
        guesses: ["-1.0", "2.0", "1.0"],
    },
    CaseDef {
        id: "f2",
        expression: "x^2 - exp(x) - 3*x + 2",
        root_seed: "0.25753028543986076046",
        guesses: ["2.0", "2.5", "-1.5"],
    },
    CaseDef {
        id: "f3",
        expression: "(x - 1)^3 - 1",
        root_seed: "2",
        guesses: ["3.5", "3.1", "1.5"],
    },
    CaseDef {
        id: "f4",
        expression: "x^3 - 10",
        root_seed: "2.1544346900318837218",
        guesses: ["1.5", "1.2", "1.0"],
    },
    CaseDef {
        id: "f5",
        expression: "x*exp(x^2) - sin(x)^2 + 3*cos(x) + 5",
        root_seed: "-1.2076478271309189270",
        guesses: ["-2.0", "-1.5", "-1.0"],
    },
    CaseDef {
        id: "f6",
        expression: "exp(x^2 + 7*x - 30) - 1",
        root_seed: "3",
        guesses: ["3.5", "3.2", "2.9"],
    },
    CaseDef {
        id: "f7",
        expression: "x^2 + sin(x) + x",
        root_seed: "0",
        guesses: ["0.3", "0.1", "-0.2"],
    },
    CaseDef {
        id: "f8",
        expression: "sin(2*cos(x)) - 1 - x^2 + exp(sin(x^3))",
        root_seed: "1.3061752018468278250",
        guesses: ["1.35", "1.31", "1.29"],
    },
];

pub fn case_def(id: &str) -> Option<&'static CaseDef> {
    BUILTIN_CASES.iter().find(|c| c.id == id)
}

/// A starting point, keeping the text it was given as.
#[derive(Debug, Clone)]
pub struct Guess {
    pub label: String,
    pub value: PrecReal,
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub id: String,
    pub expression_text: String,
    pub expr: Expr,
    pub derivative: Expr,
    pub root_seed: String,
    /// Seed refined until `|f| <= 10^(-d+10)`.
    pub reference_root: PrecReal,
    pub guesses: Vec<Guess>,
}

/// Residual threshold exponent for refined roots: `|f| <= 10^-(d - 10)`.
fn refinement_exponent(ctx: PrecisionContext) -> u32 {
    ctx.decimal_digits().saturating_sub(10)
}

/// Newton iteration from `seed` until `|f| <= 10^(-d+10)`.
pub fn refine_root(
    f: &Expr,
    fprime: &Expr,
    seed: &PrecReal,
    ctx: PrecisionContext,
) -> Result<PrecReal, String> {
    let stop = StopRule::residual_tolerance(refinement_exponent(ctx)).or_max_iterations(100);
    let trace = solve_with_derivative(f, fprime, seed, MethodSpec::newton(), stop, ctx);
    match trace.termination {
        Termination::Converged => Ok(trace.final_iterate().clone()),
        Termination::BudgetExhausted => Err(format!(
            "no convergence after {} Newton iterations",
            trace.iterations.len()
        )),
        Termination::Aborted(reason) => Err(reason),
    }
}

impl TestCase {
    /// Parses `def` and refines its seed root at `ctx`.
    pub fn load(def: &CaseDef, ctx: PrecisionContext) -> Result<Self, BenchError> {
        let expr_err = |source| BenchError::Expression {
            case: def.id.to_string(),
            source,
        };
        let expr = parse(def.expression).map_err(expr_err)?;
        let derivative = derive(&expr).map_err(expr_err)?;
        let number = |text: &str| {
            PrecReal::parse(text, ctx).map_err(|e| BenchError::Refinement {
                case: def.id.to_string(),
                reason: e.to_string(),
            })
        };
        let seed = number(def.root_seed)?;
        let reference_root = refine_root(&expr, &derivative, &seed, ctx).map_err(|reason| {
            BenchError::Refinement {
                case: def.id.to_string(),
                reason,
            }
        })?;
        let guesses = def
            .guesses
            .iter()
            .map(|g| {
                Ok(Guess {
                    label: g.to_string(),
                    value: number(g)?,
                })
            })
            .collect::<Result<_, BenchError>>()?;
        Ok(TestCase {
            id: def.id.to_string(),
            expression_text: def.expression.to_string(),
            expr,
            derivative,
            root_seed: def.root_seed.to_string(),
            reference_root,
            guesses,
        })
    }
}

/// The eight registry functions with refined roots.
pub fn builtin_suite(ctx: PrecisionContext) -> Result<Vec<TestCase>, BenchError> {
    BUILTIN_CASES
        .par_iter()
        .map(|def| TestCase::load(def, ctx))
        .collect()
}

/// Computational order of convergence, or the reason it is unavailable.
#[derive(Debug, Clone, PartialEq)]
pub enum Coc {
    Value(f64),
    Undefined(String),
}

impl Coc {
    pub fn value(&self) -> Option<f64> {
        match self {
            Coc::Value(v) => Some(*v),
            Coc::Undefined(_) => None,
        }
    }
}

/// `rho = ln(e_{n+1}/e_n) / ln(e_n/e_{n-1})` on the last consecutive triple
/// with all three errors strictly above `floor`.
pub fn coc_from_errors(errors: &[PrecReal], floor: &PrecReal) -> Coc {
    let log_ctx = make_context(40).expect("40 digits is a valid context");
    let logs: Vec<Option<f64>> = errors
        .iter()
        .map(|e| {
            let e = e.abs();
            (e.is_finite() && e > *floor).then(|| e.with_ctx(log_ctx).ln().to_f64())
        })
        .collect();
    for w in logs.windows(3).rev() {
        if let [Some(l0), Some(l1), Some(l2)] = *w {
            let denominator = l1 - l0;
            if denominator == 0.0 {
                continue;
            }
            return Coc::Value((l2 - l1) / denominator);
        }
    }
    Coc::Undefined(format!(
        "no three consecutive errors above 1e{}",
        floor.magnitude().map_or(0, |m| m.exponent10() - 1)
    ))
}

/// COC of a run against a known root, with errors `|x_n - root|` floored at
/// `10^(-d+50)`.
pub fn coc_estimate(trace: &IterationTrace, root: &PrecReal) -> Coc {
    let ctx = trace.x0.ctx().coarser(root.ctx());
    let floor = ctx.pow10(50 - i64::from(ctx.decimal_digits()));
    let errors: Vec<PrecReal> = trace
        .iterates()
        .into_iter()
        .map(|x| (x - root).abs())
        .collect();
    if errors.len() < 3 {
        return Coc::Undefined(format!("only {} iterates", errors.len()));
    }
    coc_from_errors(&errors, &floor)
}

/// The root a run actually approached: Newton refinement from its final
/// iterate. For even functions this picks the sign the run converged to.
pub fn attained_root(
    case: &TestCase,
    trace: &IterationTrace,
    ctx: PrecisionContext,
) -> Option<PrecReal> {
    let last = trace.final_iterate();
    if !last.is_finite() {
        return None;
    }
    refine_root(&case.expr, &case.derivative, last, ctx).ok()
}

fn run_cell(
    case: &TestCase,
    guess: &Guess,
    method: MethodSpec,
    budget: u32,
    ctx: PrecisionContext,
) -> BenchCell {
    let trace = solve_with_derivative(
        &case.expr,
        &case.derivative,
        &guess.value,
        method,
        StopRule::tnfe_budget(budget),
        ctx,
    );
    let residual = trace.final_residual().and_then(display_magnitude);
    let root = attained_root(case, &trace, ctx);
    let coc = root.as_ref().and_then(|r| coc_estimate(&trace, r).value());
    BenchCell {
        case: case.id.clone(),
        guess: guess.label.clone(),
        k: method.steps(),
        iterations: trace.iterations.len() as u32,
        tnfe: trace.tnfe(),
        residual,
        coc,
        status: trace.termination.clone(),
        root: root.map(|r| r.to_decimal(20)),
    }
}

/// Runs every (case, guess, method) cell with the same evaluation budget.
///
/// Cells run in parallel; the report is ordered by case, then guess, then
/// method. Failed runs are recorded with their status, never dropped.
pub fn run_table2(
    cases: &[TestCase],
    methods: &[MethodSpec],
    budget: u32,
    ctx: PrecisionContext,
) -> Result<BenchReport, BenchError> {
    if let Some(worst) = methods.iter().max_by_key(|m| m.evaluations_per_iteration()) {
        if budget < worst.evaluations_per_iteration() {
            return Err(BenchError::BudgetTooSmall {
                budget,
                needed: worst.evaluations_per_iteration(),
                steps: worst.steps(),
            });
        }
    }
    let jobs: Vec<(&TestCase, &Guess, MethodSpec)> = cases
        .iter()
        .flat_map(|c| {
            c.guesses
                .iter()
                .flat_map(move |g| methods.iter().map(move |m| (c, g, *m)))
        })
        .collect();
    let cells = jobs
        .par_iter()
        .map(|(c, g, m)| run_cell(c, g, *m, budget, ctx))
        .collect();
    Ok(BenchReport {
        digits: ctx.decimal_digits(),
        budget,
        cells,
        provenance: Provenance::now(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_context;

    fn ctx(d: u32) -> PrecisionContext {
        make_context(d).unwrap()
    }

    fn pow10(e: i64, c: PrecisionContext) -> PrecReal {
        c.pow10(e)
    }

    #[test]
    fn coc_of_pure_quadratic_errors() {
        let c = ctx(200);
        let errors: Vec<_> = (0..5).map(|n| pow10(-2 * (1 << n), c)).collect();
        let rho = coc_from_errors(&errors, &pow10(-150, c)).value().unwrap();
        assert!((rho - 2.0).abs() < 1e-12, "{rho}");
    }

    #[test]
    fn coc_of_quartic_errors() {
        let c = ctx(400);
        let errors: Vec<_> = (0..5).map(|n| pow10(-(4i64.pow(n)), c)).collect();
        // 10^-256 sits below the floor, so the last triple is 4, 16, 64
        let rho = coc_from_errors(&errors, &pow10(-200, c)).value().unwrap();
        assert!((rho - 4.0).abs() < 1e-12, "{rho}");
    }

    #[test]
    fn coc_needs_a_triple_above_the_floor() {
        let c = ctx(100);
        let errors = vec![pow10(-1, c), pow10(-60, c), PrecReal::zero(c)];
        assert!(matches!(
            coc_from_errors(&errors, &pow10(-50, c)),
            Coc::Undefined(_)
        ));
        let flat = vec![pow10(-1, c); 3];
        assert!(coc_from_errors(&flat, &pow10(-50, c)).value().is_none());
    }

    #[test]
    fn registry_has_eight_cases() {
        assert_eq!(BUILTIN_CASES.len(), 8);
        for def in &BUILTIN_CASES {
            let f = parse(def.expression).unwrap();
            derive(&f).unwrap();
        }
        assert_eq!(case_def("f4").unwrap().root_seed, "2.1544346900318837218");
        assert_eq!(case_def("f5").unwrap().root_seed, "-1.2076478271309189270");
        assert!(case_def("f9").is_none());
    }

    #[test]
    fn refined_roots_vanish() {
        let c = ctx(300);
        for case in builtin_suite(c).unwrap() {
            let r = case.expr.eval(&case.reference_root, c).unwrap().abs();
            assert!(r <= pow10(-290, c), "{}: {r:?}", case.id);
        }
    }

    #[test]
    fn f8_reads_as_exp_of_sin_of_cube() {
        let c = ctx(60);
        let seed = PrecReal::parse("1.3061752018468278250", c).unwrap();
        let good = parse(case_def("f8").unwrap().expression).unwrap();
        let other = parse("sin(2*cos(x)) - 1 - x^2 + exp(sin(x)^3)").unwrap();
        assert!(good.eval(&seed, c).unwrap().abs() < pow10(-18, c));
        assert!(other.eval(&seed, c).unwrap().abs() > pow10(-3, c));
    }

    #[test]
    fn even_function_records_the_attained_root() {
        let c = ctx(200);
        let case = TestCase::load(case_def("f1").unwrap(), c).unwrap();
        let report = run_table2(&[case], &[MethodSpec::three_step()], 24, c).unwrap();
        let roots: Vec<_> = report
            .cells
            .iter()
            .map(|x| x.root.clone().unwrap())
            .collect();
        assert!(
            roots[0].starts_with("-1.404491648215341226"),
            "{}",
            roots[0]
        );
        assert!(roots[1].starts_with("1.404491648215341226"), "{}", roots[1]);
    }

    #[test]
    fn budget_below_one_iteration_is_rejected() {
        let c = ctx(50);
        let err = run_table2(&[], &[MethodSpec::three_step()], 3, c).unwrap_err();
        assert!(matches!(err, BenchError::BudgetTooSmall { needed: 4, .. }));
    }

    #[test]
    fn grid_order_is_case_guess_method() {
        let c = ctx(100);
        let cases = vec![
            TestCase::load(case_def("f4").unwrap(), c).unwrap(),
            TestCase::load(case_def("f3").unwrap(), c).unwrap(),
        ];
        let methods = [MethodSpec::newton(), MethodSpec::three_step()];
        let report = run_table2(&cases, &methods, 12, c).unwrap();
        let keys: Vec<_> = report
            .cells
            .iter()
            .map(|x| format!("{}/{}/{}", x.case, x.guess, x.k))
            .collect();
        assert_eq!(keys.len(), 12);
        assert_eq!(&keys[..4], ["f4/1.5/1", "f4/1.5/3", "f4/1.2/1", "f4/1.2/3"]);
        assert_eq!(keys[6], "f3/3.5/1");
        assert!(report.cells.iter().all(|x| x.tnfe <= 12));
    }
}
