//! Properties of the full benchmark grid at 10000 digits, k = 3, budget 24.

use nsroot_core::bench::{
    builtin_suite, parse_report_csv, parse_report_json, render_report, run_table2, ReportFormat,
    TestCase,
};
use nsroot_core::methods::{solve_with_derivative, IterationTrace, MethodSpec, StopRule};
use nsroot_core::numerics::{display_magnitude, make_context, PrecisionContext};

fn run(case: &TestCase, guess: usize, budget: u32, ctx: PrecisionContext) -> IterationTrace {
    solve_with_derivative(
        &case.expr,
        &case.derivative,
        &case.guesses[guess].value.with_ctx(ctx),
        MethodSpec::three_step(),
        StopRule::tnfe_budget(budget),
        ctx,
    )
}

fn exponents(trace: &IterationTrace) -> Vec<i64> {
    trace
        .iterations
        .iter()
        .map(|r| display_magnitude(&r.residual).unwrap().exponent10())
        .collect()
}

#[test]
fn full_grid_properties() {
    let ctx = make_context(10000).unwrap();
    let small = make_context(1000).unwrap();
    let suite = builtin_suite(ctx).unwrap();

    let report = run_table2(&suite, &[MethodSpec::three_step()], 24, ctx).unwrap();
    assert_eq!(report.cells.len(), 24);

    // COC conformance wherever a qualifying triple exists
    for cell in &report.cells {
        if let Some(rho) = cell.coc {
            assert!(
                (rho - 4.0).abs() <= 0.1,
                "{}@{}: coc {rho}",
                cell.case,
                cell.guess
            );
        }
    }
    assert!(report.cells.iter().filter(|c| c.coc.is_some()).count() >= 20);

    // parse(emit(report)) reproduces every cell
    let csv = render_report(&report, ReportFormat::Csv);
    assert_eq!(parse_report_csv(&csv).unwrap(), report.cells);
    let json = render_report(&report, ReportFormat::Json);
    assert_eq!(parse_report_json(&json).unwrap(), report);

    for case in &suite {
        for g in 0..case.guesses.len() {
            let label = format!("{}@{}", case.id, case.guesses[g].label);
            let full = exponents(&run(case, g, 24, ctx));
            assert_eq!(full.len(), 6, "{label}");

            // residuals strictly decrease from the second iteration on
            let trace = run(case, g, 24, ctx);
            for w in trace.iterations[1..].windows(2) {
                assert!(w[1].residual < w[0].residual, "{label}: residuals {full:?}");
            }

            // 1000 digits, budget 12: same first three exponents, and the
            // per-iteration exponent ratio is near 4 once the run is asymptotic
            let scaled = exponents(&run(case, g, 12, small));
            assert_eq!(scaled.len(), 3, "{label}");
            assert_eq!(scaled[..], full[..3], "{label}");
            for w in scaled.windows(2) {
                if w[0] <= -20 {
                    let ratio = w[1] as f64 / w[0] as f64;
                    assert!((3.5..=4.5).contains(&ratio), "{label}: {scaled:?}");
                }
            }
        }
    }
}
