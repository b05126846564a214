use nsroot_core::bench::{builtin_suite, coc_estimate};
use nsroot_core::methods::{solve_with_derivative, MethodSpec, StopRule};
use nsroot_core::numerics::make_context;

/// Each registry function from its guess nearest the root, k = 1..5.
#[test]
fn coc_matches_k_plus_one() {
    let ctx = make_context(3000).unwrap();
    let mut report = Vec::new();
    for case in builtin_suite(ctx).unwrap() {
        let guess = case
            .guesses
            .iter()
            .min_by(|a, b| {
                let da = (&a.value - &case.reference_root).abs();
                let db = (&b.value - &case.reference_root).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        for k in 1..=5u32 {
            let stop = StopRule::residual_tolerance(ctx.decimal_digits()).or_max_iterations(60);
            let trace = solve_with_derivative(
                &case.expr,
                &case.derivative,
                &guess.value,
                MethodSpec::new(k).unwrap(),
                stop,
                ctx,
            );
            let rho = coc_estimate(&trace, &case.reference_root)
                .value()
                .unwrap_or_else(|| panic!("{} k={k}: no qualifying triple", case.id));
            report.push(format!("{} from {} k={k}: {rho:.4}", case.id, guess.label));
            assert!(
                (rho - f64::from(k + 1)).abs() <= 0.1,
                "{}",
                report.last().unwrap()
            );
        }
    }
    assert_eq!(report.len(), 40);
}
