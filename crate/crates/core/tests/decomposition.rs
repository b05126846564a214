use proptest::prelude::*;
use rug::Rational;

use nsroot_core::bench::BUILTIN_CASES;
use nsroot_core::decomp::{decompose, make_newton_operator, DecompError, Operator};
use nsroot_core::expr::{derive, parse};
use nsroot_core::methods::kstep_step;
use nsroot_core::numerics::{make_context, PrecReal};

fn base_point(case: usize, offset: i64) -> (usize, PrecReal) {
    let ctx = make_context(120).unwrap();
    let def = &BUILTIN_CASES[case];
    let guess = PrecReal::parse(def.guesses[0], ctx).unwrap();
    let shift = PrecReal::from_rational(&Rational::from((offset, 1000)), ctx);
    (case, &guess + &shift)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_sums_telescope(case in 0usize..8, offset in -300i64..=300, m in 1usize..=8) {
        let ctx = make_context(120).unwrap();
        let (case, gamma) = base_point(case, offset);
        let f = parse(BUILTIN_CASES[case].expression).unwrap();
        let df = derive(&f).unwrap();
        let problem = match make_newton_operator(&f, &df, &gamma, ctx) {
            Ok(p) => p,
            Err(DecompError::DerivativeDegenerate { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let terms = match decompose(&problem, m, ctx) {
            Ok(t) => t,
            Err(DecompError::Operator { .. }) | Err(DecompError::NonFinite { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let tol = ctx.pow10(-112);
        for j in 0..m {
            let rhs = &problem.constant + &problem.operator.apply(&terms.partial_sums[j], ctx).unwrap();
            let scale = rhs.abs().to_f64().max(1.0);
            let gap = (&terms.partial_sums[j + 1] - &rhs).abs();
            prop_assert!(gap.to_f64() <= tol.to_f64() * scale, "j = {}", j);
        }
    }

    #[test]
    fn partial_sums_are_closed_form_sub_steps(case in 0usize..8, offset in -300i64..=300) {
        let ctx = make_context(120).unwrap();
        let (case, gamma) = base_point(case, offset);
        let f = parse(BUILTIN_CASES[case].expression).unwrap();
        let df = derive(&f).unwrap();
        let (Ok(step), Ok(problem)) = (kstep_step(&f, &df, &gamma, 4, ctx), make_newton_operator(&f, &df, &gamma, ctx)) else {
            return Ok(());
        };
        let terms = decompose(&problem, 4, ctx).unwrap();
        let tol = ctx.pow10(-110);
        for j in 1..=4 {
            let scale = step.sub_steps[j - 1].abs().to_f64().max(1.0);
            let gap = (&terms.partial_sums[j] - &step.sub_steps[j - 1]).abs();
            prop_assert!(gap.to_f64() <= tol.to_f64() * scale, "j = {}", j);
        }
    }
}

#[test]
fn one_term_is_a_newton_step() {
    let ctx = make_context(200).unwrap();
    for def in &BUILTIN_CASES {
        let f = parse(def.expression).unwrap();
        let df = derive(&f).unwrap();
        for g in def.guesses {
            let x = PrecReal::parse(g, ctx).unwrap();
            let newton = &x - &(&f.eval(&x, ctx).unwrap() / &df.eval(&x, ctx).unwrap());
            let problem = make_newton_operator(&f, &df, &x, ctx).unwrap();
            let terms = decompose(&problem, 1, ctx).unwrap();
            assert!(
                (terms.approximation() - &newton).abs() <= ctx.pow10(-195),
                "{} at {g}",
                def.id
            );
        }
    }
}
