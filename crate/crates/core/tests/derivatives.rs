use rand::{Rng, SeedableRng};
use rug::Rational;

use nsroot_core::bench::BUILTIN_CASES;
use nsroot_core::expr::{derive, parse};
use nsroot_core::numerics::{make_context, PrecReal};

#[test]
fn derivatives_match_centered_differences() {
    let d = 90;
    let ctx = make_context(d).unwrap();
    let h = ctx.pow10(-i64::from(d / 3));
    let two_h = &h + &h;
    let tol = ctx.pow10(-i64::from(d / 3) + 4);
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for def in &BUILTIN_CASES {
        let f = parse(def.expression).unwrap();
        let df = derive(&f).unwrap();
        for _ in 0..100 {
            let x = PrecReal::from_rational(
                &Rational::from((rng.gen_range(-3000i64..=3000), 1000)),
                ctx,
            );
            let fd =
                &(&f.eval(&(&x + &h), ctx).unwrap() - &f.eval(&(&x - &h), ctx).unwrap()) / &two_h;
            let exact = df.eval(&x, ctx).unwrap();
            // relative for the steep exponentials, absolute near zero
            let scale = exact.abs().to_f64().max(1.0);
            let gap = (&fd - &exact).abs();
            assert!(
                gap.to_f64() <= tol.to_f64() * scale,
                "{} at {}: f' = {}, difference {}",
                def.id,
                x.to_decimal(10),
                df,
                gap.to_decimal(5)
            );
        }
    }
}
