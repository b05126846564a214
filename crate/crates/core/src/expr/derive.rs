use rug::Rational;

use super::{BinaryOp, Expr, ExprError, UnaryOp};

// Constructors that fold the 0/1 identities the derivative rules generate.
// Nothing beyond that is simplified.

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(r) if *r == 0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(r) if *r == 1)
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::binary(BinaryOp::Add, a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        Expr::binary(BinaryOp::Sub, a, b)
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(r) if r == 0 => Expr::Num(r),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        other => Expr::unary(UnaryOp::Neg, other),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::num(0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::binary(BinaryOp::Mul, a, b)
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        Expr::num(0)
    } else if is_one(&b) {
        a
    } else {
        Expr::binary(BinaryOp::Div, a, b)
    }
}

fn pow(base: Expr, exponent: Expr) -> Expr {
    if is_one(&exponent) {
        base
    } else if is_zero(&exponent) {
        Expr::num(1)
    } else {
        Expr::binary(BinaryOp::Pow, base, exponent)
    }
}

/// Symbolic derivative with respect to `x`.
///
/// Powers need a constant exponent (`u^c`) or a constant base (`b^v`); a
/// power with `x` on both sides is rejected with the offending subexpression.
pub fn derive(f: &Expr) -> Result<Expr, ExprError> {
    Ok(match f {
        Expr::Num(_) | Expr::Euler => Expr::num(0),
        Expr::Var => Expr::num(1),
        Expr::Unary(op, u) => {
            let du = derive(u)?;
            if is_zero(&du) {
                return Ok(Expr::num(0));
            }
            let u = (**u).clone();
            match op {
                UnaryOp::Neg => neg(du),
                UnaryOp::Sin => mul(Expr::unary(UnaryOp::Cos, u), du),
                UnaryOp::Cos => neg(mul(Expr::unary(UnaryOp::Sin, u), du)),
                UnaryOp::Exp => mul(Expr::unary(UnaryOp::Exp, u), du),
                UnaryOp::Ln => div(du, u),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add => add(derive(a)?, derive(b)?),
                BinaryOp::Sub => sub(derive(a)?, derive(b)?),
                BinaryOp::Mul => add(mul(derive(a)?, b.clone()), mul(a.clone(), derive(b)?)),
                BinaryOp::Div => {
                    let num = sub(mul(derive(a)?, b.clone()), mul(a.clone(), derive(b)?));
                    div(num, pow(b.clone(), Expr::num(2)))
                }
                BinaryOp::Pow => derive_pow(f, a, b)?,
            }
        }
    })
}

fn derive_pow(whole: &Expr, base: &Expr, exponent: &Expr) -> Result<Expr, ExprError> {
    if exponent.is_constant() {
        // d(u^c) = c * u^(c-1) * u'
        let du = derive(base)?;
        if is_zero(&du) {
            return Ok(Expr::num(0));
        }
        let reduced = match exponent.as_rational() {
            Some(c) => Expr::num(c - Rational::from(1)),
            None => sub(exponent.clone(), Expr::num(1)),
        };
        let coeff = match exponent.as_rational() {
            Some(c) => Expr::num(c),
            None => exponent.clone(),
        };
        return Ok(mul(mul(coeff, pow(base.clone(), reduced)), du));
    }
    if base.is_constant() {
        // d(b^v) = b^v * ln(b) * v'
        let dv = derive(exponent)?;
        let power = Expr::binary(BinaryOp::Pow, base.clone(), exponent.clone());
        let log_base = if *base == Expr::Euler {
            Expr::num(1)
        } else {
            Expr::unary(UnaryOp::Ln, base.clone())
        };
        return Ok(mul(mul(power, log_base), dv));
    }
    Err(ExprError::UnsupportedPower(whole.to_string()))
}
