//! Univariate real expressions in `x`: parsing, evaluation and symbolic
//! differentiation.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right associative
//! atom    := number | 'x' | 'e' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | exp | ln
//! ```
//!
//! `e` is Euler's number, so `e^u` is evaluated as `exp(u)`. Implicit
//! multiplication is not supported. Numbers are plain decimals and are held
//! as exact rationals.

mod derive;
mod parse;

use std::fmt;

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::numerics::{PrecReal, PrecisionContext};

pub use derive::derive;
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("cannot differentiate `{0}`: power needs a constant base or a constant exponent")]
    UnsupportedPower(String),
    #[error("domain error: `{0}` raises a negative base to a non-integer power")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
}

impl UnaryOp {
    fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Ln => Some("ln"),
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "ln" => Some(UnaryOp::Ln),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Exact rational literal.
    Num(Rational),
    /// Euler's number `e`.
    Euler,
    /// The variable `x`.
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(value: impl Into<Rational>) -> Expr {
        let r: Rational = value.into();
        if r < 0 {
            Expr::Unary(UnaryOp::Neg, Box::new(Expr::Num(-r)))
        } else {
            Expr::Num(r)
        }
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// True when the subtree does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Euler => true,
            Expr::Var => false,
            Expr::Unary(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// The exact value when the node is a literal (possibly negated).
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Expr::Num(r) => Some(r.clone()),
            Expr::Unary(UnaryOp::Neg, a) => a.as_rational().map(|r| -r),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Euler | Expr::Var => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Value of the expression at `x`, computed under `ctx`.
    ///
    /// Division by zero and overflow produce non-finite values. A negative
    /// base raised to a non-integer power is a domain error.
    pub fn eval(&self, x: &PrecReal, ctx: PrecisionContext) -> Result<PrecReal, ExprError> {
        Ok(match self {
            Expr::Num(r) => PrecReal::from_rational(r, ctx),
            Expr::Euler => PrecReal::one(ctx).exp(),
            Expr::Var => x.with_ctx(ctx),
            Expr::Unary(op, a) => {
                let v = a.eval(x, ctx)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Ln => v.ln(),
                }
            }
            Expr::Binary(BinaryOp::Pow, base, exponent) => {
                if **base == Expr::Euler {
                    return Ok(exponent.eval(x, ctx)?.exp());
                }
                let b = base.eval(x, ctx)?;
                if let Some(n) = exponent.as_rational().and_then(small_integer) {
                    return Ok(b.pow_i32(n));
                }
                let p = exponent.eval(x, ctx)?;
                if b.is_sign_negative() && p.is_finite() && !p.is_integer() {
                    return Err(ExprError::Domain(self.to_string()));
                }
                b.pow(&p)
            }
            Expr::Binary(op, a, b) => {
                let l = a.eval(x, ctx)?;
                let r = b.eval(x, ctx)?;
                match op {
                    BinaryOp::Add => &l + &r,
                    BinaryOp::Sub => &l - &r,
                    BinaryOp::Mul => &l * &r,
                    BinaryOp::Div => &l / &r,
                    BinaryOp::Pow => unreachable!(),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn small_integer(r: Rational) -> Option<i32> {
    if *r.denom() != 1 {
        return None;
    }
    r.numer().to_i32()
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if *r.denom() == 1 {
        return write!(f, "{}", r.numer());
    }
    // Terminating decimals print as decimals so they reparse to the same
    // literal; anything else falls back to a parenthesised quotient.
    let mut d = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d.is_divisible_u(2) {
        d /= 2;
        twos += 1;
    }
    while d.is_divisible_u(5) {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return write!(f, "({}/{})", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r.clone() * Rational::from(Integer::from(10).pow(places));
    let digits = scaled.numer().clone().abs().to_string();
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    if *r < 0 {
        f.write_str("-")?;
    }
    write!(f, "{int_part}.{frac_part}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(r) => write_rational(f, r),
            Expr::Euler => f.write_str("e"),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.function_name().unwrap()),
            Expr::Binary(op, a, b) => {
                let (left_min, right_min) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (1, 2),
                    BinaryOp::Mul | BinaryOp::Div => (2, 3),
                    BinaryOp::Pow => (5, 3),
                };
                child(f, a, left_min)?;
                f.write_str(op.symbol())?;
                child(f, b, right_min)
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
