//! Working-precision contexts and arbitrary-precision reals.
//!
//! Every [`PrecReal`] carries the [`PrecisionContext`] it was produced under,
//! so there is no process-global precision setting. Values are binary MPFR
//! floats whose bit count is derived from the requested number of decimal
//! digits plus a fixed guard margin; decimal is only used for display and
//! parsing. All operations round to nearest.
//!
//! Non-finite results (overflow, division by zero, NaN) are ordinary values
//! here. Callers inspect [`PrecReal::class`] and decide whether to abort.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use rug::float::{Round, Special};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 16;

/// Extra decimal digits carried internally beyond the requested precision.
pub const GUARD_DIGITS: u32 = 20;

/// Number of significant digits used when a [`Magnitude`] is displayed.
pub const DISPLAY_DIGITS: usize = 5;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("working precision must be at least {MIN_DIGITS} decimal digits, got {0}")]
    TooFewDigits(u32),
    #[error("malformed decimal number `{0}`")]
    BadNumber(String),
}

/// Working precision: significant decimal digits plus guard digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    decimal_digits: u32,
    guard_digits: u32,
}

impl PrecisionContext {
    pub fn new(decimal_digits: u32) -> Result<Self, NumericsError> {
        make_context(decimal_digits)
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision of every value produced under this context.
    pub fn bits(&self) -> u32 {
        let total = f64::from(self.decimal_digits + self.guard_digits);
        // f64 rounding can only undershoot by a fraction of a bit here, so +1
        // keeps the ceil(total * log2 10) lower bound.
        (total * LOG2_10).ceil() as u32 + 1
    }

    /// The context with fewer digits; ties keep `self`.
    pub fn coarser(self, other: Self) -> Self {
        if other.decimal_digits < self.decimal_digits {
            other
        } else {
            self
        }
    }

    /// `10^exponent` at this precision.
    pub fn pow10(&self, exponent: i64) -> PrecReal {
        let ten = Float::with_val(self.bits(), 10);
        let exponent = i32::try_from(exponent).expect("decimal exponent out of range");
        PrecReal::from_float(ten.pow(exponent), *self)
    }
}

/// Builds a context with the fixed guard margin. Rejects fewer than
/// [`MIN_DIGITS`] digits.
pub fn make_context(decimal_digits: u32) -> Result<PrecisionContext, NumericsError> {
    if decimal_digits < MIN_DIGITS {
        return Err(NumericsError::TooFewDigits(decimal_digits));
    }
    Ok(PrecisionContext {
        decimal_digits,
        guard_digits: GUARD_DIGITS,
    })
}

/// Classification of a [`PrecReal`] value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueClass {
    Finite,
    Infinite,
    NaN,
}

/// Arbitrary-precision real tagged with its precision context.
///
/// Binary operations between values of different contexts are computed and
/// rounded under the coarser of the two.
#[derive(Clone)]
pub struct PrecReal {
    value: Float,
    ctx: PrecisionContext,
}

impl PrecReal {
    /// Rounds `value` to the precision of `ctx`.
    pub fn from_float(mut value: Float, ctx: PrecisionContext) -> Self {
        value.set_prec_round(ctx.bits(), Round::Nearest);
        PrecReal { value, ctx }
    }

    pub fn from_int(n: i64, ctx: PrecisionContext) -> Self {
        PrecReal {
            value: Float::with_val(ctx.bits(), n),
            ctx,
        }
    }

    pub fn from_rational(r: &Rational, ctx: PrecisionContext) -> Self {
        PrecReal {
            value: Float::with_val(ctx.bits(), r),
            ctx,
        }
    }

    pub fn zero(ctx: PrecisionContext) -> Self {
        Self::from_int(0, ctx)
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        Self::from_int(1, ctx)
    }

    pub fn nan(ctx: PrecisionContext) -> Self {
        PrecReal {
            value: Float::with_val(ctx.bits(), Special::Nan),
            ctx,
        }
    }

    /// Parses a decimal literal (`-1.25`, `3`, `2.5e-3`) through an exact
    /// rational, so the only rounding is the final one to `ctx`.
    pub fn parse(text: &str, ctx: PrecisionContext) -> Result<Self, NumericsError> {
        let r = parse_decimal_rational(text)?;
        Ok(Self::from_rational(&r, ctx))
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    /// Re-rounds to another context.
    pub fn with_ctx(&self, ctx: PrecisionContext) -> Self {
        Self::from_float(self.value.clone(), ctx)
    }

    pub fn class(&self) -> ValueClass {
        if self.value.is_nan() {
            ValueClass::NaN
        } else if self.value.is_infinite() {
            ValueClass::Infinite
        } else {
            ValueClass::Finite
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.value.is_integer()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.value.is_sign_negative() && !self.value.is_zero()
    }

    pub fn abs(&self) -> Self {
        PrecReal {
            value: self.value.clone().abs(),
            ctx: self.ctx,
        }
    }

    pub fn square(&self) -> Self {
        self.map(|v| v.square())
    }

    pub fn pow_i32(&self, n: i32) -> Self {
        self.map(|v| v.pow(n))
    }

    /// General power `self^exponent` (MPFR semantics: NaN for a negative base
    /// with a non-integer exponent).
    pub fn pow(&self, exponent: &PrecReal) -> Self {
        let ctx = self.ctx.coarser(exponent.ctx);
        PrecReal {
            value: Float::with_val(ctx.bits(), (&self.value).pow(&exponent.value)),
            ctx,
        }
    }

    pub fn sin(&self) -> Self {
        self.map(|v| v.sin())
    }

    pub fn cos(&self) -> Self {
        self.map(|v| v.cos())
    }

    pub fn exp(&self) -> Self {
        self.map(|v| v.exp())
    }

    pub fn ln(&self) -> Self {
        self.map(|v| v.ln())
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Decimal scientific notation with `digits` significant digits, e.g.
    /// `1.4044916482e0`.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.value
            .to_string_radix_round(10, Some(digits.max(1)), Round::Nearest)
    }

    /// Decimal rendering at the full requested precision of the context.
    pub fn to_decimal_full(&self) -> String {
        self.to_decimal(self.ctx.decimal_digits as usize)
    }

    /// Full-precision decimal magnitude; `None` for non-finite values.
    pub fn magnitude(&self) -> Option<Magnitude> {
        magnitude(self)
    }

    fn map(&self, op: impl FnOnce(Float) -> Float) -> Self {
        PrecReal {
            value: op(self.value.clone()),
            ctx: self.ctx,
        }
    }
}

impl fmt::Debug for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PrecReal({} @{}d)",
            self.to_decimal(24),
            self.ctx.decimal_digits
        )
    }
}

impl fmt::Display for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.ctx.decimal_digits as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for PrecReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for PrecReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&PrecReal> for &PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: &PrecReal) -> PrecReal {
                let ctx = self.ctx.coarser(rhs.ctx);
                PrecReal {
                    value: Float::with_val(ctx.bits(), (&self.value).$method(&rhs.value)),
                    ctx,
                }
            }
        }

        impl $trait<PrecReal> for PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: PrecReal) -> PrecReal {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&PrecReal> for PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: &PrecReal) -> PrecReal {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for &PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        PrecReal {
            value: -self.value.clone(),
            ctx: self.ctx,
        }
    }
}

impl Neg for PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        PrecReal {
            value: -self.value,
            ctx: self.ctx,
        }
    }
}

/// Built-in transcendental functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sin,
    Cos,
    Exp,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Exp => "exp",
        }
    }
}

/// Evaluates a builtin at the precision of `x`. `exp` overflow yields an
/// infinite value rather than an error.
pub fn eval_builtin(name: Builtin, x: &PrecReal) -> PrecReal {
    match name {
        Builtin::Sin => x.sin(),
        Builtin::Cos => x.cos(),
        Builtin::Exp => x.exp(),
    }
}

/// Parses a plain decimal literal into an exact rational.
pub fn parse_decimal_rational(text: &str) -> Result<Rational, NumericsError> {
    let bad = || NumericsError::BadNumber(text.to_string());
    let t = text.trim();
    let (negative, t) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (body, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mantissa = Integer::from_str(&digits).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut r = Rational::from(mantissa);
    if scale >= 0 {
        r *= Rational::from(ten.pow(scale as u32));
    } else {
        r /= Rational::from(ten.pow(scale.unsigned_abs()));
    }
    if negative {
        r = -r;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Decimal magnitude `sign * 0.DIGITS * 10^exponent10`.
///
/// `digits` holds the significand with the first digit nonzero, so the
/// mantissa lies in `[0.1, 1)`. Zero is canonical: empty digits, exponent 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Magnitude {
    sign: Sign,
    digits: String,
    exponent10: i64,
}

impl Magnitude {
    pub fn zero() -> Self {
        Magnitude {
            sign: Sign::Zero,
            digits: String::new(),
            exponent10: 0,
        }
    }

    /// Magnitude of `x` rounded to `sig_digits` significant digits, or at
    /// full round-trip precision when `None`.
    pub fn of(x: &PrecReal, sig_digits: Option<usize>) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x.is_zero() {
            return Some(Self::zero());
        }
        let (negative, digits, exp) = x.value.to_sign_string_exp(10, sig_digits);
        let exponent10 = i64::from(exp.expect("finite nonzero value has an exponent"));
        Some(Magnitude {
            sign: if negative {
                Sign::Negative
            } else {
                Sign::Positive
            },
            digits,
            exponent10,
        })
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn exponent10(&self) -> i64 {
        self.exponent10
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Significand digits, without the leading `0.`.
    pub fn digits(&self) -> &str {
        &self.digits
    }

    /// Mantissa as an `f64` in `[0.1, 1)` (0 for zero).
    pub fn mantissa(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        format!("0.{}", self.digits).parse().unwrap_or(0.0)
    }

    /// Signed mantissa text, e.g. `0.13526` or `-0.1234`; `0` for zero.
    pub fn mantissa_text(&self) -> String {
        match self.sign {
            Sign::Zero => "0".to_string(),
            Sign::Positive => format!("0.{}", self.digits),
            Sign::Negative => format!("-0.{}", self.digits),
        }
    }

    /// Rounds to `sig_digits` significant digits (decimal half-up).
    pub fn rounded(&self, sig_digits: usize) -> Self {
        if self.is_zero() || self.digits.len() <= sig_digits {
            return self.clone();
        }
        let sig_digits = sig_digits.max(1);
        let mut kept: Vec<u8> = self.digits.as_bytes()[..sig_digits].to_vec();
        let mut exponent10 = self.exponent10;
        if self.digits.as_bytes()[sig_digits] >= b'5' {
            let mut i = kept.len();
            loop {
                if i == 0 {
                    kept.insert(0, b'1');
                    kept.pop();
                    exponent10 += 1;
                    break;
                }
                i -= 1;
                if kept[i] == b'9' {
                    kept[i] = b'0';
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        Magnitude {
            sign: self.sign,
            digits: String::from_utf8(kept).expect("ascii digits"),
            exponent10,
        }
    }

    /// The value as a [`PrecReal`] under `ctx`.
    pub fn to_real(&self, ctx: PrecisionContext) -> PrecReal {
        if self.is_zero() {
            return PrecReal::zero(ctx);
        }
        let text = format!("{}e{}", self.mantissa_text(), self.exponent10);
        let parsed = Float::parse(&text).expect("magnitude text is a valid float");
        PrecReal {
            value: Float::with_val(ctx.bits(), parsed),
            ctx,
        }
    }

    /// Builds a magnitude from a mantissa text such as `0.13526` (or
    /// `-0.1234`, or `0`) and a decimal exponent.
    pub fn from_parts(mantissa: &str, exponent10: i64) -> Option<Self> {
        let m = mantissa.trim();
        if m == "0" {
            return Some(Self::zero());
        }
        let (sign, rest) = match m.strip_prefix('-') {
            Some(r) => (Sign::Negative, r),
            None => (Sign::Positive, m),
        };
        let digits = rest.strip_prefix("0.")?;
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || digits.as_bytes()[0] == b'0'
        {
            return None;
        }
        Some(Magnitude {
            sign,
            digits: digits.to_string(),
            exponent10,
        })
    }
}

/// Formats as `0.13526e-2046` / `0.39254e+1`; zero prints as `0`.
impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let sign = if self.exponent10 < 0 { '-' } else { '+' };
        write!(
            f,
            "{}e{}{}",
            self.mantissa_text(),
            sign,
            self.exponent10.unsigned_abs()
        )
    }
}

impl FromStr for Magnitude {
    type Err = NumericsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::BadNumber(s.to_string());
        let t = s.trim();
        if t == "0" {
            return Ok(Magnitude::zero());
        }
        let (mantissa, exp) = t.split_once(['e', 'E']).ok_or_else(bad)?;
        let exp: i64 = exp.trim_start_matches('+').parse().map_err(|_| bad())?;
        Magnitude::from_parts(mantissa, exp).ok_or_else(bad)
    }
}

impl Serialize for Magnitude {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Full-precision magnitude of `x`; `None` if `x` is not finite.
pub fn magnitude(x: &PrecReal) -> Option<Magnitude> {
    Magnitude::of(x, None)
}

/// Magnitude rounded to [`DISPLAY_DIGITS`] significant digits.
pub fn display_magnitude(x: &PrecReal) -> Option<Magnitude> {
    Magnitude::of(x, Some(DISPLAY_DIGITS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ctx(d: u32) -> PrecisionContext {
        make_context(d).unwrap()
    }

    #[test]
    fn context_bits_follow_decimal_digits() {
        let c = ctx(10000);
        assert!(c.bits() >= 33287);
        assert_eq!(c.guard_digits(), 20);
        let expected = ((10020.0 * LOG2_10).ceil()) as u32;
        assert!(c.bits() >= expected);
        assert_eq!(ctx(16).decimal_digits(), 16);
        assert_eq!(make_context(5), Err(NumericsError::TooFewDigits(5)));
        assert_eq!(make_context(15), Err(NumericsError::TooFewDigits(15)));
    }

    #[test]
    fn builtins_at_zero_are_exact() {
        let c = ctx(100);
        let z = PrecReal::zero(c);
        assert_eq!(eval_builtin(Builtin::Exp, &z), PrecReal::one(c));
        assert!(eval_builtin(Builtin::Sin, &z).is_zero());
        assert_eq!(eval_builtin(Builtin::Cos, &z), PrecReal::one(c));
    }

    #[test]
    fn exp_overflow_is_tagged() {
        let c = ctx(50);
        let huge = PrecReal::parse("1e30", c).unwrap();
        let r = eval_builtin(Builtin::Exp, &huge);
        assert_eq!(r.class(), ValueClass::Infinite);
        let q = &PrecReal::one(c) / &PrecReal::zero(c);
        assert_eq!(q.class(), ValueClass::Infinite);
        let nan = &PrecReal::zero(c) / &PrecReal::zero(c);
        assert_eq!(nan.class(), ValueClass::NaN);
    }

    #[test]
    fn mixed_contexts_resolve_to_coarser() {
        let fine = PrecReal::from_int(1, ctx(200));
        let coarse = PrecReal::from_int(3, ctx(40));
        let q = &fine / &coarse;
        assert_eq!(q.ctx(), ctx(40));
        assert_eq!(q.value().prec(), ctx(40).bits());
        let q2 = &coarse / &fine;
        assert_eq!(q2.ctx(), ctx(40));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let r = parse_decimal_rational("0.25").unwrap();
        assert_eq!(r, Rational::from((1, 4)));
        assert_eq!(
            parse_decimal_rational("-1.5e-3").unwrap(),
            Rational::from((-3, 2000))
        );
        assert_eq!(parse_decimal_rational("12").unwrap(), Rational::from(12));
        assert_eq!(
            parse_decimal_rational(".5").unwrap(),
            Rational::from((1, 2))
        );
        assert!(parse_decimal_rational("1..2").is_err());
        assert!(parse_decimal_rational("").is_err());
        assert!(parse_decimal_rational("abc").is_err());
    }

    #[test]
    fn magnitude_shapes() {
        let c = ctx(30);
        let m = display_magnitude(&PrecReal::parse("0.0015", c).unwrap()).unwrap();
        assert_eq!(m.sign(), Sign::Positive);
        assert_eq!(m.exponent10(), -2);
        assert!((m.mantissa() - 0.15).abs() < 1e-15);
        assert_eq!(m.to_string(), "0.15000e-2");

        let m = display_magnitude(&PrecReal::parse("-123.4", c).unwrap()).unwrap();
        assert_eq!(m.sign(), Sign::Negative);
        assert_eq!(m.exponent10(), 3);
        assert!((m.mantissa() - 0.1234).abs() < 1e-15);

        let z = magnitude(&PrecReal::zero(c)).unwrap();
        assert_eq!(z, Magnitude::zero());
        assert_eq!(z.to_string(), "0");
        assert!(magnitude(&PrecReal::nan(c)).is_none());
    }

    #[test]
    fn magnitude_text_forms() {
        let m: Magnitude = "0.13526e-2046".parse().unwrap();
        assert_eq!(m.exponent10(), -2046);
        assert_eq!(m.digits(), "13526");
        assert_eq!(m.to_string(), "0.13526e-2046");
        let m: Magnitude = "0.39254e+1".parse().unwrap();
        assert_eq!(m.to_string(), "0.39254e+1");
        assert_eq!("0".parse::<Magnitude>().unwrap(), Magnitude::zero());
        assert!("0.610763-350".parse::<Magnitude>().is_err());
        assert!("Indeterminate".parse::<Magnitude>().is_err());
    }

    #[test]
    fn magnitude_rounding_carries() {
        let m: Magnitude = "0.999996e-10".parse().unwrap();
        assert_eq!(m.rounded(5).to_string(), "0.10000e-9");
        let m: Magnitude = "0.123454e3".parse().unwrap();
        assert_eq!(m.rounded(5).to_string(), "0.12345e+3");
    }

    #[test]
    fn magnitude_round_trips_within_one_ulp() {
        let c = ctx(60);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x =
                PrecReal::from_float(Float::with_val(c.bits(), rng.gen_range(-1.0e6..1.0e6)), c)
                    .exp()
                    .pow_i32(rng.gen_range(-3..4));
            let m = magnitude(&x).unwrap();
            let back = m.to_real(c);
            let diff = (&back - &x).abs();
            let ulp = {
                let mut u = Float::with_val(c.bits(), 1);
                u <<= x.value().get_exp().unwrap_or(0) - c.bits() as i32;
                u
            };
            assert!(*diff.value() <= ulp, "{x:?} -> {m} -> {back:?}");
        }
    }

    #[test]
    fn pythagorean_identity_holds() {
        let c = ctx(200);
        let tol = c.pow10(-(200 - 6));
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = PrecReal::from_float(Float::with_val(c.bits(), rng.gen_range(-10.0..10.0)), c);
            let s = eval_builtin(Builtin::Sin, &x);
            let co = eval_builtin(Builtin::Cos, &x);
            let one = &s.square() + &co.square();
            assert!((&one - &PrecReal::one(c)).abs() <= tol);
        }
    }

    #[test]
    fn precision_is_monotone() {
        let lo = ctx(40);
        let hi = ctx(120);
        let tol = lo.pow10(-(40 - 6));
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let v: f64 = rng.gen_range(-5.0..5.0);
            let x_lo = PrecReal::from_float(Float::with_val(53, v), lo);
            let x_hi = PrecReal::from_float(Float::with_val(53, v), hi);
            for b in [Builtin::Sin, Builtin::Cos, Builtin::Exp] {
                let a = eval_builtin(b, &x_lo);
                let h = eval_builtin(b, &x_hi);
                let rel = (&h.with_ctx(hi) - &a.with_ctx(hi)).abs();
                let scale = h.abs().with_ctx(lo);
                let bound = if scale > PrecReal::one(lo) {
                    &tol * &scale
                } else {
                    tol.clone()
                };
                assert!(rel.with_ctx(lo) <= bound, "{} at {v}", b.name());
            }
        }
    }

    #[test]
    fn deterministic_results() {
        let c = ctx(500);
        let x = PrecReal::parse("1.3061752018468278250", c).unwrap();
        let a = eval_builtin(Builtin::Sin, &eval_builtin(Builtin::Exp, &x));
        let b = eval_builtin(Builtin::Sin, &eval_builtin(Builtin::Exp, &x));
        assert_eq!(
            a.value().to_string_radix(16, None),
            b.value().to_string_radix(16, None)
        );
    }
}
