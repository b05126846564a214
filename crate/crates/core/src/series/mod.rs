//! Exact truncated power series in the error symbol `e = x - alpha`.
//!
//! Coefficients are [`CoeffPoly`] values, rational polynomials in the Taylor
//! symbols `c_k = f^(k)(alpha) / (k! f'(alpha))`. The expansion is normalised
//! so that `f'(alpha) = 1`: every map in the k-step family is a ratio in
//! which `f'(alpha)` cancels, so the error expansion does not depend on it.
//!
//! [`verify_order`] runs one k-step iteration symbolically and returns
//! `x_{n+1} - alpha` as a series in `e`.

mod poly;

use std::fmt;

use rug::Rational;
use thiserror::Error;

pub use poly::{CoeffPoly, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("division by the zero series")]
    ZeroDivisor,
    #[error("divisor has symbolic leading coefficient `{0}`")]
    SymbolicLeading(String),
    #[error("quotient would have negative valuation ({numerator} < {denominator})")]
    NegativeValuation {
        numerator: usize,
        denominator: usize,
    },
    #[error("composition needs a series with zero constant term")]
    NotAtRoot,
    #[error("truncation order {order} is too small for k = {steps} (need at least k + 2)")]
    OrderTooSmall { steps: usize, order: usize },
    #[error("cannot raise truncation order from {from} to {to}")]
    RaiseOrder { from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// `sum_{i=0..=D} a_i e^i + O(e^{D+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicSeries {
    coeffs: Vec<CoeffPoly>,
}

impl SymbolicSeries {
    pub fn zero(order: usize) -> Self {
        SymbolicSeries {
            coeffs: vec![CoeffPoly::zero(); order + 1],
        }
    }

    pub fn constant(value: CoeffPoly, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(CoeffPoly::one(), order)
    }

    /// The series `e` itself.
    pub fn variable(order: usize) -> Self {
        Self::monomial(CoeffPoly::one(), 1, order)
    }

    /// `coeff * e^power`, truncated at `order`.
    pub fn monomial(coeff: CoeffPoly, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = coeff;
        }
        s
    }

    /// Builds a series from coefficients `a_0, a_1, ...`; missing entries are
    /// zero and entries past `order` are dropped.
    pub fn from_coeffs(mut coeffs: Vec<CoeffPoly>, order: usize) -> Self {
        coeffs.resize(order + 1, CoeffPoly::zero());
        SymbolicSeries { coeffs }
    }

    /// Truncation order `D`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, power: usize) -> &CoeffPoly {
        &self.coeffs[power]
    }

    pub fn coeffs(&self) -> &[CoeffPoly] {
        &self.coeffs
    }

    /// Lowest power with a nonzero coefficient, `D + 1` for the zero series.
    pub fn valuation(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.coeffs.len())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation() > self.order()
    }

    /// Drops terms above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self, SeriesError> {
        if order > self.order() {
            return Err(SeriesError::RaiseOrder {
                from: self.order(),
                to: order,
            });
        }
        Ok(SymbolicSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        })
    }

    /// Multiplies by `e`. Known coefficients shift up one place, so the
    /// truncation order grows by one.
    pub fn times_e(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CoeffPoly::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        SymbolicSeries { coeffs }
    }

    pub fn neg(&self) -> Self {
        SymbolicSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        series_arith(self, other, ArithOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        series_arith(self, other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        series_arith(self, other, ArithOp::Mul)
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        series_div(self, other)
    }

    /// Exact value after substituting `c_values[i]` for `c_{i+2}` and a
    /// rational for `e`.
    pub fn eval(&self, c_values: &[Rational], e: &Rational) -> Rational {
        let mut total = Rational::new();
        for c in self.coeffs.iter().rev() {
            total *= e;
            total += c.eval(c_values);
        }
        total
    }

    /// Term-by-term derivative with respect to `e` (order drops by one).
    pub fn derivative(&self) -> Self {
        let order = self.order().saturating_sub(1);
        let coeffs = (1..self.coeffs.len())
            .map(|i| self.coeffs[i].scale(&Rational::from(i as u32)))
            .collect();
        Self::from_coeffs(coeffs, order)
    }
}

/// `e' = c2^3 * e^4 + (-4*c2^4 + 4*c2^2*c3) * e^5 + O(e^7)`-style rendering
/// (without the `e' = ` prefix).
impl fmt::Display for SymbolicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (power, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                f.write_str(" + ")?;
            }
            wrote = true;
            let text = c.to_string();
            let e_part = match power {
                0 => String::new(),
                1 => "e".to_string(),
                p => format!("e^{p}"),
            };
            if e_part.is_empty() {
                write!(f, "{text}")?;
            } else if text == "1" {
                write!(f, "{e_part}")?;
            } else if c.len() == 1 && !text.starts_with('-') {
                write!(f, "{text} * {e_part}")?;
            } else {
                write!(f, "({text}) * {e_part}")?;
            }
        }
        if wrote {
            f.write_str(" + ")?;
        }
        write!(f, "O(e^{})", self.order() + 1)
    }
}

/// Coefficient-wise add/sub, or the truncated Cauchy product.
pub fn series_arith(
    a: &SymbolicSeries,
    b: &SymbolicSeries,
    op: ArithOp,
) -> Result<SymbolicSeries, SeriesError> {
    if a.order() != b.order() {
        return Err(SeriesError::OrderMismatch(a.order(), b.order()));
    }
    let n = a.coeffs.len();
    let coeffs = match op {
        ArithOp::Add => a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        ArithOp::Sub => a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        ArithOp::Mul => {
            let mut out = vec![CoeffPoly::zero(); n];
            let (va, vb) = (a.valuation(), b.valuation());
            for i in va..n {
                if a.coeffs[i].is_zero() {
                    continue;
                }
                for j in vb..n - i {
                    if b.coeffs[j].is_zero() {
                        continue;
                    }
                    out[i + j] = &out[i + j] + &(&a.coeffs[i] * &b.coeffs[j]);
                }
            }
            out
        }
    };
    Ok(SymbolicSeries { coeffs })
}

/// Quotient `a / b` where `b` has valuation `v <= valuation(a)` and a
/// nonzero rational coefficient at `e^v`. Both series are divided by `e^v`
/// first, so the result has truncation order `D - v`.
pub fn series_div(a: &SymbolicSeries, b: &SymbolicSeries) -> Result<SymbolicSeries, SeriesError> {
    if a.order() != b.order() {
        return Err(SeriesError::OrderMismatch(a.order(), b.order()));
    }
    let v = b.valuation();
    if v > b.order() {
        return Err(SeriesError::ZeroDivisor);
    }
    let va = a.valuation();
    if va < v {
        return Err(SeriesError::NegativeValuation {
            numerator: va,
            denominator: v,
        });
    }
    let lead = b.coeffs[v]
        .as_constant()
        .ok_or_else(|| SeriesError::SymbolicLeading(b.coeffs[v].to_string()))?;
    let inv_lead = Rational::from(lead.recip_ref());
    let num = &a.coeffs[v..];
    let den = &b.coeffs[v..];
    let mut q: Vec<CoeffPoly> = Vec::with_capacity(num.len());
    for n in 0..num.len() {
        let mut acc = num[n].clone();
        for i in 1..=n {
            if den[i].is_zero() || q[n - i].is_zero() {
                continue;
            }
            acc = &acc - &(&den[i] * &q[n - i]);
        }
        q.push(acc.scale(&inv_lead));
    }
    Ok(SymbolicSeries { coeffs: q })
}

/// `f(alpha + s) = s + c_2 s^2 + ... + c_K s^K` (with `f'(alpha) = 1`).
pub fn compose_f(s: &SymbolicSeries, max_symbol: usize) -> Result<SymbolicSeries, SeriesError> {
    if s.valuation() == 0 {
        return Err(SeriesError::NotAtRoot);
    }
    let order = s.order();
    // Horner: s * (1 + s * (c_2 + s * (c_3 + ... + s * c_K)))
    let mut inner = SymbolicSeries::zero(order);
    for k in (2..=max_symbol).rev() {
        inner = s
            .mul(&inner)?
            .add(&SymbolicSeries::constant(CoeffPoly::var(k), order))?;
    }
    let inner = s.mul(&inner)?.add(&SymbolicSeries::one(order))?;
    s.mul(&inner)
}

/// `f'(alpha + s) = 1 + sum_{k=2..K} k c_k s^(k-1)` (with `f'(alpha) = 1`).
pub fn compose_fprime(
    s: &SymbolicSeries,
    max_symbol: usize,
) -> Result<SymbolicSeries, SeriesError> {
    if s.valuation() == 0 {
        return Err(SeriesError::NotAtRoot);
    }
    let order = s.order();
    let mut inner = SymbolicSeries::zero(order);
    for k in (2..=max_symbol).rev() {
        let ck = CoeffPoly::var(k).scale(&Rational::from(k as u32));
        inner = s.mul(&inner)?.add(&SymbolicSeries::constant(ck, order))?;
    }
    s.mul(&inner)?.add(&SymbolicSeries::one(order))
}

/// Error expansion of one k-step iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderReport {
    pub steps: usize,
    /// `x_{n+1} - alpha` as a series in `e = x_n - alpha`.
    pub error_series: SymbolicSeries,
    pub leading_power: usize,
    pub leading_coeff: CoeffPoly,
    /// Error series of every sub-step `a_1 .. a_k`.
    pub sub_steps: Vec<SymbolicSeries>,
}

impl OrderReport {
    /// `c2^3 * e^4`-style leading term.
    pub fn leading_term(&self) -> String {
        let lead = SymbolicSeries::monomial(
            self.leading_coeff.clone(),
            self.leading_power,
            self.leading_power,
        );
        let text = lead.to_string();
        text.rsplit_once(" + O(")
            .map_or(text.clone(), |(head, _)| head.to_string())
    }
}

/// Runs one iteration of the `steps`-step scheme on `x_n = alpha + e`, with
/// coefficients carried to `e^order`.
///
/// Each sub-step
/// `a_j - alpha = e - f^j / (f' (f - f(a_1)) ... (f - f(a_{j-1})))`
/// has numerator valuation `j` and denominator valuation `j - 1`. Dividing
/// `e` out of `f` and out of every `f - f(a_i)` before the quotient keeps
/// the divisor's valuation at zero, so no precision is lost and every
/// sub-step is exact through `e^order`.
pub fn verify_order(steps: usize, order: usize) -> Result<OrderReport, SeriesError> {
    if steps == 0 || order < steps + 2 {
        return Err(SeriesError::OrderTooSmall { steps, order });
    }
    let max_symbol = order;
    let e = SymbolicSeries::variable(order);
    let fx = compose_f(&e, max_symbol)?;
    let fpx = compose_fprime(&e, max_symbol)?;

    // f = e * F, f - f(a_i) = e * G_i
    let f_reduced = series_div(&fx, &e)?;
    let e_low = e.truncate(order - 1)?;
    let mut numerator = f_reduced.clone();
    let mut denominator = fpx.truncate(order - 1)?;

    let mut sub_steps = Vec::with_capacity(steps);
    let mut current = e.sub(&series_div(&numerator, &denominator)?.times_e())?;
    for _ in 2..=steps {
        let fa = compose_f(&current, max_symbol)?;
        let gap = series_div(&fx.sub(&fa)?, &e)?;
        denominator = denominator.mul(&gap)?;
        numerator = numerator.mul(&f_reduced)?;
        sub_steps.push(current);
        current = e.sub(&series_div(&numerator, &denominator)?.times_e())?;
    }
    debug_assert_eq!(e_low.order() + 1, current.order());
    sub_steps.push(current.clone());

    let leading_power = current.valuation();
    let leading_coeff = if leading_power <= current.order() {
        current.coeff(leading_power).clone()
    } else {
        CoeffPoly::zero()
    };
    Ok(OrderReport {
        steps,
        error_series: current,
        leading_power,
        leading_coeff,
        sub_steps,
    })
}
