//! Decomposition engine for canonical problems `x = c + N(x)`.
//!
//! The solution is sought as a series `x = x_0 + x_1 + ...` with
//!
//! ```text
//! x_0     = c
//! x_1     = N(x_0)
//! x_{j+1} = N(X_j) - N(X_{j-1}),   X_j = x_0 + ... + x_j
//! ```
//!
//! which telescopes to `X_{j+1} = c + N(X_j)`.
//!
//! [`make_newton_operator`] builds the operator induced by a scalar equation
//! `f(x) = 0` around a base point `gamma`. Its partial sums are exactly the
//! sub-steps of the closed-form k-step family in [`crate::methods`].

use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::numerics::{PrecReal, PrecisionContext};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("f'(gamma) = 0 at gamma = {gamma}: the operator is undefined")]
    DerivativeDegenerate { gamma: String },
    #[error("plateau: f(x) = f(gamma) at x = {x}")]
    Plateau { x: String },
    #[error("non-finite value while computing term x_{index}")]
    NonFinite { index: usize },
    #[error("operator failed while computing term x_{index}: {source}")]
    Operator {
        index: usize,
        #[source]
        source: Box<DecompError>,
    },
    #[error(transparent)]
    Eval(#[from] ExprError),
}

/// A nonlinear operator `N` on reals.
pub trait Operator {
    fn apply(&self, x: &PrecReal, ctx: PrecisionContext) -> Result<PrecReal, DecompError>;
}

impl<F> Operator for F
where
    F: Fn(&PrecReal, PrecisionContext) -> Result<PrecReal, DecompError>,
{
    fn apply(&self, x: &PrecReal, ctx: PrecisionContext) -> Result<PrecReal, DecompError> {
        self(x, ctx)
    }
}

/// `x = c + N(x)`.
#[derive(Debug, Clone)]
pub struct CanonicalProblem<N> {
    pub constant: PrecReal,
    pub operator: N,
}

impl<N: Operator> CanonicalProblem<N> {
    pub fn new(constant: PrecReal, operator: N) -> Self {
        CanonicalProblem { constant, operator }
    }
}

/// Terms `x_0..x_m` and partial sums `X_0..X_m` of the decomposition series.
#[derive(Debug, Clone)]
pub struct DecompositionTerms {
    pub terms: Vec<PrecReal>,
    pub partial_sums: Vec<PrecReal>,
}

impl DecompositionTerms {
    /// The highest-order partial sum `X_m`.
    pub fn approximation(&self) -> &PrecReal {
        self.partial_sums.last().expect("X_0 always exists")
    }
}

/// Computes `m + 1` terms of the decomposition series.
///
/// Operator failures and non-finite values abort with the index of the term
/// that was being computed.
pub fn decompose<N: Operator>(
    problem: &CanonicalProblem<N>,
    m: usize,
    ctx: PrecisionContext,
) -> Result<DecompositionTerms, DecompError> {
    let c = problem.constant.with_ctx(ctx);
    let mut terms = vec![c.clone()];
    let mut partial_sums = vec![c];
    let mut previous_n: Option<PrecReal> = None;

    for index in 1..=m {
        let current_sum = &partial_sums[index - 1];
        let n_value =
            problem
                .operator
                .apply(current_sum, ctx)
                .map_err(|e| DecompError::Operator {
                    index,
                    source: Box::new(e),
                })?;
        if !n_value.is_finite() {
            return Err(DecompError::NonFinite { index });
        }
        let term = match &previous_n {
            None => n_value.clone(),
            Some(prev) => &n_value - prev,
        };
        let next_sum = current_sum + &term;
        if !next_sum.is_finite() {
            return Err(DecompError::NonFinite { index });
        }
        terms.push(term);
        partial_sums.push(next_sum);
        previous_n = Some(n_value);
    }
    Ok(DecompositionTerms {
        terms,
        partial_sums,
    })
}

/// The operator `N(x) = -f(gamma)(x - gamma) / (f(x) - f(gamma))`.
///
/// This is `-f(gamma)(x - gamma) / (f'(gamma)(x - gamma) + g(x))` with
/// `g(x) = f(x) - f(gamma) - f'(gamma)(x - gamma)` folded into the
/// denominator. At `x = gamma` the quotient is 0/0 and takes its limit
/// `-f(gamma)/f'(gamma)`.
#[derive(Debug, Clone)]
pub struct NewtonOperator {
    f: Expr,
    gamma: PrecReal,
    f_gamma: PrecReal,
    fprime_gamma: PrecReal,
}

impl NewtonOperator {
    pub fn gamma(&self) -> &PrecReal {
        &self.gamma
    }

    pub fn f_gamma(&self) -> &PrecReal {
        &self.f_gamma
    }

    pub fn fprime_gamma(&self) -> &PrecReal {
        &self.fprime_gamma
    }
}

impl Operator for NewtonOperator {
    fn apply(&self, x: &PrecReal, ctx: PrecisionContext) -> Result<PrecReal, DecompError> {
        if *x == self.gamma {
            return Ok(-(&self.f_gamma / &self.fprime_gamma));
        }
        let fx = self.f.eval(x, ctx)?;
        let denominator = &fx - &self.f_gamma;
        if denominator.is_zero() {
            return Err(DecompError::Plateau {
                x: x.to_decimal(30),
            });
        }
        let numerator = &self.f_gamma * &(x - &self.gamma);
        Ok(-(&numerator / &denominator))
    }
}

/// Canonical form of `f(x) = 0` around `gamma`: `c = gamma` and the
/// [`NewtonOperator`].
pub fn make_newton_operator(
    f: &Expr,
    fprime: &Expr,
    gamma: &PrecReal,
    ctx: PrecisionContext,
) -> Result<CanonicalProblem<NewtonOperator>, DecompError> {
    let gamma = gamma.with_ctx(ctx);
    let f_gamma = f.eval(&gamma, ctx)?;
    let fprime_gamma = fprime.eval(&gamma, ctx)?;
    if !f_gamma.is_finite() || !fprime_gamma.is_finite() {
        return Err(DecompError::NonFinite { index: 0 });
    }
    if fprime_gamma.is_zero() {
        return Err(DecompError::DerivativeDegenerate {
            gamma: gamma.to_decimal(30),
        });
    }
    Ok(CanonicalProblem {
        constant: gamma.clone(),
        operator: NewtonOperator {
            f: f.clone(),
            gamma,
            f_gamma,
            fprime_gamma,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{derive, parse};
    use crate::numerics::make_context;

    fn ctx() -> PrecisionContext {
        make_context(100).unwrap()
    }

    fn real(s: &str) -> PrecReal {
        PrecReal::parse(s, ctx()).unwrap()
    }

    #[test]
    fn zero_operator_keeps_constant() {
        let p = CanonicalProblem::new(real("7"), |_: &PrecReal, c| Ok(PrecReal::zero(c)));
        let d = decompose(&p, 3, ctx()).unwrap();
        assert_eq!(d.terms, vec![real("7"), real("0"), real("0"), real("0")]);
        assert!(d.partial_sums.iter().all(|x| *x == real("7")));
    }

    #[test]
    fn halving_operator() {
        let p = CanonicalProblem::new(real("1"), |x: &PrecReal, c| {
            Ok(x / &PrecReal::from_int(2, c))
        });
        let d = decompose(&p, 2, ctx()).unwrap();
        assert_eq!(d.terms, vec![real("1"), real("0.5"), real("0.25")]);
        assert_eq!(*d.approximation(), real("1.75"));
    }

    #[test]
    fn m_zero_is_just_the_constant() {
        let p = CanonicalProblem::new(real("3"), |_: &PrecReal, c| Ok(PrecReal::one(c)));
        let d = decompose(&p, 0, ctx()).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(*d.approximation(), real("3"));
    }

    #[test]
    fn first_partial_sum_is_a_newton_step() {
        let f = parse("(x-1)^3 - 1").unwrap();
        let df = derive(&f).unwrap();
        let p = make_newton_operator(&f, &df, &real("3.5"), ctx()).unwrap();
        let d = decompose(&p, 1, ctx()).unwrap();
        // 3.5 - 14.625/18.75
        assert_eq!(*d.approximation(), real("2.72"));
    }

    #[test]
    fn operator_at_base_point_is_the_limit() {
        let f = parse("sin(x) - x/3").unwrap();
        let df = derive(&f).unwrap();
        let gamma = real("1.1");
        let p = make_newton_operator(&f, &df, &gamma, ctx()).unwrap();
        let n = p.operator.apply(&gamma, ctx()).unwrap();
        let fg = f.eval(&gamma, ctx()).unwrap();
        let dfg = df.eval(&gamma, ctx()).unwrap();
        assert_eq!(n, -(&fg / &dfg));
    }

    #[test]
    fn linear_function_solved_in_one_term() {
        let f = parse("x").unwrap();
        let df = derive(&f).unwrap();
        let p = make_newton_operator(&f, &df, &real("1"), ctx()).unwrap();
        assert_eq!(p.operator.apply(&real("5"), ctx()).unwrap(), real("-1"));
        assert_eq!(p.operator.apply(&real("1"), ctx()).unwrap(), real("-1"));
        let d = decompose(&p, 1, ctx()).unwrap();
        assert!(d.approximation().is_zero());
    }

    #[test]
    fn degenerate_derivative_is_rejected() {
        let f = parse("x^2 - 1").unwrap();
        let df = derive(&f).unwrap();
        let err = make_newton_operator(&f, &df, &real("0"), ctx()).unwrap_err();
        assert!(matches!(err, DecompError::DerivativeDegenerate { .. }));
    }

    #[test]
    fn plateau_aborts_with_index() {
        let f = parse("x^2").unwrap();
        let df = derive(&f).unwrap();
        let p = make_newton_operator(&f, &df, &real("1"), ctx()).unwrap();
        let err = p.operator.apply(&real("-1"), ctx()).unwrap_err();
        assert!(matches!(err, DecompError::Plateau { .. }));

        let stalled = CanonicalProblem::new(real("1"), |x: &PrecReal, c| {
            if *x == PrecReal::one(c) {
                Ok(PrecReal::one(c))
            } else {
                Err(DecompError::Plateau { x: x.to_decimal(5) })
            }
        });
        let err = decompose(&stalled, 3, ctx()).unwrap_err();
        assert!(matches!(err, DecompError::Operator { index: 2, .. }));
    }

    #[test]
    fn non_finite_operator_value_aborts() {
        let p = CanonicalProblem::new(real("1"), |x: &PrecReal, c| {
            Ok(&(&PrecReal::one(c) / &(x - &PrecReal::from_int(2, c))) + &PrecReal::from_int(2, c))
        });
        let err = decompose(&p, 4, ctx()).unwrap_err();
        assert_eq!(err, DecompError::NonFinite { index: 2 });
    }
}
