//! The closed-form k-step family and its driver.
//!
//! One iteration from `x_n` computes
//!
//! ```text
//! a_1 = x_n - f(x_n) / f'(x_n)
//! a_j = x_n - f(x_n)^j / (f'(x_n) * (f(x_n) - f(a_1)) * ... * (f(x_n) - f(a_{j-1})))
//! x_{n+1} = a_k
//! ```
//!
//! `k = 1` is Newton's method, `k = 2` Newton-Steffensen, `k = 3` the
//! fourth-order three-step scheme. The method has order `k + 1` and costs
//! `k + 1` function evaluations per iteration (f and f' at `x_n`, plus f at
//! `a_1..a_{k-1}`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{derive, Expr, ExprError};
use crate::numerics::{PrecReal, PrecisionContext};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MethodError {
    #[error("number of steps must be at least 1")]
    ZeroSteps,
    #[error("f'(x) = 0 at x = {x}")]
    ZeroDerivative { x: String },
    #[error("plateau at sub-step {step}: f(a_{step}) = f(x_n) at a_{step} = {x}")]
    Plateau { step: usize, x: String },
    #[error("non-finite {what}")]
    NonFinite { what: String },
    #[error(transparent)]
    Eval(#[from] ExprError),
}

/// Member of the family: `steps` sub-steps per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodSpec {
    steps: u32,
}

impl MethodSpec {
    pub fn new(steps: u32) -> Result<Self, MethodError> {
        if steps == 0 {
            return Err(MethodError::ZeroSteps);
        }
        Ok(MethodSpec { steps })
    }

    pub fn newton() -> Self {
        MethodSpec { steps: 1 }
    }

    pub fn newton_steffensen() -> Self {
        MethodSpec { steps: 2 }
    }

    pub fn three_step() -> Self {
        MethodSpec { steps: 3 }
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Claimed order of convergence, `k + 1`.
    pub fn order(&self) -> u32 {
        self.steps + 1
    }

    /// Function evaluations per iteration, `k + 1`.
    pub fn evaluations_per_iteration(&self) -> u32 {
        self.steps + 1
    }
}

/// Stopping rules; the first one to trigger wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    residual_exponent: Option<u32>,
    tnfe_budget: Option<u32>,
    max_iterations: Option<u32>,
}

impl StopRule {
    /// Stop once `|f(x_n)| <= 10^-exponent`.
    pub fn residual_tolerance(exponent: u32) -> Self {
        StopRule {
            residual_exponent: Some(exponent),
            tnfe_budget: None,
            max_iterations: None,
        }
    }

    /// Stop before an iteration would push the evaluation count past `budget`.
    pub fn tnfe_budget(budget: u32) -> Self {
        StopRule {
            residual_exponent: None,
            tnfe_budget: Some(budget),
            max_iterations: None,
        }
    }

    pub fn max_iterations(n: u32) -> Self {
        StopRule {
            residual_exponent: None,
            tnfe_budget: None,
            max_iterations: Some(n),
        }
    }

    pub fn or_residual_tolerance(mut self, exponent: u32) -> Self {
        self.residual_exponent = Some(exponent);
        self
    }

    pub fn or_tnfe_budget(mut self, budget: u32) -> Self {
        self.tnfe_budget = Some(budget);
        self
    }

    pub fn or_max_iterations(mut self, n: u32) -> Self {
        self.max_iterations = Some(n);
        self
    }

    pub fn residual_exponent(&self) -> Option<u32> {
        self.residual_exponent
    }

    pub fn budget(&self) -> Option<u32> {
        self.tnfe_budget
    }

    pub fn iteration_limit(&self) -> Option<u32> {
        self.max_iterations
    }
}

/// Result of one k-step iteration.
#[derive(Debug, Clone)]
pub struct Step {
    pub x_next: PrecReal,
    /// `a_1..a_k`; the last entry equals `x_next`.
    pub sub_steps: Vec<PrecReal>,
    pub fx: PrecReal,
    /// `None` when `f(x_n)` is exactly zero and the step short-circuits.
    pub fprime_x: Option<PrecReal>,
    /// `f(a_1)..f(a_{k-1})`.
    pub f_sub: Vec<PrecReal>,
}

/// One iteration of the k-step scheme from `x_n`.
pub fn kstep_step(
    f: &Expr,
    fprime: &Expr,
    x_n: &PrecReal,
    k: u32,
    ctx: PrecisionContext,
) -> Result<Step, MethodError> {
    let x_n = x_n.with_ctx(ctx);
    let fx = f.eval(&x_n, ctx)?;
    step_from(f, fprime, &x_n, fx, k, ctx)
}

fn step_from(
    f: &Expr,
    fprime: &Expr,
    x_n: &PrecReal,
    fx: PrecReal,
    k: u32,
    ctx: PrecisionContext,
) -> Result<Step, MethodError> {
    if k == 0 {
        return Err(MethodError::ZeroSteps);
    }
    if !fx.is_finite() {
        return Err(MethodError::NonFinite {
            what: format!("f(x_n) at x_n = {}", x_n.to_decimal(30)),
        });
    }
    if fx.is_zero() {
        return Ok(Step {
            x_next: x_n.clone(),
            sub_steps: vec![x_n.clone(); k as usize],
            fx,
            fprime_x: None,
            f_sub: Vec::new(),
        });
    }
    let fpx = fprime.eval(x_n, ctx)?;
    if !fpx.is_finite() {
        return Err(MethodError::NonFinite {
            what: format!("f'(x_n) at x_n = {}", x_n.to_decimal(30)),
        });
    }
    if fpx.is_zero() {
        return Err(MethodError::ZeroDerivative {
            x: x_n.to_decimal(30),
        });
    }

    // Numerator f^j and denominator f' * prod (f - f(a_i)) grow by one
    // factor per sub-step, multiplied left to right.
    let mut numerator = fx.clone();
    let mut denominator = fpx.clone();
    let mut sub_steps = Vec::with_capacity(k as usize);
    let mut f_sub = Vec::with_capacity(k as usize - 1);
    let mut current = x_n - &(&numerator / &denominator);
    check_finite(&current, 1)?;
    for j in 2..=k as usize {
        let fa = f.eval(&current, ctx)?;
        if !fa.is_finite() {
            return Err(MethodError::NonFinite {
                what: format!("f(a_{}) at a_{} = {}", j - 1, j - 1, current.to_decimal(30)),
            });
        }
        let gap = &fx - &fa;
        if gap.is_zero() {
            return Err(MethodError::Plateau {
                step: j - 1,
                x: current.to_decimal(30),
            });
        }
        denominator = &denominator * &gap;
        numerator = &numerator * &fx;
        sub_steps.push(current);
        f_sub.push(fa);
        current = x_n - &(&numerator / &denominator);
        check_finite(&current, j)?;
    }
    sub_steps.push(current.clone());
    Ok(Step {
        x_next: current,
        sub_steps,
        fx,
        fprime_x: Some(fpx),
        f_sub,
    })
}

fn check_finite(a: &PrecReal, j: usize) -> Result<(), MethodError> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(MethodError::NonFinite {
            what: format!("sub-step a_{j}"),
        })
    }
}

/// Iterations affordable within an evaluation budget: `budget / (k + 1)`.
pub fn tnfe_to_iterations(k: u32, budget: u32) -> u32 {
    budget / (k + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
    Aborted(String),
}

impl Termination {
    pub fn label(&self) -> String {
        match self {
            Termination::Converged => "converged".into(),
            Termination::BudgetExhausted => "budget_exhausted".into(),
            Termination::Aborted(reason) => format!("aborted: {reason}"),
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "converged" => Some(Termination::Converged),
            "budget_exhausted" => Some(Termination::BudgetExhausted),
            other => other
                .strip_prefix("aborted: ")
                .map(|r| Termination::Aborted(r.to_string())),
        }
    }
}

/// One completed iteration `x_n -> x_{n+1}`.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub x_n: PrecReal,
    /// `a_1..a_k`, ending with `x_{n+1}`.
    pub sub_steps: Vec<PrecReal>,
    pub fx: PrecReal,
    pub fprime_x: PrecReal,
    /// `f(a_1)..f(a_{k-1})`.
    pub f_sub: Vec<PrecReal>,
    /// `|f(x_{n+1})|`.
    pub residual: PrecReal,
    /// Evaluations spent so far, including this iteration.
    pub tnfe: u32,
}

impl IterationRecord {
    pub fn x_next(&self) -> &PrecReal {
        self.sub_steps.last().expect("at least one sub-step")
    }
}

/// Complete record of a solver run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub method: MethodSpec,
    pub x0: PrecReal,
    /// `|f(x_0)|`, or `None` when it could not be evaluated.
    pub initial_residual: Option<PrecReal>,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
}

impl IterationTrace {
    /// Iterates `x_0, x_1, ..., x_N`.
    pub fn iterates(&self) -> Vec<&PrecReal> {
        std::iter::once(&self.x0)
            .chain(self.iterations.iter().map(|r| r.x_next()))
            .collect()
    }

    pub fn final_iterate(&self) -> &PrecReal {
        self.iterations.last().map_or(&self.x0, |r| r.x_next())
    }

    /// `|f|` at the final iterate.
    pub fn final_residual(&self) -> Option<&PrecReal> {
        match self.iterations.last() {
            Some(r) => Some(&r.residual),
            None => self.initial_residual.as_ref(),
        }
    }

    pub fn tnfe(&self) -> u32 {
        self.iterations.last().map_or(0, |r| r.tnfe)
    }

    /// Residuals `|f(x_0)|, |f(x_1)|, ...` as recorded.
    pub fn residuals(&self) -> Vec<&PrecReal> {
        self.initial_residual
            .iter()
            .chain(self.iterations.iter().map(|r| &r.residual))
            .collect()
    }
}

/// Runs the k-step method from `x0` until a stop rule fires. The derivative
/// is computed symbolically from `f`.
///
/// Never fails: evaluation problems end the run with
/// [`Termination::Aborted`] and keep the iterations done so far.
pub fn solve(
    f: &Expr,
    x0: &PrecReal,
    method: MethodSpec,
    stop: StopRule,
    ctx: PrecisionContext,
) -> IterationTrace {
    match derive(f) {
        Ok(fprime) => solve_with_derivative(f, &fprime, x0, method, stop, ctx),
        Err(e) => IterationTrace {
            method,
            x0: x0.with_ctx(ctx),
            initial_residual: None,
            iterations: Vec::new(),
            termination: Termination::Aborted(e.to_string()),
        },
    }
}

/// [`solve`] with a caller-supplied derivative.
pub fn solve_with_derivative(
    f: &Expr,
    fprime: &Expr,
    x0: &PrecReal,
    method: MethodSpec,
    stop: StopRule,
    ctx: PrecisionContext,
) -> IterationTrace {
    let x0 = x0.with_ctx(ctx);
    let mut trace = IterationTrace {
        method,
        x0: x0.clone(),
        initial_residual: None,
        iterations: Vec::new(),
        termination: Termination::BudgetExhausted,
    };
    let tolerance = stop.residual_exponent.map(|e| ctx.pow10(-i64::from(e)));
    let cost = method.evaluations_per_iteration();

    let mut x = x0;
    let mut fx = match f.eval(&x, ctx) {
        Ok(v) if v.is_finite() => v,
        Ok(_) => {
            trace.termination = Termination::Aborted("non-finite f(x_0)".into());
            return trace;
        }
        Err(e) => {
            trace.termination = Termination::Aborted(e.to_string());
            return trace;
        }
    };
    trace.initial_residual = Some(fx.abs());
    let mut tnfe = 0u32;

    loop {
        if fx.is_zero() || tolerance.as_ref().is_some_and(|t| fx.abs() <= *t) {
            trace.termination = Termination::Converged;
            break;
        }
        if stop
            .max_iterations
            .is_some_and(|n| trace.iterations.len() as u32 >= n)
        {
            trace.termination = Termination::BudgetExhausted;
            break;
        }
        if stop.tnfe_budget.is_some_and(|b| tnfe + cost > b) {
            trace.termination = Termination::BudgetExhausted;
            break;
        }
        let step = match step_from(f, fprime, &x, fx.clone(), method.steps, ctx) {
            Ok(s) => s,
            Err(e) => {
                trace.termination = Termination::Aborted(e.to_string());
                break;
            }
        };
        let f_next = match f.eval(&step.x_next, ctx) {
            Ok(v) if v.is_finite() => v,
            Ok(_) => {
                trace.termination = Termination::Aborted(format!(
                    "non-finite f at x_{}",
                    trace.iterations.len() + 1
                ));
                break;
            }
            Err(e) => {
                trace.termination = Termination::Aborted(e.to_string());
                break;
            }
        };
        tnfe += cost;
        let next_x = step.x_next.clone();
        trace.iterations.push(IterationRecord {
            x_n: x,
            sub_steps: step.sub_steps,
            fx: step.fx,
            fprime_x: step.fprime_x.expect("nonzero f(x_n) evaluates f'"),
            f_sub: step.f_sub,
            residual: f_next.abs(),
            tnfe,
        });
        x = next_x;
        fx = f_next;
    }
    trace
}
