//! High-precision root finding with the Newton-Steffensen decomposition
//! family.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: precision contexts and MPFR-backed reals.
//! * [`expr`]: the function language (parse, evaluate, differentiate).
//! * [`decomp`]: the generic decomposition engine for `x = c + N(x)` and the
//!   operator induced by `f` at a base point.
//! * [`methods`]: the closed-form k-step iteration family and its solver.
//! * [`series`]: exact truncated power series used to derive the error
//!   expansion of one k-step iteration.
//! * [`bench`]: built-in test functions, the reproduction protocol, order
//!   estimation and report output.

pub mod bench;
pub mod decomp;
pub mod expr;
pub mod methods;
pub mod numerics;
pub mod series;
