//! Symbolic series solvers for conformable fractional PDEs.
//!
//! The crate implements two companion methods for first-order-in-time
//! problems `T_alpha u + R(u) + N(u) = g` on `x > 0`, where `T_alpha` is the
//! conformable time derivative, `R` is linear, `N` is nonlinear and `g` is a
//! finite graded source:
//!
//! * [`cadm`] — the conformable Adomian decomposition method, which inverts
//!   `T_alpha` by a weighted time integral and expands the nonlinearity into
//!   Adomian polynomials;
//! * [`crdtm`] — the conformable reduced differential transform method,
//!   which turns the equation into an algebraic recurrence on the spectrum
//!   `{U_k(x)}` of `t^(k*alpha)` coefficients.
//!
//! Both produce the same truncated series; [`crdtm::residual_coeffs`] checks
//! any candidate series against the equation symbolically.
//!
//! Problems are described by [`problem::ProblemSpec`], loadable from a small
//! `key = "value"` text format (see [`problem::parse_problem`]) or from the
//! shipped built-ins (`diffusion`, `gas`, `advection`).

pub mod cadm;
pub mod crdtm;
pub mod error;
pub mod expr;
pub mod operator;
pub mod parse;
pub mod problem;
pub mod rational;
pub mod series;

pub use error::Error;
pub use expr::{equivalence, equivalent, Equivalence, Expr};
pub use operator::OperatorExpr;
pub use problem::{builtin, builtin_with, parse_problem, ProblemSpec};
pub use rational::{parse_rat, rat, rat_int, Rat};
pub use series::{LambdaPoly, SeriesScalar, TSeries};
