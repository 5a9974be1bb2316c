//! Expressions over exact rationals with optional elementary functions.
//!
//! The engine never builds canonical forms. Every structural question
//! ("is this zero", "does this depend on `x`") is answered by evaluating at
//! pseudo-random rational points, see [`is_zero`].

mod diff;
mod eval;
mod expr;
pub(crate) mod modp;
mod parse;
mod simplify;
mod solve;
mod subst;
mod zero;

pub use diff::{differentiate, gradient};
pub use eval::{eval, Point, RationalPoint, Value};
pub use expr::{Expr, Func, Kind, Symbol};
pub use parse::{parse, Vocabulary};
pub use simplify::simplify;
pub use solve::{solve_for, solve_for_local};
pub use subst::{substitute, substitute_one, Bindings};
pub use zero::{depends_on, is_zero, Confidence, SamplePoint, ZeroTestConfig};

pub(crate) use eval::{eval_many_at, rat_to_float};
pub(crate) use modp::{eval_mod_many_at, modular};
pub(crate) use zero::is_resample;

/// Exact rational numbers (arbitrary precision).
pub type Rational = num_rational::BigRational;
