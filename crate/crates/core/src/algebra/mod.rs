//! Exact arithmetic over the rationals.
//!
//! Everything the cascade does is decided by exact equality, so the
//! coefficient field is [`Rat`] (arbitrary precision) throughout. The
//! building blocks are:
//!
//! * [`UPoly`]: dense univariate polynomials over `Rat`,
//! * [`RationalFunction`]: reduced quotients of `UPoly` with a monic denominator,
//! * [`MPoly3`]: sparse polynomials in three variables, used by the Dini module.
//!
//! A float view (`eval_f64`) is provided on the univariate types for the
//! numeric modules.

mod mpoly;
mod parse;
mod rat;
mod ratfun;
mod upoly;

pub use mpoly::{Axis, MPoly3};
pub use parse::{parse_mpoly, parse_rat, parse_upoly, ParseError};
pub use rat::{rat, rat_to_f64, rat_to_string, Rat};
pub use ratfun::{degree_cap, set_degree_cap, RationalFunction, DEFAULT_DEGREE_CAP};
pub use upoly::UPoly;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("zero divisor")]
    ZeroDivisor,
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("logarithmic derivative of the zero function")]
    LogOfZero,
}
