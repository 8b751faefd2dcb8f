//! Exact arithmetic substrate: rationals, truncated univariate series and
//! sparse truncated graded-commutative polynomial rings.

mod graded;
mod rational;
mod series;

pub use graded::{GeneratorSet, GradedElement, GradedRing, Monomial};
pub use rational::{factorial, parse_rational, rat, Rational};
pub use series::UnivariateSeries;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("incompatible rings: {0}")]
    IncompatibleRing(String),
    #[error("series truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("divisor is not invertible (zero constant term after cancelling common factors of x)")]
    NotInvertible,
    #[error("inner series of a composition must have zero constant term")]
    NonZeroConstant,
    #[error("series must have constant term 1")]
    NonUnitConstant,
    #[error("element is not a unit of the ring (constant term is zero)")]
    NotAUnit,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid generator set: {0}")]
    InvalidGenerators(String),
}
