//! Exact scalar and polynomial arithmetic: arbitrary-precision rationals,
//! univariate polynomials over Q, rational functions, Sturm-based real root
//! isolation, real algebraic numbers with certified isolating intervals, and
//! factorization into Q-irreducible parts.
//!
//! Everything downstream (residues, signatures, sign sections) reduces to the
//! primitives in this module, so the operations here are deliberately small,
//! total where possible, and free of any numeric tolerance.

mod factor;
mod poly;
mod realalg;

pub use factor::{factor_rational, is_irreducible};
pub use poly::{IntPoly, RatFunc};
pub use realalg::{count_real_roots, rational_between, sign_at, sturm_isolate, RealAlg, Sign};

use thiserror::Error;

/// Exact rational scalar. Reduced fraction with positive denominator is
/// maintained by the representation itself.
pub type Rational = num_rational::BigRational;

/// Integer type backing all scalar arithmetic.
pub type Int = num_bigint::BigInt;

/// Errors raised by the exact-arithmetic layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumError {
    /// An operation that needs a nonzero polynomial received zero.
    #[error("ZeroPolynomial: {0}")]
    ZeroPolynomial(&'static str),
    /// Division by a zero polynomial or construction of a rational function
    /// with zero denominator.
    #[error("ZeroDenominator")]
    ZeroDenominator,
    /// A claimed isolating interval does not isolate exactly one root, or an
    /// endpoint is itself a root.
    #[error("IntervalNotIsolating: {0}")]
    IntervalNotIsolating(String),
}

pub(crate) fn rat_i64(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}
