//! Exact rational scalars and small helpers shared across the crate.
//!
//! All lengths, offsets, and function values are [`Q`], an arbitrary
//! precision rational. The text form is `"p/q"` in lowest terms with a
//! leading minus sign on the numerator and with `"/1"` omitted.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used for every metric quantity in the crate.
pub type Q = BigRational;

/// Error raised when a rational literal cannot be parsed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct RatioError {
    pub literal: String,
    pub reason: String,
}

/// Builds `n / d` exactly. Panics if `d == 0`; callers pass literal constants.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p"` or `"p/q"` into a reduced rational. Whitespace is not
/// accepted; the denominator must be positive after sign normalization.
pub fn parse_q(text: &str) -> Result<Q, RatioError> {
    let fail = |reason: &str| RatioError {
        literal: text.to_owned(),
        reason: reason.to_owned(),
    };
    let mut parts = text.splitn(2, '/');
    let numer = parts.next().unwrap_or("");
    let numer: BigInt = numer.parse().map_err(|_| fail("numerator is not an integer"))?;
    match parts.next() {
        None => Ok(Q::from_integer(numer)),
        Some(denom) => {
            let denom: BigInt = denom
                .parse()
                .map_err(|_| fail("denominator is not an integer"))?;
            if denom.is_zero() {
                return Err(fail("denominator is zero"));
            }
            Ok(Q::new(numer, denom))
        }
    }
}

/// Formats a rational in lowest terms, omitting a unit denominator.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Least common multiple of two positive integers.
pub fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    num::integer::lcm(a.clone(), b.clone())
}

/// Smallest positive integer `m` with `m * x` integral for every `x`.
pub fn common_denominator<'a>(values: impl Iterator<Item = &'a Q>) -> BigInt {
    let mut acc = BigInt::one();
    for v in values {
        acc = lcm_bigint(&acc, v.denom());
    }
    acc
}

/// Exact ceiling of `a / b` for `b > 0`.
pub fn ceil_div(a: i128, b: i128) -> i128 {
    assert!(b > 0, "ceil_div requires a positive divisor");
    let quot = a.div_euclid(b);
    if a.rem_euclid(b) != 0 {
        quot + 1
    } else {
        quot
    }
}

/// Returns `x` rounded toward negative infinity to an integer rational.
pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

/// True when `x` is an integer.
pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Absolute value helper matching the crate spelling.
pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats_reduced_forms() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_q("6/8").unwrap(), q(3, 4));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert_eq!(parse_q("3/-4").unwrap(), q(-3, 4));
        assert_eq!(fmt_q(&q(3, 4)), "3/4");
        assert_eq!(fmt_q(&qi(-2)), "-2");
        assert_eq!(fmt_q(&q(8, 4)), "2");
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(parse_q("").is_err());
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("a/2").is_err());
        assert!(parse_q("1/2/3").is_err());
        assert!(parse_q("1.5").is_err());
    }

    #[test]
    fn common_denominator_is_the_lcm() {
        let values = [q(1, 2), q(5, 6), qi(3)];
        assert_eq!(common_denominator(values.iter()), BigInt::from(6));
    }

    #[test]
    fn ceil_div_handles_signs_exactly() {
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(ceil_div(6, 2), 3);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(ceil_div(0, 5), 0);
        assert_eq!(ceil_div(34, 10), 4);
    }
}
