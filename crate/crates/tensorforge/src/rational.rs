// SPDX-License-Identifier: Apache-2.0

//! Rational scalars and their textual form `"p/q"`.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text: always `p/q` with `q > 0` and `gcd(p, q) = 1`.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a bare integer `p`. Fractions must already be reduced.
pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::InvalidRational(s.to_string());
    let parse_int = |t: &str| -> Result<BigInt> {
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse::<BigInt>().map_err(|_| bad())
    };
    match s.split_once('/') {
        None => Ok(Q::from_integer(parse_int(s)?)),
        Some((p, d)) => {
            let p = parse_int(p)?;
            if d.starts_with('-') {
                return Err(bad());
            }
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(bad());
            }
            if !p.gcd(&d).is_one() {
                return Err(Error::NonReducedFraction(s.to_string()));
            }
            Ok(Q::new_raw(p, d))
        }
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Exact ceiling of a rational.
pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

/// Closest rational with denominator at most `max_den`, by continued fractions.
pub fn rationalize(x: f64, max_den: u64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let f = v - v.floor();
        if f < 1e-12 {
            break;
        }
        v = 1.0 / f;
    }
    if q1 == 0 {
        return None;
    }
    let r = Q::new(BigInt::from(p1), BigInt::from(q1));
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/4").unwrap(), frac(3, 4));
        assert_eq!(parse_q("-7").unwrap(), q(-7));
        assert_eq!(format_q(&frac(-6, 4)), "-3/2");
        assert_eq!(format_q(&q(1)), "1/1");
    }

    #[test]
    fn rejects_bad_text() {
        assert_eq!(
            parse_q("2/4"),
            Err(Error::NonReducedFraction("2/4".into()))
        );
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("1/-2").is_err());
        assert!(parse_q("x").is_err());
        assert!(parse_q("+1").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn continued_fraction() {
        assert_eq!(rationalize(0.75, 1000), Some(frac(3, 4)));
        assert_eq!(rationalize(-1.0 / 3.0, 1000), Some(frac(-1, 3)));
        assert_eq!(rationalize(2.0, 10), Some(q(2)));
        assert_eq!(rationalize(f64::NAN, 10), None);
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_q(&frac(7, 2)), BigInt::from(4));
        assert_eq!(ceil_q(&frac(-7, 2)), BigInt::from(-3));
        assert_eq!(ceil_q(&q(5)), BigInt::from(5));
    }
}
