//! Exact rational helpers: parsing, formatting and float demotion.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.35` or `-1.5e-2`.
/// Decimals are converted exactly, never through a float.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Q::from_integer(num * ten.pow(scale as u32))
    } else {
        Q::new(num, ten.pow((-scale) as u32))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    // Numerator and denominator can both overflow a double.
    let ln = ln_abs_q(x);
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * ln.exp()
}

/// Natural log of |x| for nonzero x, valid for astronomically large or small
/// rationals.
pub fn ln_abs_q(x: &Q) -> f64 {
    crate::mat3::ln_abs(x.numer()) - crate::mat3::ln_abs(x.denom())
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

/// Random `p/d` with `0 < p < d ≤ max_den`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, max_den: i64) -> Q {
    let d = rng.random_range(2..=max_den.max(2));
    q(rng.random_range(1..d), d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("7/10").unwrap(), q(7, 10));
        assert_eq!(parse_rational("0.7").unwrap(), q(7, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), q(-5, 4));
        assert_eq!(parse_rational("2").unwrap(), qi(2));
        assert_eq!(parse_rational("1e-4").unwrap(), q(1, 10_000));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for s in ["3/7", "-2/9", "5"] {
            assert_eq!(fmt_q(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn demotes_huge_ratios() {
        let big = Q::new(
            BigInt::from(10).pow(400u32),
            BigInt::from(3) * BigInt::from(10).pow(399u32),
        );
        assert!((to_f64(&big) - 10.0 / 3.0).abs() < 1e-12);
    }
}
