//! Exact rational helpers.

use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// The least `k >= 0` with `2^-k < x`.
pub fn precision_below(x: &BigRational) -> Result<u32> {
    if !x.is_positive() {
        return Err(Error::Precision(format!("{x} is not positive")));
    }
    let mut k = 0u32;
    while pow2(-(k as i64)) >= *x {
        k += 1;
    }
    Ok(k)
}

/// Parses `3`, `-1/10` or `0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Schema(format!("`{s}` is not a rational number"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let whole = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, scale));
    }
    let r = BigRational::from_str(s).map_err(|_| bad())?;
    if r.denom().is_zero() {
        return Err(bad());
    }
    Ok(r)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn powers() {
        assert_eq!(pow2(3), q(8, 1));
        assert_eq!(pow2(-2), q(1, 4));
        assert_eq!(pow2(0), q(1, 1));
    }

    #[test]
    fn precision() {
        assert_eq!(precision_below(&q(1, 24)).unwrap(), 5);
        assert_eq!(precision_below(&q(2, 1)).unwrap(), 0);
        assert_eq!(precision_below(&q(1, 1)).unwrap(), 1);
        assert!(precision_below(&q(0, 1)).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("1/10").unwrap(), q(1, 10));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), q(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }
}
