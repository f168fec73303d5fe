//! Exact rational scalars and their text form.
//!
//! Rationals serialize as strings, never as binary floating point: either a
//! plain integer (`"3"`), a fraction in lowest terms (`"5/4"`), or a decimal
//! literal (`"0.25"`, accepted on input only). This keeps every value
//! bit-stable through JSON round trips.

use alloc::string::{String, ToString};
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact (signed) rational number. Nonnegativity is a contextual invariant
/// enforced by the types that embed it (`ExtQ`, distance tables), not here:
/// intermediate arithmetic (gaps, slopes, affine intercepts) needs signs.
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as a rational (`d != 0`).
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form: integers without denominator, otherwise `p/q` in
/// lowest terms (num-rational keeps fractions reduced).
pub fn fmt_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        let mut s = q.numer().to_string();
        s.push('/');
        s.push_str(&q.denom().to_string());
        s
    }
}

/// Error produced by [`parse_rat`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError(pub String);

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.0)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseRatError {}

/// Parses `"3"`, `"-7/2"` or `"1.25"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    let err = || ParseRatError(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| err())?;
        let den: BigInt = d.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Rat::new(num, den))
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| err())?
        };
        let num: BigInt = frac.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = Rat::new(num, den);
        let whole = Rat::from_integer(int_part.abs());
        let value = whole + frac_part;
        Ok(if negative { -value } else { value })
    } else {
        let num: BigInt = s.parse().map_err(|_| err())?;
        Ok(Rat::from_integer(num))
    }
}

/// Rounds `q` to the nearest multiple of `2^-k`, ties away from zero.
pub fn round_dyadic(q: &Rat, k: u32) -> Rat {
    let scale = Rat::from_integer(BigInt::from(1u8) << k);
    let scaled = q * &scale;
    let half = rat(1, 2);
    let shifted = if scaled.is_negative() { &scaled - &half } else { &scaled + &half };
    Rat::from_integer(shifted.trunc().to_integer()) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "3", "-2", "5/4", "-7/3", "10/4"] {
            let q = parse_rat(s).unwrap();
            let q2 = parse_rat(&fmt_rat(&q)).unwrap();
            assert_eq!(q, q2);
        }
        assert_eq!(parse_rat("10/4").unwrap(), rat(5, 2));
    }

    #[test]
    fn parse_decimal_is_exact() {
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("1.5").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("-0.1").unwrap(), rat(-1, 10));
        assert_eq!(parse_rat(".5").unwrap(), rat(1, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "a", "1.2.3", "1/ /2", "0x3"] {
            assert!(parse_rat(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn dyadic_rounding() {
        assert_eq!(round_dyadic(&rat(1, 3), 2), rat(1, 4));
        assert_eq!(round_dyadic(&rat(5, 8), 2), rat(3, 4));
        assert_eq!(round_dyadic(&rat(5, 8), 3), rat(5, 8));
        assert_eq!(round_dyadic(&rat(-1, 3), 2), rat(-1, 4));
    }
}
