//! The value domain `[0, ∞] ∩ (ℚ ∪ {∞})`: exact nonnegative rationals with a
//! saturating infinity. This is the codomain of every approximate isometry.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::iter::Sum;
use core::ops::Add;

use num_traits::{Signed, Zero};

use crate::rat::{fmt_rat, parse_rat, ParseRatError, Rat};

/// An exact extended nonnegative rational: an element of `ℚ≥0 ∪ {∞}`.
///
/// Addition saturates at infinity and the order is total with `∞` as top.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtQ {
    Fin(Rat),
    Inf,
}

impl ExtQ {
    /// Wraps a rational, panicking on negative input: `ExtQ` values are
    /// nonnegative by construction.
    pub fn fin(q: Rat) -> Self {
        assert!(!q.is_negative(), "ExtQ must be nonnegative");
        ExtQ::Fin(q)
    }

    pub fn zero() -> Self {
        ExtQ::Fin(Rat::zero())
    }

    pub fn from_int(n: u64) -> Self {
        ExtQ::Fin(Rat::from_integer(n.into()))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtQ::Inf)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtQ::Fin(q) if q.is_zero())
    }

    pub fn as_fin(&self) -> Option<&Rat> {
        match self {
            ExtQ::Fin(q) => Some(q),
            ExtQ::Inf => None,
        }
    }

    /// Finite difference `self - other`, or `None` when either side is `∞`
    /// or the result would be negative.
    pub fn checked_sub(&self, other: &ExtQ) -> Option<Rat> {
        match (self, other) {
            (ExtQ::Fin(a), ExtQ::Fin(b)) if a >= b => Some(a - b),
            _ => None,
        }
    }

    /// Serialized form: `"inf"` or the canonical rational literal.
    pub fn to_text(&self) -> String {
        match self {
            ExtQ::Fin(q) => fmt_rat(q),
            ExtQ::Inf => "inf".to_string(),
        }
    }

    /// Parses `"inf"` or a rational literal, rejecting negatives.
    pub fn parse(s: &str) -> Result<Self, ParseRatError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtQ::Inf);
        }
        let q = parse_rat(t)?;
        if q.is_negative() {
            return Err(ParseRatError(t.to_string()));
        }
        Ok(ExtQ::Fin(q))
    }
}

impl From<Rat> for ExtQ {
    fn from(q: Rat) -> Self {
        ExtQ::fin(q)
    }
}

impl PartialOrd for ExtQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtQ {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtQ::Inf, ExtQ::Inf) => Ordering::Equal,
            (ExtQ::Inf, ExtQ::Fin(_)) => Ordering::Greater,
            (ExtQ::Fin(_), ExtQ::Inf) => Ordering::Less,
            (ExtQ::Fin(a), ExtQ::Fin(b)) => a.cmp(b),
        }
    }
}

impl Add<&ExtQ> for &ExtQ {
    type Output = ExtQ;

    fn add(self, rhs: &ExtQ) -> ExtQ {
        match (self, rhs) {
            (ExtQ::Fin(a), ExtQ::Fin(b)) => ExtQ::Fin(a + b),
            _ => ExtQ::Inf,
        }
    }
}

impl Add for ExtQ {
    type Output = ExtQ;

    fn add(self, rhs: ExtQ) -> ExtQ {
        &self + &rhs
    }
}

impl<'a> Sum<&'a ExtQ> for ExtQ {
    fn sum<I: Iterator<Item = &'a ExtQ>>(iter: I) -> ExtQ {
        iter.fold(ExtQ::zero(), |acc, x| &acc + x)
    }
}

impl fmt::Debug for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn addition_saturates_at_infinity() {
        let q = ExtQ::fin(rat(3, 2));
        assert_eq!(&q + &ExtQ::Inf, ExtQ::Inf);
        assert_eq!(&ExtQ::Inf + &ExtQ::Inf, ExtQ::Inf);
        assert_eq!(&q + &ExtQ::fin(rat(1, 2)), ExtQ::from_int(2));
    }

    #[test]
    fn order_is_total_with_infinity_on_top() {
        let mut v = alloc::vec![ExtQ::Inf, ExtQ::zero(), ExtQ::fin(rat(1, 3))];
        v.sort();
        assert_eq!(v, alloc::vec![ExtQ::zero(), ExtQ::fin(rat(1, 3)), ExtQ::Inf]);
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "7/2", "inf"] {
            assert_eq!(ExtQ::parse(s).unwrap().to_text(), s);
        }
        assert!(ExtQ::parse("-1").is_err());
    }
}
