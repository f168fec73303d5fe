//! Supernatural numbers: formal products of prime powers with exponents in
//! `ℕ ∪ {∞}`, and divisibility of naturals into them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Exponent of one prime in a supernatural number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

/// A supernatural number with finitely many explicitly listed primes. The
/// defining condition (the exponent sum is infinite) forces at least one
/// infinite exponent in this finite representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupernaturalNumber {
    exponents: BTreeMap<u64, Exponent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupernaturalError(pub String);

impl fmt::Display for SupernaturalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid supernatural number: {}", self.0)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SupernaturalError {}

impl SupernaturalNumber {
    pub fn new(factors: Vec<(u64, Exponent)>) -> Result<Self, SupernaturalError> {
        let mut exponents = BTreeMap::new();
        for (p, e) in factors {
            if !is_prime(p) {
                return Err(SupernaturalError(alloc::format!("{p} is not prime")));
            }
            if matches!(e, Exponent::Finite(0)) {
                continue;
            }
            if exponents.insert(p, e).is_some() {
                return Err(SupernaturalError(alloc::format!("prime {p} listed twice")));
            }
        }
        if !exponents.values().any(|e| matches!(e, Exponent::Infinite)) {
            return Err(SupernaturalError(
                "exponent sum must be infinite (some exponent must be inf)".to_string(),
            ));
        }
        Ok(SupernaturalNumber { exponents })
    }

    /// `p^∞` for a prime `p`.
    pub fn prime_power_infinite(p: u64) -> Self {
        SupernaturalNumber::new(alloc::vec![(p, Exponent::Infinite)]).expect("prime")
    }

    pub fn exponent(&self, p: u64) -> Exponent {
        *self.exponents.get(&p).unwrap_or(&Exponent::Finite(0))
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, Exponent)> + '_ {
        self.exponents.iter().map(|(&p, &e)| (p, e))
    }

    /// Whether the natural number `n ≥ 1` formally divides this supernatural
    /// number: every prime power of `n` fits under the exponent map.
    pub fn divides(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        for (p, e) in factorize(n) {
            match self.exponent(p) {
                Exponent::Infinite => {}
                Exponent::Finite(cap) => {
                    if e > cap {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Parses `"2^inf"`, `"2^inf*3"`, `"2^3*5^inf"`.
    pub fn parse(s: &str) -> Result<Self, SupernaturalError> {
        let mut factors = Vec::new();
        for part in s.split('*') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim()),
                None => (part, "1"),
            };
            let p: u64 = base
                .parse()
                .map_err(|_| SupernaturalError(alloc::format!("bad prime `{base}`")))?;
            let e = if exp.eq_ignore_ascii_case("inf") || exp == "∞" {
                Exponent::Infinite
            } else {
                Exponent::Finite(
                    exp.parse()
                        .map_err(|_| SupernaturalError(alloc::format!("bad exponent `{exp}`")))?,
                )
            };
            factors.push((p, e));
        }
        SupernaturalNumber::new(factors)
    }
}

impl fmt::Display for SupernaturalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, e) in &self.exponents {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match e {
                Exponent::Infinite => write!(f, "{p}^inf")?,
                Exponent::Finite(1) => write!(f, "{p}")?,
                Exponent::Finite(k) => write!(f, "{p}^{k}")?,
            }
        }
        Ok(())
    }
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == alloc::vec![(n, 1)]
}
