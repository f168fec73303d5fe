//! Limit criteria for chains of diagonal embeddings: cube dimensions stay
//! positive, every divisor of the supernatural number divides some stage
//! size, and composite connecting morphisms become arbitrarily fine.

use alloc::vec::Vec;

use crate::rat::{rat, Rat};

use super::morphism::{compose_diagonal, DiagonalMorphism, UhfError};
use super::supernatural::SupernaturalNumber;

/// A chain of composable diagonal embeddings.
#[derive(Clone, Debug)]
pub struct UhfChain {
    pub morphisms: Vec<DiagonalMorphism>,
}

impl UhfChain {
    pub fn new(morphisms: Vec<DiagonalMorphism>) -> Result<Self, UhfError> {
        for m in &morphisms {
            m.check()?;
        }
        for w in morphisms.windows(2) {
            if w[0].target != w[1].source {
                return Err(UhfError::ComposeMismatch);
            }
        }
        Ok(UhfChain { morphisms })
    }

    /// Number of objects in the chain.
    pub fn depth(&self) -> usize {
        self.morphisms.len() + 1
    }

    /// Matrix size of the `j`-th object (0-based).
    pub fn size(&self, j: usize) -> u64 {
        if j == 0 {
            self.morphisms.first().map_or(0, |m| m.source.n)
        } else {
            self.morphisms[j - 1].target.n
        }
    }

    /// Cube dimension of the `j`-th object.
    pub fn cube_dim(&self, j: usize) -> u32 {
        if j == 0 {
            self.morphisms.first().map_or(0, |m| m.source.p)
        } else {
            self.morphisms[j - 1].target.p
        }
    }

    /// The composite connecting morphism from object `j` into object `k`.
    pub fn composite(&self, j: usize, k: usize) -> Result<DiagonalMorphism, UhfError> {
        assert!(j < k && k < self.depth());
        let mut acc = self.morphisms[j].clone();
        for m in &self.morphisms[j + 1..k] {
            acc = compose_diagonal(m, &acc)?;
        }
        Ok(acc)
    }
}

/// Per-`ε` outcome of the fineness criterion: for the witness pair
/// `(j, k)`, every image of the composite has diameter below `ε`.
#[derive(Clone, Debug)]
pub struct FinenessSample {
    pub eps: Rat,
    pub witness: Option<(usize, usize)>,
}

/// Report of [`check_uhf_limit`].
#[derive(Clone, Debug)]
pub struct UhfLimitReport {
    /// (a) Every object lives on a cube of dimension at least one.
    pub cube_dims_positive: bool,
    /// (b) Divisors of the supernatural number up to the bound that divide
    /// no stage size.
    pub missing_divisors: Vec<u64>,
    /// (c) Fineness witnesses per tested epsilon.
    pub fineness: Vec<FinenessSample>,
}

impl UhfLimitReport {
    pub fn passes(&self) -> bool {
        self.cube_dims_positive
            && self.missing_divisors.is_empty()
            && self.fineness.iter().all(|s| s.witness.is_some())
    }
}

/// Checks the three criteria against a finite chain.
///
/// (a) is checked directly; (b) for every `n ≤ divisor_bound` dividing the
/// supernatural number, some stage size must be a multiple; (c) for every
/// `ε` in the schedule there must be stages `j < k` whose composite has all
/// image diameters below `ε` (the least such pair is recorded).
pub fn check_uhf_limit(
    chain: &UhfChain,
    nu: &SupernaturalNumber,
    divisor_bound: u64,
    eps_schedule: &[Rat],
) -> Result<UhfLimitReport, UhfError> {
    let depth = chain.depth();
    let cube_dims_positive = (0..depth).all(|j| chain.cube_dim(j) >= 1);

    let mut missing_divisors = Vec::new();
    for n in 1..=divisor_bound {
        if nu.divides(n) && !(0..depth).any(|j| chain.size(j) % n == 0) {
            missing_divisors.push(n);
        }
    }

    // Cache composite diameters; reuse across epsilons.
    let mut diameters: Vec<Vec<Option<Rat>>> = alloc::vec![alloc::vec![None; depth]; depth];
    for j in 0..depth {
        for k in (j + 1)..depth {
            let comp = chain.composite(j, k)?;
            diameters[j][k] = Some(comp.max_image_diameter());
        }
    }
    let mut fineness = Vec::new();
    for eps in eps_schedule {
        let mut witness = None;
        'search: for j in 0..depth {
            for k in (j + 1)..depth {
                if let Some(d) = &diameters[j][k] {
                    if d < eps {
                        witness = Some((j, k));
                        break 'search;
                    }
                }
            }
        }
        fineness.push(FinenessSample { eps: eps.clone(), witness });
    }
    Ok(UhfLimitReport { cube_dims_positive, missing_divisors, fineness })
}

/// The canonical subdivision chain: sizes `base^1, …, base^depth` with
/// subdivision connecting morphisms (fineness `base` each step).
pub fn subdivision_chain(base: u64, depth: usize) -> Result<UhfChain, UhfError> {
    assert!(base >= 2 && depth >= 2);
    let mut morphisms = Vec::new();
    let mut n = base;
    for _ in 1..depth {
        let source = super::morphism::CubeAlgebra::lebesgue(1, n);
        morphisms.push(super::morphism::subdivision_embedding(&source, base)?);
        n *= base;
    }
    UhfChain::new(morphisms)
}

/// A constant chain with identity connecting morphisms.
pub fn identity_chain(n: u64, depth: usize) -> Result<UhfChain, UhfError> {
    assert!(depth >= 2);
    let alg = super::morphism::CubeAlgebra::lebesgue(1, n);
    UhfChain::new((1..depth).map(|_| DiagonalMorphism::identity(&alg)).collect())
}

/// The standard epsilon schedule `1/2, 1/4, …` down to `1/2^k`.
pub fn eps_schedule(k: u32) -> Vec<Rat> {
    (1..=k).map(|i| rat(1, 1i64 << i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uhf::supernatural::SupernaturalNumber;

    #[test]
    fn canonical_two_adic_chain_passes() {
        let chain = subdivision_chain(2, 8).unwrap();
        let nu = SupernaturalNumber::prime_power_infinite(2);
        let report = check_uhf_limit(&chain, &nu, 256, &eps_schedule(6)).unwrap();
        assert!(report.passes(), "missing: {:?}", report.missing_divisors);
        // Composite image diameters shrink as products of 1/2 factors.
        let comp = chain.composite(0, 4).unwrap();
        assert_eq!(comp.max_image_diameter(), rat(1, 16));
    }

    #[test]
    fn identity_chain_fails_fineness() {
        let chain = identity_chain(2, 4).unwrap();
        let nu = SupernaturalNumber::prime_power_infinite(2);
        let report = check_uhf_limit(&chain, &nu, 2, &eps_schedule(2)).unwrap();
        assert!(!report.passes());
        assert!(report.fineness.iter().any(|s| s.witness.is_none()));
        assert!(report.missing_divisors.is_empty());
    }

    #[test]
    fn prime_deficient_chain_fails_divisibility() {
        let chain = subdivision_chain(2, 6).unwrap();
        let nu = SupernaturalNumber::parse("2^inf*3^inf").unwrap();
        let report = check_uhf_limit(&chain, &nu, 12, &eps_schedule(2)).unwrap();
        assert!(!report.passes());
        assert!(report.missing_divisors.contains(&3));
    }
}
