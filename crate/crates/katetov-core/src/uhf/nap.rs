//! Near amalgamation for diagonal embeddings with a common source: joint
//! co-embedding into a common interval algebra so that the two composites
//! agree up to `eps` on Lipschitz test functions.
//!
//! The construction follows the fineness–matching recipe: jointly embed both
//! targets by block repetition into the least common matrix size, subdivide
//! until every composite map has image diameter below half the matching
//! tolerance, pair the blocks by Hall matching, and realign one side's
//! permutation tag (the stand-in for the conjugating unitary).

use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::Zero;

use crate::rat::{rat_int, Rat};

use super::matching::hall_match;
use super::morphism::{
    aligned_distance, block_repeat, compose_diagonal, is_trace_preserving,
    subdivision_embedding, DiagonalMorphism, TraceTag, UhfError,
};
use super::supernatural::SupernaturalNumber;

/// Outcome of [`nap_construct`]. `eta1`, `eta2` are the co-embeddings of the
/// two targets; `comp1 = eta1 ∘ i1` and `comp2` is `eta2 ∘ i2` conjugated by
/// the matching permutation, so the effective blocks of `comp1` and `comp2`
/// are aligned pairwise.
#[derive(Clone, Debug)]
pub struct NapOutcome {
    pub eta1: DiagonalMorphism,
    pub eta2: DiagonalMorphism,
    pub comp1: DiagonalMorphism,
    pub comp2: DiagonalMorphism,
    /// Exact aligned sup-distance between the composite tuples; below
    /// `2 · hall_delta` by construction.
    pub aligned: Rat,
    /// The matching tolerance used (`eps / (4 · lipschitz)`).
    pub hall_delta: Rat,
    /// The subdivision fineness chosen.
    pub fineness: u64,
}

/// Builds a near-amalgamation witness for `i1: A₀ → B₁`, `i2: A₀ → B₂`.
///
/// `lipschitz` bounds the test functions (the canonical generator has bound
/// 1); the aligned composite distance is below `2δ` with
/// `δ = eps / (4 · lipschitz)`, hence `L`-Lipschitz functions move by less
/// than `eps / 2`. Fineness is capped by `m_cap`; exceeding it reports the
/// required value.
pub fn nap_construct(
    i1: &DiagonalMorphism,
    i2: &DiagonalMorphism,
    nu: &SupernaturalNumber,
    lipschitz: &Rat,
    eps: &Rat,
    m_cap: u64,
) -> Result<NapOutcome, UhfError> {
    i1.check()?;
    i2.check()?;
    if i1.source != i2.source {
        return Err(UhfError::ComposeMismatch);
    }
    if i1.source.p != 1 || i1.target.p != 1 || i2.target.p != 1 {
        return Err(UhfError::UnsupportedCube(2));
    }
    if i1.source.trace != TraceTag::Lebesgue
        || i1.target.trace != TraceTag::Lebesgue
        || i2.target.trace != TraceTag::Lebesgue
    {
        return Err(UhfError::NotLebesgue);
    }
    if *eps <= Rat::zero() || *lipschitz <= Rat::zero() {
        return Err(UhfError::Other("eps and lipschitz must be positive".into()));
    }
    for i in [i1, i2] {
        if !is_trace_preserving(i)? {
            return Err(UhfError::Other("input morphism is not trace-preserving".into()));
        }
    }
    // Common matrix size by block repetition.
    let n_common = i1.target.n.lcm(&i2.target.n);
    if !nu.divides(n_common) {
        return Err(UhfError::NotInDivisorSet(n_common));
    }
    let rep1 = block_repeat(&i1.target, n_common / i1.target.n)?;
    let rep2 = block_repeat(&i2.target, n_common / i2.target.n)?;
    let lifted1 = compose_diagonal(&rep1, i1)?;
    let lifted2 = compose_diagonal(&rep2, i2)?;

    // Matching tolerance and the fineness achieving image diameters under it.
    let hall_delta: Rat = eps / (rat_int(4) * lipschitz);
    let mut slope = lifted1.max_abs_slope();
    let s2 = lifted2.max_abs_slope();
    if s2 > slope {
        slope = s2;
    }
    // Need slope / m < hall_delta strictly, and n_common * m in the divisor
    // set; search upward from the least sufficient integer.
    let mut m: u64 = {
        let need = &slope / &hall_delta;
        let floor: u64 = need.floor().to_integer().try_into().unwrap_or(u64::MAX - 1);
        floor + 1
    };
    loop {
        if m > m_cap {
            return Err(UhfError::Resource { needed: m, cap: m_cap });
        }
        if nu.divides(n_common * m) && &slope / rat_int(m as i64) < hall_delta {
            break;
        }
        m += 1;
    }
    let subdiv = subdivision_embedding(&rep1.target, m)?;
    let eta1 = compose_diagonal(&subdiv, &rep1)?;
    let eta2 = compose_diagonal(&subdiv, &rep2)?;
    let comp1 = compose_diagonal(&subdiv, &lifted1)?;
    let comp2_raw = compose_diagonal(&subdiv, &lifted2)?;

    // Pair the effective composite blocks and realign the second side.
    let eff1: Vec<_> = comp1.effective_maps().into_iter().cloned().collect();
    let eff2: Vec<_> = comp2_raw.effective_maps().into_iter().cloned().collect();
    let sigma = hall_match(&eff1, &eff2, &hall_delta)?;
    // New effective order: block at position l shows eff2[sigma(l)], i.e.
    // perm_new(i) = sigma^{-1}(perm_old(i)).
    let mut sigma_inv = alloc::vec![0usize; sigma.len()];
    for (l, &s) in sigma.iter().enumerate() {
        sigma_inv[s] = l;
    }
    let mut comp2 = comp2_raw.clone();
    comp2.perm = comp2_raw.perm.iter().map(|&p| sigma_inv[p]).collect();
    comp2.check()?;

    let aligned = aligned_distance(&comp1, &comp2)?;
    let bound = &hall_delta * rat_int(2);
    if aligned >= bound {
        return Err(UhfError::Other("aligned distance exceeds the matching bound".into()));
    }
    for dm in [&eta1, &eta2, &comp1, &comp2] {
        if !is_trace_preserving(dm)? {
            return Err(UhfError::Other("constructed morphism lost trace preservation".into()));
        }
    }
    Ok(NapOutcome { eta1, eta2, comp1, comp2, aligned, hall_delta, fineness: m })
}
