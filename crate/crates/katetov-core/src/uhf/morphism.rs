//! Interval matrix algebra descriptors and diagonal embeddings between
//! them, with exact pushforward densities and composition.
//!
//! An object is the algebra of `n × n` matrix-valued continuous functions on
//! the `p`-cube, together with a trace: either the Lebesgue trace or its
//! pushforward along a piecewise-affine homeomorphism (objects are
//! normalized to Lebesgue form before engine use). A morphism is a diagonal
//! embedding: a tuple of `k = n_target / n_source` piecewise-affine maps
//! from the target cube to the source cube plus a block permutation tag
//! standing in for the conjugating unitary.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::rat::{rat_int, Rat};

use super::paffine::{PaffineError, PiecewiseAffineMap};

/// The distinguished trace of a cube algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceTag {
    /// Integration of the normalized matrix trace against Lebesgue measure.
    Lebesgue,
    /// The pushforward of the Lebesgue trace along an increasing
    /// piecewise-affine homeomorphism of the interval.
    PushforwardBy(PiecewiseAffineMap),
}

/// A cube algebra descriptor: matrix size `n` on the `p`-cube with a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeAlgebra {
    pub p: u32,
    pub n: u64,
    pub trace: TraceTag,
}

impl CubeAlgebra {
    pub fn lebesgue(p: u32, n: u64) -> Self {
        CubeAlgebra { p, n, trace: TraceTag::Lebesgue }
    }
}

/// Errors from the matrix-algebra combinatorics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UhfError {
    /// Matrix sizes are not in a divisibility relation.
    SizeMismatch { source: u64, target: u64, maps: usize },
    /// Source and target descriptors do not line up for composition.
    ComposeMismatch,
    /// A constant piece of positive length makes the pushforward singular.
    NonAbsolutelyContinuous,
    /// Cube dimension outside the supported reductions.
    UnsupportedCube(u32),
    /// The object carries a non-Lebesgue trace; normalize it first.
    NotLebesgue,
    /// The subdivision fineness would exceed the configured cap.
    Resource { needed: u64, cap: u64 },
    /// Hall matching could not find a perfect matching (violated premise).
    NoPerfectMatching,
    /// The requested size does not divide the supernatural number.
    NotInDivisorSet(u64),
    /// Invalid permutation tag.
    BadPermutation,
    Paffine(PaffineError),
    Other(String),
}

impl fmt::Display for UhfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UhfError::SizeMismatch { source, target, maps } => write!(
                f,
                "matrix sizes {source} -> {target} need target/source = {maps} maps"
            ),
            UhfError::ComposeMismatch => write!(f, "composition endpoints differ"),
            UhfError::NonAbsolutelyContinuous => {
                write!(f, "non-absolutely-continuous pushforward (zero-slope piece)")
            }
            UhfError::UnsupportedCube(p) => write!(f, "cube dimension {p} not supported"),
            UhfError::NotLebesgue => write!(f, "trace is not in Lebesgue form; normalize first"),
            UhfError::Resource { needed, cap } => {
                write!(f, "subdivision fineness {needed} exceeds cap {cap}")
            }
            UhfError::NoPerfectMatching => write!(f, "no perfect matching (premise violated)"),
            UhfError::NotInDivisorSet(n) => {
                write!(f, "{n} does not divide the supernatural number")
            }
            UhfError::BadPermutation => write!(f, "permutation tag is not a permutation"),
            UhfError::Paffine(e) => write!(f, "{e}"),
            UhfError::Other(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for UhfError {}

impl From<PaffineError> for UhfError {
    fn from(e: PaffineError) -> Self {
        UhfError::Paffine(e)
    }
}

/// A diagonal embedding between cube algebras: `k` maps from the target
/// interval into the source cube plus a block permutation tag. `perm[i]` is
/// the position of the `i`-th diagonal block after the conjugation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalMorphism {
    pub source: CubeAlgebra,
    pub target: CubeAlgebra,
    pub maps: Vec<PiecewiseAffineMap>,
    pub perm: Vec<usize>,
}

impl DiagonalMorphism {
    /// Structure check: block count, map dimensions, permutation.
    pub fn check(&self) -> Result<(), UhfError> {
        if self.target.p != 1 {
            return Err(UhfError::UnsupportedCube(self.target.p));
        }
        let k = self.maps.len() as u64;
        if k == 0 || self.source.n * k != self.target.n {
            return Err(UhfError::SizeMismatch {
                source: self.source.n,
                target: self.target.n,
                maps: self.maps.len(),
            });
        }
        for m in &self.maps {
            if m.dim() != self.source.p as usize {
                return Err(UhfError::UnsupportedCube(self.source.p));
            }
        }
        if self.perm.len() != self.maps.len() {
            return Err(UhfError::BadPermutation);
        }
        let mut seen = alloc::vec![false; self.perm.len()];
        for &p in &self.perm {
            if p >= seen.len() || seen[p] {
                return Err(UhfError::BadPermutation);
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// The identity morphism on an algebra over the interval.
    pub fn identity(alg: &CubeAlgebra) -> Self {
        DiagonalMorphism {
            source: alg.clone(),
            target: alg.clone(),
            maps: alloc::vec![PiecewiseAffineMap::identity()],
            perm: alloc::vec![0],
        }
    }

    /// Map tuple in effective (post-conjugation) block order.
    pub fn effective_maps(&self) -> Vec<&PiecewiseAffineMap> {
        let mut out: Vec<Option<&PiecewiseAffineMap>> = alloc::vec![None; self.maps.len()];
        for (i, m) in self.maps.iter().enumerate() {
            out[self.perm[i]] = Some(m);
        }
        out.into_iter().map(|m| m.expect("permutation total")).collect()
    }

    /// Largest absolute slope over the tuple.
    pub fn max_abs_slope(&self) -> Rat {
        let mut best = Rat::zero();
        for m in &self.maps {
            let s = m.max_abs_slope();
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Largest image diameter over the tuple.
    pub fn max_image_diameter(&self) -> Rat {
        let mut best = Rat::zero();
        for m in &self.maps {
            let d = m.image_diameter();
            if d > best {
                best = d;
            }
        }
        best
    }
}

/// The subdivision maps `r_c(x) = (x + c - 1) / m` for `c = 1, …, m`: `m`
/// affine maps of slope `1/m` with images tiling `[0,1]`.
pub fn subdivision_maps(m: u64) -> Vec<PiecewiseAffineMap> {
    assert!(m >= 1);
    (1..=m)
        .map(|c| {
            PiecewiseAffineMap::affine(
                Rat::new((1).into(), (m as i64).into()),
                Rat::new(((c - 1) as i64).into(), (m as i64).into()),
            )
            .expect("subdivision map stays in the cube")
        })
        .collect()
}

/// The subdivision embedding of an interval algebra: block-diagonal
/// composition with the `m` subdivision maps.
pub fn subdivision_embedding(source: &CubeAlgebra, m: u64) -> Result<DiagonalMorphism, UhfError> {
    if source.p != 1 {
        return Err(UhfError::UnsupportedCube(source.p));
    }
    if source.trace != TraceTag::Lebesgue {
        return Err(UhfError::NotLebesgue);
    }
    let dm = DiagonalMorphism {
        source: source.clone(),
        target: CubeAlgebra::lebesgue(1, source.n * m),
        maps: subdivision_maps(m),
        perm: (0..m as usize).collect(),
    };
    dm.check()?;
    Ok(dm)
}

/// The block-repeat embedding `f ↦ diag[f, …, f]` into `r` copies.
pub fn block_repeat(source: &CubeAlgebra, r: u64) -> Result<DiagonalMorphism, UhfError> {
    if source.p != 1 {
        return Err(UhfError::UnsupportedCube(source.p));
    }
    let dm = DiagonalMorphism {
        source: source.clone(),
        target: CubeAlgebra { p: 1, n: source.n * r, trace: source.trace.clone() },
        maps: (0..r).map(|_| PiecewiseAffineMap::identity()).collect(),
        perm: (0..r as usize).collect(),
    };
    dm.check()?;
    Ok(dm)
}

/// A piecewise-constant nonnegative density on `[0,1]`: consecutive cells
/// with exact rational values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseConstantDensity {
    /// `(lo, hi, value)` cells covering `[0,1]` in order.
    pub cells: Vec<(Rat, Rat, Rat)>,
}

impl PiecewiseConstantDensity {
    pub fn is_identically_one(&self) -> bool {
        self.cells.iter().all(|(_, _, v)| v.is_one())
    }
}

/// The averaged pushforward density of the map tuple against Lebesgue
/// measure: each affine piece of slope `s` spreads mass `1/(k·|s|)` per unit
/// length over its image. Trace preservation is density ≡ 1.
pub fn pushforward_density(dm: &DiagonalMorphism) -> Result<PiecewiseConstantDensity, UhfError> {
    dm.check()?;
    if dm.source.p != 1 {
        return Err(UhfError::UnsupportedCube(dm.source.p));
    }
    if dm.source.trace != TraceTag::Lebesgue || dm.target.trace != TraceTag::Lebesgue {
        return Err(UhfError::NotLebesgue);
    }
    let k = rat_int(dm.maps.len() as i64);
    // Events: (image_lo, image_hi, weight).
    let mut events: Vec<(Rat, Rat, Rat)> = Vec::new();
    let mut cuts: Vec<Rat> = alloc::vec![Rat::zero(), Rat::one()];
    for map in &dm.maps {
        for piece in map.pieces() {
            let (a, b) = (&piece.coeffs[0].0, &piece.coeffs[0].1);
            if a.is_zero() {
                return Err(UhfError::NonAbsolutelyContinuous);
            }
            let y0 = a * &piece.lo + b;
            let y1 = a * &piece.hi + b;
            let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
            let weight = (&k * a.abs()).recip();
            cuts.push(lo.clone());
            cuts.push(hi.clone());
            events.push((lo, hi, weight));
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut cells = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mid = (lo + hi) / rat_int(2);
        let mut value = Rat::zero();
        for (elo, ehi, weight) in &events {
            if mid > *elo && mid < *ehi {
                value += weight;
            }
        }
        cells.push((lo.clone(), hi.clone(), value));
    }
    Ok(PiecewiseConstantDensity { cells })
}

/// Whether the morphism preserves the Lebesgue trace exactly.
pub fn is_trace_preserving(dm: &DiagonalMorphism) -> Result<bool, UhfError> {
    Ok(pushforward_density(dm)?.is_identically_one())
}

/// Composition of diagonal embeddings: for `inner: A → B` and
/// `outer: B → C`, the block at composite index `(b, a)` is
/// `t_inner[a] ∘ t_outer[b]`, and the permutation tags compose blockwise.
pub fn compose_diagonal(
    outer: &DiagonalMorphism,
    inner: &DiagonalMorphism,
) -> Result<DiagonalMorphism, UhfError> {
    inner.check()?;
    outer.check()?;
    if inner.target != outer.source {
        return Err(UhfError::ComposeMismatch);
    }
    if outer.source.p != 1 {
        return Err(UhfError::UnsupportedCube(outer.source.p));
    }
    let k_in = inner.maps.len();
    let mut maps = Vec::with_capacity(k_in * outer.maps.len());
    let mut perm = Vec::with_capacity(k_in * outer.maps.len());
    for (b, outer_map) in outer.maps.iter().enumerate() {
        for (a, inner_map) in inner.maps.iter().enumerate() {
            maps.push(inner_map.compose_after(outer_map)?);
            perm.push(outer.perm[b] * k_in + inner.perm[a]);
        }
    }
    let dm = DiagonalMorphism {
        source: inner.source.clone(),
        target: outer.target.clone(),
        maps,
        perm,
    };
    dm.check()?;
    Ok(dm)
}

/// Normalizes an object to Lebesgue form: returns the Lebesgue-traced
/// descriptor and the conjugating morphism `f ↦ f ∘ α` from the original
/// object onto it (the identity when already in Lebesgue form).
pub fn normalize_trace(alg: &CubeAlgebra) -> Result<(CubeAlgebra, DiagonalMorphism), UhfError> {
    match &alg.trace {
        TraceTag::Lebesgue => {
            let target = alg.clone();
            Ok((target.clone(), DiagonalMorphism::identity(&target)))
        }
        TraceTag::PushforwardBy(alpha) => {
            if alg.p != 1 {
                return Err(UhfError::UnsupportedCube(alg.p));
            }
            // The homeomorphism must be an increasing bijection of [0,1].
            let ends_ok = alpha.eval(&Rat::zero()) == alloc::vec![Rat::zero()]
                && alpha.eval(&Rat::one()) == alloc::vec![Rat::one()];
            let increasing = alpha
                .pieces()
                .iter()
                .all(|p| p.coeffs[0].0 > Rat::zero());
            if alpha.dim() != 1 || !ends_ok || !increasing {
                return Err(UhfError::Other(
                    "trace descriptor is not an increasing homeomorphism of [0,1]".to_string(),
                ));
            }
            let target = CubeAlgebra::lebesgue(alg.p, alg.n);
            let dm = DiagonalMorphism {
                source: alg.clone(),
                target: target.clone(),
                maps: alloc::vec![alpha.clone()],
                perm: alloc::vec![0],
            };
            dm.check()?;
            Ok((target, dm))
        }
    }
}

/// Aligned sup-distance of two morphisms with common endpoints: the largest
/// sup-norm between effective blocks at equal positions.
pub fn aligned_distance(a: &DiagonalMorphism, b: &DiagonalMorphism) -> Result<Rat, UhfError> {
    a.check()?;
    b.check()?;
    if a.maps.len() != b.maps.len() {
        return Err(UhfError::ComposeMismatch);
    }
    let (ea, eb) = (a.effective_maps(), b.effective_maps());
    let mut best = Rat::zero();
    for (ma, mb) in ea.iter().zip(&eb) {
        let d = ma.sup_distance(mb)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn subdivision_maps_tile_the_interval() {
        let maps = subdivision_maps(2);
        assert_eq!(maps[0].eval(&Rat::one()), alloc::vec![rat(1, 2)]);
        assert_eq!(maps[1].eval(&Rat::zero()), alloc::vec![rat(1, 2)]);
        let m4 = subdivision_maps(4);
        for m in &m4 {
            assert_eq!(m.image_diameter(), rat(1, 4));
        }
        assert_eq!(subdivision_maps(1)[0], PiecewiseAffineMap::identity());
    }

    #[test]
    fn subdivision_embedding_preserves_trace() {
        let a = CubeAlgebra::lebesgue(1, 1);
        for m in [1u64, 2, 3, 4] {
            let dm = subdivision_embedding(&a, m).unwrap();
            let density = pushforward_density(&dm).unwrap();
            assert!(density.is_identically_one(), "m = {m}");
        }
    }

    #[test]
    fn single_identity_map_is_trace_preserving() {
        let dm = DiagonalMorphism::identity(&CubeAlgebra::lebesgue(1, 2));
        assert!(is_trace_preserving(&dm).unwrap());
    }

    #[test]
    fn doubled_half_map_is_not_preserving() {
        // Two copies of x/2: density 2 on [0,1/2], 0 above.
        let half = PiecewiseAffineMap::affine(rat(1, 2), Rat::zero()).unwrap();
        let dm = DiagonalMorphism {
            source: CubeAlgebra::lebesgue(1, 1),
            target: CubeAlgebra::lebesgue(1, 2),
            maps: alloc::vec![half.clone(), half],
            perm: alloc::vec![0, 1],
        };
        let density = pushforward_density(&dm).unwrap();
        assert!(!density.is_identically_one());
        let two = rat_int(2);
        let zero = Rat::zero();
        for (lo, _, v) in &density.cells {
            if *lo < rat(1, 2) {
                assert_eq!(v, &two);
            } else {
                assert_eq!(v, &zero);
            }
        }
    }

    #[test]
    fn zero_slope_piece_is_singular() {
        let hat = super::super::paffine::step_hat(0, 2, 2).unwrap(); // constant 1
        let dm = DiagonalMorphism {
            source: CubeAlgebra::lebesgue(1, 1),
            target: CubeAlgebra::lebesgue(1, 1),
            maps: alloc::vec![hat],
            perm: alloc::vec![0],
        };
        assert!(matches!(pushforward_density(&dm), Err(UhfError::NonAbsolutelyContinuous)));
    }

    #[test]
    fn compose_with_identity_keeps_maps() {
        let a = CubeAlgebra::lebesgue(1, 1);
        let sub = subdivision_embedding(&a, 3).unwrap();
        let id = DiagonalMorphism::identity(&a);
        let comp = compose_diagonal(&sub, &id).unwrap();
        assert_eq!(comp.maps, sub.maps);
        assert_eq!(comp.perm, sub.perm);
    }

    #[test]
    fn composed_subdivisions_are_quarters_up_to_block_order() {
        let a = CubeAlgebra::lebesgue(1, 1);
        let s2 = subdivision_embedding(&a, 2).unwrap();
        let s2b = subdivision_embedding(&CubeAlgebra::lebesgue(1, 2), 2).unwrap();
        let comp = compose_diagonal(&s2b, &s2).unwrap();
        assert_eq!(comp.maps.len(), 4);
        let mut images: Vec<Rat> = comp.maps.iter().map(|m| m.eval(&Rat::zero())[0].clone()).collect();
        images.sort();
        assert_eq!(images, alloc::vec![Rat::zero(), rat(1, 4), rat(1, 2), rat(3, 4)]);
        for m in &comp.maps {
            assert_eq!(m.image_diameter(), rat(1, 4));
        }
        assert!(is_trace_preserving(&comp).unwrap());
    }

    #[test]
    fn trace_preservation_composes() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m1 = 1 + rng.gen_range(0..3u64);
            let m2 = 1 + rng.gen_range(0..3u64);
            let a = CubeAlgebra::lebesgue(1, 1);
            let s1 = subdivision_embedding(&a, m1).unwrap();
            let s2 = subdivision_embedding(&s1.target, m2).unwrap();
            let comp = compose_diagonal(&s2, &s1).unwrap();
            assert!(is_trace_preserving(&comp).unwrap());
        }
    }

    #[test]
    fn normalize_pushforward_trace() {
        // alpha: a two-piece increasing homeomorphism.
        use super::super::paffine::AffinePiece;
        let alpha = PiecewiseAffineMap::new(
            1,
            alloc::vec![
                AffinePiece {
                    lo: Rat::zero(),
                    hi: rat(1, 2),
                    coeffs: alloc::vec![(rat(1, 2), Rat::zero())],
                },
                AffinePiece {
                    lo: rat(1, 2),
                    hi: Rat::one(),
                    coeffs: alloc::vec![(rat(3, 2), -rat(1, 2))],
                },
            ],
        )
        .unwrap();
        let alg = CubeAlgebra { p: 1, n: 2, trace: TraceTag::PushforwardBy(alpha) };
        let (leb, conj) = normalize_trace(&alg).unwrap();
        assert_eq!(leb.trace, TraceTag::Lebesgue);
        assert_eq!(conj.maps.len(), 1);
        conj.check().unwrap();
    }

    #[test]
    fn effective_order_follows_permutation() {
        let maps = subdivision_maps(3);
        let dm = DiagonalMorphism {
            source: CubeAlgebra::lebesgue(1, 1),
            target: CubeAlgebra::lebesgue(1, 3),
            maps: maps.clone(),
            perm: alloc::vec![2, 0, 1],
        };
        let eff = dm.effective_maps();
        assert_eq!(eff[2], &maps[0]);
        assert_eq!(eff[0], &maps[1]);
        assert_eq!(eff[1], &maps[2]);
    }
}
