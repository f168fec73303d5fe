//! Seeded generators of trace-preserving diagonal embeddings, used by
//! property sweeps and the batch interface.

use alloc::vec::Vec;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rat::Rat;

use super::morphism::{subdivision_maps, CubeAlgebra, DiagonalMorphism};
use super::paffine::{AffinePiece, PiecewiseAffineMap};

/// A random trace-preserving diagonal embedding out of `source` with
/// fineness `m`: the subdivision maps, each optionally reflected (slope
/// `-1/m` onto the same image), in shuffled block order with a random
/// permutation tag. Reflections and shuffles leave the pushforward density
/// untouched, so the result is trace-preserving by construction.
pub fn random_subdivision_morphism(
    rng: &mut ChaCha8Rng,
    source: &CubeAlgebra,
    m: u64,
) -> DiagonalMorphism {
    let mut maps = subdivision_maps(m);
    for map in maps.iter_mut() {
        if rng.gen_bool(0.5) {
            *map = reflect(map);
        }
    }
    maps.shuffle(rng);
    let mut perm: Vec<usize> = (0..m as usize).collect();
    perm.shuffle(rng);
    let dm = DiagonalMorphism {
        source: source.clone(),
        target: CubeAlgebra::lebesgue(1, source.n * m),
        maps,
        perm,
    };
    dm.check().expect("sampled morphism well-formed");
    dm
}

/// Reflects an affine interval map onto the same image: `x ↦ a(1-x) + b`.
fn reflect(map: &PiecewiseAffineMap) -> PiecewiseAffineMap {
    let pieces = map
        .pieces()
        .iter()
        .rev()
        .map(|p| {
            let (a, b) = (&p.coeffs[0].0, &p.coeffs[0].1);
            AffinePiece {
                lo: Rat::one() - &p.hi,
                hi: Rat::one() - &p.lo,
                coeffs: alloc::vec![(-a.clone(), a + b)],
            }
        })
        .collect();
    PiecewiseAffineMap::new(1, pieces).expect("reflection stays in the cube")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uhf::morphism::is_trace_preserving;
    use rand::SeedableRng;

    #[test]
    fn sampled_morphisms_preserve_the_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n0 = 1u64 << rng.gen_range(0..2);
            let m = 1u64 << rng.gen_range(0..3);
            let dm = random_subdivision_morphism(&mut rng, &CubeAlgebra::lebesgue(1, n0), m);
            assert!(is_trace_preserving(&dm).unwrap());
        }
    }

    #[test]
    fn reflection_keeps_the_image() {
        let maps = subdivision_maps(4);
        let r = reflect(&maps[1]);
        assert_eq!(r.image_bounds(), maps[1].image_bounds());
        assert_eq!(r.eval(&Rat::zero()), maps[1].eval(&Rat::one()));
    }
}
