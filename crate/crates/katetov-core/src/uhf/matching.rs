//! Hall matching of small-image map tuples: pair the blocks of two
//! trace-preserving diagonal tuples whose images intersect, so that matched
//! maps are uniformly close.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::rat::{rat_int, Rat};

use super::morphism::{is_trace_preserving, CubeAlgebra, DiagonalMorphism, UhfError};
use super::paffine::PiecewiseAffineMap;

/// Closed image interval of a one-dimensional map.
fn image(map: &PiecewiseAffineMap) -> (Rat, Rat) {
    let b = map.image_bounds();
    (b[0].0.clone(), b[0].1.clone())
}

fn intervals_intersect(a: &(Rat, Rat), b: &(Rat, Rat)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// The neighbor sets of the intersection graph: `S[l]` lists the blocks of
/// the second tuple whose image meets the image of `t_{l,1}`.
pub fn neighbor_sets(
    tuple1: &[PiecewiseAffineMap],
    tuple2: &[PiecewiseAffineMap],
) -> Vec<Vec<usize>> {
    let im2: Vec<(Rat, Rat)> = tuple2.iter().map(image).collect();
    tuple1
        .iter()
        .map(|t| {
            let im1 = image(t);
            (0..tuple2.len()).filter(|&l| intervals_intersect(&im1, &im2[l])).collect()
        })
        .collect()
}

/// Exact Lebesgue measure of a union of closed intervals.
pub fn union_measure(intervals: &[(Rat, Rat)]) -> Rat {
    let mut sorted: Vec<(Rat, Rat)> = intervals.to_vec();
    sorted.sort();
    let mut total = Rat::zero();
    let mut current: Option<(Rat, Rat)> = None;
    for (lo, hi) in sorted {
        match current.take() {
            None => current = Some((lo, hi)),
            Some((clo, chi)) => {
                if lo <= chi {
                    current = Some((clo, if hi > chi { hi } else { chi }));
                } else {
                    total += &chi - &clo;
                    current = Some((lo, hi));
                }
            }
        }
    }
    if let Some((clo, chi)) = current {
        total += chi - clo;
    }
    total
}

/// The marriage inequality in measure form for a block subset `F`:
/// `|∪_{l∈F} S_l| ≥ k · λ(∪_{l∈F} Im t_{l,1}) ≥ |F|` for trace-preserving
/// tuples. Returns `(neighbor count, k·measure)` for inspection.
pub fn marriage_bound(
    tuple1: &[PiecewiseAffineMap],
    tuple2: &[PiecewiseAffineMap],
    subset: &[usize],
) -> (usize, Rat) {
    let neighbors = neighbor_sets(tuple1, tuple2);
    let mut union: Vec<usize> = Vec::new();
    for &l in subset {
        for &n in &neighbors[l] {
            if !union.contains(&n) {
                union.push(n);
            }
        }
    }
    let images: Vec<(Rat, Rat)> = subset.iter().map(|&l| image(&tuple1[l])).collect();
    let measure = union_measure(&images) * rat_int(tuple1.len() as i64);
    (union.len(), measure)
}

fn augment(
    adj: &[Vec<usize>],
    l: usize,
    matched_right: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        if matched_right[r].is_none()
            || augment(adj, matched_right[r].unwrap(), matched_right, visited)
        {
            matched_right[r] = Some(l);
            return true;
        }
    }
    false
}

/// Finds a permutation pairing the blocks of two tuples so that matched
/// maps are within `2·delta` in sup norm.
///
/// Preconditions (checked): equal length, every image of diameter less than
/// `delta`, and both tuples trace-preserving as diagonal data. Under these
/// the intersection graph satisfies the marriage condition, so a perfect
/// matching exists; intersecting images of diameter `< delta` put the
/// matched maps within `2·delta` everywhere, and the bound is re-verified
/// exactly on the merged breakpoint grid.
pub fn hall_match(
    tuple1: &[PiecewiseAffineMap],
    tuple2: &[PiecewiseAffineMap],
    delta: &Rat,
) -> Result<Vec<usize>, UhfError> {
    let k = tuple1.len();
    if k == 0 || tuple2.len() != k {
        return Err(UhfError::SizeMismatch {
            source: k as u64,
            target: tuple2.len() as u64,
            maps: k,
        });
    }
    for t in tuple1.iter().chain(tuple2) {
        if t.dim() != 1 {
            return Err(UhfError::UnsupportedCube(2));
        }
        if t.image_diameter() >= *delta {
            return Err(UhfError::Other(alloc::format!(
                "image diameter {} not below delta {}",
                crate::rat::fmt_rat(&t.image_diameter()),
                crate::rat::fmt_rat(delta)
            )));
        }
    }
    for tuple in [tuple1, tuple2] {
        let dm = DiagonalMorphism {
            source: CubeAlgebra::lebesgue(1, 1),
            target: CubeAlgebra::lebesgue(1, k as u64),
            maps: tuple.to_vec(),
            perm: (0..k).collect(),
        };
        if !is_trace_preserving(&dm)? {
            return Err(UhfError::Other("tuple is not trace-preserving".into()));
        }
    }
    let mut adj = neighbor_sets(tuple1, tuple2);
    // Prefer the closest compatible block so that identical tuples match
    // identically; any perfect matching satisfies the bound regardless.
    for (l, row) in adj.iter_mut().enumerate() {
        let mut keyed: Vec<(Rat, usize)> = row
            .iter()
            .map(|&r| (tuple1[l].sup_distance(&tuple2[r]).expect("same dim"), r))
            .collect();
        keyed.sort();
        *row = keyed.into_iter().map(|(_, r)| r).collect();
    }
    let mut matched_right: Vec<Option<usize>> = alloc::vec![None; k];
    for l in 0..k {
        let mut visited = alloc::vec![false; k];
        if !augment(&adj, l, &mut matched_right, &mut visited) {
            return Err(UhfError::NoPerfectMatching);
        }
    }
    let mut sigma = alloc::vec![0usize; k];
    for (r, l) in matched_right.iter().enumerate() {
        sigma[l.expect("perfect matching")] = r;
    }
    // Exact verification of the sup-norm bound.
    let two_delta = delta * rat_int(2);
    for l in 0..k {
        let d = tuple1[l].sup_distance(&tuple2[sigma[l]])?;
        if d >= two_delta {
            return Err(UhfError::Other("matched pair exceeds the 2-delta bound".into()));
        }
    }
    Ok(sigma)
}
