//! Dyadic approximants of the square-filling curve: at level `l` the `4^l`
//! parameter intervals map onto the `4^l` dyadic squares of side `2^-l` in
//! curve order, with equal cell masses and edge-adjacent consecutive cells.
//! The continuous representative is the polyline through the cell centers.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rat::{rat, Rat};

use super::morphism::{CubeAlgebra, DiagonalMorphism, UhfError};
use super::paffine::{AffinePiece, PiecewiseAffineMap};

/// A level-`l` approximant: the ordered cell sequence plus the polyline.
#[derive(Clone, Debug)]
pub struct HilbertApproximant {
    pub level: u32,
    /// Cell coordinates `(x, y)` in `[0, 2^level)²`, in curve order.
    pub cells: Vec<(u64, u64)>,
    /// Continuous piecewise-affine representative into the square.
    pub map: PiecewiseAffineMap,
}

/// Curve index to cell coordinates, by quadrant reflection-rotation.
fn d2xy(level: u32, d: u64) -> (u64, u64) {
    let n = 1u64 << level;
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = d;
    let mut s = 1u64;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            core::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

/// Builds the level-`level` approximant (`level ≥ 1`).
pub fn hilbert_map(level: u32) -> Result<HilbertApproximant, UhfError> {
    if level == 0 || level > 8 {
        return Err(UhfError::Other("hilbert level must be between 1 and 8".into()));
    }
    let cell_count = 4u64.pow(level);
    let side = 1u64 << level;
    let cells: Vec<(u64, u64)> = (0..cell_count).map(|d| d2xy(level, d)).collect();
    // Consecutive cells share an edge; the d2xy recursion guarantees this,
    // and we reject any deviation outright.
    for w in cells.windows(2) {
        let dx = w[0].0.abs_diff(w[1].0);
        let dy = w[0].1.abs_diff(w[1].1);
        if dx + dy != 1 {
            return Err(UhfError::Other("cell sequence is not edge-adjacent".into()));
        }
    }
    let center = |c: (u64, u64)| -> (Rat, Rat) {
        (
            rat((2 * c.0 + 1) as i64, (2 * side) as i64),
            rat((2 * c.1 + 1) as i64, (2 * side) as i64),
        )
    };
    let corner_of = |c: (Rat, Rat)| -> (Rat, Rat) {
        let half = rat(1, 2);
        (
            if c.0 >= half { Rat::one() } else { Rat::zero() },
            if c.1 >= half { Rat::one() } else { Rat::zero() },
        )
    };
    // Vertices: the square corner nearest the first center, all centers,
    // then the corner nearest the last center; parameter breakpoints put
    // each interval's midpoint at its cell's center.
    let mut vertices: Vec<(Rat, Rat)> = Vec::with_capacity(cells.len() + 2);
    vertices.push(corner_of(center(cells[0])));
    for &c in &cells {
        vertices.push(center(c));
    }
    vertices.push(corner_of(center(*cells.last().unwrap())));
    let w = cell_count as i64;
    let mut breaks: Vec<Rat> = Vec::with_capacity(cells.len() + 2);
    breaks.push(Rat::zero());
    for k in 0..w {
        breaks.push(rat(2 * k + 1, 2 * w));
    }
    breaks.push(Rat::one());
    let mut pieces = Vec::with_capacity(vertices.len() - 1);
    for i in 0..vertices.len() - 1 {
        let (lo, hi) = (breaks[i].clone(), breaks[i + 1].clone());
        let width = &hi - &lo;
        let (p, q) = (&vertices[i], &vertices[i + 1]);
        let coeffs = alloc::vec![
            affine_through(&lo, &p.0, &width, &q.0),
            affine_through(&lo, &p.1, &width, &q.1),
        ];
        pieces.push(AffinePiece { lo, hi, coeffs });
    }
    let map = PiecewiseAffineMap::new(2, pieces)?;
    Ok(HilbertApproximant { level, cells, map })
}

fn affine_through(lo: &Rat, v_lo: &Rat, width: &Rat, v_hi: &Rat) -> (Rat, Rat) {
    let slope = (v_hi - v_lo) / width;
    let intercept = v_lo - &slope * lo;
    (slope, intercept)
}

impl HilbertApproximant {
    /// Mass assigned to each cell: the length of its parameter interval.
    pub fn cell_mass(&self) -> Rat {
        rat(1, self.cells.len() as i64)
    }

    /// Exact check that every cell receives the same mass `4^-level` (each
    /// cell appears exactly once in the order).
    pub fn masses_are_uniform(&self) -> bool {
        let side = 1u64 << self.level;
        let mut seen = alloc::vec![false; (side * side) as usize];
        for &(x, y) in &self.cells {
            let idx = (y * side + x) as usize;
            if x >= side || y >= side || seen[idx] {
                return false;
            }
            seen[idx] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// The interval algebra reduction: the morphism collapsing functions on
    /// the square onto functions on the interval by precomposition with the
    /// curve; trace preservation holds at cell resolution by the uniform
    /// masses.
    pub fn to_morphism(&self, n: u64) -> DiagonalMorphism {
        DiagonalMorphism {
            source: CubeAlgebra::lebesgue(2, n),
            target: CubeAlgebra::lebesgue(1, n),
            maps: alloc::vec![self.map.clone()],
            perm: alloc::vec![0],
        }
    }
}
