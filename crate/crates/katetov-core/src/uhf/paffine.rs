//! Piecewise-affine maps from `[0,1]` into `[0,1]^d` (`d` = 1 or 2) with
//! exact rational breakpoints and coefficients, plus exact composition,
//! sup-norm of differences, and the trapezoid test functions.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::rat::{fmt_rat, rat_int, Rat};

/// One affine piece on `[lo, hi]`; `coeffs[c] = (slope, intercept)` per
/// output coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub lo: Rat,
    pub hi: Rat,
    pub coeffs: Vec<(Rat, Rat)>,
}

impl AffinePiece {
    fn eval(&self, x: &Rat) -> Vec<Rat> {
        self.coeffs.iter().map(|(a, b)| a * x + b).collect()
    }
}

/// A continuous piecewise-affine map `[0,1] → [0,1]^d` with rational data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffineMap {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaffineError(pub String);

impl fmt::Display for PaffineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid piecewise-affine map: {}", self.0)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PaffineError {}

impl PiecewiseAffineMap {
    /// Validates the partition (covers `[0,1]`, increasing), continuity at
    /// junctions, and that the image stays inside the cube.
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self, PaffineError> {
        if dim == 0 || dim > 2 {
            return Err(PaffineError("output dimension must be 1 or 2".into()));
        }
        if pieces.is_empty() {
            return Err(PaffineError("no pieces".into()));
        }
        if !pieces[0].lo.is_zero() || pieces.last().unwrap().hi != Rat::one() {
            return Err(PaffineError("pieces must cover [0,1]".into()));
        }
        for (k, piece) in pieces.iter().enumerate() {
            if piece.lo >= piece.hi {
                return Err(PaffineError("empty or reversed piece".into()));
            }
            if piece.coeffs.len() != dim {
                return Err(PaffineError("coefficient arity mismatch".into()));
            }
            for x in [&piece.lo, &piece.hi] {
                for v in piece.eval(x) {
                    if v.is_negative() || v > Rat::one() {
                        return Err(PaffineError(alloc::format!(
                            "image leaves the cube at {}",
                            fmt_rat(x)
                        )));
                    }
                }
            }
            if k + 1 < pieces.len() {
                let next = &pieces[k + 1];
                if piece.hi != next.lo {
                    return Err(PaffineError("partition has a gap".into()));
                }
                if piece.eval(&piece.hi) != next.eval(&next.lo) {
                    return Err(PaffineError(alloc::format!(
                        "discontinuity at {}",
                        fmt_rat(&piece.hi)
                    )));
                }
            }
        }
        Ok(PiecewiseAffineMap { dim, pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// The identity on `[0,1]`.
    pub fn identity() -> Self {
        PiecewiseAffineMap {
            dim: 1,
            pieces: alloc::vec![AffinePiece {
                lo: Rat::zero(),
                hi: Rat::one(),
                coeffs: alloc::vec![(Rat::one(), Rat::zero())],
            }],
        }
    }

    /// A single affine piece `x ↦ a·x + b` on all of `[0,1]` (image checked).
    pub fn affine(a: Rat, b: Rat) -> Result<Self, PaffineError> {
        PiecewiseAffineMap::new(
            1,
            alloc::vec![AffinePiece { lo: Rat::zero(), hi: Rat::one(), coeffs: alloc::vec![(a, b)] }],
        )
    }

    pub fn eval(&self, x: &Rat) -> Vec<Rat> {
        let piece = self
            .pieces
            .iter()
            .find(|p| *x >= p.lo && *x <= p.hi)
            .unwrap_or_else(|| self.pieces.last().unwrap());
        piece.eval(x)
    }

    /// All breakpoints, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut out = alloc::vec![Rat::zero()];
        for p in &self.pieces {
            out.push(p.hi.clone());
        }
        out
    }

    /// Componentwise image bounds `(min, max)` per output coordinate;
    /// affine pieces attain extremes at endpoints, so this is exact.
    pub fn image_bounds(&self) -> Vec<(Rat, Rat)> {
        let mut bounds: Vec<(Rat, Rat)> = Vec::new();
        for piece in &self.pieces {
            for x in [&piece.lo, &piece.hi] {
                let v = piece.eval(x);
                if bounds.is_empty() {
                    bounds = v.iter().map(|q| (q.clone(), q.clone())).collect();
                } else {
                    for (c, q) in v.iter().enumerate() {
                        if *q < bounds[c].0 {
                            bounds[c].0 = q.clone();
                        }
                        if *q > bounds[c].1 {
                            bounds[c].1 = q.clone();
                        }
                    }
                }
            }
        }
        bounds
    }

    /// Diameter of the image in the max metric of the cube.
    pub fn image_diameter(&self) -> Rat {
        self.image_bounds()
            .into_iter()
            .map(|(lo, hi)| hi - lo)
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// The largest absolute slope over all pieces and coordinates.
    pub fn max_abs_slope(&self) -> Rat {
        let mut best = Rat::zero();
        for p in &self.pieces {
            for (a, _) in &p.coeffs {
                let abs = a.abs();
                if abs > best {
                    best = abs;
                }
            }
        }
        best
    }

    /// Exact composition `self ∘ outer` where `outer: [0,1] → [0,1]` is
    /// one-dimensional: the partition of `outer` is refined at the preimages
    /// of the breakpoints of `self`.
    pub fn compose_after(&self, outer: &PiecewiseAffineMap) -> Result<Self, PaffineError> {
        if outer.dim != 1 {
            return Err(PaffineError("outer map must land in [0,1]".into()));
        }
        let inner_breaks = self.breakpoints();
        let mut cuts: Vec<Rat> = outer.breakpoints();
        for piece in &outer.pieces {
            let (a, b) = (&piece.coeffs[0].0, &piece.coeffs[0].1);
            if a.is_zero() {
                continue;
            }
            for w in &inner_breaks {
                let x = (w - b) / a;
                if x > piece.lo && x < piece.hi {
                    cuts.push(x);
                }
            }
        }
        cuts.sort();
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0].clone(), w[1].clone());
            let mid = (&lo + &hi) / rat_int(2);
            let op = outer
                .pieces
                .iter()
                .find(|p| mid >= p.lo && mid <= p.hi)
                .ok_or_else(|| PaffineError("outer partition gap".into()))?;
            let (oa, ob) = (&op.coeffs[0].0, &op.coeffs[0].1);
            let y_mid = oa * &mid + ob;
            let ip = self
                .pieces
                .iter()
                .find(|p| y_mid >= p.lo && y_mid <= p.hi)
                .ok_or_else(|| PaffineError("inner partition gap".into()))?;
            let coeffs = ip
                .coeffs
                .iter()
                .map(|(ia, ib)| (ia * oa, ia * ob + ib))
                .collect();
            pieces.push(AffinePiece { lo, hi, coeffs });
        }
        PiecewiseAffineMap::new(self.dim, pieces)
    }

    /// Exact sup-norm of `self - other` in the max metric: the difference is
    /// affine between the merged breakpoints, so the maximum is attained at
    /// a breakpoint.
    pub fn sup_distance(&self, other: &PiecewiseAffineMap) -> Result<Rat, PaffineError> {
        if self.dim != other.dim {
            return Err(PaffineError("dimension mismatch".into()));
        }
        let mut xs = self.breakpoints();
        xs.extend(other.breakpoints());
        xs.sort();
        xs.dedup();
        let mut best = Rat::zero();
        for x in &xs {
            let (u, v) = (self.eval(x), other.eval(x));
            for c in 0..self.dim {
                let d = (&u[c] - &v[c]).abs();
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }
}

/// The trapezoid test function with plateau `[c/N, d/N]`, ramps of slope
/// `±N`, and support `[(c-1)/N, (d+1)/N]` clipped to `[0,1]`.
pub fn step_hat(c: u64, d: u64, n: u64) -> Result<PiecewiseAffineMap, PaffineError> {
    if !(c < d && d <= n) || n == 0 {
        return Err(PaffineError("need 0 <= c < d <= N".into()));
    }
    let nq = rat_int(n as i64);
    let cq = rat_int(c as i64);
    let dq = rat_int(d as i64);
    let ramp_lo = (&cq - &Rat::one()) / &nq;
    let plateau_lo = &cq / &nq;
    let plateau_hi = &dq / &nq;
    let ramp_hi = (&dq + &Rat::one()) / &nq;
    let mut pieces = Vec::new();
    let zero = Rat::zero();
    let one = Rat::one();
    // Left of the support.
    if ramp_lo > zero {
        pieces.push(AffinePiece {
            lo: zero.clone(),
            hi: ramp_lo.clone(),
            coeffs: alloc::vec![(Rat::zero(), Rat::zero())],
        });
    }
    // Rising ramp value N t - c + 1 (clipped at the cube boundary).
    if plateau_lo > zero {
        let lo = if ramp_lo > zero { ramp_lo } else { zero.clone() };
        pieces.push(AffinePiece {
            lo,
            hi: plateau_lo.clone(),
            coeffs: alloc::vec![(nq.clone(), Rat::one() - &cq)],
        });
    }
    // Plateau at 1.
    pieces.push(AffinePiece {
        lo: if plateau_lo > zero { plateau_lo } else { zero },
        hi: plateau_hi.clone(),
        coeffs: alloc::vec![(Rat::zero(), Rat::one())],
    });
    // Falling ramp value -N t + d + 1.
    if plateau_hi < one {
        let hi = if ramp_hi < one { ramp_hi.clone() } else { one.clone() };
        pieces.push(AffinePiece {
            lo: plateau_hi,
            hi,
            coeffs: alloc::vec![(-nq, &dq + Rat::one())],
        });
    }
    // Right of the support.
    if ramp_hi < one {
        pieces.push(AffinePiece {
            lo: ramp_hi,
            hi: one,
            coeffs: alloc::vec![(Rat::zero(), Rat::zero())],
        });
    }
    PiecewiseAffineMap::new(1, pieces)
}

/// Exact integral of a one-dimensional piecewise-affine function over
/// `[0,1]` (trapezoid rule per piece is exact for affine pieces).
pub fn integral(f: &PiecewiseAffineMap) -> Result<Rat, PaffineError> {
    if f.dim() != 1 {
        return Err(PaffineError("integral needs a one-dimensional map".into()));
    }
    let mut total = Rat::zero();
    for p in f.pieces() {
        let width = &p.hi - &p.lo;
        let val = (&p.eval(&p.lo)[0] + &p.eval(&p.hi)[0]) / rat_int(2);
        total += width * val;
    }
    Ok(total)
}
