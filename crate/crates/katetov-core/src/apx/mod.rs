//! The algebra of approximate isometries between finite metric spaces.
//!
//! An approximate isometry from `X` to `Y` is a table `X × Y → [0, ∞]` that is
//! Katětov in each variable separately. It encodes a constraint on joint
//! embeddings of `X` and `Y` into a common space: the pair `(ι, η)` satisfies
//! the table `φ` when `d(ι(x), η(y)) ≤ φ(x, y)` everywhere. The module
//! implements composition (a min-plus product over the middle space),
//! adjoints, restriction and trivial extension, relaxation, amalgamation
//! (realizing a finite table exactly inside a quotient of the disjoint
//! union), totality defects, strict domination, and the rational strict
//! interpolant construction.
//!
//! Everything here is exact: the only numbers are [`ExtQ`] values.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::extq::ExtQ;
use crate::metric::{FiniteMetricSpace, PseudoMetricSpace, StructuralError};
use crate::rat::{rat_int, round_dyadic, Rat};

/// A separately-Katětov value table between two finite metric spaces.
///
/// Construction via [`ApproximateIsometry::from_parts`] checks dimensions
/// only; use [`ApproximateIsometry::is_valid`] to decide the Katětov
/// inequalities. All operations in this module preserve validity.
#[derive(Clone, PartialEq, Eq)]
pub struct ApproximateIsometry {
    source: FiniteMetricSpace,
    target: FiniteMetricSpace,
    values: Vec<Vec<ExtQ>>,
}

/// A pair of isometric injections of two spaces into a common ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointEmbeddingWitness {
    pub source: FiniteMetricSpace,
    pub target: FiniteMetricSpace,
    pub ambient: FiniteMetricSpace,
    /// Index map source → ambient.
    pub iota: Vec<usize>,
    /// Index map target → ambient.
    pub eta: Vec<usize>,
}

/// Errors from approximate-isometry operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApxError {
    /// Table dimensions do not match the point sets.
    Shape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    /// Composition requires the middle spaces to be the same space.
    MiddleMismatch { left_source: usize, right_target: usize },
    /// The operation needs a finite-valued table.
    NoFiniteAmalgam,
    /// `strict_interpolant` requires strict domination of the pair.
    NotStrictlyDominated,
    /// Subspace data does not embed isometrically.
    NotASubspace,
    Structural(StructuralError),
}

impl fmt::Display for ApxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApxError::Shape { rows, cols, expected_rows, expected_cols } => write!(
                f,
                "value table is {rows}x{cols}, expected {expected_rows}x{expected_cols}"
            ),
            ApxError::MiddleMismatch { left_source, right_target } => write!(
                f,
                "composition middle spaces differ ({right_target} vs {left_source} points)"
            ),
            ApxError::NoFiniteAmalgam => write!(f, "no finite amalgam: table is identically infinite"),
            ApxError::NotStrictlyDominated => write!(f, "interpolant requires psi strictly below phi"),
            ApxError::NotASubspace => write!(f, "inclusion maps are not isometric"),
            ApxError::Structural(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ApxError {}

/// Result of [`verify_perturbation`]: the hypothesis check is kept apart from
/// the inequality itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationOutcome {
    Holds,
    Fails,
    PreconditionFailed,
}

/// Decides whether `f` is a Katětov function on `space`, i.e. satisfies
/// `f(x) ≤ d(x,x') + f(x')` and `d(x,x') ≤ f(x) + f(x')` for all pairs.
pub fn is_katetov(space: &FiniteMetricSpace, f: &[ExtQ]) -> bool {
    if f.len() != space.len() {
        return false;
    }
    let n = space.len();
    for i in 0..n {
        for j in 0..n {
            let d = ExtQ::fin(space.dist(i, j).clone());
            if f[i] > &d + &f[j] {
                return false;
            }
            if d > &f[i] + &f[j] {
                return false;
            }
        }
    }
    true
}

impl ApproximateIsometry {
    /// Builds a table after checking its shape against the two spaces.
    pub fn from_parts(
        source: FiniteMetricSpace,
        target: FiniteMetricSpace,
        values: Vec<Vec<ExtQ>>,
    ) -> Result<Self, ApxError> {
        let (er, ec) = (source.len(), target.len());
        if values.len() != er || values.iter().any(|r| r.len() != ec) {
            let rows = values.len();
            let cols = values.first().map_or(0, |r| r.len());
            return Err(ApxError::Shape { rows, cols, expected_rows: er, expected_cols: ec });
        }
        Ok(ApproximateIsometry { source, target, values })
    }

    /// The identically infinite table, the weakest constraint.
    pub fn all_infinite(source: FiniteMetricSpace, target: FiniteMetricSpace) -> Self {
        let values = alloc::vec![alloc::vec![ExtQ::Inf; target.len()]; source.len()];
        ApproximateIsometry { source, target, values }
    }

    /// The constant table `c`.
    pub fn constant(source: FiniteMetricSpace, target: FiniteMetricSpace, c: ExtQ) -> Self {
        let values = alloc::vec![alloc::vec![c; target.len()]; source.len()];
        ApproximateIsometry { source, target, values }
    }

    /// `φ_id` on a space: the distance table itself, the constraint satisfied
    /// exactly by the identity joint embedding.
    pub fn identity(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        let values = (0..n)
            .map(|i| (0..n).map(|j| ExtQ::fin(space.dist(i, j).clone())).collect())
            .collect();
        ApproximateIsometry { source: space.clone(), target: space.clone(), values }
    }

    /// `φ_f` for an index map `f: source → target`: the table
    /// `(x, y) ↦ d(f(x), y)`. The map need not be isometric for the table to
    /// be built, but the table is separately Katětov whenever it is.
    pub fn of_map(
        source: &FiniteMetricSpace,
        target: &FiniteMetricSpace,
        map: &[usize],
    ) -> Result<Self, ApxError> {
        if map.len() != source.len() || map.iter().any(|&m| m >= target.len()) {
            return Err(ApxError::Structural(StructuralError::DimensionMismatch {
                points: source.len(),
                rows: map.len(),
            }));
        }
        let values = map
            .iter()
            .map(|&m| {
                (0..target.len()).map(|j| ExtQ::fin(target.dist(m, j).clone())).collect()
            })
            .collect();
        Ok(ApproximateIsometry { source: source.clone(), target: target.clone(), values })
    }

    pub fn source(&self) -> &FiniteMetricSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteMetricSpace {
        &self.target
    }

    pub fn value(&self, i: usize, j: usize) -> &ExtQ {
        &self.values[i][j]
    }

    pub fn values(&self) -> &[Vec<ExtQ>] {
        &self.values
    }

    pub fn is_all_infinite(&self) -> bool {
        self.values.iter().all(|r| r.iter().all(ExtQ::is_infinite))
    }

    pub fn is_finite_valued(&self) -> bool {
        self.values.iter().all(|r| r.iter().all(|v| !v.is_infinite()))
    }

    /// True when every row and every column is Katětov. For a nonempty table
    /// this forces all values finite or all infinite.
    pub fn is_valid(&self) -> bool {
        let (n, m) = (self.source.len(), self.target.len());
        for j in 0..m {
            let col: Vec<ExtQ> = (0..n).map(|i| self.values[i][j].clone()).collect();
            if !is_katetov(&self.source, &col) {
                return false;
            }
        }
        for i in 0..n {
            if !is_katetov(&self.target, &self.values[i]) {
                return false;
            }
        }
        true
    }

    /// `φ*`: the transposed table, an approximate isometry target → source.
    pub fn adjoint(&self) -> Self {
        let (n, m) = (self.source.len(), self.target.len());
        let values = (0..m).map(|j| (0..n).map(|i| self.values[i][j].clone()).collect()).collect();
        ApproximateIsometry { source: self.target.clone(), target: self.source.clone(), values }
    }

    /// Pointwise `≤` against another table over the same spaces.
    pub fn le(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(r, s)| r.iter().zip(s).all(|(a, b)| a <= b))
    }

    /// Pointwise relaxation `φ + ε` (`ε ≥ 0`).
    pub fn relax(&self, eps: &Rat) -> Self {
        assert!(*eps >= Rat::zero(), "relaxation must be nonnegative");
        let e = ExtQ::fin(eps.clone());
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|v| v + &e).collect())
            .collect();
        ApproximateIsometry { source: self.source.clone(), target: self.target.clone(), values }
    }
}

/// The table `(x, y) ↦ d(ι(x), η(y))` of a joint embedding; this is always a
/// valid approximate isometry, and every finite-valued one arises this way.
pub fn from_joint_embedding(w: &JointEmbeddingWitness) -> Result<ApproximateIsometry, ApxError> {
    validate_witness(w)?;
    let values = w
        .iota
        .iter()
        .map(|&i| w.eta.iter().map(|&j| ExtQ::fin(w.ambient.dist(i, j).clone())).collect())
        .collect();
    Ok(ApproximateIsometry { source: w.source.clone(), target: w.target.clone(), values })
}

/// Checks that both witness maps are well-formed isometric injections.
pub fn validate_witness(w: &JointEmbeddingWitness) -> Result<(), ApxError> {
    let check = |space: &FiniteMetricSpace, map: &[usize]| -> Result<(), ApxError> {
        if map.len() != space.len() || map.iter().any(|&m| m >= w.ambient.len()) {
            return Err(ApxError::Structural(StructuralError::DimensionMismatch {
                points: space.len(),
                rows: map.len(),
            }));
        }
        for i in 0..map.len() {
            for j in 0..map.len() {
                if space.dist(i, j) != w.ambient.dist(map[i], map[j]) {
                    return Err(ApxError::NotASubspace);
                }
            }
        }
        Ok(())
    };
    check(&w.source, &w.iota)?;
    check(&w.target, &w.eta)
}

/// Min-plus composition `ψφ (x, z) = inf_y (φ(x, y) + ψ(y, z))` for
/// `φ: X → Y` and `ψ: Y → Z`. The infimum over an empty middle space is `∞`.
pub fn compose(
    psi: &ApproximateIsometry,
    phi: &ApproximateIsometry,
) -> Result<ApproximateIsometry, ApxError> {
    if phi.target != psi.source {
        return Err(ApxError::MiddleMismatch {
            left_source: psi.source.len(),
            right_target: phi.target.len(),
        });
    }
    let (n, k, m) = (phi.source.len(), phi.target.len(), psi.target.len());
    let mut values = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::with_capacity(m);
        for z in 0..m {
            let mut best = ExtQ::Inf;
            for y in 0..k {
                let v = &phi.values[x][y] + &psi.values[y][z];
                if v < best {
                    best = v;
                }
            }
            row.push(best);
        }
        values.push(row);
    }
    Ok(ApproximateIsometry { source: phi.source.clone(), target: psi.target.clone(), values })
}

/// The sub-table of `φ` on chosen source and target indices; equal to
/// `φ_η* φ φ_ι` for the subspace inclusions `ι`, `η`.
pub fn restrict(
    phi: &ApproximateIsometry,
    src: &[usize],
    tgt: &[usize],
) -> Result<ApproximateIsometry, ApxError> {
    let source = phi.source.subspace(src).map_err(ApxError::Structural)?;
    let target = phi.target.subspace(tgt).map_err(ApxError::Structural)?;
    let values = src
        .iter()
        .map(|&i| tgt.iter().map(|&j| phi.values[i][j].clone()).collect())
        .collect();
    Ok(ApproximateIsometry { source, target, values })
}

/// The trivial extension `ψ|^{X×Y}` of `ψ: X' → Y'` along subspace inclusions
/// `src_inc: X' → X`, `tgt_inc: Y' → Y`: the largest approximate isometry
/// restricting to `ψ`, explicitly
/// `min over (x', y') of d(x, x') + ψ(x', y') + d(y', y)`,
/// with the empty-index minimum equal to `∞`.
pub fn trivial_extension(
    psi: &ApproximateIsometry,
    big_source: &FiniteMetricSpace,
    big_target: &FiniteMetricSpace,
    src_inc: &[usize],
    tgt_inc: &[usize],
) -> Result<ApproximateIsometry, ApxError> {
    let sub_src = big_source.subspace(src_inc).map_err(ApxError::Structural)?;
    let sub_tgt = big_target.subspace(tgt_inc).map_err(ApxError::Structural)?;
    if sub_src.dist_table() != psi.source.dist_table()
        || sub_tgt.dist_table() != psi.target.dist_table()
    {
        return Err(ApxError::NotASubspace);
    }
    let (n, m) = (big_source.len(), big_target.len());
    let mut values = alloc::vec![alloc::vec![ExtQ::Inf; m]; n];
    for x in 0..n {
        for y in 0..m {
            let mut best = ExtQ::Inf;
            for (a, &xa) in src_inc.iter().enumerate() {
                for (b, &yb) in tgt_inc.iter().enumerate() {
                    let v = &(&ExtQ::fin(big_source.dist(x, xa).clone()) + &psi.values[a][b])
                        + &ExtQ::fin(big_target.dist(yb, y).clone());
                    if v < best {
                        best = v;
                    }
                }
            }
            values[x][y] = best;
        }
    }
    Ok(ApproximateIsometry {
        source: big_source.clone(),
        target: big_target.clone(),
        values,
    })
}

/// Realizes a finite-valued table exactly: builds the pseudo-metric on the
/// disjoint union (distances within the parts, `φ` across), quotients the
/// zero classes, and returns the canonical joint embedding, which satisfies
/// `ambient.dist(ι(x), η(y)) = φ(x, y)` with exact equality.
pub fn amalgamate(phi: &ApproximateIsometry) -> Result<JointEmbeddingWitness, ApxError> {
    if !phi.is_finite_valued() {
        return Err(ApxError::NoFiniteAmalgam);
    }
    let (n, m) = (phi.source.len(), phi.target.len());
    let mut points = Vec::with_capacity(n + m);
    for p in phi.source.points() {
        points.push(alloc::format!("x:{p}"));
    }
    for p in phi.target.points() {
        points.push(alloc::format!("y:{p}"));
    }
    let total = n + m;
    let mut dist = alloc::vec![alloc::vec![Rat::zero(); total]; total];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = phi.source.dist(i, j).clone();
        }
    }
    for i in 0..m {
        for j in 0..m {
            dist[n + i][n + j] = phi.target.dist(i, j).clone();
        }
    }
    for i in 0..n {
        for j in 0..m {
            let v = phi.values[i][j].as_fin().expect("finite checked").clone();
            dist[i][n + j] = v.clone();
            dist[n + j][i] = v;
        }
    }
    // Separate Katětov rows/columns make this a pseudo-metric; the
    // constructor re-checks the axioms exactly.
    let pseudo = PseudoMetricSpace::new(points, dist)
        .map_err(|_| ApxError::NoFiniteAmalgam)?;
    let (ambient, projection) = pseudo.quotient();
    let find = |name: String| ambient.index_of(&projection[&name]).expect("projection target");
    let iota = phi.source.points().iter().map(|p| find(alloc::format!("x:{p}"))).collect();
    let eta = phi.target.points().iter().map(|p| find(alloc::format!("y:{p}"))).collect();
    Ok(JointEmbeddingWitness {
        source: phi.source.clone(),
        target: phi.target.clone(),
        ambient,
        iota,
        eta,
    })
}

/// The least `ε` with `φ*φ ≤ φ_id + 2ε`. Computed both as
/// `(1/2) · max (φ*φ(x,x') − d(x,x'))⁺` and as `max_x min_y φ(x,y)`; the two
/// routes agree exactly on finite spaces and the function asserts so.
pub fn totality_defect(phi: &ApproximateIsometry) -> ExtQ {
    let (n, m) = (phi.source.len(), phi.target.len());
    // Route 1: max-min over the table.
    let mut maxmin = ExtQ::zero();
    for x in 0..n {
        let mut row_min = ExtQ::Inf;
        for y in 0..m {
            if phi.values[x][y] < row_min {
                row_min = phi.values[x][y].clone();
            }
        }
        if row_min > maxmin {
            maxmin = row_min;
        }
    }
    // Route 2: composition defect against the identity table.
    let mut comp = ExtQ::zero();
    for x in 0..n {
        for xp in 0..n {
            let mut through = ExtQ::Inf;
            for y in 0..m {
                let v = &phi.values[x][y] + &phi.values[xp][y];
                if v < through {
                    through = v;
                }
            }
            let excess = match through {
                ExtQ::Inf => ExtQ::Inf,
                ExtQ::Fin(q) => {
                    let gap = q - phi.source.dist(x, xp);
                    if gap <= Rat::zero() {
                        ExtQ::zero()
                    } else {
                        ExtQ::fin(gap / rat_int(2))
                    }
                }
            };
            if excess > comp {
                comp = excess;
            }
        }
    }
    assert_eq!(maxmin, comp, "totality defect routes disagree");
    maxmin
}

/// Defect of `φ*`, the surjectivity analogue.
pub fn surjectivity_defect(phi: &ApproximateIsometry) -> ExtQ {
    totality_defect(&phi.adjoint())
}

pub fn is_epsilon_total(phi: &ApproximateIsometry, eps: &Rat) -> bool {
    totality_defect(phi) <= ExtQ::fin(eps.clone())
}

pub fn is_epsilon_surjective(phi: &ApproximateIsometry, eps: &Rat) -> bool {
    surjectivity_defect(phi) <= ExtQ::fin(eps.clone())
}

pub fn is_epsilon_bijective(phi: &ApproximateIsometry, eps: &Rat) -> bool {
    is_epsilon_total(phi, eps) && is_epsilon_surjective(phi, eps)
}

/// Decides `ψ ◁ φ`: whether some rational `ε > 0` has `ψ + ε ≤ φ` under
/// saturating addition. On finite spaces this holds exactly when `φ` is
/// infinite wherever `ψ` is, and `φ − ψ` has a positive minimum over the
/// cells where `ψ` is finite (an empty minimum counts as positive, so the
/// identically infinite table strictly dominates itself).
pub fn strictly_dominates(phi: &ApproximateIsometry, psi: &ApproximateIsometry) -> bool {
    domination_gap(phi, psi).is_some()
}

/// The largest `ε` with `ψ + ε ≤ φ` when `ψ ◁ φ` (`None` otherwise; `Inf`
/// when the gap is unbounded, e.g. on empty tables).
pub fn domination_gap(phi: &ApproximateIsometry, psi: &ApproximateIsometry) -> Option<ExtQ> {
    if phi.source != psi.source || phi.target != psi.target {
        return None;
    }
    let mut gap = ExtQ::Inf;
    for (rp, rq) in phi.values.iter().zip(&psi.values) {
        for (a, b) in rp.iter().zip(rq) {
            match (a, b) {
                (_, ExtQ::Inf) => {
                    if !a.is_infinite() {
                        return None;
                    }
                }
                (ExtQ::Inf, ExtQ::Fin(_)) => {}
                (ExtQ::Fin(pa), ExtQ::Fin(pb)) => {
                    if pa <= pb {
                        return None;
                    }
                    let g = ExtQ::fin(pa - pb);
                    if g < gap {
                        gap = g;
                    }
                }
            }
        }
    }
    Some(gap)
}

/// Whether `φ` is strict, i.e. strictly dominates some approximate isometry.
///
/// Derived criterion (finite spaces): the largest candidate below `φ − ε` for
/// infinitesimal `ε` is `max(φ − ε, 0)` itself, because `φ` already satisfies
/// the difference form of the Katětov inequalities; so strictness reduces to
/// the lower Katětov inequalities holding with room to spare. Concretely `φ`
/// is strict iff it is identically infinite, or finite-valued with
/// `d(x,x') < φ(x,y) + φ(x',y)` strictly whenever a positive entry is
/// involved (and `d(x,x') = 0` forced when both entries vanish), plus the
/// symmetric condition on rows.
pub fn is_strict(phi: &ApproximateIsometry) -> bool {
    if phi.is_all_infinite() {
        return true;
    }
    if !phi.is_finite_valued() {
        // Mixed tables are not approximate isometries at all.
        return false;
    }
    let (n, m) = (phi.source.len(), phi.target.len());
    let entry = |i: usize, j: usize| phi.values[i][j].as_fin().expect("finite");
    for y in 0..m {
        for x in 0..n {
            for xp in (x + 1)..n {
                let (a, b) = (entry(x, y), entry(xp, y));
                let d = phi.source.dist(x, xp);
                let slack_ok = if a.is_zero() && b.is_zero() {
                    d.is_zero()
                } else {
                    *d < a + b
                };
                if !slack_ok {
                    return false;
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..m {
            for yp in (y + 1)..m {
                let (a, b) = (entry(x, y), entry(x, yp));
                let d = phi.target.dist(y, yp);
                let slack_ok = if a.is_zero() && b.is_zero() {
                    d.is_zero()
                } else {
                    *d < a + b
                };
                if !slack_ok {
                    return false;
                }
            }
        }
    }
    true
}

/// The rational strict interpolant: given `ψ ◁ φ` with `ψ` finite-valued,
/// produces a rational-valued approximate isometry `ρ` with
/// `ψ ◁ ρ ◁ φ`. The construction partitions the cells into the level sets
/// `F_1 < … < F_n` of `ψ`, picks a per-level `δ` from the midpoints of the
/// feasible intervals, sets `ρ = ψ − δ + ε` for `ε` half the domination gap,
/// and then snaps the level values to the coarsest dyadic grid that keeps
/// every required inequality true.
pub fn strict_interpolant(
    phi: &ApproximateIsometry,
    psi: &ApproximateIsometry,
) -> Result<ApproximateIsometry, ApxError> {
    if !psi.is_finite_valued() {
        return Err(ApxError::NoFiniteAmalgam);
    }
    let gap = domination_gap(phi, psi).ok_or(ApxError::NotStrictlyDominated)?;
    let (n, m) = (psi.source.len(), psi.target.len());
    if n == 0 || m == 0 {
        return Ok(psi.clone());
    }
    let eps: Rat = match gap {
        ExtQ::Fin(g) => g / rat_int(2),
        ExtQ::Inf => rat_int(1),
    };

    // Level sets of psi, ordered by value.
    let mut levels: Vec<Rat> = Vec::new();
    for row in psi.values() {
        for v in row {
            let q = v.as_fin().expect("finite").clone();
            if !levels.contains(&q) {
                levels.push(q);
            }
        }
    }
    levels.sort();
    let count = levels.len();

    // Feasible upper bounds, processed from the top level down since each
    // delta must stay below the next one.
    let mut deltas = alloc::vec![Rat::zero(); count];
    for i in (0..count).rev() {
        let mut ub = eps.clone();
        if i + 1 < count && deltas[i + 1] < ub {
            ub = deltas[i + 1].clone();
        }
        if i > 0 {
            let step = &levels[i] - &levels[i - 1];
            if step < ub {
                ub = step;
            }
        } else if levels[0] > Rat::zero() && levels[0] < ub {
            ub = levels[0].clone();
        }
        deltas[i] = ub / rat_int(2);
    }

    let level_index = |q: &Rat| levels.iter().position(|l| l == q).expect("level");
    let exact_rho: Vec<Vec<Rat>> = psi
        .values()
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    let q = v.as_fin().expect("finite");
                    q + &eps - &deltas[level_index(q)]
                })
                .collect()
        })
        .collect();

    let build = |table: &[Vec<Rat>]| -> Option<ApproximateIsometry> {
        if table.iter().any(|r| r.iter().any(|q| *q < Rat::zero())) {
            return None;
        }
        let values = table
            .iter()
            .map(|r| r.iter().map(|q| ExtQ::fin(q.clone())).collect())
            .collect();
        let rho = ApproximateIsometry {
            source: psi.source.clone(),
            target: psi.target.clone(),
            values,
        };
        if rho.is_valid() && strictly_dominates(&rho, psi) && strictly_dominates(phi, &rho) {
            Some(rho)
        } else {
            None
        }
    };

    // Snap to the coarsest dyadic grid that preserves every inequality; the
    // exact midpoint table always passes, so this terminates.
    for k in 0..64 {
        let rounded: Vec<Vec<Rat>> =
            exact_rho.iter().map(|r| r.iter().map(|q| round_dyadic(q, k)).collect()).collect();
        if let Some(rho) = build(&rounded) {
            return Ok(rho);
        }
    }
    build(&exact_rho).ok_or(ApxError::NotStrictlyDominated)
}

/// The stability of restricted extensions under moving the restriction sets:
/// if `X₀'`, `Y₀'` lie within the `ε/5`-neighborhoods of `X₀`, `Y₀`, then
/// `ext(φ|_{X₀×Y₀}) + ε/5 ≤ ext(φ|_{X₀'×Y₀'}) + ε` pointwise. Closed
/// neighborhoods suffice because the conclusion is non-strict.
pub fn verify_perturbation(
    phi: &ApproximateIsometry,
    x0: &[usize],
    y0: &[usize],
    x0p: &[usize],
    y0p: &[usize],
    eps: &Rat,
) -> Result<PerturbationOutcome, ApxError> {
    let fifth = eps / rat_int(5);
    let within = |space: &FiniteMetricSpace, base: &[usize], moved: &[usize]| -> bool {
        moved.iter().all(|&p| base.iter().any(|&b| space.dist(p, b) <= &fifth))
    };
    // Resolve subsets first so structural errors surface before the
    // hypothesis check.
    let small = restrict(phi, x0, y0)?;
    let moved = restrict(phi, x0p, y0p)?;
    if !within(&phi.source, x0, x0p) || !within(&phi.target, y0, y0p) {
        return Ok(PerturbationOutcome::PreconditionFailed);
    }
    let lhs = trivial_extension(&small, &phi.source, &phi.target, x0, y0)?.relax(&fifth);
    let rhs = trivial_extension(&moved, &phi.source, &phi.target, x0p, y0p)?.relax(eps);
    Ok(if lhs.le(&rhs) { PerturbationOutcome::Holds } else { PerturbationOutcome::Fails })
}

impl fmt::Debug for ApproximateIsometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Apx[{}x{}]", self.source.len(), self.target.len())?;
        for row in &self.values {
            write!(f, " [")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use alloc::vec;

    fn space(names: &[&str], dist: &[&[i64]]) -> FiniteMetricSpace {
        FiniteMetricSpace::new(
            names.iter().map(|s| s.to_string()).collect(),
            dist.iter().map(|r| r.iter().map(|&d| rat_int(d)).collect()).collect(),
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> ExtQ {
        ExtQ::fin(rat(n, d))
    }

    #[test]
    fn katetov_examples() {
        let x = space(&["a", "b", "c"], &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        // Distance to a fixed point is Katetov.
        let f: Vec<ExtQ> = (0..3).map(|i| ExtQ::fin(x.dist(i, 0).clone())).collect();
        assert!(is_katetov(&x, &f));
        // f = (0, 2) on two points at distance 1 fails 2 <= 1 + 0.
        let two = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        assert!(!is_katetov(&two, &[q(0, 1), q(2, 1)]));
        // Identically infinite is Katetov.
        assert!(is_katetov(&two, &[ExtQ::Inf, ExtQ::Inf]));
    }

    #[test]
    fn constant_table_validity_threshold() {
        // On 2x2 with all distances 1 a constant c is valid iff 1 <= 2c.
        let x = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        let y = space(&["u", "v"], &[&[0, 1], &[1, 0]]);
        let ok = ApproximateIsometry::constant(x.clone(), y.clone(), q(1, 2));
        assert!(ok.is_valid());
        let bad = ApproximateIsometry::constant(x.clone(), y.clone(), q(1, 4));
        assert!(!bad.is_valid());
        assert!(ApproximateIsometry::all_infinite(x, y).is_valid());
    }

    #[test]
    fn identity_table_and_adjoint() {
        let x = space(&["a", "b"], &[&[0, 3], &[3, 0]]);
        let id = ApproximateIsometry::identity(&x);
        assert!(id.is_valid());
        assert_eq!(id.adjoint(), id);
        assert_eq!(id.adjoint().adjoint(), id);
    }

    #[test]
    fn compose_worked_example() {
        // X = {x}, Y = {y1,y2} with d = 2, Z = {z}; phi = (1,3), psi = (4,2).
        let x = space(&["x"], &[&[0]]);
        let y = space(&["y1", "y2"], &[&[0, 2], &[2, 0]]);
        let z = space(&["z"], &[&[0]]);
        let phi =
            ApproximateIsometry::from_parts(x, y.clone(), vec![vec![q(1, 1), q(3, 1)]]).unwrap();
        let psi =
            ApproximateIsometry::from_parts(y, z, vec![vec![q(4, 1)], vec![q(2, 1)]]).unwrap();
        assert!(phi.is_valid() && psi.is_valid());
        let comp = compose(&psi, &phi).unwrap();
        assert_eq!(comp.value(0, 0), &q(5, 1));
        assert!(comp.is_valid());
    }

    #[test]
    fn compose_with_identity_is_identity() {
        let x = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        let y = space(&["u", "v", "w"], &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let phi = ApproximateIsometry::of_map(&x, &y, &[0, 1]).unwrap().relax(&rat(1, 3));
        let idy = ApproximateIsometry::identity(&y);
        assert_eq!(compose(&idy, &phi).unwrap(), phi);
        let idx = ApproximateIsometry::identity(&x);
        assert_eq!(compose(&phi, &idx).unwrap(), phi);
    }

    #[test]
    fn compose_saturates_on_infinite_table() {
        let x = space(&["a"], &[&[0]]);
        let y = space(&["u"], &[&[0]]);
        let inf = ApproximateIsometry::all_infinite(x.clone(), y.clone());
        let phi = ApproximateIsometry::of_map(&x, &y, &[0]).unwrap();
        let left = compose(&inf.adjoint(), &phi);
        assert!(left.unwrap().is_all_infinite());
    }

    #[test]
    fn compose_rejects_middle_mismatch() {
        let x = space(&["a"], &[&[0]]);
        let y = space(&["u", "v"], &[&[0, 1], &[1, 0]]);
        let phi = ApproximateIsometry::all_infinite(x.clone(), x.clone());
        let psi = ApproximateIsometry::all_infinite(y, x);
        assert!(matches!(compose(&psi, &phi), Err(ApxError::MiddleMismatch { .. })));
    }

    #[test]
    fn restriction_and_extension_round_trip() {
        let x = space(&["a", "b", "c"], &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let y = space(&["u", "v"], &[&[0, 2], &[2, 0]]);
        let phi = ApproximateIsometry::of_map(&x, &y, &[0, 0, 1]).unwrap().relax(&rat(1, 2));
        let full = restrict(&phi, &[0, 1, 2], &[0, 1]).unwrap();
        assert_eq!(full, phi);
        let sub = restrict(&phi, &[1], &[1]).unwrap();
        assert_eq!(sub.value(0, 0), phi.value(1, 1));
        let ext = trivial_extension(&sub, &x, &y, &[1], &[1]).unwrap();
        assert!(ext.is_valid());
        let back = restrict(&ext, &[1], &[1]).unwrap();
        assert_eq!(back.value(0, 0), sub.value(0, 0));
    }

    #[test]
    fn extension_of_empty_rectangle_is_infinite() {
        let x = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        let y = space(&["u"], &[&[0]]);
        let empty = restrict(&ApproximateIsometry::identity(&x), &[], &[]).unwrap();
        let ext = trivial_extension(&empty, &x, &y, &[], &[]).unwrap();
        assert!(ext.is_all_infinite());
    }

    #[test]
    fn amalgamate_two_point_example() {
        let x = space(&["p"], &[&[0]]);
        let y = space(&["q"], &[&[0]]);
        let phi =
            ApproximateIsometry::from_parts(x, y, vec![vec![q(3, 1)]]).unwrap();
        let w = amalgamate(&phi).unwrap();
        assert_eq!(w.ambient.len(), 2);
        assert_eq!(w.ambient.dist(w.iota[0], w.eta[0]), &rat_int(3));
    }

    #[test]
    fn amalgamate_identity_collapses_pairs() {
        let x = space(&["a", "b"], &[&[0, 2], &[2, 0]]);
        let phi = ApproximateIsometry::identity(&x);
        let w = amalgamate(&phi).unwrap();
        assert_eq!(w.ambient.len(), 2);
        assert_eq!(w.iota, w.eta);
        let back = from_joint_embedding(&w).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn amalgamate_rejects_all_infinite() {
        let x = space(&["a"], &[&[0]]);
        let inf = ApproximateIsometry::all_infinite(x.clone(), x);
        assert!(matches!(amalgamate(&inf), Err(ApxError::NoFiniteAmalgam)));
    }

    #[test]
    fn totality_defect_examples() {
        let x = space(&["x"], &[&[0]]);
        let y = space(&["y1", "y2"], &[&[0, 3], &[3, 0]]);
        let phi =
            ApproximateIsometry::from_parts(x.clone(), y, vec![vec![q(2, 1), q(5, 1)]]).unwrap();
        assert!(phi.is_valid());
        assert_eq!(totality_defect(&phi), q(2, 1));
        // An isometric embedding table has defect zero.
        let z = space(&["u", "v"], &[&[0, 1], &[1, 0]]);
        let emb = ApproximateIsometry::of_map(&z, &z, &[0, 1]).unwrap();
        assert_eq!(totality_defect(&emb), ExtQ::zero());
        // Identically infinite with nonempty source has defect infinity.
        let inf = ApproximateIsometry::all_infinite(x, z);
        assert_eq!(totality_defect(&inf), ExtQ::Inf);
    }

    #[test]
    fn strict_domination_examples() {
        let x = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        let psi = ApproximateIsometry::identity(&x);
        let phi = psi.relax(&rat_int(1));
        assert!(strictly_dominates(&phi, &psi));
        assert!(!strictly_dominates(&psi, &psi));
        let inf = ApproximateIsometry::all_infinite(x.clone(), x);
        assert!(strictly_dominates(&inf, &inf));
    }

    #[test]
    fn strictness_criterion() {
        let x = space(&["a", "b"], &[&[0, 2], &[2, 0]]);
        let y = space(&["u"], &[&[0]]);
        // (1,1) against distance 2: boundary case, not strict.
        let tight =
            ApproximateIsometry::from_parts(x.clone(), y.clone(), vec![vec![q(1, 1)], vec![q(1, 1)]])
                .unwrap();
        assert!(tight.is_valid());
        assert!(!is_strict(&tight));
        let loose = tight.relax(&rat(1, 4));
        assert!(is_strict(&loose));
        assert!(is_strict(&ApproximateIsometry::all_infinite(x, y)));
    }

    #[test]
    fn interpolant_single_level() {
        // psi constant c on a 1x1 rectangle, phi = psi + 1.
        let x = space(&["a"], &[&[0]]);
        let psi =
            ApproximateIsometry::from_parts(x.clone(), x.clone(), vec![vec![q(2, 1)]]).unwrap();
        let phi = psi.relax(&rat_int(1));
        let rho = strict_interpolant(&phi, &psi).unwrap();
        assert!(rho.is_valid());
        assert!(strictly_dominates(&rho, &psi));
        assert!(strictly_dominates(&phi, &rho));
        let v = rho.value(0, 0).as_fin().unwrap().clone();
        assert!(v > rat_int(2) && v < rat_int(3));
    }

    #[test]
    fn interpolant_two_levels() {
        // psi with levels {1, 2}, phi = psi + 1/2.
        let x = space(&["a", "b"], &[&[0, 1], &[1, 0]]);
        let y = space(&["u"], &[&[0]]);
        let psi = ApproximateIsometry::from_parts(
            x.clone(),
            y.clone(),
            vec![vec![q(1, 1)], vec![q(2, 1)]],
        )
        .unwrap();
        assert!(psi.is_valid());
        let phi = psi.relax(&rat(1, 2));
        let rho = strict_interpolant(&phi, &psi).unwrap();
        assert!(rho.is_valid());
        assert!(strictly_dominates(&rho, &psi));
        assert!(strictly_dominates(&phi, &rho));
    }

    #[test]
    fn interpolant_requires_domination() {
        let x = space(&["a"], &[&[0]]);
        let psi = ApproximateIsometry::from_parts(x.clone(), x, vec![vec![q(1, 1)]]).unwrap();
        assert!(matches!(
            strict_interpolant(&psi, &psi),
            Err(ApxError::NotStrictlyDominated)
        ));
    }

    #[test]
    fn perturbation_trivial_and_failed_hypothesis() {
        let x = space(&["a", "b", "c"], &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let phi = ApproximateIsometry::identity(&x).relax(&rat(1, 3));
        // Same subsets always hold.
        let out = verify_perturbation(&phi, &[0, 1], &[0, 1], &[0, 1], &[0, 1], &rat_int(1));
        assert_eq!(out.unwrap(), PerturbationOutcome::Holds);
        // Moving to a far-away point violates the eps/5 hypothesis.
        let out = verify_perturbation(&phi, &[0], &[0], &[2], &[0], &rat_int(1));
        assert_eq!(out.unwrap(), PerturbationOutcome::PreconditionFailed);
    }
}

pub mod sampling;
