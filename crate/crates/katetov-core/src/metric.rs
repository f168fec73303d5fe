//! Finite metric and pseudo-metric spaces with exact rational distance
//! tables, axiom validation, and the zero-distance quotient.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::rat::{fmt_rat, Rat};

/// A named finite point set with a square table of exact rational distances.
/// Invariants (zero diagonal, symmetry, triangle inequality, and positivity
/// off the diagonal) are established by [`FiniteMetricSpace::new`].
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<Rat>>,
}

/// Like [`FiniteMetricSpace`] but distance zero between distinct points is
/// allowed; the quotient by zero-classes recovers a metric space.
#[derive(Clone, PartialEq, Eq)]
pub struct PseudoMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<Rat>>,
}

/// One violated metric axiom, with the witnessing points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    NonzeroDiagonal { point: String },
    Negative { a: String, b: String },
    Asymmetric { a: String, b: String },
    Triangle { a: String, b: String, c: String },
    ZeroOffDiagonal { a: String, b: String },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonzeroDiagonal { point } => {
                write!(f, "d({point},{point}) != 0")
            }
            MetricViolation::Negative { a, b } => write!(f, "d({a},{b}) < 0"),
            MetricViolation::Asymmetric { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            MetricViolation::Triangle { a, b, c } => {
                write!(f, "d({a},{c}) > d({a},{b}) + d({b},{c})")
            }
            MetricViolation::ZeroOffDiagonal { a, b } => {
                write!(f, "d({a},{b}) = 0 with {a} != {b}")
            }
        }
    }
}

/// Structural problems that make a distance table unusable at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralError {
    DimensionMismatch { points: usize, rows: usize },
    RaggedRow { row: usize, len: usize, expected: usize },
    DuplicatePoint { id: String },
    UnknownPoint { id: String },
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralError::DimensionMismatch { points, rows } => {
                write!(f, "distance table has {rows} rows for {points} points")
            }
            StructuralError::RaggedRow { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            StructuralError::DuplicatePoint { id } => write!(f, "duplicate point id `{id}`"),
            StructuralError::UnknownPoint { id } => write!(f, "unknown point id `{id}`"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StructuralError {}

/// Outcome of [`validate_metric`]: empty `violations` means the table is a
/// genuine metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<MetricViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_square(points: &[String], dist: &[Vec<Rat>]) -> Result<(), StructuralError> {
    let n = points.len();
    if dist.len() != n {
        return Err(StructuralError::DimensionMismatch { points: n, rows: dist.len() });
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(StructuralError::RaggedRow { row: i, len: row.len(), expected: n });
        }
    }
    let mut seen = BTreeMap::new();
    for p in points {
        if seen.insert(p.clone(), ()).is_some() {
            return Err(StructuralError::DuplicatePoint { id: p.clone() });
        }
    }
    Ok(())
}

/// Reports every violated metric axiom with a witnessing tuple. The report is
/// empty exactly when the table is a metric (positivity off the diagonal
/// included).
pub fn validate_metric(
    points: &[String],
    dist: &[Vec<Rat>],
) -> Result<ValidationReport, StructuralError> {
    let mut report = validate_pseudo_metric(points, dist)?;
    let n = points.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j].is_zero() {
                report.violations.push(MetricViolation::ZeroOffDiagonal {
                    a: points[i].clone(),
                    b: points[j].clone(),
                });
            }
        }
    }
    Ok(report)
}

/// Same as [`validate_metric`] without the off-diagonal positivity axiom.
pub fn validate_pseudo_metric(
    points: &[String],
    dist: &[Vec<Rat>],
) -> Result<ValidationReport, StructuralError> {
    check_square(points, dist)?;
    let n = points.len();
    let mut violations = Vec::new();
    for i in 0..n {
        if !dist[i][i].is_zero() {
            violations.push(MetricViolation::NonzeroDiagonal { point: points[i].clone() });
        }
        for j in 0..n {
            if dist[i][j] < Rat::zero() {
                violations.push(MetricViolation::Negative {
                    a: points[i].clone(),
                    b: points[j].clone(),
                });
            }
            if i < j && dist[i][j] != dist[j][i] {
                violations.push(MetricViolation::Asymmetric {
                    a: points[i].clone(),
                    b: points[j].clone(),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if dist[i][k] > &dist[i][j] + &dist[j][k] {
                    violations.push(MetricViolation::Triangle {
                        a: points[i].clone(),
                        b: points[j].clone(),
                        c: points[k].clone(),
                    });
                }
            }
        }
    }
    Ok(ValidationReport { violations })
}

impl FiniteMetricSpace {
    /// Builds a metric space, checking structure and every axiom.
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<Self, SpaceError> {
        let report = validate_metric(&points, &dist).map_err(SpaceError::Structural)?;
        if !report.is_valid() {
            return Err(SpaceError::Axioms(report));
        }
        Ok(FiniteMetricSpace { points, dist })
    }

    /// The empty metric space.
    pub fn empty() -> Self {
        FiniteMetricSpace { points: Vec::new(), dist: Vec::new() }
    }

    /// Single point space.
    pub fn singleton(id: &str) -> Self {
        FiniteMetricSpace {
            points: alloc::vec![id.to_string()],
            dist: alloc::vec![alloc::vec![Rat::zero()]],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p == id)
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i][j]
    }

    pub fn dist_table(&self) -> &[Vec<Rat>] {
        &self.dist
    }

    /// Largest pairwise distance (zero for spaces with fewer than two points).
    pub fn diameter(&self) -> Rat {
        let mut best = Rat::zero();
        for row in &self.dist {
            for d in row {
                if *d > best {
                    best = d.clone();
                }
            }
        }
        best
    }

    /// Extends the space by one fresh point at the given distances, checking
    /// only the axioms a new point can break: positivity, and the triangle
    /// inequalities through and around it (the old table is already a
    /// metric, so this is a complete check in O(n²)).
    pub fn extended(&self, name: String, values: &[Rat]) -> Result<Self, SpaceError> {
        let n = self.points.len();
        if values.len() != n {
            return Err(SpaceError::Structural(StructuralError::DimensionMismatch {
                points: n,
                rows: values.len(),
            }));
        }
        if self.points.contains(&name) {
            return Err(SpaceError::Structural(StructuralError::DuplicatePoint { id: name }));
        }
        let mut violations = Vec::new();
        for i in 0..n {
            if values[i] <= Rat::zero() {
                let kind = if values[i].is_zero() {
                    MetricViolation::ZeroOffDiagonal { a: self.points[i].clone(), b: name.clone() }
                } else {
                    MetricViolation::Negative { a: self.points[i].clone(), b: name.clone() }
                };
                violations.push(kind);
            }
            for j in 0..n {
                // d(z, i) <= d(z, j) + d(j, i) and d(i, j) <= d(i, z) + d(z, j).
                if values[i] > &values[j] + self.dist(j, i) {
                    violations.push(MetricViolation::Triangle {
                        a: name.clone(),
                        b: self.points[j].clone(),
                        c: self.points[i].clone(),
                    });
                }
                if *self.dist(i, j) > &values[i] + &values[j] {
                    violations.push(MetricViolation::Triangle {
                        a: self.points[i].clone(),
                        b: name.clone(),
                        c: self.points[j].clone(),
                    });
                }
            }
        }
        if !violations.is_empty() {
            return Err(SpaceError::Axioms(ValidationReport { violations }));
        }
        let mut points = self.points.clone();
        points.push(name);
        let mut dist: Vec<Vec<Rat>> = self.dist.clone();
        for (i, row) in dist.iter_mut().enumerate() {
            row.push(values[i].clone());
        }
        let mut last = values.to_vec();
        last.push(Rat::zero());
        dist.push(last);
        Ok(FiniteMetricSpace { points, dist })
    }

    /// The induced subspace on `indices` (order preserved, duplicates rejected).
    pub fn subspace(&self, indices: &[usize]) -> Result<Self, StructuralError> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            let id = self.points.get(i).ok_or(StructuralError::UnknownPoint {
                id: alloc::format!("#{i}"),
            })?;
            if points.contains(id) {
                return Err(StructuralError::DuplicatePoint { id: id.clone() });
            }
            points.push(id.clone());
        }
        let dist = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        Ok(FiniteMetricSpace { points, dist })
    }
}

impl PseudoMetricSpace {
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<Self, SpaceError> {
        let report = validate_pseudo_metric(&points, &dist).map_err(SpaceError::Structural)?;
        if !report.is_valid() {
            return Err(SpaceError::Axioms(report));
        }
        Ok(PseudoMetricSpace { points, dist })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i][j]
    }

    /// Collapses zero-distance classes. Returns the quotient metric space and
    /// the projection onto class representatives (the lexicographically least
    /// member of each class). The projection is distance-preserving: the
    /// quotient distance between classes equals the distance between any two
    /// representatives, which is well-defined for a pseudo-metric.
    pub fn quotient(&self) -> (FiniteMetricSpace, BTreeMap<String, String>) {
        let n = self.points.len();
        // Zero-distance is an equivalence relation by the triangle inequality.
        let mut class_of: Vec<Option<usize>> = alloc::vec![None; n];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..n {
            if class_of[i].is_some() {
                continue;
            }
            let c = reps.len();
            class_of[i] = Some(c);
            let mut rep = i;
            for j in (i + 1)..n {
                if class_of[j].is_none() && self.dist[i][j].is_zero() {
                    class_of[j] = Some(c);
                    if self.points[j] < self.points[rep] {
                        rep = j;
                    }
                }
            }
            reps.push(rep);
        }
        let points: Vec<String> = reps.iter().map(|&r| self.points[r].clone()).collect();
        let dist: Vec<Vec<Rat>> = reps
            .iter()
            .map(|&r| reps.iter().map(|&s| self.dist[r][s].clone()).collect())
            .collect();
        let projection = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), points[class_of[i].unwrap()].clone()))
            .collect();
        (FiniteMetricSpace { points, dist }, projection)
    }
}

/// Error building a space from raw data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    Structural(StructuralError),
    Axioms(ValidationReport),
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::Structural(e) => write!(f, "{e}"),
            SpaceError::Axioms(r) => {
                write!(f, "{} metric axiom violation(s)", r.violations.len())?;
                if let Some(v) = r.violations.first() {
                    write!(f, ", first: {v}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SpaceError {}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteMetricSpace[{}](", self.points.len())?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")?;
        for row in &self.dist {
            write!(f, " [")?;
            for (j, d) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", fmt_rat(d))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PseudoMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PseudoMetricSpace[{}]", self.points.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use alloc::vec;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_point_space_is_valid() {
        let r = validate_metric(&ids(&["a"]), &[vec![Rat::zero()]]).unwrap();
        assert!(r.is_valid());
    }

    #[test]
    fn triangle_violation_reported_with_witness() {
        // d(a,b)=1, d(b,c)=1, d(a,c)=3 violates the triangle inequality.
        let dist = vec![
            vec![rat_int(0), rat_int(1), rat_int(3)],
            vec![rat_int(1), rat_int(0), rat_int(1)],
            vec![rat_int(3), rat_int(1), rat_int(0)],
        ];
        let r = validate_metric(&ids(&["a", "b", "c"]), &dist).unwrap();
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, MetricViolation::Triangle { a, b, c }
                if a == "a" && b == "b" && c == "c")));
    }

    #[test]
    fn equality_case_of_triangle_inequality_is_valid() {
        let dist = vec![
            vec![rat_int(0), rat_int(1), rat_int(2)],
            vec![rat_int(1), rat_int(0), rat_int(1)],
            vec![rat_int(2), rat_int(1), rat_int(0)],
        ];
        let r = validate_metric(&ids(&["a", "b", "c"]), &dist).unwrap();
        assert!(r.is_valid());
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = validate_metric(&ids(&["a", "b"]), &[vec![Rat::zero()]]).unwrap_err();
        assert!(matches!(err, StructuralError::DimensionMismatch { .. }));
    }

    #[test]
    fn quotient_identity_when_all_positive() {
        let dist = vec![vec![rat_int(0), rat_int(2)], vec![rat_int(2), rat_int(0)]];
        let ps = PseudoMetricSpace::new(ids(&["a", "b"]), dist).unwrap();
        let (q, proj) = ps.quotient();
        assert_eq!(q.len(), 2);
        assert_eq!(proj["a"], "a");
        assert_eq!(proj["b"], "b");
    }

    #[test]
    fn quotient_collapses_zero_pair() {
        let dist = vec![vec![rat_int(0), rat_int(0)], vec![rat_int(0), rat_int(0)]];
        let ps = PseudoMetricSpace::new(ids(&["b", "a"]), dist).unwrap();
        let (q, proj) = ps.quotient();
        assert_eq!(q.len(), 1);
        assert_eq!(q.points()[0], "a");
        assert_eq!(proj["b"], "a");
    }

    #[test]
    fn extension_checks_only_the_new_point() {
        let base = FiniteMetricSpace::new(
            ids(&["a", "b"]),
            vec![vec![rat_int(0), rat_int(2)], vec![rat_int(2), rat_int(0)]],
        )
        .unwrap();
        let good = base.extended("c".into(), &[rat_int(1), rat_int(1)]).unwrap();
        assert!(validate_metric(good.points(), good.dist_table()).unwrap().is_valid());
        // Violating triangle through the new point: d(a,b)=2 > 1/2 + 1.
        let bad = base.extended("c".into(), &[rat(1, 2), rat_int(1)]);
        assert!(bad.is_err());
        // Zero distance to an existing point is rejected.
        assert!(base.extended("c".into(), &[rat_int(0), rat_int(2)]).is_err());
        // Duplicate names are rejected.
        assert!(base.extended("a".into(), &[rat_int(1), rat_int(1)]).is_err());
    }

    #[test]
    fn quotient_three_point_example() {
        // d(a,b)=0, d(a,c)=d(b,c)=1 collapses to a two-point space at distance 1.
        let dist = vec![
            vec![rat_int(0), rat_int(0), rat_int(1)],
            vec![rat_int(0), rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(1), rat_int(0)],
        ];
        let ps = PseudoMetricSpace::new(ids(&["a", "b", "c"]), dist).unwrap();
        let (q, proj) = ps.quotient();
        assert_eq!(q.len(), 2);
        assert_eq!(q.dist(0, 1), &rat_int(1));
        assert_eq!(proj["a"], "a");
        assert_eq!(proj["b"], "a");
        assert_eq!(proj["c"], "c");
        // The projection preserves distances exactly.
        let report = validate_metric(q.points(), q.dist_table()).unwrap();
        assert!(report.is_valid());
    }
}
