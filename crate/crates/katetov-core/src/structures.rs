//! Finite metric structures over a signature of function and relation
//! symbols, embeddings between them, and pointed (generator-tagged) objects.
//!
//! A structure is a finite metric space together with an interpretation of
//! every symbol: relation symbols as exact rational tables on tuples,
//! function symbols as point-valued tables. Embeddings are isometries that
//! preserve relation values and commute with function interpretations.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::metric::{FiniteMetricSpace, StructuralError};
use crate::rat::Rat;

/// Function and relation symbols with arities. Constants are 0-ary functions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub relations: BTreeMap<String, usize>,
}

impl Signature {
    /// The empty signature: structures are bare metric spaces.
    pub fn metric_only() -> Self {
        Signature::default()
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.functions.insert(name.to_string(), arity);
        self
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.relations.insert(name.to_string(), arity);
        self
    }
}

/// Total interpretation of one symbol: a value per tuple of domain indices,
/// stored in row-major order (index = Σ tuple[i] · n^(arity-1-i)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table<T> {
    pub arity: usize,
    pub entries: Vec<T>,
}

impl<T: Clone> Table<T> {
    pub fn get(&self, n: usize, tuple: &[usize]) -> &T {
        debug_assert_eq!(tuple.len(), self.arity);
        let mut idx = 0usize;
        for &t in tuple {
            idx = idx * n + t;
        }
        &self.entries[idx]
    }
}

/// A finite structure: domain plus interpretations, total on the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinStructure {
    pub signature: Signature,
    pub domain: FiniteMetricSpace,
    pub relations: BTreeMap<String, Table<Rat>>,
    pub functions: BTreeMap<String, Table<usize>>,
}

impl FinStructure {
    /// A bare metric space viewed as a structure over the empty signature.
    pub fn metric(domain: FiniteMetricSpace) -> Self {
        FinStructure {
            signature: Signature::metric_only(),
            domain,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
        }
    }

    /// Structural well-formedness: one total table per symbol, of the right
    /// size, with function values inside the domain.
    pub fn check(&self) -> Result<(), StructuralError> {
        let n = self.domain.len();
        for (name, &arity) in &self.signature.relations {
            let table = self.relations.get(name).ok_or(StructuralError::UnknownPoint {
                id: name.clone(),
            })?;
            if table.arity != arity || table.entries.len() != n.pow(arity as u32) {
                return Err(StructuralError::DimensionMismatch {
                    points: n.pow(arity as u32),
                    rows: table.entries.len(),
                });
            }
        }
        for (name, &arity) in &self.signature.functions {
            let table = self.functions.get(name).ok_or(StructuralError::UnknownPoint {
                id: name.clone(),
            })?;
            if table.arity != arity || table.entries.len() != n.pow(arity as u32) {
                return Err(StructuralError::DimensionMismatch {
                    points: n.pow(arity as u32),
                    rows: table.entries.len(),
                });
            }
            if table.entries.iter().any(|&v| v >= n) {
                return Err(StructuralError::UnknownPoint { id: name.clone() });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

/// A point map between structures over the same signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingMap {
    pub source: FinStructure,
    pub target: FinStructure,
    /// Index map source domain → target domain.
    pub map: Vec<usize>,
}

impl EmbeddingMap {
    pub fn identity(s: &FinStructure) -> Self {
        EmbeddingMap { source: s.clone(), target: s.clone(), map: (0..s.len()).collect() }
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &EmbeddingMap) -> EmbeddingMap {
        debug_assert_eq!(self.target, other.source);
        EmbeddingMap {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&i| other.map[i]).collect(),
        }
    }
}

fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for v in 0..n {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// True iff the map is an injective isometry that preserves every relation
/// value exactly and commutes with every function interpretation.
pub fn validate_embedding(e: &EmbeddingMap) -> bool {
    if e.source.signature != e.target.signature {
        return false;
    }
    let n = e.source.len();
    if e.map.len() != n || e.map.iter().any(|&m| m >= e.target.len()) {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if e.source.domain.dist(i, j) != e.target.domain.dist(e.map[i], e.map[j]) {
                return false;
            }
        }
    }
    let tn = e.target.len();
    for (name, &arity) in &e.source.signature.relations {
        let (src, tgt) = (&e.source.relations[name], &e.target.relations[name]);
        for t in tuples(n, arity) {
            let mapped: Vec<usize> = t.iter().map(|&i| e.map[i]).collect();
            if src.get(n, &t) != tgt.get(tn, &mapped) {
                return false;
            }
        }
    }
    for (name, &arity) in &e.source.signature.functions {
        let (src, tgt) = (&e.source.functions[name], &e.target.functions[name]);
        for t in tuples(n, arity) {
            let mapped: Vec<usize> = t.iter().map(|&i| e.map[i]).collect();
            if e.map[*src.get(n, &t)] != *tgt.get(tn, &mapped) {
                return false;
            }
        }
    }
    true
}

/// The substructure generated by a point set: the least function-closed
/// subset containing it, with induced interpretations. Returns the structure
/// together with the index map back into the parent.
pub fn generated_substructure(
    s: &FinStructure,
    seed: &[usize],
) -> Result<(FinStructure, Vec<usize>), StructuralError> {
    let n = s.len();
    if let Some(&bad) = seed.iter().find(|&&i| i >= n) {
        return Err(StructuralError::UnknownPoint { id: alloc::format!("#{bad}") });
    }
    let mut included = alloc::vec![false; n];
    for &i in seed {
        included[i] = true;
    }
    // Fixed-point iteration; terminates because the domain is finite.
    loop {
        let members: Vec<usize> = (0..n).filter(|&i| included[i]).collect();
        let mut changed = false;
        for (name, &arity) in &s.signature.functions {
            let table = &s.functions[name];
            for t in tuples(members.len(), arity) {
                let tuple: Vec<usize> = t.iter().map(|&k| members[k]).collect();
                let v = *table.get(n, &tuple);
                if !included[v] {
                    included[v] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let members: Vec<usize> = (0..n).filter(|&i| included[i]).collect();
    let index_of = |i: usize| members.iter().position(|&m| m == i).unwrap();
    let domain = s.domain.subspace(&members)?;
    let m = members.len();
    let mut relations = BTreeMap::new();
    for (name, &arity) in &s.signature.relations {
        let table = &s.relations[name];
        let entries = tuples(m, arity)
            .into_iter()
            .map(|t| {
                let parent: Vec<usize> = t.iter().map(|&k| members[k]).collect();
                table.get(n, &parent).clone()
            })
            .collect();
        relations.insert(name.clone(), Table { arity, entries });
    }
    let mut functions = BTreeMap::new();
    for (name, &arity) in &s.signature.functions {
        let table = &s.functions[name];
        let entries = tuples(m, arity)
            .into_iter()
            .map(|t| {
                let parent: Vec<usize> = t.iter().map(|&k| members[k]).collect();
                index_of(*table.get(n, &parent))
            })
            .collect();
        functions.insert(name.clone(), Table { arity, entries });
    }
    Ok((
        FinStructure { signature: s.signature.clone(), domain, relations, functions },
        members,
    ))
}

/// A structure together with an ordered generating tuple; the engine's
/// elements of `K_n`.
#[derive(Clone, PartialEq, Eq)]
pub struct PointedObject {
    pub object: FinStructure,
    pub tuple: Vec<usize>,
}

impl PointedObject {
    /// Builds a pointed object, checking that the tuple generates the object.
    pub fn new(object: FinStructure, tuple: Vec<usize>) -> Result<Self, StructuralError> {
        let (_, members) = generated_substructure(&object, &tuple)?;
        if members.len() != object.len() {
            return Err(StructuralError::UnknownPoint { id: "tuple does not generate".into() });
        }
        Ok(PointedObject { object, tuple })
    }

    pub fn arity(&self) -> usize {
        self.tuple.len()
    }
}

impl fmt::Debug for PointedObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointedObject[{} pts, tuple {:?}]", self.object.len(), self.tuple)
    }
}
