//! Categories of finitely generated metric structures: the interface the
//! generic-chain engine drives, plus the two built-in instances.
//!
//! `FinGraphCat` is the discrete test bed: finite graphs encoded as metric
//! spaces with off-diagonal distances in `{1, 2}` (edge = 1, non-edge = 2)
//! and induced-subgraph isometries as morphisms; amalgamation is free and
//! exact. `RatMetricCat` is the class of finite metric spaces with positive
//! rational distances and isometric injections; amalgamation is the
//! shortest-path pushout, also exact. Both therefore satisfy near
//! amalgamation with `ε = 0`; the engine still verifies every witness.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::metric::FiniteMetricSpace;
use crate::rat::{rat, rat_int, Rat};
use crate::structures::{EmbeddingMap, FinStructure};

/// A one-point extension request: the dense-schedule unit. It prescribes a
/// new point at exact distances `values[k]` from the anchor points
/// `anchors[k]` of the current stage; `slack` is the strictness relaxation
/// used to form the request's approximate isometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionRequest {
    pub anchors: Vec<usize>,
    pub values: Vec<Rat>,
    pub slack: Rat,
}

/// How a request was satisfied: an exact witness already present, or the
/// stage grown by one fresh point.
#[derive(Clone, Debug)]
pub struct SatisfiedRequest {
    pub new_stage: FinStructure,
    /// Index of the point realizing the requested extension.
    pub witness: usize,
    pub grew: bool,
}

/// Engine-facing category errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CategoryError {
    NotAnObject(String),
    NotAMorphism(String),
    EmptyObject,
}

impl fmt::Display for CategoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryError::NotAnObject(why) => write!(f, "not a category object: {why}"),
            CategoryError::NotAMorphism(why) => write!(f, "not a category morphism: {why}"),
            CategoryError::EmptyObject => write!(f, "operation needs a nonempty object"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CategoryError {}

/// Joint witness in a category's own object/morphism types.
pub struct GenericJointWitness<O, M> {
    pub ambient: O,
    pub left: M,
    pub right: M,
}

/// Near-amalgamation witness in a category's own types.
pub struct GenericNapWitness<O, M> {
    pub ambient: O,
    pub eta1: M,
    pub eta2: M,
}

pub type JointWitnessOf<C> = GenericJointWitness<<C as Category>::Obj, <C as Category>::Mor>;
pub type NapWitnessOf<C> = GenericNapWitness<<C as Category>::Obj, <C as Category>::Mor>;

/// A category of finitely generated structures with joint embedding and
/// near amalgamation witnesses. Providers are deterministic given the
/// caller-supplied generator.
pub trait Category {
    type Obj;
    type Mor;

    fn name(&self) -> &'static str;
    fn is_object(&self, obj: &Self::Obj) -> Result<(), CategoryError>;
    fn is_morphism(&self, mor: &Self::Mor) -> Result<(), CategoryError>;
    fn sample_object(&self, rng: &mut ChaCha8Rng) -> Self::Obj;
    fn jep(&self, a: &Self::Obj, b: &Self::Obj) -> Result<JointWitnessOf<Self>, CategoryError>;
    fn nap(
        &self,
        i1: &Self::Mor,
        i2: &Self::Mor,
        eps: &Rat,
    ) -> Result<NapWitnessOf<Self>, CategoryError>;
}

/// The point-level interface the generic-chain engine needs: categories
/// whose objects are finite metric structures and whose dense request
/// schedule consists of one-point extensions.
pub trait MetricCategory: Category<Obj = FinStructure, Mor = EmbeddingMap> {
    /// Deterministic initial object for generic chains.
    fn chain_seed(&self, rng: &mut ChaCha8Rng) -> FinStructure;

    /// All admissible prescribed-distance tables over an anchor set of the
    /// stage, in the schedule's enumeration order.
    fn request_values(&self, stage: &FinStructure, anchors: &[usize]) -> Vec<Vec<Rat>>;

    /// Strictness slack attached to every request.
    fn request_slack(&self) -> Rat;

    /// Largest anchor-set size the dense schedule enumerates.
    fn max_anchor_size(&self) -> usize;

    /// Whether the schedule enumerates larger anchor sets first within a
    /// birth frontier (the graph category saturates whole stages that way).
    fn anchors_descending(&self) -> bool;

    /// Satisfies a request: exact witness in the stage if one exists,
    /// otherwise the stage grown by the canonical one-point extension.
    fn satisfy(
        &self,
        stage: &FinStructure,
        req: &ExtensionRequest,
    ) -> Result<SatisfiedRequest, CategoryError>;
}

// ---------------------------------------------------------------------------
// Graph category
// ---------------------------------------------------------------------------

/// Finite graphs as `{1,2}`-metric spaces; morphisms are induced-subgraph
/// isometries. Joint embedding is the disjoint union with all cross
/// distances 2; amalgamation over a shared part is free (no new edges) and
/// exact.
#[derive(Clone, Debug, Default)]
pub struct FinGraphCat;

/// Builds the metric space of a graph from its adjacency function.
pub fn graph_space(names: Vec<String>, adjacent: impl Fn(usize, usize) -> bool) -> FinStructure {
    let n = names.len();
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rat::zero()
                    } else if adjacent(i, j) || adjacent(j, i) {
                        rat_int(1)
                    } else {
                        rat_int(2)
                    }
                })
                .collect()
        })
        .collect();
    FinStructure::metric(FiniteMetricSpace::new(names, dist).expect("graph metric"))
}

fn is_graph_space(s: &FinStructure) -> Result<(), CategoryError> {
    if !s.signature.functions.is_empty() || !s.signature.relations.is_empty() {
        return Err(CategoryError::NotAnObject("graphs carry no extra symbols".into()));
    }
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i != j {
                let d = s.domain.dist(i, j);
                if *d != rat_int(1) && *d != rat_int(2) {
                    return Err(CategoryError::NotAnObject(format!(
                        "distance {} not in {{1,2}}",
                        crate::rat::fmt_rat(d)
                    )));
                }
            }
        }
    }
    Ok(())
}

impl Category for FinGraphCat {
    type Obj = FinStructure;
    type Mor = EmbeddingMap;

    fn name(&self) -> &'static str {
        "graphs"
    }

    fn is_object(&self, obj: &FinStructure) -> Result<(), CategoryError> {
        is_graph_space(obj)
    }

    fn is_morphism(&self, mor: &EmbeddingMap) -> Result<(), CategoryError> {
        self.is_object(&mor.source)?;
        self.is_object(&mor.target)?;
        if crate::structures::validate_embedding(mor) {
            Ok(())
        } else {
            Err(CategoryError::NotAMorphism("not an induced-subgraph isometry".into()))
        }
    }

    fn sample_object(&self, rng: &mut ChaCha8Rng) -> FinStructure {
        let n = rng.gen_range(1..=4usize);
        let mut adj = alloc::vec![alloc::vec![false; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let bit = rng.gen_bool(0.5);
                adj[i][j] = bit;
                adj[j][i] = bit;
            }
        }
        let names = (0..n).map(|i| format!("v{i}")).collect();
        graph_space(names, |i, j| adj[i][j])
    }

    fn jep(&self, a: &FinStructure, b: &FinStructure) -> Result<JointWitnessOf<Self>, CategoryError> {
        self.is_object(a)?;
        self.is_object(b)?;
        let (na, nb) = (a.len(), b.len());
        let names: Vec<String> = (0..na)
            .map(|i| format!("l:{}", a.domain.points()[i]))
            .chain((0..nb).map(|j| format!("r:{}", b.domain.points()[j])))
            .collect();
        let ambient = graph_space(names, |i, j| {
            if i < na && j < na {
                *a.domain.dist(i, j) == rat_int(1)
            } else if i >= na && j >= na {
                *b.domain.dist(i - na, j - na) == rat_int(1)
            } else {
                false
            }
        });
        Ok(GenericJointWitness {
            left: EmbeddingMap { source: a.clone(), target: ambient.clone(), map: (0..na).collect() },
            right: EmbeddingMap {
                source: b.clone(),
                target: ambient.clone(),
                map: (na..na + nb).collect(),
            },
            ambient,
        })
    }

    fn nap(
        &self,
        i1: &EmbeddingMap,
        i2: &EmbeddingMap,
        _eps: &Rat,
    ) -> Result<NapWitnessOf<Self>, CategoryError> {
        self.is_morphism(i1)?;
        self.is_morphism(i2)?;
        if i1.source != i2.source {
            return Err(CategoryError::NotAMorphism("cospan sources differ".into()));
        }
        // Free amalgamation: vertices of B1 plus the non-image part of B2;
        // cross edges only through the shared part.
        let b1 = &i1.target;
        let b2 = &i2.target;
        let shared_in_b2 = |v: usize| i2.map.iter().position(|&m| m == v);
        let extra: Vec<usize> = (0..b2.len()).filter(|&v| shared_in_b2(v).is_none()).collect();
        let n1 = b1.len();
        let names: Vec<String> = (0..n1)
            .map(|i| format!("l:{}", b1.domain.points()[i]))
            .chain(extra.iter().map(|&v| format!("r:{}", b2.domain.points()[v])))
            .collect();
        let pos_b2 = |v: usize| match shared_in_b2(v) {
            Some(a) => i1.map[a],
            None => n1 + extra.iter().position(|&e| e == v).unwrap(),
        };
        let edge = |i: usize, j: usize| -> bool {
            if i < n1 && j < n1 {
                return *b1.domain.dist(i, j) == rat_int(1);
            }
            // Translate amalgam indices back into B2 where possible.
            let back = |k: usize| -> Option<usize> {
                if k >= n1 {
                    Some(extra[k - n1])
                } else {
                    i1.map.iter().position(|&m| m == k).map(|a| i2.map[a])
                }
            };
            match (back(i), back(j)) {
                (Some(u), Some(v)) => *b2.domain.dist(u, v) == rat_int(1),
                _ => false,
            }
        };
        let ambient = graph_space(names, edge);
        let eta1 = EmbeddingMap {
            source: b1.clone(),
            target: ambient.clone(),
            map: (0..n1).collect(),
        };
        let eta2 = EmbeddingMap {
            source: b2.clone(),
            target: ambient.clone(),
            map: (0..b2.len()).map(pos_b2).collect(),
        };
        Ok(GenericNapWitness { ambient, eta1, eta2 })
    }
}

impl MetricCategory for FinGraphCat {
    fn chain_seed(&self, rng: &mut ChaCha8Rng) -> FinStructure {
        let edge = rng.gen_bool(0.5);
        graph_space(alloc::vec!["v0".to_string(), "v1".to_string()], move |_, _| edge)
    }

    fn request_values(&self, stage: &FinStructure, anchors: &[usize]) -> Vec<Vec<Rat>> {
        let _ = stage;
        // Every {1,2} pattern over the anchors is Katetov for a graph metric.
        let mut out = Vec::new();
        let k = anchors.len();
        for mask in 0..(1u64 << k) {
            out.push(
                (0..k)
                    .map(|i| if mask & (1 << i) == 0 { rat_int(1) } else { rat_int(2) })
                    .collect(),
            );
        }
        out
    }

    fn request_slack(&self) -> Rat {
        rat(1, 2)
    }

    fn max_anchor_size(&self) -> usize {
        usize::MAX
    }

    fn anchors_descending(&self) -> bool {
        true
    }

    fn satisfy(
        &self,
        stage: &FinStructure,
        req: &ExtensionRequest,
    ) -> Result<SatisfiedRequest, CategoryError> {
        satisfy_by_extension(stage, req, Some(rat_int(2)), "v")
    }
}

// ---------------------------------------------------------------------------
// Rational metric category
// ---------------------------------------------------------------------------

/// Finite metric spaces with positive rational distances and isometric
/// injections. The schedule parameters bound the request grid: prescribed
/// distances are multiples of `1/denominator` up to `value_cap` over anchor
/// sets of size at most `max_anchors`.
#[derive(Clone, Debug)]
pub struct RatMetricCat {
    pub denominator: i64,
    pub value_cap: Rat,
    pub max_anchors: usize,
}

impl Default for RatMetricCat {
    fn default() -> Self {
        RatMetricCat { denominator: 4, value_cap: rat_int(1), max_anchors: 3 }
    }
}

impl Category for RatMetricCat {
    type Obj = FinStructure;
    type Mor = EmbeddingMap;

    fn name(&self) -> &'static str {
        "ratmetric"
    }

    fn is_object(&self, obj: &FinStructure) -> Result<(), CategoryError> {
        if !obj.signature.functions.is_empty() || !obj.signature.relations.is_empty() {
            return Err(CategoryError::NotAnObject("metric spaces carry no extra symbols".into()));
        }
        Ok(())
    }

    fn is_morphism(&self, mor: &EmbeddingMap) -> Result<(), CategoryError> {
        if crate::structures::validate_embedding(mor) {
            Ok(())
        } else {
            Err(CategoryError::NotAMorphism("not an isometric injection".into()))
        }
    }

    fn sample_object(&self, rng: &mut ChaCha8Rng) -> FinStructure {
        let n = rng.gen_range(1..=4usize);
        self.sample_space(rng, n)
    }

    fn jep(&self, a: &FinStructure, b: &FinStructure) -> Result<JointWitnessOf<Self>, CategoryError> {
        self.is_object(a)?;
        self.is_object(b)?;
        // Constant cross distance; any constant at least half of either
        // diameter is Katetov in both variables. Fixed choice for
        // reproducibility: max(1, diam/2).
        let mut c = rat_int(1);
        for s in [a, b] {
            let half = s.domain.diameter() / rat_int(2);
            if half > c {
                c = half;
            }
        }
        let (na, nb) = (a.len(), b.len());
        let names: Vec<String> = (0..na)
            .map(|i| format!("l:{}", a.domain.points()[i]))
            .chain((0..nb).map(|j| format!("r:{}", b.domain.points()[j])))
            .collect();
        let dist = (0..na + nb)
            .map(|i| {
                (0..na + nb)
                    .map(|j| {
                        if i == j {
                            Rat::zero()
                        } else if i < na && j < na {
                            a.domain.dist(i, j).clone()
                        } else if i >= na && j >= na {
                            b.domain.dist(i - na, j - na).clone()
                        } else {
                            c.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let ambient =
            FinStructure::metric(FiniteMetricSpace::new(names, dist).expect("jep metric"));
        Ok(GenericJointWitness {
            left: EmbeddingMap { source: a.clone(), target: ambient.clone(), map: (0..na).collect() },
            right: EmbeddingMap {
                source: b.clone(),
                target: ambient.clone(),
                map: (na..na + nb).collect(),
            },
            ambient,
        })
    }

    fn nap(
        &self,
        i1: &EmbeddingMap,
        i2: &EmbeddingMap,
        _eps: &Rat,
    ) -> Result<NapWitnessOf<Self>, CategoryError> {
        self.is_morphism(i1)?;
        self.is_morphism(i2)?;
        if i1.source != i2.source {
            return Err(CategoryError::NotAMorphism("cospan sources differ".into()));
        }
        if i1.source.is_empty() {
            let w = self.jep(&i1.target, &i2.target)?;
            return Ok(GenericNapWitness { ambient: w.ambient, eta1: w.left, eta2: w.right });
        }
        // Shortest-path amalgam over the shared part.
        let b1 = &i1.target;
        let b2 = &i2.target;
        let shared_in_b2 = |v: usize| i2.map.iter().position(|&m| m == v);
        let extra: Vec<usize> = (0..b2.len()).filter(|&v| shared_in_b2(v).is_none()).collect();
        let n1 = b1.len();
        let total = n1 + extra.len();
        let names: Vec<String> = (0..n1)
            .map(|i| format!("l:{}", b1.domain.points()[i]))
            .chain(extra.iter().map(|&v| format!("r:{}", b2.domain.points()[v])))
            .collect();
        let mut dist = alloc::vec![alloc::vec![Rat::zero(); total]; total];
        for i in 0..n1 {
            for j in 0..n1 {
                dist[i][j] = b1.domain.dist(i, j).clone();
            }
        }
        for (x, &u) in extra.iter().enumerate() {
            for (y, &v) in extra.iter().enumerate() {
                dist[n1 + x][n1 + y] = b2.domain.dist(u, v).clone();
            }
        }
        for i in 0..n1 {
            for (x, &u) in extra.iter().enumerate() {
                let mut best: Option<Rat> = None;
                for a in 0..i1.source.len() {
                    let through = b1.domain.dist(i, i1.map[a]) + b2.domain.dist(i2.map[a], u);
                    if best.as_ref().is_none_or(|b| through < *b) {
                        best = Some(through);
                    }
                }
                let d = best.expect("nonempty shared part");
                dist[i][n1 + x] = d.clone();
                dist[n1 + x][i] = d;
            }
        }
        let ambient = FinStructure::metric(
            FiniteMetricSpace::new(names, dist)
                .map_err(|e| CategoryError::NotAnObject(format!("amalgam failed: {e}")))?,
        );
        let eta1 = EmbeddingMap {
            source: b1.clone(),
            target: ambient.clone(),
            map: (0..n1).collect(),
        };
        let eta2 = EmbeddingMap {
            source: b2.clone(),
            target: ambient.clone(),
            map: (0..b2.len()).map(pos_b2_map(&i1.map, &i2.map, &extra, n1)).collect(),
        };
        Ok(GenericNapWitness { ambient, eta1, eta2 })
    }
}

fn pos_b2_map<'a>(
    map1: &'a [usize],
    map2: &'a [usize],
    extra: &'a [usize],
    n1: usize,
) -> impl Fn(usize) -> usize + 'a {
    move |v: usize| match map2.iter().position(|&m| m == v) {
        Some(a) => map1[a],
        None => n1 + extra.iter().position(|&e| e == v).unwrap(),
    }
}

impl RatMetricCat {
    /// Iteratively grows a random space by one-point Katetov extensions over
    /// the request grid, so every sample is a valid object by construction.
    fn sample_space(&self, rng: &mut ChaCha8Rng, n: usize) -> FinStructure {
        let grid: Vec<Rat> = self.grid_values();
        let mut points: Vec<String> = alloc::vec!["p0".to_string()];
        let mut dist = alloc::vec![alloc::vec![Rat::zero()]];
        for k in 1..n {
            let mut values: Vec<Rat> = Vec::new();
            loop {
                values.clear();
                for _ in 0..k {
                    values.push(grid[rng.gen_range(0..grid.len())].clone());
                }
                if katetov_on(&dist, &values) {
                    break;
                }
            }
            for (i, row) in dist.iter_mut().enumerate() {
                row.push(values[i].clone());
            }
            values.push(Rat::zero());
            dist.push(values);
            points.push(format!("p{k}"));
        }
        FinStructure::metric(FiniteMetricSpace::new(points, dist).expect("sampled metric"))
    }

    fn grid_values(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        let mut k = 1i64;
        loop {
            let v = rat(k, self.denominator);
            if v > self.value_cap {
                break;
            }
            out.push(v);
            k += 1;
        }
        out
    }
}

fn katetov_on(dist: &[Vec<Rat>], values: &[Rat]) -> bool {
    let k = values.len();
    for i in 0..k {
        for j in 0..k {
            if values[i] > &dist[i][j] + &values[j] {
                return false;
            }
            if dist[i][j] > &values[i] + &values[j] {
                return false;
            }
        }
    }
    true
}

impl MetricCategory for RatMetricCat {
    fn chain_seed(&self, rng: &mut ChaCha8Rng) -> FinStructure {
        self.sample_space(rng, 3)
    }

    fn request_values(&self, stage: &FinStructure, anchors: &[usize]) -> Vec<Vec<Rat>> {
        let grid = self.grid_values();
        let k = anchors.len();
        let mut out = Vec::new();
        if k == 0 {
            out.push(Vec::new());
            return out;
        }
        let mut idx = alloc::vec![0usize; k];
        loop {
            let values: Vec<Rat> = idx.iter().map(|&i| grid[i].clone()).collect();
            let ok = {
                let mut good = true;
                'outer: for a in 0..k {
                    for b in 0..k {
                        let d = stage.domain.dist(anchors[a], anchors[b]);
                        if values[a] > d + &values[b] || *d > &values[a] + &values[b] {
                            good = false;
                            break 'outer;
                        }
                    }
                }
                good
            };
            if ok {
                out.push(values);
            }
            // Odometer over the grid.
            let mut pos = k;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < grid.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn request_slack(&self) -> Rat {
        rat(1, 2 * self.denominator)
    }

    fn max_anchor_size(&self) -> usize {
        self.max_anchors
    }

    fn anchors_descending(&self) -> bool {
        false
    }

    fn satisfy(
        &self,
        stage: &FinStructure,
        req: &ExtensionRequest,
    ) -> Result<SatisfiedRequest, CategoryError> {
        satisfy_by_extension(stage, req, None, "p")
    }
}

/// Shared one-point satisfier: search for an exact in-place witness, else
/// grow by the canonical extension `x ↦ min_e (h(e) + d(e, x))`, optionally
/// capped (graphs cap at 2, which is what free extension produces anyway).
fn satisfy_by_extension(
    stage: &FinStructure,
    req: &ExtensionRequest,
    cap: Option<Rat>,
    prefix: &str,
) -> Result<SatisfiedRequest, CategoryError> {
    let n = stage.len();
    if req.anchors.iter().any(|&a| a >= n) || req.anchors.len() != req.values.len() {
        return Err(CategoryError::NotAnObject("request anchors out of range".into()));
    }
    if req.anchors.is_empty() {
        if n == 0 {
            return Err(CategoryError::EmptyObject);
        }
        return Ok(SatisfiedRequest { new_stage: stage.clone(), witness: 0, grew: false });
    }
    // Exact witness already present?
    for z in 0..n {
        let matches =
            req.anchors.iter().zip(&req.values).all(|(&a, h)| stage.domain.dist(z, a) == h);
        if matches {
            return Ok(SatisfiedRequest { new_stage: stage.clone(), witness: z, grew: false });
        }
    }
    // Canonical extension of the prescribed distances to the whole stage.
    let mut extended: Vec<Rat> = Vec::with_capacity(n);
    for x in 0..n {
        let mut best: Option<Rat> = None;
        for (&a, h) in req.anchors.iter().zip(&req.values) {
            let v = h + stage.domain.dist(a, x);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        let mut v = best.expect("nonempty anchors");
        if let Some(c) = &cap {
            if v > *c {
                v = c.clone();
            }
        }
        extended.push(v);
    }
    let names: Vec<String> = stage.domain.points().to_vec();
    let mut fresh = n;
    let fresh_name = loop {
        let candidate = format!("{prefix}{fresh}");
        if !names.contains(&candidate) {
            break candidate;
        }
        fresh += 1;
    };
    let space = stage
        .domain
        .extended(fresh_name, &extended)
        .map_err(|e| CategoryError::NotAnObject(format!("extension failed: {e}")))?;
    Ok(SatisfiedRequest { new_stage: FinStructure::metric(space), witness: n, grew: true })
}
