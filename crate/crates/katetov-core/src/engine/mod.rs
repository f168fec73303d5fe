//! The generic-chain engine: inductive systems of category objects built by
//! satisfying a deterministic dense schedule of one-point extension
//! requests, the back-and-forth refinement between two chains, upper bounds
//! for the pseudo-metric on pointed objects, and sampled limit criteria.
//!
//! Every step is verified, not trusted: a satisfied request must produce an
//! embedding `ι` of the requested pointed object with `φ_ι ◁ φ_η φ_req`
//! checked by exact rational arithmetic, where `η` is the connecting
//! morphism and `φ_req` the strict request table.

mod baf;
mod dk;
mod limit;

pub use baf::{back_and_forth, BafLevel, BafOptions, BafResult};
pub use dk::{dk_upper, DkOutcome, DkStrategy};
pub use limit::{check_limit_criteria, HomogeneitySample, LimitReport, UniversalitySample};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apx::{self, ApproximateIsometry, ApxError};
use crate::category::{CategoryError, ExtensionRequest, MetricCategory};
use crate::extq::ExtQ;
use crate::metric::FiniteMetricSpace;
use crate::rat::Rat;
use crate::structures::{EmbeddingMap, FinStructure};

/// Engine-level errors.
#[derive(Debug, Clone)]
pub enum EngineError {
    Category(CategoryError),
    Apx(ApxError),
    /// The starting approximate isometry must be strict.
    NotStrict,
    /// Growing the chain would exceed the point budget.
    Budget { needed: usize, cap: usize },
    /// A satisfied request failed its exact verification.
    RequestFailed { step: usize, detail: String },
    /// Pointed tuples must have equal length.
    TupleMismatch { left: usize, right: usize },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Category(e) => write!(f, "{e}"),
            EngineError::Apx(e) => write!(f, "{e}"),
            EngineError::NotStrict => write!(f, "starting approximate isometry is not strict"),
            EngineError::Budget { needed, cap } => {
                write!(f, "point budget exhausted: need {needed}, cap {cap}")
            }
            EngineError::RequestFailed { step, detail } => {
                write!(f, "request at step {step} failed verification: {detail}")
            }
            EngineError::TupleMismatch { left, right } => {
                write!(f, "pointed tuples have lengths {left} and {right}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EngineError {}

impl From<CategoryError> for EngineError {
    fn from(e: CategoryError) -> Self {
        EngineError::Category(e)
    }
}

impl From<ApxError> for EngineError {
    fn from(e: ApxError) -> Self {
        EngineError::Apx(e)
    }
}

/// One satisfied request in a chain's provenance log.
#[derive(Clone, Debug)]
pub struct ChainStep {
    /// Anchor point names (in the stage the request was issued against).
    pub anchors: Vec<String>,
    /// Prescribed distances to the new point.
    pub values: Vec<Rat>,
    /// Strictness slack of the request table.
    pub slack: Rat,
    /// Name of the point realizing the extension.
    pub witness: String,
    /// Whether the stage grew.
    pub grew: bool,
    /// Exact verification outcome of `φ_ι ◁ φ_η φ_req`.
    pub verified: bool,
}

/// An inductive system of category objects. Connecting morphisms are
/// point-name-preserving inclusions: each stage's point list is a prefix of
/// the next one's.
#[derive(Clone, Debug)]
pub struct Chain {
    pub category: String,
    pub seed: u64,
    pub stages: Vec<FinStructure>,
    pub log: Vec<ChainStep>,
}

impl Chain {
    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn top(&self) -> &FinStructure {
        self.stages.last().expect("chains are nonempty")
    }

    /// The connecting morphism from stage `k` into stage `l` (`k ≤ l`).
    pub fn connecting(&self, k: usize, l: usize) -> EmbeddingMap {
        assert!(k <= l && l < self.stages.len());
        EmbeddingMap {
            source: self.stages[k].clone(),
            target: self.stages[l].clone(),
            map: (0..self.stages[k].len()).collect(),
        }
    }

    /// Stage at which each point of the top object was born.
    pub fn birth_stages(&self) -> Vec<usize> {
        (0..self.top().len())
            .map(|idx| self.stages.iter().position(|s| idx < s.len()).expect("born"))
            .collect()
    }
}

/// The deterministic dense schedule: anchor sets enumerated by birth
/// frontier, then size (descending for saturating categories, ascending
/// otherwise), then lexicographically; prescribed-distance tables in the
/// category's grid order.
struct Schedule {
    frontier: usize,
    started: bool,
    pending: Vec<(Vec<usize>, Vec<Rat>)>,
    pos: usize,
}

impl Schedule {
    fn new() -> Self {
        Schedule { frontier: 0, started: false, pending: Vec::new(), pos: 0 }
    }

    fn refill<C: MetricCategory>(&mut self, cat: &C, chain: &Chain) -> bool {
        loop {
            if self.pos < self.pending.len() {
                return true;
            }
            if self.started {
                self.frontier += 1;
            }
            self.started = true;
            if self.frontier >= chain.stages.len() {
                return false;
            }
            let stage = chain.top();
            let prev_len =
                if self.frontier == 0 { 0 } else { chain.stages[self.frontier - 1].len() };
            let cur_len = chain.stages[self.frontier].len();
            self.pending.clear();
            self.pos = 0;
            if cur_len == prev_len && self.frontier > 0 {
                continue; // no points born at this frontier
            }
            let universe: Vec<usize> = (0..cur_len).collect();
            let newborn_lo = prev_len;
            let mut anchor_sets: Vec<Vec<usize>> = Vec::new();
            let max_size = cat.max_anchor_size().min(universe.len());
            for size in 0..=max_size {
                let mut sets = Vec::new();
                subsets_of_size(cur_len, size, &mut Vec::new(), &mut sets);
                for s in sets {
                    let touches_newborn =
                        self.frontier == 0 || s.iter().any(|&i| i >= newborn_lo);
                    if touches_newborn {
                        anchor_sets.push(s);
                    }
                }
            }
            if cat.anchors_descending() {
                anchor_sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            } else {
                anchor_sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            }
            self.pending = anchor_sets
                .into_iter()
                .flat_map(|anchors| {
                    cat.request_values(stage, &anchors)
                        .into_iter()
                        .map(move |values| (anchors.clone(), values))
                })
                .collect();
        }
    }

    fn next<C: MetricCategory>(
        &mut self,
        cat: &C,
        chain: &Chain,
    ) -> Option<(Vec<usize>, Vec<Rat>)> {
        if !self.refill(cat, chain) {
            return None;
        }
        let item = self.pending[self.pos].clone();
        self.pos += 1;
        Some(item)
    }
}

fn subsets_of_size(n: usize, size: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if acc.len() == size {
        out.push(acc.clone());
        return;
    }
    let start = acc.last().map_or(0, |&l| l + 1);
    for k in start..n {
        acc.push(k);
        subsets_of_size(n, size, acc, out);
        acc.pop();
    }
}

/// The abstract one-point extension object of a request: the anchor
/// subspace together with a fresh point at the prescribed distances, pointed
/// by all of its elements.
pub fn request_object(
    stage: &FinStructure,
    req: &ExtensionRequest,
) -> Result<FinStructure, EngineError> {
    let sub = stage.domain.subspace(&req.anchors).map_err(ApxError::Structural)?;
    let mut names: Vec<String> = sub.points().to_vec();
    names.push("*".to_string());
    let mut dist: Vec<Vec<Rat>> = sub.dist_table().iter().map(|r| r.to_vec()).collect();
    for (i, row) in dist.iter_mut().enumerate() {
        row.push(req.values[i].clone());
    }
    let mut last: Vec<Rat> = req.values.clone();
    last.push(Rat::zero());
    dist.push(last);
    let space = FiniteMetricSpace::new(names, dist)
        .map_err(|e| EngineError::RequestFailed { step: 0, detail: format!("{e}") })?;
    Ok(FinStructure::metric(space))
}

/// The strict approximate isometry of a request: the trivial extension to
/// `B × stage` of the distance table of the request object `B` against the
/// anchor subspace, relaxed by the slack. Strict because the slack is
/// positive.
pub fn request_table(
    stage: &FinStructure,
    req: &ExtensionRequest,
    object: &FinStructure,
) -> Result<ApproximateIsometry, EngineError> {
    let k = req.anchors.len();
    let rows = object.len();
    let mut values = Vec::with_capacity(rows);
    for b in 0..rows {
        let mut row = Vec::with_capacity(k);
        for e in 0..k {
            row.push(ExtQ::fin(object.domain.dist(b, e) + &req.slack));
        }
        values.push(row);
    }
    let anchor_space = stage.domain.subspace(&req.anchors).map_err(ApxError::Structural)?;
    let rho = ApproximateIsometry::from_parts(object.domain.clone(), anchor_space, values)
        .map_err(EngineError::Apx)?;
    let ext = apx::trivial_extension(
        &rho,
        &object.domain,
        &stage.domain,
        &(0..object.len()).collect::<Vec<_>>(),
        &req.anchors,
    )?;
    Ok(ext)
}

/// Verifies one satisfied request exactly: the witness embedding `ι` of the
/// request object must satisfy `φ_ι ◁ φ_η φ_req`.
fn verify_step(
    stage: &FinStructure,
    new_stage: &FinStructure,
    req: &ExtensionRequest,
    witness: usize,
) -> Result<(), String> {
    let object = request_object(stage, req).map_err(|e| format!("{e}"))?;
    let phi_req = request_table(stage, req, &object).map_err(|e| format!("{e}"))?;
    let inclusion: Vec<usize> = (0..stage.len()).collect();
    let eta =
        EmbeddingMap { source: stage.clone(), target: new_stage.clone(), map: inclusion.clone() };
    if !crate::structures::validate_embedding(&eta) {
        return Err("connecting morphism is not an embedding".to_string());
    }
    let mut iota_map: Vec<usize> = req.anchors.clone();
    iota_map.push(witness);
    let iota =
        EmbeddingMap { source: object.clone(), target: new_stage.clone(), map: iota_map.clone() };
    if !crate::structures::validate_embedding(&iota) {
        return Err("request witness is not an embedding".to_string());
    }
    let phi_eta = ApproximateIsometry::of_map(&stage.domain, &new_stage.domain, &inclusion)
        .map_err(|e| format!("{e}"))?;
    let composed = apx::compose(&phi_eta, &phi_req).map_err(|e| format!("{e}"))?;
    let phi_iota = ApproximateIsometry::of_map(&object.domain, &new_stage.domain, &iota_map)
        .map_err(|e| format!("{e}"))?;
    if !apx::strictly_dominates(&composed, &phi_iota) {
        return Err("witness does not strictly satisfy the request".to_string());
    }
    Ok(())
}

/// Budgets for chain construction.
#[derive(Clone, Copy, Debug)]
pub struct ChainBudget {
    /// Hard cap on the number of points of any stage.
    pub max_points: usize,
}

impl Default for ChainBudget {
    fn default() -> Self {
        ChainBudget { max_points: 512 }
    }
}

/// Builds a generic chain of `steps` stages over the category's dense
/// request schedule. Stage 0 is the seeded initial object; each further
/// stage satisfies the next request, verified exactly. Identical seeds
/// replay to identical chains.
pub fn build_generic_chain<C: MetricCategory>(
    cat: &C,
    seed: u64,
    steps: usize,
    budget: ChainBudget,
) -> Result<Chain, EngineError> {
    assert!(steps >= 1, "a chain has at least one stage");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = cat.chain_seed(&mut rng);
    if initial.len() > budget.max_points {
        return Err(EngineError::Budget { needed: initial.len(), cap: budget.max_points });
    }
    let mut chain = Chain {
        category: cat.name().to_string(),
        seed,
        stages: alloc::vec![initial],
        log: Vec::new(),
    };
    let mut schedule = Schedule::new();
    for step in 1..steps {
        let Some((anchors, values)) = schedule.next(cat, &chain) else {
            break; // schedule exhausted: nothing dense left to ask
        };
        let stage = chain.top().clone();
        let req = ExtensionRequest { anchors, values, slack: cat.request_slack() };
        let sat = cat.satisfy(&stage, &req)?;
        if sat.new_stage.len() > budget.max_points {
            return Err(EngineError::Budget {
                needed: sat.new_stage.len(),
                cap: budget.max_points,
            });
        }
        verify_step(&stage, &sat.new_stage, &req, sat.witness)
            .map_err(|detail| EngineError::RequestFailed { step, detail })?;
        chain.log.push(ChainStep {
            anchors: req.anchors.iter().map(|&a| stage.domain.points()[a].clone()).collect(),
            values: req.values.clone(),
            slack: req.slack.clone(),
            witness: sat.new_stage.domain.points()[sat.witness].clone(),
            grew: sat.grew,
            verified: true,
        });
        chain.stages.push(sat.new_stage);
    }
    Ok(chain)
}

/// The largest birth frontier whose request family the chain's schedule has
/// fully processed: stage points born up to this frontier have had every
/// anchor-set/value request satisfied. Computed by replaying the schedule
/// enumeration against the built chain.
pub fn saturated_frontier<C: MetricCategory>(cat: &C, chain: &Chain) -> Option<usize> {
    let processed = chain.log.len();
    let mut count = 0usize;
    let mut last_complete = None;
    let top = chain.top();
    for frontier in 0..chain.stages.len() {
        let prev_len = if frontier == 0 { 0 } else { chain.stages[frontier - 1].len() };
        let cur_len = chain.stages[frontier].len();
        if cur_len == prev_len && frontier > 0 {
            if count <= processed {
                last_complete = Some(frontier);
            }
            continue;
        }
        let max_size = cat.max_anchor_size().min(cur_len);
        for size in 0..=max_size {
            let mut sets = Vec::new();
            subsets_of_size(cur_len, size, &mut Vec::new(), &mut sets);
            for s in sets {
                let touches_newborn = frontier == 0 || s.iter().any(|&i| i >= prev_len);
                if touches_newborn {
                    count += cat.request_values(top, &s).len();
                }
            }
        }
        if count <= processed {
            last_complete = Some(frontier);
        } else {
            break;
        }
    }
    last_complete
}

/// True when a prescribed one-point extension is realized in `space` within
/// tolerance `eps`: some point sits within `eps` of every prescribed
/// distance.
pub fn extension_realized(
    space: &FiniteMetricSpace,
    anchors: &[usize],
    values: &[Rat],
    eps: &Rat,
) -> bool {
    (0..space.len()).any(|z| {
        anchors.iter().zip(values).all(|(&a, h)| {
            let d = space.dist(z, a);
            let diff = if d >= h { d - h } else { h - d };
            diff <= *eps
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::{FinGraphCat, RatMetricCat};
    use crate::rat::rat_int;

    #[test]
    fn single_step_chain_is_one_sampled_object() {
        let chain = build_generic_chain(&FinGraphCat, 5, 1, ChainBudget::default()).unwrap();
        assert_eq!(chain.depth(), 1);
        assert!(chain.log.is_empty());
    }

    #[test]
    fn chains_replay_deterministically() {
        let cat = RatMetricCat::default();
        let a = build_generic_chain(&cat, 42, 30, ChainBudget::default()).unwrap();
        let b = build_generic_chain(&cat, 42, 30, ChainBudget::default()).unwrap();
        assert_eq!(a.stages, b.stages);
        assert_eq!(a.log.len(), b.log.len());
        for (x, y) in a.log.iter().zip(&b.log) {
            assert_eq!(x.anchors, y.anchors);
            assert_eq!(x.values, y.values);
            assert_eq!(x.witness, y.witness);
        }
        let c = build_generic_chain(&cat, 43, 30, ChainBudget::default()).unwrap();
        assert_ne!(c.stages, a.stages);
    }

    #[test]
    fn graph_chain_realizes_all_small_requests_exactly() {
        // After enough steps every adjacency pattern over the two seed
        // vertices has an exact witness (the one-point extension property
        // over the initial stage).
        let cat = FinGraphCat;
        let chain = build_generic_chain(&cat, 3, 10, ChainBudget::default()).unwrap();
        let top = &chain.top().domain;
        for mask in 0..4u8 {
            let values: Vec<Rat> = (0..2)
                .map(|i| if mask & (1 << i) == 0 { rat_int(1) } else { rat_int(2) })
                .collect();
            assert!(
                extension_realized(top, &[0, 1], &values, &rat_int(0)),
                "pattern {mask:#b} not realized"
            );
        }
        for step in &chain.log {
            assert!(step.verified);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let err = build_generic_chain(&FinGraphCat, 3, 20, ChainBudget { max_points: 3 });
        assert!(matches!(err, Err(EngineError::Budget { .. })));
    }

    #[test]
    fn ratmetric_chain_realizes_processed_requests() {
        let cat = RatMetricCat::default();
        let chain = build_generic_chain(&cat, 11, 60, ChainBudget::default()).unwrap();
        let top = &chain.top().domain;
        for step in &chain.log {
            let anchors: Vec<usize> =
                step.anchors.iter().map(|n| top.index_of(n).unwrap()).collect();
            assert!(extension_realized(top, &anchors, &step.values, &rat_int(0)));
        }
    }
}
