//! Engine-level properties: amalgamation witnesses for both built-in
//! categories, pseudo-metric bounds against brute force, and the graph
//! back-and-forth against an independent isomorphism-extension search.

use katetov_core::category::{Category, FinGraphCat, MetricCategory, RatMetricCat};
use katetov_core::engine::{
    back_and_forth, build_generic_chain, dk_upper, BafOptions, Chain, ChainBudget, DkOutcome,
    DkStrategy,
};
use katetov_core::extq::ExtQ;
use katetov_core::metric::FiniteMetricSpace;
use katetov_core::rat::{rat_int, Rat};
use katetov_core::structures::{validate_embedding, EmbeddingMap, PointedObject};
use katetov_core::ApproximateIsometry;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random cospan in a metric category: one object embedded into two joint
/// extensions.
fn random_cospan<C: MetricCategory>(
    cat: &C,
    r: &mut ChaCha8Rng,
) -> (EmbeddingMap, EmbeddingMap) {
    let a = cat.sample_object(r);
    let c1 = cat.sample_object(r);
    let c2 = cat.sample_object(r);
    let w1 = cat.jep(&a, &c1).unwrap();
    let w2 = cat.jep(&a, &c2).unwrap();
    (w1.left, w2.left)
}

#[test]
fn nap_witnesses_are_exact_for_both_categories() {
    // Both built-in categories amalgamate exactly; 200 sampled cospans each.
    let graph = FinGraphCat;
    let metric = RatMetricCat::default();
    let mut r = rng(201);
    for k in 0..200 {
        let (i1, i2) = if k % 2 == 0 {
            random_cospan(&graph, &mut r)
        } else {
            random_cospan(&metric, &mut r)
        };
        let w = if k % 2 == 0 {
            graph.nap(&i1, &i2, &rat_int(1)).unwrap()
        } else {
            metric.nap(&i1, &i2, &rat_int(1)).unwrap()
        };
        assert!(validate_embedding(&w.eta1));
        assert!(validate_embedding(&w.eta2));
        for a in 0..i1.source.len() {
            let p1 = w.eta1.map[i1.map[a]];
            let p2 = w.eta2.map[i2.map[a]];
            assert_eq!(p1, p2, "exact amalgamation identifies the shared part");
        }
        if k % 2 == 0 {
            graph.is_object(&w.ambient).unwrap();
        }
    }
}

#[test]
fn dk_bounds_satisfy_the_triangle_inequality_when_exhaustive() {
    let strategy = DkStrategy::ExhaustiveOverlap { values: vec![rat_int(1), rat_int(2)] };
    let mut r = rng(202);
    let cat = FinGraphCat;
    let mut checked = 0;
    for _ in 0..30 {
        let mk = |r: &mut ChaCha8Rng| {
            // Pointed objects over the empty signature are generated by
            // their whole point set; take the induced two-point subgraph.
            let g = cat.sample_object(r);
            let t = g.len().min(2);
            let (sub, _) = katetov_core::structures::generated_substructure(
                &g,
                &(0..t).collect::<Vec<_>>(),
            )
            .unwrap();
            PointedObject::new(sub, (0..t).collect()).ok()
        };
        let (Some(a), Some(b), Some(c)) = (mk(&mut r), mk(&mut r), mk(&mut r)) else {
            continue;
        };
        if a.tuple.len() != b.tuple.len() || b.tuple.len() != c.tuple.len() {
            continue;
        }
        let get = |x: &PointedObject, y: &PointedObject| -> Option<DkOutcome> {
            let out = dk_upper(&strategy, x, y, 200_000, 1).unwrap();
            out.exhaustive.then_some(out)
        };
        let (Some(ab), Some(bc), Some(ac)) = (get(&a, &b), get(&b, &c), get(&a, &c)) else {
            continue;
        };
        assert!(
            ac.bound <= &ab.bound + &bc.bound,
            "triangle inequality for converged searches"
        );
        checked += 1;
    }
    assert!(checked >= 10);
}

/// Independent oracle: depth-first search for a partial isometry between the
/// two final stages covering both compared stages.
fn oracle_partial_isometry(
    m: &FiniteMetricSpace,
    n: &FiniteMetricSpace,
    x_target: usize,
    y_target: usize,
) -> Option<Vec<(usize, usize)>> {
    fn extend(
        m: &FiniteMetricSpace,
        n: &FiniteMetricSpace,
        x_target: usize,
        y_target: usize,
        pins: &mut Vec<(usize, usize)>,
    ) -> bool {
        // Next uncovered source point, then uncovered target point.
        let missing_x = (0..x_target).find(|x| pins.iter().all(|&(px, _)| px != *x));
        let missing_y = (0..y_target).find(|y| pins.iter().all(|&(_, py)| py != *y));
        match (missing_x, missing_y) {
            (None, None) => true,
            (Some(x), _) => {
                for y in 0..n.len() {
                    if pins.iter().any(|&(_, py)| py == y) {
                        continue;
                    }
                    if pins.iter().all(|&(px, py)| m.dist(x, px) == n.dist(y, py)) {
                        pins.push((x, y));
                        if extend(m, n, x_target, y_target, pins) {
                            return true;
                        }
                        pins.pop();
                    }
                }
                false
            }
            (None, Some(y)) => {
                for x in 0..m.len() {
                    if pins.iter().any(|&(px, _)| px == x) {
                        continue;
                    }
                    if pins.iter().all(|&(px, py)| m.dist(x, px) == n.dist(y, py)) {
                        pins.push((x, y));
                        if extend(m, n, x_target, y_target, pins) {
                            return true;
                        }
                        pins.pop();
                    }
                }
                false
            }
        }
    }
    let mut pins = Vec::new();
    extend(m, n, x_target, y_target, &mut pins).then_some(pins)
}

#[test]
fn back_and_forth_agrees_with_the_oracle_on_graph_chains() {
    for seed in 0..12u64 {
        let m = build_generic_chain(&FinGraphCat, 1000 + seed, 6, ChainBudget { max_points: 12 })
            .unwrap();
        let n = build_generic_chain(&FinGraphCat, 2000 + seed, 6, ChainBudget { max_points: 12 })
            .unwrap();
        let phi0 = ApproximateIsometry::constant(
            m.stages[0].domain.clone(),
            n.stages[0].domain.clone(),
            ExtQ::from_int(3),
        );
        let res = back_and_forth(&m, &n, &phi0, BafOptions::default()).unwrap();
        let oracle = oracle_partial_isometry(
            &m.top().domain,
            &n.top().domain,
            m.stages[0].len(),
            n.stages[0].len(),
        );
        assert_eq!(res.complete, oracle.is_some(), "seed {seed}");
        if res.complete {
            assert_eq!(res.map_distortion, Rat::zero());
            // The pinned map is itself a partial isometry on the names.
            let m_top = &m.top().domain;
            let n_top = &n.top().domain;
            for (a, b) in &res.pins {
                for (c, d) in &res.pins {
                    let (ia, ic) = (m_top.index_of(a).unwrap(), m_top.index_of(c).unwrap());
                    let (ib, id) = (n_top.index_of(b).unwrap(), n_top.index_of(d).unwrap());
                    assert_eq!(m_top.dist(ia, ic), n_top.dist(ib, id));
                }
            }
            for level in &res.levels {
                assert!(level.domination_verified);
            }
        }
    }
}

#[test]
fn ratmetric_self_back_and_forth_reaches_the_schedule_defect() {
    let cat = RatMetricCat::default();
    let chain = build_generic_chain(&cat, 77, 20, ChainBudget::default()).unwrap();
    let phi0 = ApproximateIsometry::identity(&chain.stages[0].domain).relax(&rat_int(1));
    let res = back_and_forth(&chain, &chain, &phi0, BafOptions::default()).unwrap();
    assert!(res.complete);
    assert_eq!(res.map_distortion, Rat::zero());
    let last = res.levels.last().unwrap();
    assert!(last.totality_defect <= ExtQ::fin(last.weight.clone()));
}

#[test]
fn graph_chain_schedule_exhausts_small_requests() {
    // Enough steps to run through every request over graphs with at most
    // three vertices anchored in the seed stage; each must be realized
    // exactly (the amalgamation tolerance of this category is zero).
    let cat = FinGraphCat;
    let chain = build_generic_chain(&cat, 31, 12, ChainBudget::default()).unwrap();
    let top = &chain.top().domain;
    for anchors in [vec![0usize], vec![1], vec![0, 1]] {
        for values in cat.request_values(chain.top(), &anchors) {
            assert!(
                katetov_core::engine::extension_realized(top, &anchors, &values, &Rat::zero()),
                "request over {anchors:?} with {values:?} unrealized"
            );
        }
    }
}

#[test]
fn chain_connecting_morphisms_commute() {
    let chain = build_generic_chain(&RatMetricCat::default(), 3, 12, ChainBudget::default())
        .unwrap();
    let d = chain.depth();
    let mut r = rng(204);
    for _ in 0..12 {
        let i = r.gen_range(0..d);
        let j = r.gen_range(i..d);
        let k = r.gen_range(j..d);
        let direct = chain.connecting(i, k);
        let composed = chain.connecting(i, j).then(&chain.connecting(j, k));
        assert_eq!(direct.map, composed.map);
        assert!(validate_embedding(&direct));
    }
}

#[test]
fn limit_report_distinguishes_generic_from_stalled_chains() {
    let generic = build_generic_chain(&FinGraphCat, 2, 30, ChainBudget::default()).unwrap();
    let report = katetov_core::engine::check_limit_criteria(&FinGraphCat, &generic, 8, 42);
    assert!(report.all_universal());
    assert!(report.all_homogeneous());

    let stalled = Chain {
        category: "graphs".into(),
        seed: 0,
        stages: vec![generic.stages[0].clone()],
        log: vec![],
    };
    let report = katetov_core::engine::check_limit_criteria(&FinGraphCat, &stalled, 12, 42);
    assert!(!report.all_universal());
}
