//! Algebraic laws of approximate isometries checked exactly against
//! brute-force oracles on seeded random instances.

use katetov_core::apx::sampling::{random_apx, random_space, random_strict_pair};
use katetov_core::apx::{
    self, amalgamate, compose, from_joint_embedding, is_epsilon_total, restrict,
    strict_interpolant, strictly_dominates, totality_defect, trivial_extension,
    verify_perturbation, ApproximateIsometry, PerturbationOutcome,
};
use katetov_core::extq::ExtQ;
use katetov_core::rat::{rat, rat_int, Rat};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Straight-loop min-plus oracle, independent of the library's compose.
fn min_plus_oracle(
    psi: &ApproximateIsometry,
    phi: &ApproximateIsometry,
) -> Vec<Vec<ExtQ>> {
    let (n, k, m) = (phi.source().len(), phi.target().len(), psi.target().len());
    let mut out = vec![vec![ExtQ::Inf; m]; n];
    for x in 0..n {
        for z in 0..m {
            for y in 0..k {
                let v = &(phi.value(x, y).clone() + psi.value(y, z).clone());
                if *v < out[x][z] {
                    out[x][z] = v.clone();
                }
            }
        }
    }
    out
}

#[test]
fn compose_matches_oracle_and_is_associative() {
    let mut r = rng(101);
    for _ in 0..150 {
        let x = random_space(&mut r, 5, 16);
        let y = random_space(&mut r, 5, 16);
        let z = random_space(&mut r, 5, 16);
        let w = random_space(&mut r, 5, 16);
        let phi = random_apx(&mut r, &x, &y, 16);
        let psi = random_apx(&mut r, &y, &z, 16);
        let theta = random_apx(&mut r, &z, &w, 16);
        let comp = compose(&psi, &phi).unwrap();
        assert_eq!(comp.values(), &min_plus_oracle(&psi, &phi)[..]);
        assert!(comp.is_valid(), "composition stays separately Katetov");
        let left = compose(&theta, &comp).unwrap();
        let right = compose(&compose(&theta, &psi).unwrap(), &phi).unwrap();
        assert_eq!(left, right);
    }
}

#[test]
fn joint_embedding_identity_phi_eta_star_phi_iota() {
    let mut r = rng(102);
    for _ in 0..100 {
        let x = random_space(&mut r, 4, 8);
        let y = random_space(&mut r, 4, 8);
        let phi = random_apx(&mut r, &x, &y, 8);
        let w = amalgamate(&phi).unwrap();
        let phi_back = from_joint_embedding(&w).unwrap();
        assert_eq!(phi_back, phi, "amalgamation realizes the table exactly");
        // phi_{iota,eta} = phi_eta^* phi_iota over the ambient space.
        let ambient = &w.ambient;
        let phi_iota = ApproximateIsometry::of_map(&w.source, ambient, &w.iota).unwrap();
        let phi_eta = ApproximateIsometry::of_map(&w.target, ambient, &w.eta).unwrap();
        let via = compose(&phi_eta.adjoint(), &phi_iota).unwrap();
        assert_eq!(via, phi_back);
    }
}

#[test]
fn adjoint_is_an_anti_homomorphism() {
    let mut r = rng(103);
    for _ in 0..100 {
        let x = random_space(&mut r, 4, 8);
        let y = random_space(&mut r, 4, 8);
        let z = random_space(&mut r, 4, 8);
        let phi = random_apx(&mut r, &x, &y, 8);
        let psi = random_apx(&mut r, &y, &z, 8);
        let comp = compose(&psi, &phi).unwrap();
        let via_adjoints = compose(&phi.adjoint(), &psi.adjoint()).unwrap();
        assert_eq!(comp.adjoint(), via_adjoints);
    }
}

#[test]
fn relaxation_commutes_with_composition() {
    let mut r = rng(104);
    for _ in 0..100 {
        let x = random_space(&mut r, 4, 8);
        let y = random_space(&mut r, 4, 8);
        let z = random_space(&mut r, 4, 8);
        let phi = random_apx(&mut r, &x, &y, 8);
        let psi = random_apx(&mut r, &y, &z, 8);
        let eps = rat(r.gen_range(0..5), 8);
        let delta = rat(r.gen_range(0..5), 8);
        let lhs = compose(&psi.relax(&eps), &phi.relax(&delta)).unwrap();
        let rhs = compose(&psi, &phi).unwrap().relax(&(&eps + &delta));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn trivial_extension_is_the_largest_with_given_restriction() {
    let mut r = rng(105);
    for _ in 0..80 {
        let x = random_space(&mut r, 5, 8);
        let y = random_space(&mut r, 5, 8);
        let xs: Vec<usize> = (0..x.len()).filter(|_| r.gen_bool(0.6)).collect();
        let ys: Vec<usize> = (0..y.len()).filter(|_| r.gen_bool(0.6)).collect();
        let phi = random_apx(&mut r, &x, &y, 8);
        let psi = restrict(&phi, &xs, &ys).unwrap();
        let ext = trivial_extension(&psi, &x, &y, &xs, &ys).unwrap();
        assert!(ext.is_valid());
        // Restriction of the extension gives psi back.
        assert_eq!(restrict(&ext, &xs, &ys).unwrap(), psi);
        // Maximality: theta <= ext iff restrict(theta) <= psi.
        for _ in 0..4 {
            let theta = random_apx(&mut r, &x, &y, 8);
            let lhs = theta.le(&ext);
            let rhs = restrict(&theta, &xs, &ys).unwrap().le(&psi);
            assert_eq!(lhs, rhs);
        }
        // The original table is one such theta.
        assert!(phi.le(&ext));
    }
}

#[test]
fn restriction_equals_double_extension_round_trip() {
    let mut r = rng(106);
    for _ in 0..60 {
        let x = random_space(&mut r, 5, 8);
        let y = random_space(&mut r, 4, 8);
        let xs: Vec<usize> = (0..x.len()).filter(|_| r.gen_bool(0.5)).collect();
        let ys: Vec<usize> = (0..y.len()).filter(|_| r.gen_bool(0.5)).collect();
        let phi = random_apx(&mut r, &x, &y, 8);
        let sub = restrict(&phi, &xs, &ys).unwrap();
        let ext = trivial_extension(&sub, &x, &y, &xs, &ys).unwrap();
        assert_eq!(restrict(&ext, &xs, &ys).unwrap(), sub);
    }
}

#[test]
fn totality_defect_routes_agree_and_bound_monotone_statement() {
    let mut r = rng(107);
    for _ in 0..150 {
        let x = random_space(&mut r, 5, 16);
        let y = random_space(&mut r, 5, 16);
        let phi = random_apx(&mut r, &x, &y, 16);
        // Both internal routes agree (asserted inside); cross-check the
        // max-min value with a direct loop here.
        let defect = totality_defect(&phi);
        let mut oracle = ExtQ::zero();
        for i in 0..x.len() {
            let mut row = ExtQ::Inf;
            for j in 0..y.len() {
                if phi.value(i, j) < &row {
                    row = phi.value(i, j).clone();
                }
            }
            if row > oracle {
                oracle = row;
            }
        }
        assert_eq!(defect, oracle);
        // The monotone statement: psi <= phi and phi eps-total imply psi
        // eps-total. psi = phi with one row minimum lowered.
        let psi = restrict(&phi, &(0..x.len()).collect::<Vec<_>>(), &(0..y.len()).collect::<Vec<_>>())
            .unwrap();
        if let ExtQ::Fin(eps) = defect {
            assert!(is_epsilon_total(&phi, &eps));
            assert!(is_epsilon_total(&psi, &eps));
        }
    }
}

#[test]
fn zero_bijective_tables_come_from_bijective_isometries() {
    let mut r = rng(108);
    for _ in 0..60 {
        let x = random_space(&mut r, 5, 8);
        // Build phi_alpha for a random permutation alpha of x and check the
        // converse reconstruction.
        let mut perm: Vec<usize> = (0..x.len()).collect();
        for i in (1..perm.len()).rev() {
            let j = r.gen_range(0..=i);
            perm.swap(i, j);
        }
        // alpha must be an isometry for phi_alpha to be zero-bijective.
        let iso = (0..x.len()).all(|i| {
            (0..x.len()).all(|j| x.dist(i, j) == x.dist(perm[i], perm[j]))
        });
        if !iso {
            continue;
        }
        let phi = ApproximateIsometry::of_map(&x, &x, &perm).unwrap();
        assert!(apx::is_epsilon_bijective(&phi, &Rat::zero()));
        // Reconstruct the map from the zeros of the table.
        let mut alpha = vec![usize::MAX; x.len()];
        for i in 0..x.len() {
            for j in 0..x.len() {
                if phi.value(i, j).is_zero() {
                    assert_eq!(alpha[i], usize::MAX, "zero witness unique per row");
                    alpha[i] = j;
                }
            }
        }
        assert_eq!(alpha, perm);
        for i in 0..x.len() {
            for j in 0..x.len() {
                assert_eq!(phi.value(i, j), &ExtQ::fin(x.dist(alpha[i], j).clone()));
            }
        }
    }
}

#[test]
fn strict_interpolant_postconditions_hold_on_random_pairs() {
    let mut r = rng(109);
    for _ in 0..120 {
        let x = random_space(&mut r, 4, 8);
        let y = random_space(&mut r, 4, 8);
        let (phi, psi) = random_strict_pair(&mut r, &x, &y, 8);
        let rho = strict_interpolant(&phi, &psi).unwrap();
        assert!(rho.is_valid());
        assert!(rho.is_finite_valued());
        assert!(strictly_dominates(&rho, &psi));
        assert!(strictly_dominates(&phi, &rho));
    }
}

#[test]
fn perturbation_inequality_holds_under_the_hypothesis() {
    let mut r = rng(110);
    let mut holds = 0;
    for _ in 0..120 {
        let x = random_space(&mut r, 6, 8);
        let y = random_space(&mut r, 6, 8);
        let phi = random_apx(&mut r, &x, &y, 8);
        let x0: Vec<usize> = (0..x.len()).filter(|_| r.gen_bool(0.5)).collect();
        let y0: Vec<usize> = (0..y.len()).filter(|_| r.gen_bool(0.5)).collect();
        if x0.is_empty() || y0.is_empty() {
            continue;
        }
        let eps = rat(r.gen_range(1..=16), 4);
        let fifth = &eps / rat_int(5);
        // Moved sets: points within eps/5 of the base sets (hypothesis holds
        // by construction).
        let x0p: Vec<usize> = (0..x.len())
            .filter(|&p| x0.iter().any(|&b| x.dist(p, b) <= &fifth) && r.gen_bool(0.8))
            .collect();
        let y0p: Vec<usize> = (0..y.len())
            .filter(|&p| y0.iter().any(|&b| y.dist(p, b) <= &fifth) && r.gen_bool(0.8))
            .collect();
        let out = verify_perturbation(&phi, &x0, &y0, &x0p, &y0p, &eps).unwrap();
        assert_eq!(out, PerturbationOutcome::Holds);
        holds += 1;
    }
    assert!(holds > 50, "enough instances exercised the hypothesis");
}

proptest! {
    #[test]
    fn quotient_of_closed_random_tables_is_a_metric(
        n in 1usize..6,
        raw in proptest::collection::vec(0u8..12, 36),
    ) {
        // Symmetrize, zero the diagonal, close under shortest paths: a
        // pseudo-metric; its quotient must validate as a metric space and
        // project isometrically.
        let mut dist = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = raw[(i.min(j) * 6 + i.max(j)) % 36] as i64;
                    dist[i][j] = rat(v, 4);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = &dist[i][k] + &dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let pseudo = katetov_core::metric::PseudoMetricSpace::new(points, dist.clone()).unwrap();
        let (space, projection) = pseudo.quotient();
        let report = katetov_core::metric::validate_metric(
            space.points(),
            space.dist_table(),
        ).unwrap();
        prop_assert!(report.is_valid());
        for i in 0..n {
            for j in 0..n {
                let pi = space.index_of(&projection[&format!("p{i}")]).unwrap();
                let pj = space.index_of(&projection[&format!("p{j}")]).unwrap();
                prop_assert_eq!(space.dist(pi, pj), &dist[i][j]);
            }
        }
    }

    #[test]
    fn compose_preserves_validity_on_tiny_tables(seed in 0u64..500) {
        let mut r = rng(seed);
        let x = random_space(&mut r, 3, 4);
        let y = random_space(&mut r, 3, 4);
        let z = random_space(&mut r, 3, 4);
        let phi = random_apx(&mut r, &x, &y, 4);
        let psi = random_apx(&mut r, &y, &z, 4);
        prop_assert!(compose(&psi, &phi).unwrap().is_valid());
    }
}
