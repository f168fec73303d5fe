//! Seeded instance generators for spaces and approximate isometries, used
//! by property sweeps and the batch interface. All tables produced here are
//! valid by construction and constructors re-check them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::extq::ExtQ;
use crate::metric::FiniteMetricSpace;
use crate::rat::{rat, rat_int, Rat};

use super::ApproximateIsometry;

/// A random metric space with `1..=max_points` points and distances on the
/// `1/denominator` grid, grown point by point through admissible one-point
/// extensions.
pub fn random_space(rng: &mut ChaCha8Rng, max_points: usize, denominator: i64) -> FiniteMetricSpace {
    let n = rng.gen_range(1..=max_points.max(1));
    random_space_exact(rng, n, denominator)
}

/// Same as [`random_space`] with an exact point count.
pub fn random_space_exact(rng: &mut ChaCha8Rng, n: usize, denominator: i64) -> FiniteMetricSpace {
    let grid_max = 2 * denominator; // distances up to 2
    let mut points: Vec<String> = alloc::vec!["q0".into()];
    let mut dist = alloc::vec![alloc::vec![Rat::zero()]];
    for k in 1..n {
        let mut values: Vec<Rat>;
        loop {
            values = (0..k)
                .map(|_| rat(rng.gen_range(1..=grid_max), denominator))
                .collect();
            let ok = (0..k).all(|i| {
                (0..k).all(|j| {
                    values[i] <= &dist[i][j] + &values[j] && dist[i][j] <= &values[i] + &values[j]
                })
            });
            if ok {
                break;
            }
        }
        for (i, row) in dist.iter_mut().enumerate() {
            row.push(values[i].clone());
        }
        values.push(Rat::zero());
        dist.push(values);
        points.push(format!("q{k}"));
    }
    FiniteMetricSpace::new(points, dist).expect("grown space is a metric")
}

/// A random finite-valued approximate isometry between two spaces: cross
/// distances are sampled above half of both diameters and closed by
/// shortest paths over the disjoint union, which realizes the table as the
/// distance table of a joint embedding.
pub fn random_apx(
    rng: &mut ChaCha8Rng,
    source: &FiniteMetricSpace,
    target: &FiniteMetricSpace,
    denominator: i64,
) -> ApproximateIsometry {
    let (n, m) = (source.len(), target.len());
    let mut floor = rat_int(1);
    for s in [source, target] {
        let half = s.diameter() / rat_int(2);
        if half > floor {
            floor = half;
        }
    }
    // Snap the floor up to the grid.
    let steps_floor = (&floor * rat_int(denominator)).ceil().to_integer();
    let lo: i64 = steps_floor.try_into().unwrap_or(denominator);
    let hi = 2 * lo;
    let total = n + m;
    let mut dist = alloc::vec![alloc::vec![Rat::zero(); total]; total];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = source.dist(i, j).clone();
        }
    }
    for i in 0..m {
        for j in 0..m {
            dist[n + i][n + j] = target.dist(i, j).clone();
        }
    }
    for i in 0..n {
        for j in 0..m {
            let v = rat(rng.gen_range(lo..=hi), denominator);
            dist[i][n + j] = v.clone();
            dist[n + j][i] = v;
        }
    }
    // Shortest-path closure; escape paths cost at least twice the floor, so
    // the two blocks are preserved and the cross block is the distance table
    // of a genuine joint embedding.
    for k in 0..total {
        for i in 0..total {
            for j in 0..total {
                let via = &dist[i][k] + &dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    let values = (0..n)
        .map(|i| (0..m).map(|j| ExtQ::fin(dist[i][n + j].clone())).collect())
        .collect();
    let phi = ApproximateIsometry::from_parts(source.clone(), target.clone(), values)
        .expect("shape");
    debug_assert!(phi.is_valid());
    phi
}

/// A random strictly dominated pair `(phi, psi)` with `psi ◁ phi`: `psi` is
/// a random table and `phi` a pointwise max with another one, relaxed by a
/// positive grid step.
pub fn random_strict_pair(
    rng: &mut ChaCha8Rng,
    source: &FiniteMetricSpace,
    target: &FiniteMetricSpace,
    denominator: i64,
) -> (ApproximateIsometry, ApproximateIsometry) {
    let psi = random_apx(rng, source, target, denominator);
    let other = random_apx(rng, source, target, denominator);
    // Pointwise max of separately-Katetov tables is separately Katetov.
    let values = psi
        .values()
        .iter()
        .zip(other.values())
        .map(|(r, s)| {
            r.iter().zip(s).map(|(a, b)| if a >= b { a.clone() } else { b.clone() }).collect()
        })
        .collect();
    let upper = ApproximateIsometry::from_parts(source.clone(), target.clone(), values)
        .expect("shape");
    let eps = rat(rng.gen_range(1..=denominator), denominator);
    let phi = upper.relax(&eps);
    debug_assert!(phi.is_valid());
    (phi, psi)
}
