//! Floating-point verification of the almost-commuting partial-trace bound:
//! for `a ∈ M_m ⊗ M_n`, if every commutator with `1 ⊗ e_ij` has operator
//! norm below `ε`, then `a` lies within `n²·ε` of its `(1 ⊗ tr)`
//! conditional expectation. This is the only floating-point module of the
//! workspace; operator norms are largest singular values computed by a
//! bundled cyclic-Jacobi eigensolver on the Gram matrix (accurate far below
//! the fixed tolerances at these sizes, dimension ≤ 64).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Idempotence / trace-agreement tolerance.
pub const PROJECTION_TOL: f64 = 1e-12;
/// Slack added to the measured commutator defect in the bound check.
pub const BOUND_SLACK: f64 = 1e-9;

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Normalized trace `tr(a) / dim`.
    pub fn normalized_trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            t += self[(i, i)];
        }
        t / self.rows as f64
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Operator norm: the largest singular value, via the Gram matrix.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        hermitian_max_eig(&gram).max(0.0).sqrt()
    }
}

/// Largest eigenvalue of a Hermitian matrix: Householder tridiagonalization
/// followed by implicit-shift QL on the real tridiagonal form. Eigenvalues
/// only, no vectors; the phases of the sub-diagonal are absorbed by a
/// diagonal similarity, which leaves the spectrum untouched.
fn hermitian_max_eig(m: &CMatrix) -> f64 {
    let n = m.rows;
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m[(0, 0)].re;
    }
    let mut a = m.clone();
    let mut diag = vec![0.0f64; n];
    let mut sub = vec![0.0f64; n.max(1) - 1];
    // Reduce column k below the diagonal with a Householder reflection
    // H = I - 2 u u*; the Hermitian update is A <- A - 2 q u* - 2 u q*
    // with p = A u, beta = u* p (real), q = p - beta u.
    for k in 0..n.saturating_sub(2) {
        let mut norm_sq = 0.0;
        for i in (k + 1)..n {
            norm_sq += a[(i, k)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm < 1e-300 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 1e-300 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        // u = (x - alpha e1) / ||x - alpha e1||, supported on rows k+1..n.
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            u[i] = a[(i, k)];
        }
        let unorm_sq: f64 = u[(k + 1)..n].iter().map(|z| z.norm_sqr()).sum();
        if unorm_sq < 1e-300 {
            continue;
        }
        let inv = 1.0 / unorm_sq.sqrt();
        for z in u[(k + 1)..n].iter_mut() {
            *z *= inv;
        }
        // p = A u (only rows/cols >= k matter; A is Hermitian).
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        for i in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for l in (k + 1)..n {
                s += a[(i, l)] * u[l];
            }
            p[i] = s;
        }
        let mut beta = 0.0;
        for i in (k + 1)..n {
            beta += (u[i].conj() * p[i]).re;
        }
        let q: Vec<Complex64> = (0..n).map(|i| p[i] - beta * u[i]).collect();
        for i in k..n {
            for l in k..n {
                let delta = 2.0 * (q[i] * u[l].conj() + u[i] * q[l].conj());
                a[(i, l)] -= delta;
            }
        }
    }
    for i in 0..n {
        diag[i] = a[(i, i)].re;
    }
    for i in 0..n - 1 {
        sub[i] = a[(i + 1, i)].norm();
    }
    tridiagonal_max_eig(&mut diag, &mut sub)
}

/// Largest eigenvalue of a real symmetric tridiagonal matrix by the
/// implicit-shift QL iteration (eigenvalues only).
fn tridiagonal_max_eig(d: &mut [f64], e_in: &mut [f64]) -> f64 {
    let n = d.len();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(&e_in[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a negligible sub-diagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest eigenvalue by cyclic Jacobi rotations: the slow second route,
/// kept as the cross-check oracle for the QL path.
#[cfg(test)]
fn jacobi_max_eig(m: &CMatrix) -> f64 {
    let n = m.rows;
    if n == 0 {
        return 0.0;
    }
    let mut a = m.clone();
    // Sweep until the off-diagonal mass is negligible.
    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        let scale: f64 = (0..n).map(|i| a[(i, i)].re.abs()).sum::<f64>().max(1e-300);
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm_sqr() < 1e-300 {
                    continue;
                }
                // Unitary 2x2 diagonalization of the Hermitian block
                // [app, apq; apq*, aqq].
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let abs = apq.norm();
                let phase = apq / abs;
                let theta = 0.5 * (2.0 * abs).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // Column rotation: columns p and q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * phase.conj() * s;
                    a[(i, q)] = -aip * phase * s + aiq * c;
                }
                // Row rotation: rows p and q.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * phase * s;
                    a[(q, j)] = -apj * phase.conj() * s + aqj * c;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).fold(f64::NEG_INFINITY, f64::max)
}

/// Matrix unit `e_ij` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// The `(i,j)` block of `a ∈ M_m ⊗ M_n` over the second factor's units:
/// `a = Σ a_ij ⊗ e_ij` with `a_ij ∈ M_m`.
fn block(a: &CMatrix, m: usize, n: usize, i: usize, j: usize) -> CMatrix {
    let mut out = CMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            out[(p, q)] = a[(p * n + i, q * n + j)];
        }
    }
    out
}

/// The conditional expectation `(1 ⊗ tr)(a) = (Σ_k a_kk / n) ⊗ 1`: the
/// projection of `M_m ⊗ M_n` onto `M_m ⊗ 1`.
pub fn partial_trace_projection(a: &CMatrix, m: usize, n: usize) -> CMatrix {
    assert_eq!(a.rows, m * n);
    assert_eq!(a.cols, m * n);
    let mut avg = CMatrix::zeros(m, m);
    for k in 0..n {
        let b = block(a, m, n, k, k);
        for idx in 0..avg.data.len() {
            avg.data[idx] += b.data[idx];
        }
    }
    let avg = avg.scale(1.0 / n as f64);
    avg.kron(&CMatrix::identity(n))
}

/// The largest operator norm of a commutator `[a, 1 ⊗ e_ij]` over all
/// matrix units of the second factor. The commutator is assembled directly
/// from the blocks of `a`: `a(1⊗e_ij)` moves block column `i` to column `j`
/// and `(1⊗e_ij)a` moves block row `j` to row `i`.
pub fn commutator_defect(a: &CMatrix, m: usize, n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut c = CMatrix::zeros(m * n, m * n);
            for p in 0..m {
                for q in 0..m {
                    for k in 0..n {
                        c[(p * n + k, q * n + j)] += a[(p * n + k, q * n + i)];
                    }
                    for l in 0..n {
                        c[(p * n + i, q * n + l)] -= a[(p * n + j, q * n + l)];
                    }
                }
            }
            worst = worst.max(c.operator_norm());
        }
    }
    worst
}

/// Margins of [`verify_almost_commuting_bound`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub commutator_defect: f64,
    pub distance_to_projection: f64,
    /// `n²·(defect + slack) - distance`; the bound holds when nonnegative.
    pub margin: f64,
    /// Worst per-block margin of the proof's intermediate inequality.
    pub block_margin: f64,
    pub holds: bool,
}

/// Checks `‖a − (1⊗tr)(a)‖ ≤ n²·(defect + slack)` and the per-block form:
/// off-diagonal blocks satisfy `‖a_ij‖ ≤ defect + slack` and diagonal blocks
/// stay within the same distance of their average.
pub fn verify_almost_commuting_bound(a: &CMatrix, m: usize, n: usize) -> BoundReport {
    let defect = commutator_defect(a, m, n);
    let eps = defect + BOUND_SLACK;
    let projected = partial_trace_projection(a, m, n);
    let distance = a.sub(&projected).operator_norm();
    let margin = (n * n) as f64 * eps - distance;

    let mut avg = CMatrix::zeros(m, m);
    for k in 0..n {
        let b = block(a, m, n, k, k);
        for idx in 0..avg.data.len() {
            avg.data[idx] += b.data[idx];
        }
    }
    let avg = avg.scale(1.0 / n as f64);
    let mut block_margin = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let b = block(a, m, n, i, j);
            let norm = if i == j { b.sub(&avg).operator_norm() } else { b.operator_norm() };
            block_margin = block_margin.min(eps - norm);
        }
    }
    BoundReport {
        commutator_defect: defect,
        distance_to_projection: distance,
        margin,
        block_margin,
        holds: margin >= 0.0 && block_margin >= 0.0,
    }
}

/// A random complex matrix with entries uniform in the unit square of the
/// complex plane.
pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for v in a.data.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    a
}

/// Histogram of bound margins over a random sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginHistogram {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub all_hold: bool,
    pub min_margin: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Runs `trials` random instances for fixed block sizes, in parallel, and
/// bins the bound margins.
pub fn margin_sweep(m: usize, n: usize, trials: usize, seed: u64) -> MarginHistogram {
    let reports: Vec<BoundReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15));
            let a = random_matrix(&mut rng, m * n);
            verify_almost_commuting_bound(&a, m, n)
        })
        .collect();
    let all_hold = reports.iter().all(|r| r.holds);
    let min_margin = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let max_margin = reports.iter().map(|r| r.margin).fold(f64::NEG_INFINITY, f64::max);
    let bins = 12usize;
    let width = ((max_margin - min_margin) / bins as f64).max(f64::MIN_POSITIVE);
    let bin_edges: Vec<f64> = (0..=bins).map(|k| min_margin + width * k as f64).collect();
    let mut counts = vec![0usize; bins];
    for r in &reports {
        let mut idx = ((r.margin - min_margin) / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    MarginHistogram { m, n, trials, seed, all_hold, min_margin, bin_edges, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_b_kron_one(seed: u64, m: usize, n: usize) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_matrix(&mut rng, m).kron(&CMatrix::identity(n))
    }

    #[test]
    fn operator_norm_of_units_and_scaling() {
        let e12 = matrix_unit(3, 0, 1);
        assert!((e12.operator_norm() - 1.0).abs() < 1e-12);
        assert!((e12.scale(2.5).operator_norm() - 2.5).abs() < 1e-12);
        let id = CMatrix::identity(5);
        assert!((id.operator_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_fixes_tensor_factors_and_kills_offdiagonal_units() {
        let a = random_b_kron_one(4, 3, 2);
        let p = partial_trace_projection(&a, 3, 2);
        assert!(a.sub(&p).operator_norm() < 1e-12);
        // 1 (x) e12 projects to zero.
        let u = CMatrix::identity(2).kron(&matrix_unit(3, 0, 1));
        let pu = partial_trace_projection(&u, 2, 3);
        assert!(pu.operator_norm() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (m, n) = (rng.gen_range(1..5usize), rng.gen_range(1..5usize));
            let a = random_matrix(&mut rng, m * n);
            let p1 = partial_trace_projection(&a, m, n);
            let p2 = partial_trace_projection(&p1, m, n);
            assert!(p1.sub(&p2).operator_norm() < PROJECTION_TOL);
            let ta = a.normalized_trace();
            let tp = p1.normalized_trace();
            assert!((ta - tp).norm() < PROJECTION_TOL);
            // The projection never increases the operator norm of the input
            // by more than roundoff (it is a conditional expectation).
            assert!(p1.operator_norm() <= a.operator_norm() + 1e-9);
        }
    }

    #[test]
    fn commutator_defect_examples() {
        // b (x) 1 commutes with every 1 (x) e_ij.
        let a = random_b_kron_one(11, 4, 3);
        assert!(commutator_defect(&a, 4, 3) < 1e-12);
        // 1 (x) e12 against e22 has a commutator of norm one.
        let u = CMatrix::identity(1).kron(&matrix_unit(2, 0, 1));
        assert!(commutator_defect(&u, 1, 2) >= 1.0 - 1e-12);
        // Defect scales linearly.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_matrix(&mut rng, 6);
        let d1 = commutator_defect(&a, 2, 3);
        let d2 = commutator_defect(&a.scale(3.0), 2, 3);
        assert!((d2 - 3.0 * d1).abs() < 1e-9);
    }

    #[test]
    fn bound_holds_on_adversarial_near_commuting_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let (m, n) = (3usize, 3usize);
            let base = random_matrix(&mut rng, m).kron(&CMatrix::identity(n));
            let noise = random_matrix(&mut rng, m * n).scale(1e-3);
            let mut a = base;
            for (v, w) in a.data.iter_mut().zip(&noise.data) {
                *v += w;
            }
            let report = verify_almost_commuting_bound(&a, m, n);
            assert!(report.holds, "margin {}", report.margin);
        }
    }

    #[test]
    fn ql_and_jacobi_routes_agree_on_random_hermitians() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let d = rng.gen_range(1..40usize);
            let a = random_matrix(&mut rng, d);
            let h = a.adjoint().mul(&a); // Hermitian PSD
            let ql = hermitian_max_eig(&h);
            let jac = jacobi_max_eig(&h);
            let scale = ql.abs().max(1.0);
            assert!((ql - jac).abs() < 1e-10 * scale, "ql {ql} vs jacobi {jac}");
        }
        // Fully degenerate spectrum.
        let id = CMatrix::identity(17).scale(2.5);
        assert!((hermitian_max_eig(&id) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn direct_commutator_matches_multiplication_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let (m, n) = (rng.gen_range(1..4usize), rng.gen_range(1..4usize));
            let a = random_matrix(&mut rng, m * n);
            let direct = commutator_defect(&a, m, n);
            let mut via_mul = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let u = CMatrix::identity(m).kron(&matrix_unit(n, i, j));
                    let c = a.mul(&u).sub(&u.mul(&a));
                    via_mul = via_mul.max(c.operator_norm());
                }
            }
            assert!((direct - via_mul).abs() < 1e-10 * via_mul.max(1.0));
        }
    }

    #[test]
    fn margin_sweep_is_deterministic() {
        let a = margin_sweep(2, 2, 50, 99);
        let b = margin_sweep(2, 2, 50, 99);
        assert!(a.all_hold);
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.min_margin, b.min_margin);
    }
}
