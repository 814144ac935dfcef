//! Brute-force reference computations for small problems (n ≲ 500).
//!
//! Everything here goes through dense `nalgebra` factorizations, a cyclic
//! Jacobi eigensolver or plain simulation, so none of it shares a code path
//! with the Krylov and subspace solvers it is used to check.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::smalldense::DenseMatrix;
use crate::sparse::SparseMatrix;

/// Walk length cap of [`monte_carlo_walk`].
pub const MAX_WALK_STEPS: u64 = 10_000_000;

/// RNG stream used by [`monte_carlo_walk`]; generator streams use 0 and 1.
pub const MONTE_CARLO_STREAM: u64 = 7;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.n_rows(), a.n_cols(), a.as_slice())
}

fn from_na(a: &DMatrix<f64>) -> DenseMatrix {
    let (r, c) = a.shape();
    DenseMatrix::from_row_major(r, c, (0..r).flat_map(|i| (0..c).map(move |j| a[(i, j)])).collect())
}

fn check_square(a: &DenseMatrix) -> Result<usize> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", a.n_rows(), a.n_cols())));
    }
    Ok(a.n_rows())
}

fn delete_row_col(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    a.clone().remove_row(k).remove_column(k)
}

fn lu_inverse(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.lu().try_inverse().ok_or(Error::Singular { pivot: 0 })
}

/// Stationary vector from the `(n−1)`-dimensional system
/// `vᵀ (I − P₁₁) = p₂₁ᵀ`, with the last node pinned to 1 and the result
/// normalized to sum 1.
pub fn stationary_direct(p: &DenseMatrix) -> Result<Vec<f64>> {
    let n = check_square(p)?;
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let pn = to_na(p);
    let m = n - 1;
    let p11 = pn.view((0, 0), (m, m));
    let lhs = DMatrix::identity(m, m) - p11.transpose();
    let rhs = pn.view((m, 0), (1, m)).transpose();
    let v = lhs.lu().solve(&rhs).ok_or(Error::Singular { pivot: 0 })?;
    let mut pi: Vec<f64> = v.iter().copied().collect();
    pi.push(1.0);
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(pi)
}

/// Relative Frobenius residuals of the four Penrose conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PenroseReport {
    pub aba: f64,
    pub bab: f64,
    pub ab_symmetric: f64,
    pub ba_symmetric: f64,
    pub tol: f64,
    pub pass: bool,
}

impl PenroseReport {
    pub fn residuals(&self) -> [f64; 4] {
        [self.aba, self.bab, self.ab_symmetric, self.ba_symmetric]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }
}

fn rel(diff: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let den = reference.norm();
    if den > 0.0 {
        diff.norm() / den
    } else {
        diff.norm()
    }
}

/// Checks `ABA = A`, `BAB = B`, `(AB)ᵀ = AB`, `(BA)ᵀ = BA`.
pub fn penrose_check(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> PenroseReport {
    let (a, b) = (to_na(a), to_na(b));
    if a.nrows() != b.ncols() || a.ncols() != b.nrows() {
        let inf = f64::INFINITY;
        return PenroseReport { aba: inf, bab: inf, ab_symmetric: inf, ba_symmetric: inf, tol, pass: false };
    }
    let ab = &a * &b;
    let ba = &b * &a;
    let aba = rel(&(&ab * &a - &a), &a);
    let bab = rel(&(&b * &ab - &b), &b);
    let ab_symmetric = rel(&(ab.transpose() - &ab), &ab);
    let ba_symmetric = rel(&(ba.transpose() - &ba), &ba);
    let all = [aba, bab, ab_symmetric, ba_symmetric];
    let pass = all.iter().all(|r| r.is_finite() && *r <= tol);
    PenroseReport { aba, bab, ab_symmetric, ba_symmetric, tol, pass }
}

/// Expected steps to reach `k` from every node: `(I − P₋ₖ) h = 1`, `h_k = 0`.
pub fn hitting_times_direct(p: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    let f = absorbing_fundamental(p, k)?;
    Ok((0..f.n_rows()).map(|i| f.row(i).iter().sum()).collect())
}

/// `(I − P₋ₖ)⁻¹` embedded in an `n×n` matrix with zero row and column `k`.
/// Entry `(i, j)` is the expected number of visits to `j` by a walk from `i`
/// absorbed at `k`.
pub fn absorbing_fundamental(p: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let n = check_square(p)?;
    if k >= n {
        return Err(Error::InvalidInput(format!("node {k} out of range for n = {n}")));
    }
    let m = n - 1;
    let q = delete_row_col(&to_na(p), k);
    let f = lu_inverse(DMatrix::identity(m, m) - q)?;
    let idx = |i: usize| if i < k { Some(i) } else if i > k { Some(i - 1) } else { None };
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if let (Some(a), Some(b)) = (idx(i), idx(j)) {
                out[(i, j)] = f[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Sample means and standard errors of simulated absorbing walks.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub trials: usize,
    /// Steps from `i` until first reaching `k`.
    pub hitting: f64,
    pub hitting_se: f64,
    /// Steps of the round trip `i → k → i`.
    pub commute: f64,
    pub commute_se: f64,
    /// Visits to each node on the `i → k` leg, counting the start.
    pub visits: Vec<f64>,
    pub visits_se: Vec<f64>,
    /// Fraction of `i → k` legs that visit each node at least once.
    pub passed: Vec<f64>,
    pub passed_se: Vec<f64>,
}

struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Self { n: 0.0, mean: 0.0, m2: 0.0 }
    }

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn std_error(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

struct Sampler {
    cum: Vec<Vec<(usize, f64)>>,
}

impl Sampler {
    fn new(p: &SparseMatrix) -> Self {
        let cum = (0..p.n_rows())
            .map(|i| {
                let mut acc = 0.0;
                p.row(i)
                    .filter(|(_, v)| *v > 0.0)
                    .map(|(j, v)| {
                        acc += v;
                        (j, acc)
                    })
                    .collect()
            })
            .collect();
        Self { cum }
    }

    fn step(&self, i: usize, rng: &mut ChaCha8Rng) -> usize {
        let row = &self.cum[i];
        let total = row.last().map_or(0.0, |e| e.1);
        let u = rng.random::<f64>() * total;
        let pos = row.partition_point(|e| e.1 <= u).min(row.len() - 1);
        row[pos].0
    }

    /// Walks from `from` to `to`; returns the step count.
    fn walk(&self, from: usize, to: usize, rng: &mut ChaCha8Rng, mut visit: impl FnMut(usize)) -> Result<u64> {
        let mut at = from;
        let mut steps = 0u64;
        while at != to {
            visit(at);
            at = self.step(at, rng);
            steps += 1;
            if steps > MAX_WALK_STEPS {
                return Err(Error::Numerical(format!(
                    "walk {from} -> {to} exceeded {MAX_WALK_STEPS} steps (last node {at})"
                )));
            }
        }
        Ok(steps)
    }
}

/// Simulates `trials` round trips `i → k → i` on the chain `p`.
pub fn monte_carlo_walk(p: &SparseMatrix, i: usize, k: usize, trials: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let n = p.n_rows();
    if i >= n || k >= n {
        return Err(Error::InvalidInput(format!("nodes ({i}, {k}) out of range for n = {n}")));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    if let Some(row) = (0..n).find(|&r| p.row(r).all(|(_, v)| !(v > 0.0))) {
        return Err(Error::ZeroOutDegree { node: row });
    }
    let sampler = Sampler::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MONTE_CARLO_STREAM);
    let mut h = Welford::new();
    let mut c = Welford::new();
    let mut v: Vec<Welford> = (0..n).map(|_| Welford::new()).collect();
    let mut hit: Vec<Welford> = (0..n).map(|_| Welford::new()).collect();
    let mut counts = vec![0u64; n];
    for _ in 0..trials {
        counts.iter_mut().for_each(|x| *x = 0);
        let out = sampler.walk(i, k, &mut rng, |j| counts[j] += 1)?;
        let back = sampler.walk(k, i, &mut rng, |_| {})?;
        h.push(out as f64);
        c.push((out + back) as f64);
        for ((w, x), &cnt) in v.iter_mut().zip(hit.iter_mut()).zip(&counts) {
            w.push(cnt as f64);
            x.push(if cnt > 0 { 1.0 } else { 0.0 });
        }
    }
    Ok(MonteCarloEstimate {
        trials,
        hitting: h.mean,
        hitting_se: h.std_error(),
        commute: c.mean,
        commute_se: c.std_error(),
        visits: v.iter().map(|w| w.mean).collect(),
        visits_se: v.iter().map(Welford::std_error).collect(),
        passed: hit.iter().map(|w| w.mean).collect(),
        passed_se: hit.iter().map(Welford::std_error).collect(),
    })
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    let n = check_square(s)?;
    let mut a = to_na(s);
    let total = a.norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() <= 1e-15 * total.max(f64::MIN_POSITIVE) {
            let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Numerical(format!("Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")))
}

/// `(λ_min(S(A)), ‖A‖₂)` with `S(A) = (A + Aᵀ)/2`.
///
/// `‖A‖₂` is taken from the largest Jacobi eigenvalue of `AᵀA`; a power
/// iteration would approach it from below, which is the unsafe side for
/// the bound checks this feeds.
pub fn symmetric_part_extremes(a: &DenseMatrix) -> Result<(f64, f64)> {
    check_square(a)?;
    let an = to_na(a);
    let s = (&an + an.transpose()) * 0.5;
    let lmin = symmetric_eigenvalues(&from_na(&s))?[0];
    let ata = an.transpose() * &an;
    let top = *symmetric_eigenvalues(&from_na(&ata))?.last().unwrap_or(&0.0);
    Ok((lmin, top.max(0.0).sqrt()))
}

/// Moduli of all eigenvalues of a general square matrix, descending.
pub fn eigenvalue_moduli(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_square(a)?;
    let mut m: Vec<f64> = to_na(a).complex_eigenvalues().iter().map(|z| z.norm()).collect();
    m.sort_by(|x, y| y.total_cmp(x));
    Ok(m)
}

/// Dense pseudo-inverse of a nullity-1 matrix with right null vector `u` and
/// left null vector `v`: `(I − ûûᵀ)(L + v uᵀ)⁻¹(I − v̂v̂ᵀ)`.
pub fn dense_pinv_reference(l: &DenseMatrix, u: &[f64], v: &[f64]) -> Result<DenseMatrix> {
    let n = check_square(l)?;
    check_len(n, u.len())?;
    check_len(n, v.len())?;
    let un = nalgebra::DVector::from_column_slice(u);
    let vn = nalgebra::DVector::from_column_slice(v);
    let c = to_na(l) + &vn * un.transpose();
    let cinv = lu_inverse(c)?;
    let proj = |w: &nalgebra::DVector<f64>| DMatrix::identity(n, n) - w * w.transpose() / w.norm_squared();
    Ok(from_na(&(proj(&un) * cinv * proj(&vn))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> DenseMatrix {
        DenseMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]])
    }

    fn self_loop2() -> DenseMatrix {
        // node 0 keeps a self-loop: 0 → {0, 1}, 1 → 0
        DenseMatrix::from_rows(&[&[0.5, 0.5], &[1.0, 0.0]])
    }

    #[test]
    fn stationary_small() {
        for (p, want) in [(cycle3(), vec![1.0 / 3.0; 3]), (self_loop2(), vec![2.0 / 3.0, 1.0 / 3.0])] {
            let pi = stationary_direct(&p).unwrap();
            for (a, b) in pi.iter().zip(&want) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn penrose_examples() {
        let i = DenseMatrix::identity(3);
        assert_eq!(penrose_check(&i, &i, 0.0).max_residual(), 0.0);
        let d = DenseMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(penrose_check(&d, &d, 1e-15).pass);
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let mut b = from_na(&to_na(&a).try_inverse().unwrap());
        assert!(penrose_check(&a, &b, 1e-12).pass);
        b = b.add(&DenseMatrix::from_rows(&[&[1e-3, 0.0], &[0.0, 0.0]]));
        assert!(!penrose_check(&a, &b, 1e-6).pass);
        assert!(!penrose_check(&a, &DenseMatrix::zeros(3, 2), 1.0).pass);
    }

    #[test]
    fn hitting_small() {
        assert_eq!(hitting_times_direct(&cycle3(), 2).unwrap(), vec![2.0, 1.0, 0.0]);
        let h = hitting_times_direct(&self_loop2(), 1).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-14);
        let h = hitting_times_direct(&self_loop2(), 0).unwrap();
        assert!((h[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_small() {
        let p = SparseMatrix::from_dense(&cycle3());
        let est = monte_carlo_walk(&p, 0, 2, 1000, 1).unwrap();
        assert_eq!(est.hitting, 2.0);
        assert_eq!(est.hitting_se, 0.0);
        assert_eq!(est.commute, 3.0);
        assert_eq!(est.visits, vec![1.0, 1.0, 0.0]);
        let p = SparseMatrix::from_dense(&self_loop2());
        let est = monte_carlo_walk(&p, 0, 1, 100_000, 3).unwrap();
        assert!((est.hitting - 2.0).abs() < 3.0 * est.hitting_se);
        assert!((est.commute - 3.0).abs() < 3.0 * est.commute_se);
        let again = monte_carlo_walk(&p, 0, 1, 100_000, 3).unwrap();
        assert_eq!(est.hitting, again.hitting);
    }

    #[test]
    fn monte_carlo_step_cap() {
        // node 1 is a trap that never returns to 0
        let p = SparseMatrix::from_dense(&DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 1.0]]));
        assert!(matches!(monte_carlo_walk(&p, 1, 0, 1, 0), Err(Error::Numerical(_))));
    }

    #[test]
    fn extremes_closed_forms() {
        let (l, n) = symmetric_part_extremes(&DenseMatrix::identity(4)).unwrap();
        assert!((l - 1.0).abs() < 1e-15 && (n - 1.0).abs() < 1e-15);
        let a = DenseMatrix::from_rows(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        let (l, n) = symmetric_part_extremes(&a).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        assert!((n - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn jacobi_matches_characteristic_roots() {
        // S = tridiag(-1, 2, -1) of order 4 has eigenvalues 2 − 2cos(kπ/5)
        let mut s = DenseMatrix::zeros(4, 4);
        for i in 0..4 {
            s[(i, i)] = 2.0;
            if i + 1 < 4 {
                s[(i, i + 1)] = -1.0;
                s[(i + 1, i)] = -1.0;
            }
        }
        let ev = symmetric_eigenvalues(&s).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_reference_cycle() {
        // L^r of the 3-cycle with π uniform
        let p = cycle3();
        let l = DenseMatrix::identity(3).sub(&p).scale(1.0 / 3.0);
        let u = vec![1.0; 3];
        let b = dense_pinv_reference(&l, &u, &u).unwrap();
        assert!(penrose_check(&l, &b, 1e-10).pass);
        let sym = DenseMatrix::from_rows(&[&[1.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 1.0]]);
        let b = dense_pinv_reference(&sym, &u, &u).unwrap();
        assert!(b.sub(&b.transpose()).max_abs() < 1e-10);
        assert!(penrose_check(&sym, &b, 1e-10).pass);
    }

    #[test]
    fn moduli_of_cycle() {
        let m = eigenvalue_moduli(&cycle3()).unwrap();
        assert!(m.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }
}
