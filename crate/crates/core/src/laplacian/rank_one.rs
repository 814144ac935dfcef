//! Dense mappings between the pseudo-inverse of a nullity-1 matrix `A` and the
//! ordinary inverse of the principal submatrix `A₁₁` obtained by deleting a
//! pivot index `k`, plus the rank-1 projection formula for `A†` itself.
//!
//! All functions take the pivot explicitly; submatrices keep the remaining
//! indices in ascending order.

use super::ColumnBlock;
use crate::error::{check_len, Error, Result};
use crate::krylov::{gmres_restarted, GmresConfig, RankOneShiftedOperator};
use crate::smalldense::{dot, DenseMatrix, LuFactors};

/// Solver for a nonsingular `C` (typically `L + α u vᵀ`).
pub trait ShiftedSolver: Sync {
    fn dim(&self) -> usize;
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

impl ShiftedSolver for LuFactors {
    fn dim(&self) -> usize {
        LuFactors::dim(self)
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        LuFactors::solve(self, b)
    }
}

/// Restarted GMRES on a rank-1 shifted sparse operator.
pub struct GmresSolver<'a> {
    pub op: RankOneShiftedOperator<'a>,
    pub cfg: GmresConfig,
}

impl ShiftedSolver for GmresSolver<'_> {
    fn dim(&self) -> usize {
        self.op.base.n_rows()
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(gmres_restarted(&self.op, b, None, &self.cfg)?.0)
    }
}

/// LU factors of `L + α u vᵀ`.
pub fn dense_solver(l: &DenseMatrix, u: &[f64], v: &[f64], alpha: f64) -> Result<LuFactors> {
    check_len(l.n_rows(), u.len())?;
    check_len(l.n_cols(), v.len())?;
    LuFactors::factor(&l.add_outer(alpha, u, v))
}

/// Columns `cols` of `(I − uuᵀ/uᵀu) C⁻¹ (I − vvᵀ/vᵀv)`, the Moore-Penrose
/// pseudo-inverse of `A = C − α u vᵀ` when `Au = 0` and `Aᵀv = 0`.
///
/// Costs one solve per column plus one for `x = C⁻¹v`; the entries of
/// `yᵀ = uᵀC⁻¹` are read off the solved columns.
pub fn pinv_rank1_general<S: ShiftedSolver + ?Sized>(solver: &S, u: &[f64], v: &[f64], cols: &[usize]) -> Result<ColumnBlock> {
    let n = solver.dim();
    check_len(n, u.len())?;
    check_len(n, v.len())?;
    let uu = dot(u, u);
    let vv = dot(v, v);
    if dot(u, v) == 0.0 || uu == 0.0 {
        return Err(Error::InvalidInput("null vectors must satisfy vᵀu ≠ 0".into()));
    }
    let x = solver.solve(v)?;
    let ux = dot(u, &x);
    let mut data = Vec::with_capacity(cols.len());
    let mut e = vec![0.0; n];
    for &j in cols {
        if j >= n {
            return Err(Error::InvalidInput(format!("column {j} out of range for n = {n}")));
        }
        e[j] = 1.0;
        let mut c = solver.solve(&e)?;
        e[j] = 0.0;
        let yj = dot(u, &c);
        let corner = ux * v[j] / (uu * vv);
        for i in 0..n {
            c[i] += -u[i] * yj / uu - x[i] * v[j] / vv + corner * u[i];
        }
        data.push(c);
    }
    ColumnBlock::new(n, cols.to_vec(), data)
}

/// Index order placing pivot `k` last.
fn pivot_order(n: usize, k: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != k).chain(std::iter::once(k)).collect()
}

fn permute(m: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    let n = order.len();
    let mut out = DenseMatrix::zeros(n, n);
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            out[(a, b)] = m[(i, j)];
        }
    }
    out
}

fn unpermute(m: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    let n = order.len();
    let mut out = DenseMatrix::zeros(n, n);
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            out[(i, j)] = m[(a, b)];
        }
    }
    out
}

/// Splits a vector into the non-pivot part and the pivot entry, which must
/// be strictly positive.
fn split_pivot(u: &[f64], k: usize, name: &str) -> Result<(Vec<f64>, f64)> {
    if k >= u.len() {
        return Err(Error::InvalidInput(format!("pivot {k} out of range for n = {}", u.len())));
    }
    let un = u[k];
    if !(un > 0.0) {
        return Err(Error::InvalidInput(format!("{name} must be positive at the pivot, found {un}")));
    }
    let u1 = u.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
    Ok((u1, un))
}

fn check_square(m: &DenseMatrix, n: usize) -> Result<()> {
    check_len(n, m.n_rows())?;
    check_len(n, m.n_cols())
}

/// `A₁₁⁻¹` from `B = A†` for an Eulerian `A` with null vector `u`:
/// `B₁₁ − u₁b₂₁ᵀ/uₙ − b₁₂u₁ᵀ/uₙ + bₙₙ u₁u₁ᵀ/uₙ²`.
pub fn reduced_inverse_from_pinv(b: &DenseMatrix, u: &[f64], k: usize) -> Result<DenseMatrix> {
    reduced_from_pinv_general(b, u, u, k)
}

/// `A₁₁⁻¹ = B₁₁ − u₁b₂₁ᵀ/uₙ − b₁₂v₁ᵀ/vₙ + bₙₙ u₁v₁ᵀ/(uₙvₙ)` for right and
/// left null vectors `u`, `v`.
pub fn reduced_from_pinv_general(b: &DenseMatrix, u: &[f64], v: &[f64], k: usize) -> Result<DenseMatrix> {
    let n = u.len();
    check_len(n, v.len())?;
    check_square(b, n)?;
    let (u1, un) = split_pivot(u, k, "u")?;
    let (v1, vn) = split_pivot(v, k, "v")?;
    let order = pivot_order(n, k);
    let bp = permute(b, &order);
    let m = n - 1;
    let bnn = bp[(m, m)];
    let mut out = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = bp[(i, j)] - u1[i] * bp[(m, j)] / un - bp[(i, m)] * v1[j] / vn + bnn * u1[i] * v1[j] / (un * vn);
        }
    }
    Ok(out)
}

/// `A†` from `A₁₁⁻¹` for an Eulerian `A` with null vector `u` (normalized
/// internally to unit length), using the block formulas with
/// `w = A₁₁⁻¹u₁` and `tᵀ = u₁ᵀA₁₁⁻¹`.
pub fn pinv_from_reduced(a11_inv: &DenseMatrix, u: &[f64], k: usize) -> Result<DenseMatrix> {
    let n = u.len();
    check_square(a11_inv, n.saturating_sub(1))?;
    let nrm = dot(u, u).sqrt();
    let unit: Vec<f64> = u.iter().map(|x| x / nrm).collect();
    let (u1, un) = split_pivot(&unit, k, "u")?;
    let m = n - 1;
    let w = a11_inv.mul_vec(&u1);
    let t = a11_inv.transpose().mul_vec(&u1);
    let uw = dot(&u1, &w);
    let mut bp = DenseMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            bp[(i, j)] = a11_inv[(i, j)] - u1[i] * t[j] - w[i] * u1[j] + uw * u1[i] * u1[j];
        }
        bp[(i, m)] = un * uw * u1[i] - un * w[i];
        bp[(m, i)] = un * uw * u1[i] - un * t[i];
    }
    bp[(m, m)] = un * un * uw;
    Ok(unpermute(&bp, &pivot_order(n, k)))
}

/// `A†` from `A₁₁⁻¹` and the right/left null vectors `u`, `v`, using the
/// general block formulas with `w = A₁₁⁻¹v₁/vᵀv` and `tᵀ = u₁ᵀA₁₁⁻¹/uᵀu`.
///
/// The result does not depend on the scaling of `u` or `v`.
pub fn pinv_from_reduced_general(a11_inv: &DenseMatrix, u: &[f64], v: &[f64], k: usize) -> Result<DenseMatrix> {
    let n = u.len();
    check_len(n, v.len())?;
    check_square(a11_inv, n.saturating_sub(1))?;
    let (u1, un) = split_pivot(u, k, "u")?;
    let (v1, vn) = split_pivot(v, k, "v")?;
    let uu = dot(u, u);
    let vv = dot(v, v);
    let m = n - 1;
    let w: Vec<f64> = a11_inv.mul_vec(&v1).iter().map(|x| x / vv).collect();
    let t: Vec<f64> = a11_inv.transpose().mul_vec(&u1).iter().map(|x| x / uu).collect();
    let s = dot(&u1, &w) / uu;
    let mut bp = DenseMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            bp[(i, j)] = a11_inv[(i, j)] - u1[i] * t[j] - w[i] * v1[j] + s * u1[i] * v1[j];
        }
        bp[(i, m)] = vn * s * u1[i] - vn * w[i];
        bp[(m, i)] = un * s * v1[i] - un * t[i];
    }
    bp[(m, m)] = un * vn * s;
    Ok(unpermute(&bp, &pivot_order(n, k)))
}
