use super::LinearOperator;
use crate::error::{check_len, Error, Result};
use crate::smalldense::{axpy, dot, norm2, DenseMatrix};
use crate::sparse::MvCounter;

/// Subdiagonal entry, relative to `‖A vⱼ‖`, at which the Krylov space is
/// taken to be invariant.
const BREAKDOWN_RTOL: f64 = 1e-14;

/// Output of [`arnoldi`].
///
/// Without breakdown `v` has `k + 1` columns and `h` is `(k+1)×k`, so that
/// `A V[:, ..k] = V H`. On breakdown at step `k` the last row and basis vector
/// are dropped: `h` is `k×k` and `A V = V H`.
#[derive(Clone, Debug)]
pub struct ArnoldiResult {
    pub v: Vec<Vec<f64>>,
    pub h: DenseMatrix,
    pub breakdown: Option<usize>,
}

/// One Arnoldi step: extends `basis` by one vector and returns the new
/// Hessenberg column (`basis.len() + 1` entries before the push).
///
/// Returns `true` as the second element on happy breakdown, in which case the
/// basis is not extended and the subdiagonal entry is reported as zero.
pub(crate) fn arnoldi_step<A: LinearOperator + ?Sized>(
    op: &A,
    basis: &mut Vec<Vec<f64>>,
    mv: &MvCounter,
) -> Result<(Vec<f64>, bool)> {
    let j = basis.len() - 1;
    let mut w = op.apply(&basis[j], mv)?;
    let wnorm = norm2(&w);
    if !wnorm.is_finite() {
        return Err(Error::Numerical("operator produced a non-finite vector".into()));
    }
    let mut h = vec![0.0; j + 2];
    for _pass in 0..2 {
        for (i, q) in basis.iter().enumerate() {
            let c = dot(q, &w);
            axpy(-c, q, &mut w);
            h[i] += c;
        }
    }
    let beta = norm2(&w);
    if beta <= BREAKDOWN_RTOL * wnorm || beta == 0.0 {
        return Ok((h, true));
    }
    h[j + 1] = beta;
    w.iter_mut().for_each(|x| *x /= beta);
    basis.push(w);
    Ok((h, false))
}

/// Builds an orthonormal Krylov basis of up to `ell` steps from unit `v1`.
pub fn arnoldi<A: LinearOperator + ?Sized>(op: &A, v1: &[f64], ell: usize, mv: &MvCounter) -> Result<ArnoldiResult> {
    check_len(op.dim(), v1.len())?;
    let nv = norm2(v1);
    if (nv - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("starting vector has norm {nv}, expected 1")));
    }
    let mut basis = vec![v1.to_vec()];
    let mut cols = Vec::new();
    let mut breakdown = None;
    for k in 0..ell {
        let (h, stop) = arnoldi_step(op, &mut basis, mv)?;
        cols.push(h);
        if stop {
            breakdown = Some(k + 1);
            break;
        }
    }
    let k = cols.len();
    let rows = if breakdown.is_some() { k } else { k + 1 };
    let mut h = DenseMatrix::zeros(rows, k);
    for (j, c) in cols.iter().enumerate() {
        for (i, &val) in c.iter().enumerate().take(rows) {
            h[(i, j)] = val;
        }
    }
    Ok(ArnoldiResult { v: basis, h, breakdown })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_breaks_down_immediately() {
        let op = DenseMatrix::identity(4);
        let v1 = [0.5, 0.5, 0.5, 0.5];
        let res = arnoldi(&op, &v1, 3, &MvCounter::new()).unwrap();
        assert_eq!(res.breakdown, Some(1));
        assert_eq!(res.h, DenseMatrix::from_rows(&[&[1.0]]));
        assert_eq!(res.v.len(), 1);
    }

    #[test]
    fn invariant_direction_breaks_down() {
        let op = DenseMatrix::from_diagonal(&[1.0, 2.0]);
        let res = arnoldi(&op, &[1.0, 0.0], 2, &MvCounter::new()).unwrap();
        assert_eq!(res.breakdown, Some(1));
    }

    #[test]
    fn random_operator_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let a = DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect());
        let mut v1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = norm2(&v1);
        v1.iter_mut().for_each(|x| *x /= nv);
        let mv = MvCounter::new();
        let res = arnoldi(&a, &v1, 5, &mv).unwrap();
        assert_eq!(res.breakdown, None);
        assert_eq!(mv.get(), 5);
        let v5 = DenseMatrix::from_columns(n, &res.v[..5]);
        let v6 = DenseMatrix::from_columns(n, &res.v);
        let diff = a.matmul(&v5).sub(&v6.matmul(&res.h));
        assert!(diff.max_abs() <= 1e-10);
        let gram = v6.transpose().matmul(&v6).sub(&DenseMatrix::identity(6));
        assert!(gram.max_abs() <= 1e-11);
    }
}
