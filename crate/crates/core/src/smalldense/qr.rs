use super::{axpy, dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Relative norm below which a column counts as dependent on its predecessors.
const DEPENDENT_COLUMN: f64 = 1e-13;

/// Modified Gram-Schmidt with one reorthogonalization pass, in place.
///
/// Fails with [`Error::RankDeficient`] naming the first column whose norm
/// collapses; columns before it are already orthonormal.
pub fn orthonormalize_columns(cols: &mut [Vec<f64>]) -> Result<()> {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let c = &mut rest[0];
        let before = norm2(c);
        if !before.is_finite() {
            return Err(Error::Numerical(format!("column {j} is not finite")));
        }
        for _pass in 0..2 {
            for q in done.iter() {
                let h = dot(q, c);
                axpy(-h, q, c);
            }
        }
        let after = norm2(c);
        if before == 0.0 || after < DEPENDENT_COLUMN * before {
            return Err(Error::RankDeficient { column: j });
        }
        c.iter_mut().for_each(|v| *v /= after);
    }
    Ok(())
}

/// Orthonormal basis for the column span of `v` (same column order).
pub fn orthogonalize(v: &DenseMatrix) -> Result<DenseMatrix> {
    if v.n_rows() < v.n_cols() {
        return Err(Error::InvalidInput(format!(
            "cannot orthogonalize {} columns of length {}",
            v.n_cols(),
            v.n_rows()
        )));
    }
    let mut cols = v.columns();
    orthonormalize_columns(&mut cols)?;
    Ok(DenseMatrix::from_columns(v.n_rows(), &cols))
}
