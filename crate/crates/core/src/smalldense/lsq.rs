use super::DenseMatrix;
use crate::error::{Error, Result};

/// Incremental Givens-rotation solver for `min ‖β e₁ − H̄ y‖` with `H̄`
/// upper Hessenberg, fed one column at a time as Arnoldi produces it.
#[derive(Clone, Debug)]
pub struct GivensLsq {
    /// Columns of the triangular factor.
    r: Vec<Vec<f64>>,
    rotations: Vec<(f64, f64)>,
    /// Rotated right-hand side, one longer than the column count.
    g: Vec<f64>,
}

impl GivensLsq {
    pub fn new(beta: f64) -> Self {
        Self { r: Vec::new(), rotations: Vec::new(), g: vec![beta] }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Appends column `k` (entries `0..=k+1`) and returns the new residual norm.
    pub fn push_column(&mut self, h: &[f64]) -> f64 {
        let k = self.r.len();
        assert_eq!(h.len(), k + 2, "Hessenberg column {k} needs {} entries", k + 2);
        let mut col = h.to_vec();
        for (i, &(c, s)) in self.rotations.iter().enumerate() {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = c * a + s * b;
            col[i + 1] = -s * a + c * b;
        }
        let (a, b) = (col[k], col[k + 1]);
        let rho = a.hypot(b);
        let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b / rho) };
        col[k] = rho;
        col.truncate(k + 1);
        self.rotations.push((c, s));
        let gk = self.g[k];
        self.g[k] = c * gk;
        self.g.push(-s * gk);
        self.r.push(col);
        self.residual()
    }

    pub fn residual(&self) -> f64 {
        self.g.last().copied().unwrap_or(0.0).abs()
    }

    /// Minimizer for the columns pushed so far.
    ///
    /// A zero diagonal in the triangular factor (a zero column of `H̄`)
    /// contributes a zero component.
    pub fn solve(&self) -> Vec<f64> {
        let k = self.r.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.r[j][i] * y[j]).sum();
            let d = self.r[i][i];
            y[i] = if d == 0.0 { 0.0 } else { (self.g[i] - s) / d };
        }
        y
    }
}

/// Least-squares solve of an `(ℓ+1)×ℓ` upper Hessenberg system.
///
/// Returns the minimizer and the residual norm `‖β e₁ − H̄ y‖₂`.
pub fn hessenberg_lsq(h: &DenseMatrix, beta: f64) -> Result<(Vec<f64>, f64)> {
    let m = h.n_cols();
    if h.n_rows() != m + 1 {
        return Err(Error::InvalidInput(format!(
            "expected an ({}+1)x{} Hessenberg matrix, got {}x{}",
            m,
            m,
            h.n_rows(),
            m
        )));
    }
    for j in 0..m {
        if (j + 2..=m).any(|i| h[(i, j)] != 0.0) {
            return Err(Error::InvalidInput(format!("column {j} is not upper Hessenberg")));
        }
    }
    let mut lsq = GivensLsq::new(beta);
    for j in 0..m {
        let col: Vec<f64> = (0..j + 2).map(|i| h[(i, j)]).collect();
        lsq.push_column(&col);
    }
    Ok((lsq.solve(), lsq.residual()))
}
