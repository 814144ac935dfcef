//! Restarted GMRES over abstract linear operators.

mod arnoldi;
mod gmres;

use serde::Serialize;

use crate::error::{check_len, Result};
use crate::smalldense::DenseMatrix;
use crate::sparse::{MvCounter, SparseMatrix};

pub use arnoldi::{arnoldi, ArnoldiResult};
pub use gmres::{gmres_restarted, richardson_step};

/// A square operator `x ↦ A x`. Each application counts one #Mv.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()>;

    fn apply(&self, x: &[f64], mv: &MvCounter) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y, mv)?;
        Ok(y)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()> {
        self.matvec_into(x, y, mv)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()> {
        check_len(self.n_cols(), x.len())?;
        check_len(self.n_rows(), y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        mv.bump();
        Ok(())
    }
}

/// `L + α u vᵀ` applied without forming the outer product.
///
/// With `transposed` set it applies `Lᵀ + α v uᵀ` instead.
#[derive(Clone, Debug)]
pub struct RankOneShiftedOperator<'a> {
    pub base: &'a SparseMatrix,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: f64,
    pub transposed: bool,
}

impl<'a> RankOneShiftedOperator<'a> {
    pub fn new(base: &'a SparseMatrix, u: Vec<f64>, v: Vec<f64>, alpha: f64) -> Result<Self> {
        check_len(base.n_rows(), base.n_cols())?;
        check_len(base.n_rows(), u.len())?;
        check_len(base.n_cols(), v.len())?;
        Ok(Self { base, u, v, alpha, transposed: false })
    }

    /// The adjoint operator `Lᵀ + α v uᵀ`.
    pub fn transpose(&self) -> Self {
        Self { transposed: !self.transposed, ..self.clone() }
    }
}

impl LinearOperator for RankOneShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.base.n_rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()> {
        let (left, right) = if self.transposed {
            self.base.matvec_transpose_into(x, y, mv)?;
            (&self.v, &self.u)
        } else {
            self.base.matvec_into(x, y, mv)?;
            (&self.u, &self.v)
        };
        let s = self.alpha * right.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        for (yi, li) in y.iter_mut().zip(left) {
            *yi += s * li;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GmresConfig {
    /// Inner steps per cycle (ℓ).
    pub restart: usize,
    /// Target for `‖b − A x‖₂`.
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 30, tol: 1e-9, max_outer: 10_000 }
    }
}

/// Instrumentation for one GMRES solve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveReport {
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    /// Inner steps taken in each outer cycle.
    pub inner_steps: Vec<usize>,
    /// Matrix-vector products, including the final explicit residual check.
    pub mv_count: usize,
    /// `‖r₀‖` followed by the residual norm after each outer cycle.
    pub residual_history: Vec<f64>,
    /// Explicitly recomputed `‖b − A x‖₂` of the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
}
