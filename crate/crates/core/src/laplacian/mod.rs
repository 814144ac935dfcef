//! Digraph Laplacians and their pseudo-inverses.
//!
//! Eulerian Laplacians (`L^r`, `L^d`) are handled column by column through a
//! rank-1 shifted nonsingular system solved with restarted GMRES. General
//! Laplacians satisfying (Pa)–(Pc) are reduced to the Eulerian case by
//! diagonal scalings, see [`GeneralLaplacian`].

mod general;
mod rank_one;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::krylov::{gmres_restarted, GmresConfig, RankOneShiftedOperator, SolveReport};
use crate::smalldense::{norm2, DenseMatrix};
use crate::sparse::{build_transition, Digraph, MvCounter, SparseMatrix};
use crate::stationary::{check_stochastic, stationary_distribution, StationaryResult, SubspaceConfig};

pub use general::{
    check_properties, check_properties_reduced, embed_mmatrix, general_pinv, GeneralLaplacian, GeneralPinvConfig,
    PropertyReport,
};
pub use rank_one::{
    dense_solver, pinv_from_reduced, pinv_from_reduced_general, pinv_rank1_general, reduced_from_pinv_general,
    reduced_inverse_from_pinv, GmresSolver, ShiftedSolver,
};

/// Relative tolerance of [`check_eulerian`].
pub const EULERIAN_RTOL: f64 = 1e-8;

/// Absolute bound on `‖L u‖₂`, `‖Lᵀ u‖₂` above which an [`EulerianSystem`]
/// logs a warning.
const EULERIAN_WARN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LaplacianKind {
    /// `L^r = Π − ΠP`
    RandomWalk,
    /// `L^d = I − Π^{1/2} P Π^{-1/2}`
    DiagScaled,
    /// `L^p = I − P`
    Normalized,
    /// `L^a = D − DP`
    Unnormalized,
}

impl LaplacianKind {
    pub fn letter(self) -> char {
        match self {
            LaplacianKind::RandomWalk => 'r',
            LaplacianKind::DiagScaled => 'd',
            LaplacianKind::Normalized => 'p',
            LaplacianKind::Unnormalized => 'a',
        }
    }
}

impl std::str::FromStr for LaplacianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(LaplacianKind::RandomWalk),
            "d" => Ok(LaplacianKind::DiagScaled),
            "p" => Ok(LaplacianKind::Normalized),
            "a" => Ok(LaplacianKind::Unnormalized),
            other => Err(Error::InvalidInput(format!("unknown Laplacian kind '{other}' (expected r, d, p or a)"))),
        }
    }
}

fn check_positive(v: &[f64], what: &str) -> Result<()> {
    match v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("{what} entry {i} is not strictly positive ({})", v[i]))),
        None => Ok(()),
    }
}

/// Builds the Laplacian of the given kind from a transition matrix, its
/// stationary vector `pi` and out-degrees `d`. Only the vectors the kind needs
/// are inspected.
pub fn build_laplacian(p: &SparseMatrix, pi: &[f64], d: &[f64], kind: LaplacianKind) -> Result<SparseMatrix> {
    check_stochastic(p)?;
    let n = p.n_rows();
    let ones = vec![1.0; n];
    match kind {
        LaplacianKind::RandomWalk => {
            check_len(n, pi.len())?;
            check_positive(pi, "stationary vector")?;
            p.scale_rows_cols(pi, &ones)?.diagonal_minus(pi)
        }
        LaplacianKind::Unnormalized => {
            check_len(n, d.len())?;
            check_positive(d, "degree vector")?;
            p.scale_rows_cols(d, &ones)?.diagonal_minus(d)
        }
        LaplacianKind::Normalized => p.diagonal_minus(&ones),
        LaplacianKind::DiagScaled => {
            check_len(n, pi.len())?;
            check_positive(pi, "stationary vector")?;
            let s: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
            let si: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
            p.scale_rows_cols(&s, &si)?.diagonal_minus(&ones)
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EulerianCheck {
    pub ok: bool,
    /// `‖L w‖∞`
    pub right: f64,
    /// `‖Lᵀ w‖∞`
    pub left: f64,
}

/// Tests `L w = Lᵀ w = 0` relative to `‖L‖_max · ‖w‖∞`.
pub fn check_eulerian(l: &SparseMatrix, w: &[f64]) -> Result<EulerianCheck> {
    check_len(l.n_cols(), w.len())?;
    check_len(l.n_rows(), w.len())?;
    check_positive(w, "null vector")?;
    let mv = MvCounter::new();
    let inf = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let right = inf(l.matvec(w, &mv)?);
    let left = inf(l.matvec_transpose(w, &mv)?);
    let scale = l.max_abs() * inf(w.to_vec());
    Ok(EulerianCheck { ok: right.max(left) <= EULERIAN_RTOL * scale, right, left })
}

/// Transition matrix, out-degrees and stationary distribution of a digraph.
#[derive(Clone, Debug)]
pub struct TransitionSystem {
    pub p: SparseMatrix,
    pub d: Vec<f64>,
    pub stationary: StationaryResult,
}

impl TransitionSystem {
    /// Fails with [`Error::NotStronglyConnected`] naming an unreachable pair.
    pub fn from_digraph(g: &Digraph, cfg: &SubspaceConfig) -> Result<Self> {
        if let Some((from, to)) = g.unreachable_pair() {
            return Err(Error::NotStronglyConnected { from, to });
        }
        let (p, d) = build_transition(g)?;
        let stationary = stationary_distribution(&p, cfg)?;
        Ok(Self { p, d, stationary })
    }

    pub fn n(&self) -> usize {
        self.p.n_rows()
    }

    pub fn pi(&self) -> &[f64] {
        &self.stationary.pi
    }

    pub fn laplacian(&self, kind: LaplacianKind) -> Result<SparseMatrix> {
        build_laplacian(&self.p, self.pi(), &self.d, kind)
    }

    pub fn eulerian(&self, kind: LaplacianKind) -> Result<EulerianSystem> {
        EulerianSystem::new(&self.p, self.pi(), kind)
    }
}

/// Dense block of selected pseudo-inverse columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnBlock {
    n: usize,
    columns: Vec<usize>,
    data: Vec<Vec<f64>>,
}

impl ColumnBlock {
    pub fn new(n: usize, columns: Vec<usize>, data: Vec<Vec<f64>>) -> Result<Self> {
        check_len(columns.len(), data.len())?;
        for c in &data {
            check_len(n, c.len())?;
        }
        if let Some(&j) = columns.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidInput(format!("column id {j} out of range for n = {n}")));
        }
        Ok(Self { n, columns, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Column at position `pos` within the block.
    pub fn column(&self, pos: usize) -> &[f64] {
        &self.data[pos]
    }

    /// Column for node id `j`, if present.
    pub fn column_for(&self, j: usize) -> Option<&[f64]> {
        self.columns.iter().position(|&c| c == j).map(|p| self.data[p].as_slice())
    }

    /// Entry `(i, j)` by node ids, if column `j` is present.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.column_for(j).map(|c| c[i])
    }

    /// `n × |J|` dense matrix in block order.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_columns(self.n, &self.data)
    }

    /// Full `n × n` matrix when every column is present.
    pub fn to_square(&self) -> Result<DenseMatrix> {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let c = self
                .column_for(j)
                .ok_or_else(|| Error::InvalidInput(format!("column {j} missing from block")))?;
            m.set_column(j, c);
        }
        Ok(m)
    }
}

/// An Eulerian Laplacian (`L^r` or `L^d`) together with its unit null vector
/// `u` and the shift `α` of the nonsingular system `C = L + α u uᵀ`.
#[derive(Clone, Debug)]
pub struct EulerianSystem {
    pub kind: LaplacianKind,
    pub l: SparseMatrix,
    pub u: Vec<f64>,
    pub pi: Vec<f64>,
    pub shift_alpha: f64,
    /// `(‖L u‖₂, ‖Lᵀ u‖₂)` at construction.
    pub null_residuals: (f64, f64),
}

impl EulerianSystem {
    pub fn new(p: &SparseMatrix, pi: &[f64], kind: LaplacianKind) -> Result<Self> {
        let n = p.n_rows();
        let u = match kind {
            LaplacianKind::RandomWalk => vec![1.0 / (n as f64).sqrt(); n],
            LaplacianKind::DiagScaled => {
                check_len(n, pi.len())?;
                let s: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
                let nrm = norm2(&s);
                s.iter().map(|v| v / nrm).collect()
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "kind '{}' is not Eulerian; use the general pipeline",
                    other.letter()
                )))
            }
        };
        let l = build_laplacian(p, pi, &[], kind)?;
        Self::from_parts(kind, l, u, pi.to_vec())
    }

    /// Assembles a system from an already built Laplacian and unit null vector.
    pub fn from_parts(kind: LaplacianKind, l: SparseMatrix, u: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        check_len(l.n_rows(), u.len())?;
        check_len(l.n_cols(), u.len())?;
        check_positive(&u, "null vector")?;
        let mv = MvCounter::new();
        let right = norm2(&l.matvec(&u, &mv)?);
        let left = norm2(&l.matvec_transpose(&u, &mv)?);
        if !(right.is_finite() && left.is_finite()) {
            return Err(Error::Numerical("non-finite Laplacian".into()));
        }
        if right.max(left) > EULERIAN_WARN {
            log::warn!("Laplacian is Eulerian only to ({right:e}, {left:e}); tighten the stationary tolerance");
        }
        Ok(Self { kind, l, u, pi, shift_alpha: 1.0, null_residuals: (right, left) })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("shift alpha must be finite and nonzero, got {alpha}")));
        }
        self.shift_alpha = alpha;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.l.n_rows()
    }

    /// `C = L + α u uᵀ`.
    pub fn operator(&self) -> RankOneShiftedOperator<'_> {
        RankOneShiftedOperator::new(&self.l, self.u.clone(), self.u.clone(), self.shift_alpha)
            .expect("dimensions checked at construction")
    }

    /// `L† z = C⁻¹ z − u (uᵀ z) / α`.
    pub fn apply_pinv(&self, z: &[f64], cfg: &GmresConfig) -> Result<(Vec<f64>, SolveReport)> {
        check_len(self.n(), z.len())?;
        let (mut x, rep) = gmres_restarted(&self.operator(), z, None, cfg)?;
        let s = self.u.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / self.shift_alpha;
        x.iter_mut().zip(&self.u).for_each(|(xi, ui)| *xi -= s * ui);
        Ok((x, rep))
    }

    /// Column `j` of the pseudo-inverse.
    pub fn pinv_column(&self, j: usize, cfg: &GmresConfig) -> Result<(Vec<f64>, SolveReport)> {
        let n = self.n();
        if j >= n {
            return Err(Error::InvalidInput(format!("column {j} out of range for n = {n}")));
        }
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let (mut x, rep) = gmres_restarted(&self.operator(), &e, None, cfg)?;
        let s = self.u[j] / self.shift_alpha;
        x.iter_mut().zip(&self.u).for_each(|(xi, ui)| *xi -= s * ui);
        Ok((x, rep))
    }

    /// Columns `cols` of the pseudo-inverse, solved on `threads` workers.
    /// Results do not depend on the thread count.
    pub fn pinv_columns(&self, cols: &[usize], cfg: &GmresConfig, threads: usize) -> Result<(ColumnBlock, Vec<SolveReport>)> {
        let solve = |j: &usize| self.pinv_column(*j, cfg);
        let results: Vec<Result<(Vec<f64>, SolveReport)>> = if threads <= 1 || cols.len() <= 1 {
            cols.iter().map(solve).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(|| cols.par_iter().map(solve).collect())
        };
        let mut data = Vec::with_capacity(cols.len());
        let mut reports = Vec::with_capacity(cols.len());
        for r in results {
            let (c, rep) = r?;
            data.push(c);
            reports.push(rep);
        }
        Ok((ColumnBlock::new(self.n(), cols.to_vec(), data)?, reports))
    }
}
