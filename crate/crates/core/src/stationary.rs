//! Stationary distribution of an irreducible chain by modified subspace
//! iteration on `Pᵀ`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::smalldense::{move_to_front, norm2, ordered_schur_leading, orthonormalize_columns, real_schur, DenseMatrix, RealSchur};
use crate::sparse::{MvCounter, SparseMatrix};

/// RNG stream used for the random part of the initial block.
const INIT_STREAM: u64 = 2;

/// Row-sum slack accepted when validating a transition matrix.
const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SubspaceConfig {
    /// Block size ℓ; clamped to `n`.
    pub ell: usize,
    /// Target for `‖Pᵀπ − π‖₂`.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Replaces the seeded initial block when set (`n × ℓ`).
    pub initial_block: Option<DenseMatrix>,
}

impl Default for SubspaceConfig {
    fn default() -> Self {
        Self { ell: 30, tol: 1e-9, max_iterations: 10_000, seed: 0, initial_block: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryResult {
    pub pi: Vec<f64>,
    /// `‖Pᵀπ − π‖₂` of the returned vector.
    pub residual: f64,
    pub iterations: usize,
    pub mv_count: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Residual after each iteration.
    pub residual_history: Vec<f64>,
}

/// `‖Pᵀx − x‖₂`.
pub fn stationary_residual(p: &SparseMatrix, x: &[f64]) -> Result<f64> {
    let ptx = p.matvec_transpose(x, &MvCounter::new())?;
    Ok(norm2(&ptx.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>()))
}

pub(crate) fn check_stochastic(p: &SparseMatrix) -> Result<()> {
    if !p.is_square() {
        return Err(Error::InvalidInput(format!("transition matrix is {}x{}", p.n_rows(), p.n_cols())));
    }
    if let Some(v) = p.values().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidInput(format!("transition matrix has entry {v}")));
    }
    for (row, sum) in p.row_sums().into_iter().enumerate() {
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { row, sum });
        }
    }
    Ok(())
}

fn initial_block(n: usize, ell: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    let mut cols = vec![vec![1.0 / n as f64; n]];
    for _ in 1..ell {
        cols.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    cols
}

/// Orthonormalizes in place, replacing collapsed columns with fresh random
/// directions.
fn orthonormalize_reseeding(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) -> Result<()> {
    for _attempt in 0..=cols.len() + 8 {
        match orthonormalize_columns(cols) {
            Ok(()) => return Ok(()),
            Err(Error::RankDeficient { column }) => {
                log::debug!("subspace block lost rank at column {column}; reseeding");
                cols[column] = (0..cols[column].len()).map(|_| StandardNormal.sample(rng)).collect();
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numerical("could not restore a full-rank subspace block".into()))
}

/// Schur form with the eigenvalue closest to 1 leading when it is real;
/// otherwise the closest real eigenvalue (if any) leads.
fn schur_near_one(b: &DenseMatrix) -> Result<RealSchur> {
    match ordered_schur_leading(b, 1.0) {
        Err(Error::ComplexLeadingBlock) => {
            let mut s = real_schur(b)?;
            let best = s
                .eigenvalues()
                .iter()
                .enumerate()
                .filter(|(_, ev)| ev.1 == 0.0)
                .min_by(|a, b| (a.1 .0 - 1.0).abs().total_cmp(&(b.1 .0 - 1.0).abs()))
                .map(|(i, _)| i);
            if let Some(i) = best {
                move_to_front(&mut s, i)?;
            }
            Ok(s)
        }
        other => other,
    }
}

/// Columns of `V · U` for `V` given by columns.
fn times_small(v: &[Vec<f64>], u: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = v[0].len();
    (0..u.n_cols())
        .map(|j| {
            let mut c = vec![0.0; n];
            for (i, vi) in v.iter().enumerate() {
                let s = u[(i, j)];
                if s != 0.0 {
                    c.iter_mut().zip(vi).for_each(|(ci, x)| *ci += s * x);
                }
            }
            c
        })
        .collect()
}

/// Stationary distribution π of the transition matrix `p`.
///
/// Each iteration costs `ℓ + 1` products with `Pᵀ`: `ℓ` to map the block and
/// one to verify the residual of the leading column.
pub fn stationary_distribution(p: &SparseMatrix, cfg: &SubspaceConfig) -> Result<StationaryResult> {
    check_stochastic(p)?;
    if cfg.ell < 2 || !(cfg.tol > 0.0) {
        return Err(Error::InvalidInput("subspace iteration needs ell >= 2 and tol > 0".into()));
    }
    let start = Instant::now();
    let n = p.n_rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty transition matrix".into()));
    }
    if n == 1 {
        return Ok(StationaryResult {
            pi: vec![1.0],
            residual: 0.0,
            iterations: 0,
            mv_count: 0,
            wall_time: start.elapsed().as_secs_f64(),
            residual_history: Vec::new(),
        });
    }
    let mv = MvCounter::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INIT_STREAM + 1);

    let mut q = match &cfg.initial_block {
        Some(x0) => {
            check_len(n, x0.n_rows())?;
            x0.columns().into_iter().take(n).collect()
        }
        None => initial_block(n, cfg.ell.min(n), cfg.seed),
    };
    let ell = q.len();
    if ell < 1 {
        return Err(Error::InvalidInput("initial block has no columns".into()));
    }

    let mut history = Vec::new();
    let mut ptpi = vec![0.0; n];
    let mut last_residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        orthonormalize_reseeding(&mut q, &mut rng)?;
        let y: Vec<Vec<f64>> = q.iter().map(|c| p.matvec_transpose(c, &mv)).collect::<Result<_>>()?;
        let mut b = DenseMatrix::zeros(ell, ell);
        for i in 0..ell {
            for j in 0..ell {
                b[(i, j)] = q[i].iter().zip(&y[j]).map(|(a, c)| a * c).sum();
            }
        }
        if !b.is_finite() {
            return Err(Error::Numerical("non-finite projected matrix".into()));
        }
        let schur = schur_near_one(&b)?;
        let mut z0 = times_small(&q, &DenseMatrix::from_columns(ell, &[schur.u.column(0)]))
            .pop()
            .expect("one column");
        // AZ = Y U: the next block needs no further products
        let az = times_small(&y, &schur.u);

        let sum: f64 = z0.iter().sum();
        if sum < 0.0 {
            z0.iter_mut().for_each(|v| *v = -*v);
        }
        let sum = sum.abs();
        let residual = if sum > 0.0 {
            let pi: Vec<f64> = z0.iter().map(|v| v / sum).collect();
            p.matvec_transpose_into(&pi, &mut ptpi, &mv)?;
            let r = norm2(&ptpi.iter().zip(&pi).map(|(a, b)| a - b).collect::<Vec<_>>());
            history.push(r);
            last_residual = r;
            if r <= cfg.tol && pi.iter().all(|&v| v > 0.0) {
                log::debug!("stationary: converged after {it} iterations, residual {r:e}");
                return Ok(StationaryResult {
                    pi,
                    residual: r,
                    iterations: it,
                    mv_count: mv.get(),
                    wall_time: start.elapsed().as_secs_f64(),
                    residual_history: history,
                });
            }
            r
        } else {
            // leading column orthogonal to 1: count the product anyway so the
            // per-iteration cost stays ℓ + 1
            p.matvec_transpose_into(&z0, &mut ptpi, &mv)?;
            history.push(f64::INFINITY);
            f64::INFINITY
        };
        if !residual.is_finite() && sum > 0.0 {
            return Err(Error::Numerical("non-finite stationary residual".into()));
        }
        q = az;
    }
    Err(Error::StationaryNotConverged { iterations: cfg.max_iterations, residual: last_residual })
}
