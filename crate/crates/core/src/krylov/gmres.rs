use std::time::Instant;

use super::arnoldi::arnoldi_step;
use super::{GmresConfig, LinearOperator, SolveReport};
use crate::error::{check_len, Error, Result};
use crate::smalldense::{axpy, dot, norm2, GivensLsq};
use crate::sparse::MvCounter;

fn explicit_residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64], mv: &MvCounter) -> Result<Vec<f64>> {
    let ax = op.apply(x, mv)?;
    Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
}

/// Restarted GMRES(ℓ) for `A x = b` starting from `x0` (zero when `None`).
///
/// Convergence is judged on the Givens-recurrence residual and confirmed by
/// one explicit `‖b − A x‖₂` before returning. On failure to converge within
/// `max_outer` cycles the error carries the partial report.
pub fn gmres_restarted<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = op.dim();
    check_len(n, b.len())?;
    if cfg.restart == 0 || !(cfg.tol > 0.0) {
        return Err(Error::InvalidInput("GMRES needs restart >= 1 and tol > 0".into()));
    }
    let start = Instant::now();
    let mv = MvCounter::new();
    let ell = cfg.restart.min(n.max(1));
    let mut report = SolveReport::default();

    let (mut x, mut r) = match x0 {
        Some(x0) => {
            check_len(n, x0.len())?;
            (x0.to_vec(), explicit_residual(op, b, x0, &mv)?)
        }
        None => (vec![0.0; n], b.to_vec()),
    };
    let mut beta = norm2(&r);
    if !beta.is_finite() {
        return Err(Error::Numerical("non-finite initial residual".into()));
    }
    report.residual_history.push(beta);

    let finish = |report: &mut SolveReport, mv: &MvCounter, res: f64, converged: bool| {
        report.final_residual = res;
        report.converged = converged;
        report.mv_count = mv.get();
        report.wall_time = start.elapsed().as_secs_f64();
    };

    if beta < cfg.tol {
        finish(&mut report, &mv, beta, true);
        return Ok((x, report));
    }

    for _outer in 0..cfg.max_outer {
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(ell);
        let mut lsq = GivensLsq::new(beta);
        let mut breakdown = false;
        for _ in 0..ell {
            let (h, stop) = arnoldi_step(op, &mut basis, &mv)?;
            let res = lsq.push_column(&h);
            hcols.push(h);
            if !res.is_finite() {
                return Err(Error::Numerical("non-finite residual in GMRES cycle".into()));
            }
            if stop || res < cfg.tol {
                breakdown = stop;
                break;
            }
        }
        let k = hcols.len();
        let y = lsq.solve();
        for (yi, vi) in y.iter().zip(&basis) {
            axpy(*yi, vi, &mut x);
        }
        // r = V_{k+1} (β e₁ − H̄ y), no extra product needed
        let mut g = vec![0.0; k + 1];
        g[0] = beta;
        for (j, h) in hcols.iter().enumerate() {
            for (i, hij) in h.iter().enumerate() {
                g[i] -= hij * y[j];
            }
        }
        r.iter_mut().for_each(|v| *v = 0.0);
        let used = if breakdown { k } else { k + 1 };
        for (gi, vi) in g.iter().zip(&basis).take(used) {
            axpy(*gi, vi, &mut r);
        }

        let est = lsq.residual();
        report.outer_iterations += 1;
        report.inner_iterations_total += k;
        report.inner_steps.push(k);
        report.residual_history.push(est);

        if est < cfg.tol || breakdown {
            let r_true = explicit_residual(op, b, &x, &mv)?;
            let res_true = norm2(&r_true);
            if !res_true.is_finite() {
                return Err(Error::Numerical("non-finite iterate".into()));
            }
            if res_true < cfg.tol {
                finish(&mut report, &mv, res_true, true);
                log::debug!(
                    "gmres converged: {} cycles, {} products, residual {res_true:e}",
                    report.outer_iterations,
                    report.mv_count
                );
                return Ok((x, report));
            }
            // recurrence drifted from the true residual: restart from the truth
            r = r_true;
        }
        beta = norm2(&r);
    }

    let res_true = norm2(&explicit_residual(op, b, &x, &mv)?);
    finish(&mut report, &mv, res_true, false);
    Err(Error::GmresNotConverged { report: Box::new(report) })
}

/// One minimal-residual Richardson step `r ↦ r − α A r` with the optimal
/// `α = (Ar·r)/(Ar·Ar)`.
pub fn richardson_step<A: LinearOperator + ?Sized>(op: &A, r: &[f64], mv: &MvCounter) -> Result<(f64, Vec<f64>)> {
    check_len(op.dim(), r.len())?;
    if norm2(r) == 0.0 {
        return Err(Error::InvalidInput("Richardson step needs a nonzero residual".into()));
    }
    let ar = op.apply(r, mv)?;
    let den = dot(&ar, &ar);
    if den == 0.0 {
        return Err(Error::Numerical("operator annihilates the residual direction".into()));
    }
    let alpha = dot(&ar, r) / den;
    let next = r.iter().zip(&ar).map(|(ri, ai)| ri - alpha * ai).collect();
    Ok((alpha, next))
}
