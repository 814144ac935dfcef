//! Restarted GMRES on the shifted Laplacian L + αuuᵀ, with the observed
//! residual reduction next to the field-of-values bound.
//!
//! cargo run --example gmres_bound

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::krylov::{gmres_restarted, GmresConfig};
use dpinv::laplacian::{LaplacianKind, TransitionSystem};
use dpinv::oracle::symmetric_part_extremes;
use dpinv::stationary::SubspaceConfig;

fn main() -> dpinv::Result<()> {
    let (g, _) = preferential_attachment_digraph(&GenConfig::new(150, 5))?;
    let ts = TransitionSystem::from_digraph(&g, &SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() })?;
    let sys = ts.eulerian(LaplacianKind::DiagScaled)?;
    let c = sys.l.to_dense().add_outer(sys.shift_alpha, &sys.u, &sys.u);
    let (lmin, norm) = symmetric_part_extremes(&c)?;
    let rho = 1.0 - (lmin / norm).powi(2);
    println!("lambda_min(sym) = {lmin:.4e}, |C| = {norm:.4}, contraction per step {:.6}", rho.sqrt());

    let mut b = vec![0.0; g.n()];
    b[0] = 1.0;
    for ell in [5, 30] {
        let cfg = GmresConfig { restart: ell, tol: 1e-10, max_outer: 10_000 };
        let (_, rep) = gmres_restarted(&sys.operator(), &b, None, &cfg)?;
        println!("ell = {ell}: {} cycles, {} products", rep.outer_iterations, rep.mv_count);
        let r0 = rep.residual_history[0];
        let mut steps = 0;
        for (k, r) in rep.residual_history.iter().enumerate().skip(1).take(6) {
            steps += rep.inner_steps[k - 1];
            println!("  after {steps:>4} steps: ratio {:.3e}  bound {:.3e}", r / r0, rho.powf(steps as f64 / 2.0));
        }
    }
    Ok(())
}
