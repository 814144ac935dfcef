//! A handful of pseudo-inverse columns of the random-walk and diagonally
//! scaled Laplacians, one GMRES solve per column.
//!
//! cargo run --example pinv_columns

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::krylov::GmresConfig;
use dpinv::laplacian::{LaplacianKind, TransitionSystem};
use dpinv::stationary::SubspaceConfig;

fn main() -> dpinv::Result<()> {
    let (g, _) = preferential_attachment_digraph(&GenConfig::new(2000, 7))?;
    let ts = TransitionSystem::from_digraph(&g, &SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() })?;
    let cols = [0, 10, 100, 1999];
    let gmres = GmresConfig { tol: 1e-10, ..GmresConfig::default() };
    for kind in [LaplacianKind::RandomWalk, LaplacianKind::DiagScaled] {
        let sys = ts.eulerian(kind)?;
        let (block, reports) = sys.pinv_columns(&cols, &gmres, 4)?;
        println!("M^{} columns {:?}", kind.letter(), block.columns());
        for (p, rep) in reports.iter().enumerate() {
            let c = block.column(p);
            // every column is orthogonal to the null vector u
            let dot: f64 = c.iter().zip(&sys.u).map(|(a, b)| a * b).sum();
            println!(
                "  col {:>4}: diag {:+.5e}, {} products, residual {:.1e}, u·col {:.1e}",
                block.columns()[p],
                c[block.columns()[p]],
                rep.mv_count,
                rep.final_residual,
                dot
            );
        }
    }
    Ok(())
}
