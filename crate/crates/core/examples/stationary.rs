//! Stationary distribution of a generated digraph by subspace iteration,
//! checked against a dense direct solve.
//!
//! cargo run --example stationary -- [n] [ell]

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::oracle::stationary_direct;
use dpinv::sparse::build_transition;
use dpinv::stationary::{stationary_distribution, SubspaceConfig};

fn main() -> dpinv::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(300);
    let ell = args.next().unwrap_or(10);

    let (g, _) = preferential_attachment_digraph(&GenConfig::new(n, 1))?;
    let (p, _) = build_transition(&g)?;
    let cfg = SubspaceConfig { ell, tol: 1e-12, ..SubspaceConfig::default() };
    let r = stationary_distribution(&p, &cfg)?;
    println!("n = {n}, ell = {ell}: {} iterations, {} products, residual {:.2e}", r.iterations, r.mv_count, r.residual);

    let mut top: Vec<(usize, f64)> = r.pi.iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (i, x) in top.iter().take(5) {
        println!("  pi[{i}] = {x:.6}");
    }
    if n <= 1000 {
        let direct = stationary_direct(&p.to_dense())?;
        let gap = r.pi.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("max difference to the dense solve: {gap:.2e}");
    }
    Ok(())
}
