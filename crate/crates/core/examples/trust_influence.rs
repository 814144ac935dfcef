//! Trust and influence scores through an evaporating node that absorbs a
//! fraction gamma of every step and restarts the walk.
//!
//! cargo run --example trust_influence -- [gamma]

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::laplacian::LaplacianKind;
use dpinv::metrics::{augment_evaporating, walk_metrics, MetricsConfig};

fn main() -> dpinv::Result<()> {
    let gamma: f64 = std::env::args().nth(1).map(|a| a.parse().expect("gamma")).unwrap_or(0.15);
    let (g, _) = preferential_attachment_digraph(&GenConfig::new(150, 11))?;
    let aug = augment_evaporating(&g, gamma, None)?;
    let k = aug.evaporating;
    let all: Vec<usize> = (0..aug.graph.n()).collect();
    let (m, _) = walk_metrics(&aug.graph, LaplacianKind::DiagScaled, &all, &MetricsConfig::default())?;
    let m = m.with_evaporating(k)?;

    println!("trust from node 0: t(0,1) = {:.4}, t(0,2) = {:.4}, t(0,100) = {:.4}", m.trust(0, 1)?, m.trust(0, 2)?, m.trust(0, 100)?);
    let nodes: Vec<usize> = (0..k).collect();
    let scores = m.influence_scores(&nodes)?;
    let mut ranked: Vec<(usize, f64)> = nodes.into_iter().zip(scores).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("most influential nodes (gamma = {gamma}):");
    for (j, s) in ranked.iter().take(8) {
        println!("  {j:>4}  {s:.4}");
    }
    Ok(())
}
