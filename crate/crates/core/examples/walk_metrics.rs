//! Hitting and commute times, visit counts, pass probabilities and the
//! Kemeny constant from a few pseudo-inverse columns.
//!
//! cargo run --example walk_metrics

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::laplacian::LaplacianKind;
use dpinv::metrics::{required_columns, walk_metrics, MetricsConfig};

fn main() -> dpinv::Result<()> {
    let (g, _) = preferential_attachment_digraph(&GenConfig::new(1000, 3))?;
    let pairs = [(10, 0), (500, 0), (999, 1)];
    let triples = [(10, 3, 0), (500, 999, 1)];
    let cols = required_columns(LaplacianKind::DiagScaled, g.n(), &pairs, &triples);
    let (m, report) = walk_metrics(&g, LaplacianKind::DiagScaled, &cols, &MetricsConfig::default())?;
    println!("{} columns solved for {} nodes", report.columns.len(), g.n());
    for (i, k) in pairs {
        println!("  h({i} -> {k}) = {:.3}, commute = {:.3}", m.hitting_time(i, k)?, m.commute_time(i, k)?);
    }
    for (i, j, k) in triples {
        println!(
            "  walk {i} -> {k}: visits to {j} = {:.4}, passes {j} with probability {:.4}",
            m.visits(i, j, k)?,
            m.pass_probability(i, j, k)?
        );
    }

    let small = preferential_attachment_digraph(&GenConfig::new(200, 3))?.0;
    let all: Vec<usize> = (0..small.n()).collect();
    let (full, _) = walk_metrics(&small, LaplacianKind::DiagScaled, &all, &MetricsConfig::default())?;
    println!("Kemeny constant of a 200-node graph: {:.4}", full.kemeny_constant()?);
    Ok(())
}
