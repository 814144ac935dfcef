//! Certifies a full pseudo-inverse against the four Penrose conditions and
//! compares hitting times with a Monte Carlo simulation.
//!
//! cargo run --example verify_penrose

use dpinv::cli::{verify_graph, VerifyConfig};
use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::laplacian::LaplacianKind;
use dpinv::metrics::{walk_metrics, MetricsConfig};
use dpinv::oracle::monte_carlo_walk;
use dpinv::sparse::build_transition;

fn main() -> dpinv::Result<()> {
    let (g, _) = preferential_attachment_digraph(&GenConfig::new(60, 2))?;
    for c in verify_graph(&g, &VerifyConfig::default())? {
        println!("{} {}: {:.2e} (limit {:.0e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
    }

    let all: Vec<usize> = (0..g.n()).collect();
    let (m, _) = walk_metrics(&g, LaplacianKind::DiagScaled, &all, &MetricsConfig::default())?;
    let (p, _) = build_transition(&g)?;
    let (i, k) = (5, 40);
    let mc = monte_carlo_walk(&p, i, k, 20_000, 1)?;
    println!("h({i},{k}): formula {:.3}, simulation {:.3} ± {:.3}", m.hitting_time(i, k)?, mc.hitting, mc.hitting_se);
    println!("c({i},{k}): formula {:.3}, simulation {:.3} ± {:.3}", m.commute_time(i, k)?, mc.commute, mc.commute_se);
    Ok(())
}
