//! Preferential-attachment digraph with extra one-way arcs, written as an
//! edge list.
//!
//! cargo run --example generate_graph -- [n] [seed] > graph.txt

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::io::write_edge_list;

fn main() -> dpinv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map(|a| a.parse().expect("n")).unwrap_or(100);
    let seed = args.next().map(|a| a.parse().expect("seed")).unwrap_or(0);
    let (g, rep) = preferential_attachment_digraph(&GenConfig::new(n, seed))?;
    eprintln!(
        "{} backbone edges, {} one-way arcs ({} merged into existing arcs), {} arcs total",
        rep.backbone_edges, rep.extra_oneway, rep.merged, rep.arcs
    );
    let in_deg = g.edges().iter().fold(vec![0usize; n], |mut d, e| {
        d[e.dst] += 1;
        d
    });
    eprintln!("largest in-degree {}", in_deg.iter().max().unwrap_or(&0));
    write_edge_list(&g, std::io::stdout().lock())
}
