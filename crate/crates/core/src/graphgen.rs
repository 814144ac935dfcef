//! Seeded synthetic digraphs: a symmetric preferential-attachment backbone
//! plus uniformly random one-way arcs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{Digraph, Edge};

/// RNG stream for backbone attachment draws.
pub const BACKBONE_STREAM: u64 = 0;
/// RNG stream for the extra one-way arcs.
pub const EXTRA_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GenConfig {
    pub n: usize,
    /// Backbone edges added by each new node.
    pub attach: usize,
    /// Random one-way arcs added on top of the backbone.
    pub extra_oneway: usize,
    pub seed: u64,
}

impl GenConfig {
    /// `attach = 2`, `extra_oneway = n`.
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, attach: 2, extra_oneway: n, seed }
    }
}

/// Exact arc accounting: `arcs = 2 · backbone_edges + extra_oneway − merged`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenReport {
    pub backbone_edges: usize,
    pub extra_oneway: usize,
    /// Extra arcs that coincided with an existing arc.
    pub merged: usize,
    pub arcs: usize,
}

/// Builds the graph described by `cfg`. The backbone starts from a triangle;
/// every later node `v` connects to `min(attach, v)` distinct earlier nodes
/// picked with probability proportional to their degree. Each backbone edge
/// becomes a pair of opposite arcs, so the result is strongly connected.
/// All weights are 1.
pub fn preferential_attachment_digraph(cfg: &GenConfig) -> Result<(Digraph, GenReport)> {
    if cfg.n < 3 {
        return Err(Error::InvalidInput(format!("need n >= 3, got {}", cfg.n)));
    }
    if cfg.attach < 1 {
        return Err(Error::InvalidInput("need attach >= 1".into()));
    }
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(BACKBONE_STREAM);

    let mut arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
    // each endpoint appears once per incident edge
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * cfg.attach * n + 6);
    let mut backbone = 0;
    let mut add_edge = |a: usize, b: usize, arcs: &mut BTreeSet<(usize, usize)>, endpoints: &mut Vec<usize>| {
        arcs.insert((a, b));
        arcs.insert((b, a));
        endpoints.push(a);
        endpoints.push(b);
        backbone += 1;
    };
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        add_edge(a, b, &mut arcs, &mut endpoints);
    }
    let mut targets = Vec::with_capacity(cfg.attach);
    for v in 3..n {
        let m = cfg.attach.min(v);
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            add_edge(v, t, &mut arcs, &mut endpoints);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(EXTRA_STREAM);
    let mut merged = 0;
    for _ in 0..cfg.extra_oneway {
        let src = rng.random_range(0..n);
        let mut dst = rng.random_range(0..n - 1);
        if dst >= src {
            dst += 1;
        }
        if !arcs.insert((src, dst)) {
            merged += 1;
        }
    }
    let report = GenReport { backbone_edges: backbone, extra_oneway: cfg.extra_oneway, merged, arcs: arcs.len() };
    let g = Digraph::new(n, arcs.into_iter().map(|(src, dst)| Edge { src, dst, weight: 1.0 }))?;
    Ok((g, report))
}
