#![allow(dead_code)]

use dpinv::graphgen::{preferential_attachment_digraph, GenConfig};
use dpinv::smalldense::DenseMatrix;
use dpinv::sparse::{build_transition, Digraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random weighted digraph: a Hamiltonian cycle through a shuffled node
/// order, `extra` random arcs and a few self-loops, all with random weights.
pub fn random_digraph(n: usize, extra: usize, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(11);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut arcs: Vec<(usize, usize, f64)> = (0..n).map(|i| (order[i], order[(i + 1) % n], rng.random_range(0.2..2.0))).collect();
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        arcs.push((a, b, rng.random_range(0.1..3.0)));
    }
    Digraph::from_arcs(n, &arcs).unwrap()
}

/// The `idx`-th graph of a mixed family: preferential-attachment graphs for
/// even `idx`, random weighted digraphs for odd `idx`, with `n` drawn from
/// `lo..=hi`.
pub fn family_graph(idx: u64, lo: usize, hi: usize) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + idx);
    let n = rng.random_range(lo..=hi);
    if idx % 2 == 0 {
        preferential_attachment_digraph(&GenConfig::new(n.max(3), idx)).unwrap().0
    } else {
        random_digraph(n, 2 * n, idx)
    }
}

pub fn dense_transition(g: &Digraph) -> DenseMatrix {
    build_transition(g).unwrap().0.to_dense()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Strictly periodic graph: `layers` groups of `width` nodes, every node
/// pointing to every node of the next group with random weights.
pub fn layered_periodic(layers: usize, width: usize, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = layers * width;
    let mut arcs = Vec::new();
    for l in 0..layers {
        let next = (l + 1) % layers;
        for a in 0..width {
            for b in 0..width {
                arcs.push((l * width + a, next * width + b, rng.random_range(0.2..2.0)));
            }
        }
    }
    Digraph::from_arcs(n, &arcs).unwrap()
}
