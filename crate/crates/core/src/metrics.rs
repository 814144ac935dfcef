//! Random-walk quantities read off pseudo-inverse columns: hitting and
//! commute times, visit counts, pass probabilities, the Kemeny constant and
//! trust/influence on graphs with an evaporating node.
//!
//! Entries are accessed through `g_ij`, which is `m^r_ij` for the r-form and
//! `m^d_ij / √(π_i π_j)` for the d-form. The d-form needs only the columns
//! named by the query; the r-form hitting time also needs the weighted row
//! sums `Σ_ℓ m_iℓ π_ℓ`, so every column.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::krylov::{GmresConfig, SolveReport};
use crate::laplacian::{ColumnBlock, LaplacianKind, TransitionSystem};
use crate::sparse::{Digraph, Edge};
use crate::stationary::{StationaryResult, SubspaceConfig};

/// Negative values down to `-NEGATIVE_SLACK` are rounding noise and clamp to 0.
pub const NEGATIVE_SLACK: f64 = 1e-9;

fn clamp_nonnegative(x: f64, what: &str) -> f64 {
    if x >= 0.0 {
        x
    } else if x >= -NEGATIVE_SLACK {
        0.0
    } else {
        log::warn!("{what} came out negative ({x:e}); the pseudo-inverse columns are not accurate enough");
        x
    }
}

#[derive(Clone, Debug)]
pub struct WalkMetrics {
    kind: LaplacianKind,
    block: ColumnBlock,
    pi: Vec<f64>,
    sqrt_pi: Vec<f64>,
    weighted_rows: Option<Vec<f64>>,
    evaporating: Option<usize>,
}

impl WalkMetrics {
    /// `block` holds columns of `M^r` or `M^d` according to `kind`.
    pub fn new(kind: LaplacianKind, block: ColumnBlock, pi: Vec<f64>) -> Result<Self> {
        if !matches!(kind, LaplacianKind::RandomWalk | LaplacianKind::DiagScaled) {
            return Err(Error::InvalidInput(format!("walk metrics need kind r or d, got '{}'", kind.letter())));
        }
        check_len(block.n(), pi.len())?;
        let sqrt_pi = pi.iter().map(|p| p.sqrt()).collect();
        let n = pi.len();
        let weighted_rows = (kind == LaplacianKind::RandomWalk && (0..n).all(|j| block.column_for(j).is_some()))
            .then(|| (0..n).map(|i| (0..n).map(|l| block.get(i, l).unwrap() * pi[l]).sum()).collect());
        Ok(Self { kind, block, pi, sqrt_pi, weighted_rows, evaporating: None })
    }

    /// Marks `node` as the evaporating node of an augmented graph, enabling
    /// [`trust`](Self::trust) and [`influence_scores`](Self::influence_scores).
    pub fn with_evaporating(mut self, node: usize) -> Result<Self> {
        self.check_node(node)?;
        self.evaporating = Some(node);
        Ok(self)
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn block(&self) -> &ColumnBlock {
        &self.block
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::InvalidInput(format!("node {i} out of range for n = {}", self.n())));
        }
        Ok(())
    }

    fn g(&self, i: usize, j: usize) -> Result<f64> {
        let m = self.block.get(i, j).ok_or(Error::MissingColumn { column: j })?;
        Ok(match self.kind {
            LaplacianKind::DiagScaled => m / (self.sqrt_pi[i] * self.sqrt_pi[j]),
            _ => m,
        })
    }

    fn weighted_row(&self, i: usize) -> Result<f64> {
        match &self.weighted_rows {
            Some(w) => Ok(w[i]),
            None => {
                let missing = (0..self.n()).find(|&j| self.block.column_for(j).is_none()).unwrap_or(0);
                Err(Error::MissingColumn { column: missing })
            }
        }
    }

    /// Expected number of steps of a walk from `i` until it first reaches `k`.
    pub fn hitting_time(&self, i: usize, k: usize) -> Result<f64> {
        self.check_node(i)?;
        self.check_node(k)?;
        if i == k {
            return Ok(0.0);
        }
        let mut h = self.g(k, k)? - self.g(i, k)?;
        if self.kind == LaplacianKind::RandomWalk {
            h += self.weighted_row(i)? - self.weighted_row(k)?;
        }
        Ok(clamp_nonnegative(h, "hitting time"))
    }

    /// Expected length of the round trip `i → k → i`.
    pub fn commute_time(&self, i: usize, k: usize) -> Result<f64> {
        self.check_node(i)?;
        self.check_node(k)?;
        if i == k {
            return Ok(0.0);
        }
        let c = self.g(k, k)? + self.g(i, i)? - self.g(i, k)? - self.g(k, i)?;
        Ok(clamp_nonnegative(c, "commute time"))
    }

    /// Expected number of visits to `j` by a walk from `i` before it is
    /// absorbed at `k`. The start counts as a visit.
    pub fn visits(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        self.check_node(i)?;
        self.check_node(j)?;
        self.check_node(k)?;
        if i == k || j == k {
            return Ok(0.0);
        }
        let v = (self.g(i, j)? - self.g(k, j)? - self.g(i, k)? + self.g(k, k)?) * self.pi[j];
        Ok(clamp_nonnegative(v, "visit count"))
    }

    /// Probability that a walk from `i` passes through `j` before reaching `k`.
    pub fn pass_probability(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        self.check_node(i)?;
        self.check_node(j)?;
        self.check_node(k)?;
        if j == k {
            return Err(Error::InvalidInput(format!("pass probability is undefined for j = k = {k}")));
        }
        if i == j {
            return Ok(1.0);
        }
        let p = self.visits(i, j, k)? / self.visits(j, j, k)?;
        if p > 1.0 + NEGATIVE_SLACK {
            log::warn!("pass probability {p} exceeds 1");
            return Ok(p);
        }
        Ok(p.min(1.0))
    }

    /// `Σ_k π_k h(i, k)`, the same for every `i`.
    pub fn kemeny_from(&self, i: usize) -> Result<f64> {
        (0..self.n()).map(|k| Ok(self.pi[k] * self.hitting_time(i, k)?)).sum()
    }

    /// The Kemeny constant: `trace M^d` for the d-form, `Σ_k π_k h(0, k)` for
    /// the r-form. Needs every diagonal entry.
    pub fn kemeny_constant(&self) -> Result<f64> {
        match self.kind {
            LaplacianKind::DiagScaled => (0..self.n())
                .map(|k| self.block.get(k, k).ok_or(Error::MissingColumn { column: k }))
                .sum(),
            _ => self.kemeny_from(0),
        }
    }

    fn evaporating(&self) -> Result<usize> {
        self.evaporating
            .ok_or_else(|| Error::InvalidInput("trust and influence need a graph augmented with an evaporating node".into()))
    }

    /// Trust of `j` from the point of view of `i`: the probability that a
    /// walk from `i` reaches `j` before evaporating.
    pub fn trust(&self, i: usize, j: usize) -> Result<f64> {
        let k = self.evaporating()?;
        self.pass_probability(i, j, k)
    }

    /// Influence of each node in `nodes`: `Σ_i trust(i, j)` over all original
    /// nodes `i`.
    pub fn influence_scores(&self, nodes: &[usize]) -> Result<Vec<f64>> {
        let k = self.evaporating()?;
        nodes
            .iter()
            .map(|&j| (0..self.n()).filter(|&i| i != k).map(|i| self.pass_probability(i, j, k)).sum())
            .collect()
    }
}

/// Columns a set of queries needs. Hitting-time pairs `(i, k)` need `i` and
/// `k` in the d-form (commute times read both); triples `(i, j, k)` need `j`
/// and `k`. The r-form needs every column as soon as a pair is asked for.
pub fn required_columns(kind: LaplacianKind, n: usize, pairs: &[(usize, usize)], triples: &[(usize, usize, usize)]) -> Vec<usize> {
    if kind == LaplacianKind::RandomWalk && !pairs.is_empty() {
        return (0..n).collect();
    }
    let mut cols: Vec<usize> = pairs.iter().flat_map(|&(i, k)| [i, k]).chain(triples.iter().flat_map(|&(_, j, k)| [j, k])).collect();
    cols.sort_unstable();
    cols.dedup();
    cols
}

#[derive(Clone, Debug)]
pub struct MetricsConfig {
    pub stationary: SubspaceConfig,
    pub gmres: GmresConfig,
    pub threads: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            stationary: SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() },
            gmres: GmresConfig { tol: 1e-11, ..GmresConfig::default() },
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub stationary: StationaryResult,
    pub columns: Vec<usize>,
    pub solves: Vec<SolveReport>,
}

/// Stationary vector plus the pseudo-inverse columns `cols` of the given
/// kind, wrapped for metric queries.
pub fn walk_metrics(g: &Digraph, kind: LaplacianKind, cols: &[usize], cfg: &MetricsConfig) -> Result<(WalkMetrics, MetricsReport)> {
    let ts = TransitionSystem::from_digraph(g, &cfg.stationary)?;
    let sys = ts.eulerian(kind)?;
    let (block, solves) = sys.pinv_columns(cols, &cfg.gmres, cfg.threads)?;
    let report = MetricsReport { stationary: ts.stationary.clone(), columns: cols.to_vec(), solves };
    Ok((WalkMetrics::new(kind, block, ts.stationary.pi)?, report))
}

/// A digraph with one extra node `evaporating = n` that every original node
/// moves to with probability `gamma`, and that restarts the walk according
/// to `restart`.
#[derive(Clone, Debug)]
pub struct AugmentedDigraph {
    pub graph: Digraph,
    pub evaporating: usize,
    pub gamma: f64,
    pub restart: Vec<f64>,
}

/// Rescales every node's out-weights to total `1 − γ` and adds an arc of
/// weight `γ` to the new node `n`, whose out-arcs follow `restart` (uniform
/// when `None`). A node without out-arcs evaporates with probability 1.
pub fn augment_evaporating(g: &Digraph, gamma: f64, restart: Option<&[f64]>) -> Result<AugmentedDigraph> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidInput(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidInput("cannot augment an empty graph".into()));
    }
    let restart = match restart {
        Some(r) => {
            check_len(n, r.len())?;
            let total: f64 = r.iter().sum();
            if r.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || !(total > 0.0) {
                return Err(Error::InvalidInput("restart vector must be nonnegative with a positive sum".into()));
            }
            r.iter().map(|x| x / total).collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let d = g.out_degrees();
    let mut edges: Vec<Edge> = g
        .edges()
        .iter()
        .map(|e| Edge { src: e.src, dst: e.dst, weight: (1.0 - gamma) * e.weight / d[e.src] })
        .collect();
    for (i, &di) in d.iter().enumerate() {
        edges.push(Edge { src: i, dst: n, weight: if di > 0.0 { gamma } else { 1.0 } });
    }
    for (j, &r) in restart.iter().enumerate() {
        if r > 0.0 {
            edges.push(Edge { src: n, dst: j, weight: r });
        }
    }
    let graph = Digraph::new(n + 1, edges)?;
    if let Some((from, to)) = graph.unreachable_pair() {
        return Err(Error::InvalidInput(format!(
            "restart vector leaves node {to} unreachable from node {from} in the augmented graph"
        )));
    }
    Ok(AugmentedDigraph { graph, evaporating: n, gamma, restart })
}
