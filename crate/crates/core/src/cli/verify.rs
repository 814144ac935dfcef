use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::GmresConfig;
use crate::laplacian::{ColumnBlock, LaplacianKind, TransitionSystem};
use crate::metrics::WalkMetrics;
use crate::oracle::{dense_pinv_reference, hitting_times_direct, penrose_check, stationary_direct};
use crate::smalldense::DenseMatrix;
use crate::sparse::Digraph;
use crate::stationary::SubspaceConfig;

/// Largest graph the dense checks accept.
pub const MAX_VERIFY_N: usize = 500;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value.is_finite() && value <= limit }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Limit for Penrose residuals and relative agreement with the dense
    /// references.
    pub tol: f64,
    pub pi_tol: f64,
    pub gmres_tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { tol: 1e-6, pi_tol: 1e-12, gmres_tol: 1e-12, seed: 0 }
    }
}

fn system(g: &Digraph, cfg: &VerifyConfig, checks: &mut Vec<Check>) -> Result<TransitionSystem> {
    if g.n() > MAX_VERIFY_N {
        return Err(Error::InvalidInput(format!("verify handles n <= {MAX_VERIFY_N}, got {}", g.n())));
    }
    let scfg = SubspaceConfig { tol: cfg.pi_tol, seed: cfg.seed, ..SubspaceConfig::default() };
    let ts = TransitionSystem::from_digraph(g, &scfg)?;
    let direct = stationary_direct(&ts.p.to_dense())?;
    let diff = ts.pi().iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::new("stationary vs direct", diff, 1e-8));
    checks.push(Check::new("stationary residual", ts.stationary.residual, cfg.pi_tol));
    Ok(ts)
}

fn null_vector(ts: &TransitionSystem, kind: LaplacianKind) -> Vec<f64> {
    match kind {
        LaplacianKind::DiagScaled => ts.pi().iter().map(|p| p.sqrt()).collect(),
        _ => vec![1.0; ts.n()],
    }
}

fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).max_abs() / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Full `M^r` and `M^d` against the Penrose conditions and the dense
/// reference, plus hitting times against the absorbing-chain solve.
pub fn verify_graph(g: &Digraph, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ts = system(g, cfg, &mut checks)?;
    let n = ts.n();
    let cols: Vec<usize> = (0..n).collect();
    let gcfg = GmresConfig { tol: cfg.gmres_tol, ..GmresConfig::default() };
    let mut md = None;
    for kind in [LaplacianKind::RandomWalk, LaplacianKind::DiagScaled] {
        let letter = kind.letter();
        let sys = ts.eulerian(kind)?;
        let (block, _) = sys.pinv_columns(&cols, &gcfg, 1)?;
        let b = block.to_square()?;
        let l = sys.l.to_dense();
        checks.push(Check::new(format!("penrose M^{letter}"), penrose_check(&l, &b, cfg.tol).max_residual(), cfg.tol));
        let u = null_vector(&ts, kind);
        let reference = dense_pinv_reference(&l, &u, &u)?;
        checks.push(Check::new(format!("M^{letter} vs dense reference"), rel_diff(&b, &reference), cfg.tol));
        if kind == LaplacianKind::DiagScaled {
            md = Some(block);
        }
    }
    let wm = WalkMetrics::new(LaplacianKind::DiagScaled, md.expect("computed above"), ts.pi().to_vec())?;
    let pd = ts.p.to_dense();
    let mut worst: f64 = 0.0;
    for k in [0, n - 1] {
        let h = hitting_times_direct(&pd, k)?;
        for (i, hi) in h.iter().enumerate() {
            worst = worst.max((wm.hitting_time(i, k)? - hi).abs() / hi.max(1.0));
        }
    }
    checks.push(Check::new("hitting times vs direct", worst, cfg.tol));
    Ok(checks)
}

/// Certifies a supplied column block: a complete block must pass the Penrose
/// conditions, a partial one must match the dense reference columns.
pub fn verify_block(g: &Digraph, kind: LaplacianKind, block: &ColumnBlock, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ts = system(g, cfg, &mut checks)?;
    if block.n() != ts.n() {
        return Err(Error::DimensionMismatch { expected: ts.n(), found: block.n() });
    }
    let sys = ts.eulerian(kind)?;
    let l = sys.l.to_dense();
    let letter = kind.letter();
    if let Ok(b) = block.to_square() {
        let rep = penrose_check(&l, &b, cfg.tol);
        let names = ["ABA = A", "BAB = B", "AB symmetric", "BA symmetric"];
        for (name, r) in names.iter().zip(rep.residuals()) {
            checks.push(Check::new(format!("penrose M^{letter} {name}"), r, cfg.tol));
        }
    } else {
        let u = null_vector(&ts, kind);
        let reference = dense_pinv_reference(&l, &u, &u)?;
        let scale = reference.max_abs().max(f64::MIN_POSITIVE);
        let worst = (0..block.len())
            .flat_map(|p| {
                let j = block.columns()[p];
                let r = &reference;
                block.column(p).iter().enumerate().map(move |(i, v)| (v - r[(i, j)]).abs())
            })
            .fold(0.0, f64::max);
        checks.push(Check::new(format!("M^{letter} columns vs dense reference"), worst / scale, cfg.tol));
    }
    Ok(checks)
}
