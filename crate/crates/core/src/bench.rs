//! Size sweep over generated graphs, counting matrix-vector products and
//! solver wall time for the stationary vector and for one pseudo-inverse
//! column.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::graphgen::{preferential_attachment_digraph, GenConfig, GenReport};
use crate::krylov::GmresConfig;
use crate::laplacian::{EulerianSystem, LaplacianKind};
use crate::sparse::build_transition;
use crate::stationary::{stationary_distribution, SubspaceConfig};

pub const CSV_HEADER: &str = "n,mv_pi,time_pi_ms,mv_col,time_col_ms";

#[derive(Clone, Debug, Serialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub attach: usize,
    pub tol: f64,
    pub ell: usize,
    /// Column solved for the single-column timing.
    pub column: usize,
    /// Timed runs of the column solve per sample; the median is kept.
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { sizes: vec![1024, 2048, 4096], seeds: vec![0, 1, 2], attach: 2, tol: 1e-9, ell: 30, column: 0, repeats: 11 }
    }
}

/// One graph's measurements.
#[derive(Clone, Debug, Serialize)]
pub struct BenchSample {
    pub n: usize,
    pub seed: u64,
    pub graph: GenReport,
    pub mv_pi: usize,
    pub iterations_pi: usize,
    pub time_pi_ms: f64,
    pub mv_col: usize,
    pub time_col_ms: f64,
}

/// Medians over seeds for one size.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub mv_pi: f64,
    pub time_pi_ms: f64,
    pub mv_col: f64,
    pub time_col_ms: f64,
    pub arcs: f64,
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Generates one graph and times both solves. File I/O and graph
/// generation are outside the timed regions.
pub fn bench_one(n: usize, seed: u64, cfg: &BenchConfig) -> Result<BenchSample> {
    let (g, graph) = preferential_attachment_digraph(&GenConfig { n, attach: cfg.attach, extra_oneway: n, seed })?;
    let (p, _) = build_transition(&g)?;
    let scfg = SubspaceConfig { ell: cfg.ell, tol: cfg.tol, seed, ..SubspaceConfig::default() };
    let t = Instant::now();
    let stat = stationary_distribution(&p, &scfg)?;
    let time_pi_ms = t.elapsed().as_secs_f64() * 1e3;
    let sys = EulerianSystem::new(&p, &stat.pi, LaplacianKind::DiagScaled)?;
    let gcfg = GmresConfig { restart: cfg.ell, tol: cfg.tol, ..GmresConfig::default() };
    let mut times = Vec::with_capacity(cfg.repeats.max(1));
    let mut rep = None;
    for _ in 0..cfg.repeats.max(1) {
        let t = Instant::now();
        let (_, r) = sys.pinv_column(cfg.column.min(n - 1), &gcfg)?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
        rep = Some(r);
    }
    let rep = rep.expect("at least one run");
    let time_col_ms = median(&mut times);
    Ok(BenchSample {
        n,
        seed,
        graph,
        mv_pi: stat.mv_count,
        iterations_pi: stat.iterations,
        time_pi_ms,
        mv_col: rep.mv_count,
        time_col_ms,
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<(Vec<BenchRow>, Vec<BenchSample>)> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    let mut samples = Vec::new();
    for &n in &cfg.sizes {
        let s: Vec<BenchSample> = cfg.seeds.iter().map(|&seed| bench_one(n, seed, cfg)).collect::<Result<_>>()?;
        let med = |f: &dyn Fn(&BenchSample) -> f64| median(&mut s.iter().map(f).collect::<Vec<_>>());
        rows.push(BenchRow {
            n,
            mv_pi: med(&|x| x.mv_pi as f64),
            time_pi_ms: med(&|x| x.time_pi_ms),
            mv_col: med(&|x| x.mv_col as f64),
            time_col_ms: med(&|x| x.time_col_ms),
            arcs: med(&|x| x.graph.arcs as f64),
        });
        log::info!("n = {n}: {:?}", rows.last());
        samples.extend(s);
    }
    Ok((rows, samples))
}

pub fn write_csv(rows: &[BenchRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:.3},{},{:.3}", r.n, r.mv_pi, r.time_pi_ms, r.mv_col, r.time_col_ms)?;
    }
    Ok(())
}

/// Growth factors between consecutive rows of a sweep over doubling sizes.
#[derive(Clone, Debug, Serialize)]
pub struct Trend {
    pub time_pi_growth: Vec<f64>,
    pub time_col_growth: Vec<f64>,
    /// `mv_col` of the largest size over that of the smallest.
    pub mv_col_growth: f64,
}

pub fn trend(rows: &[BenchRow]) -> Trend {
    let ratios = |f: fn(&BenchRow) -> f64| rows.windows(2).map(|w| f(&w[1]) / f(&w[0])).collect();
    let mv_col_growth = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.mv_col / a.mv_col,
        _ => f64::NAN,
    };
    Trend { time_pi_growth: ratios(|r| r.time_pi_ms), time_col_growth: ratios(|r| r.time_col_ms), mv_col_growth }
}
