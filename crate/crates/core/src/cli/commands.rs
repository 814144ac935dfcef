use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::verify::{verify_block, verify_graph, Check, VerifyConfig};
use super::*;
use crate::bench::{run_bench, trend, write_csv, BenchConfig};
use crate::error::{Error, Result};
use crate::graphgen::{preferential_attachment_digraph, GenConfig};
use crate::io::{
    read_column_block_csv, read_edge_list, read_matrix_market, read_vector, write_column_block_csv,
    write_column_block_raw, write_edge_list, write_vector,
};
use crate::krylov::{GmresConfig, SolveReport};
use crate::laplacian::{general_pinv, ColumnBlock, GeneralLaplacian, GeneralPinvConfig, LaplacianKind, TransitionSystem};
use crate::metrics::{augment_evaporating, required_columns, walk_metrics, MetricsConfig};
use crate::sparse::{build_transition, Digraph};
use crate::stationary::{stationary_distribution, StationaryResult, SubspaceConfig};

pub(super) fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen(a) => gen(a, out),
        Command::Stationary(a) => stationary(a, out),
        Command::Pinv(a) => pinv(a, out),
        Command::GeneralPinv(a) => general(a, out),
        Command::Metrics(a) => metrics(a, out),
        Command::Bench(a) => bench(a, out, err),
        Command::Verify(a) => verify(a, out),
    }
    .map_err(|e| {
        log::debug!("command failed: {e:?}");
        e
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))
}

fn emit(path: Option<&PathBuf>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    if let Some(p) = path {
        let mut w = BufWriter::new(File::create(p)?);
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<Digraph> {
    read_edge_list(open(path)?)
}

fn parse_cols(spec: &str, n: usize) -> Result<Vec<usize>> {
    if spec.trim() == "all" {
        return Ok((0..n).collect());
    }
    spec.split(',')
        .map(|t| {
            let j: usize = t.trim().parse().map_err(|_| Error::InvalidInput(format!("bad column id '{t}'")))?;
            if j >= n {
                return Err(Error::InvalidInput(format!("column {j} out of range for n = {n}")));
            }
            Ok(j)
        })
        .collect()
}

fn parse_tuples<const K: usize>(spec: &str, n: usize) -> Result<Vec<[usize; K]>> {
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let ids: Vec<usize> = t
                .split(':')
                .map(|x| x.trim().parse().map_err(|_| Error::InvalidInput(format!("bad node id in '{t}'"))))
                .collect::<Result<_>>()?;
            let arr: [usize; K] = ids
                .try_into()
                .map_err(|_| Error::InvalidInput(format!("'{t}' should have {K} colon-separated ids")))?;
            if let Some(bad) = arr.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidInput(format!("node {bad} out of range for n = {n}")));
            }
            Ok(arr)
        })
        .collect()
}

fn kind_of(k: EulerianKind) -> LaplacianKind {
    match k {
        EulerianKind::R => LaplacianKind::RandomWalk,
        EulerianKind::D => LaplacianKind::DiagScaled,
    }
}

fn write_block(b: &ColumnBlock, format: BlockFormat, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    emit(path, out, |w| match format {
        BlockFormat::Csv => write_column_block_csv(b, w),
        BlockFormat::Raw => write_column_block_raw(b, w),
    })
}

#[derive(Serialize)]
struct StationarySummary {
    n: usize,
    iterations: usize,
    mv_count: usize,
    residual: f64,
    time_ms: f64,
    residual_history: Vec<f64>,
}

impl From<&StationaryResult> for StationarySummary {
    fn from(r: &StationaryResult) -> Self {
        Self {
            n: r.pi.len(),
            iterations: r.iterations,
            mv_count: r.mv_count,
            residual: r.residual,
            time_ms: r.wall_time * 1e3,
            residual_history: r.residual_history.clone(),
        }
    }
}

#[derive(Serialize)]
struct SolveSummary {
    columns: usize,
    mv_total: usize,
    mv_max: usize,
    mv_mean: f64,
    outer_max: usize,
    worst_residual: f64,
    time_ms: f64,
    per_column: Vec<SolveReport>,
}

fn summarize(reports: Vec<SolveReport>, time_ms: f64) -> SolveSummary {
    let mv_total = reports.iter().map(|r| r.mv_count).sum();
    SolveSummary {
        columns: reports.len(),
        mv_total,
        mv_max: reports.iter().map(|r| r.mv_count).max().unwrap_or(0),
        mv_mean: if reports.is_empty() { 0.0 } else { mv_total as f64 / reports.len() as f64 },
        outer_max: reports.iter().map(|r| r.outer_iterations).max().unwrap_or(0),
        worst_residual: reports.iter().map(|r| r.final_residual).fold(0.0, f64::max),
        time_ms,
        per_column: reports,
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    let n = a.n as usize;
    let cfg = GenConfig { n, attach: a.attach as usize, extra_oneway: a.extra.unwrap_or(n), seed: a.seed.seed };
    let (g, rep) = preferential_attachment_digraph(&cfg)?;
    emit(a.out.as_ref(), out, |w| write_edge_list(&g, w))?;
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a GenConfig,
        graph: crate::graphgen::GenReport,
    }
    write_json(a.report.as_ref(), &Report { config: &cfg, graph: rep })?;
    Ok(EXIT_OK)
}

fn stationary(a: StationaryArgs, out: &mut dyn Write) -> Result<i32> {
    let g = read_graph(&a.graph)?;
    if let Some((from, to)) = g.unreachable_pair() {
        return Err(Error::NotStronglyConnected { from, to });
    }
    let (p, _) = build_transition(&g)?;
    let cfg = SubspaceConfig { ell: a.ell, tol: a.tol, max_iterations: a.max_iter, seed: a.seed.seed, initial_block: None };
    let r = stationary_distribution(&p, &cfg)?;
    emit(a.out.as_ref(), out, |w| write_vector(&r.pi, w))?;
    write_json(a.report.as_ref(), &StationarySummary::from(&r))?;
    Ok(EXIT_OK)
}

fn pinv(a: PinvArgs, out: &mut dyn Write) -> Result<i32> {
    let g = read_graph(&a.graph)?;
    let cols = parse_cols(&a.cols, g.n())?;
    let scfg = SubspaceConfig { ell: a.ell, tol: a.pi_tol, seed: a.seed.seed, ..SubspaceConfig::default() };
    let ts = TransitionSystem::from_digraph(&g, &scfg)?;
    let sys = ts.eulerian(kind_of(a.kind))?;
    let gcfg = GmresConfig { restart: a.ell, tol: a.tol, ..GmresConfig::default() };
    let t = Instant::now();
    let (block, reports) = sys.pinv_columns(&cols, &gcfg, a.threads)?;
    let time_ms = t.elapsed().as_secs_f64() * 1e3;
    write_block(&block, a.format, a.out.as_ref(), out)?;
    #[derive(Serialize)]
    struct Report {
        kind: LaplacianKind,
        threads: usize,
        stationary: StationarySummary,
        gmres: SolveSummary,
    }
    let report = Report {
        kind: sys.kind,
        threads: a.threads,
        stationary: StationarySummary::from(&ts.stationary),
        gmres: summarize(reports, time_ms),
    };
    write_json(a.report.as_ref(), &report)?;
    Ok(EXIT_OK)
}

fn general(a: GeneralPinvArgs, out: &mut dyn Write) -> Result<i32> {
    let l = read_matrix_market(open(&a.laplacian)?)?;
    let n = l.n_rows();
    let x = if a.nullvec.trim() == "ones" { vec![1.0; n] } else { read_vector(open(Path::new(&a.nullvec))?)? };
    let gl = GeneralLaplacian::new(l, x)?;
    let cols = parse_cols(&a.cols, n)?;
    let cfg = GeneralPinvConfig {
        stationary: SubspaceConfig { ell: a.ell, tol: a.pi_tol, seed: a.seed.seed, ..SubspaceConfig::default() },
        gmres: GmresConfig { restart: a.ell, tol: a.tol, ..GmresConfig::default() },
        pivot: a.pivot,
        threads: a.threads,
    };
    let t = Instant::now();
    let (block, rep) = general_pinv(&gl, &cols, &cfg)?;
    let time_ms = t.elapsed().as_secs_f64() * 1e3;
    write_block(&block, a.format, a.out.as_ref(), out)?;
    #[derive(Serialize)]
    struct Report {
        pivot: usize,
        left_null_vector: Vec<f64>,
        stationary: StationarySummary,
        gmres: SolveSummary,
    }
    let report = Report {
        pivot: rep.pivot,
        stationary: StationarySummary::from(&rep.stationary),
        left_null_vector: rep.v,
        gmres: summarize(rep.solves, time_ms),
    };
    write_json(a.report.as_ref(), &report)?;
    Ok(EXIT_OK)
}

fn metrics(a: MetricsArgs, out: &mut dyn Write) -> Result<i32> {
    let g = read_graph(&a.graph)?;
    let n = g.n();
    let kind = kind_of(a.kind);
    let pairs: Vec<[usize; 2]> = a.pairs.as_deref().map(|s| parse_tuples(s, n)).transpose()?.unwrap_or_default();
    let triples: Vec<[usize; 3]> = a.triples.as_deref().map(|s| parse_tuples(s, n)).transpose()?.unwrap_or_default();
    if let Some(&[_, j, k]) = triples.iter().find(|t| t[1] == t[2]) {
        return Err(Error::InvalidInput(format!("triple with j = k = {j} has no pass probability (k = {k})")));
    }
    let aug = match a.gamma {
        Some(gamma) => {
            let restart = a.restart.as_ref().map(|p| read_vector(open(p)?)).transpose()?;
            Some(augment_evaporating(&g, gamma, restart.as_deref())?)
        }
        None => None,
    };
    let graph = aug.as_ref().map_or(&g, |x| &x.graph);
    let cols: Vec<usize> = if a.kemeny || aug.is_some() {
        (0..graph.n()).collect()
    } else {
        let p: Vec<(usize, usize)> = pairs.iter().map(|&[i, k]| (i, k)).collect();
        let t: Vec<(usize, usize, usize)> = triples.iter().map(|&[i, j, k]| (i, j, k)).collect();
        required_columns(kind, graph.n(), &p, &t)
    };
    let cfg = MetricsConfig {
        stationary: SubspaceConfig { ell: a.ell, tol: a.pi_tol, seed: a.seed.seed, ..SubspaceConfig::default() },
        gmres: GmresConfig { restart: a.ell, tol: a.tol, ..GmresConfig::default() },
        threads: a.threads,
    };
    let (mut wm, _) = walk_metrics(graph, kind, &cols, &cfg)?;
    if let Some(x) = &aug {
        wm = wm.with_evaporating(x.evaporating)?;
    }
    emit(a.out.as_ref(), out, |w| {
        let mut first = true;
        let mut section = |w: &mut dyn Write, header: &str| -> Result<()> {
            if !first {
                writeln!(w)?;
            }
            first = false;
            writeln!(w, "{header}")?;
            Ok(())
        };
        if !pairs.is_empty() {
            section(w, "i,k,hitting,commute")?;
            for &[i, k] in &pairs {
                writeln!(w, "{i},{k},{},{}", wm.hitting_time(i, k)?, wm.commute_time(i, k)?)?;
            }
        }
        if !triples.is_empty() {
            section(w, "i,j,k,visits,pass_prob")?;
            for &[i, j, k] in &triples {
                writeln!(w, "{i},{j},{k},{},{}", wm.visits(i, j, k)?, wm.pass_probability(i, j, k)?)?;
            }
        }
        if a.kemeny {
            section(w, "kemeny")?;
            writeln!(w, "{}", wm.kemeny_constant()?)?;
        }
        if aug.is_some() {
            section(w, "j,influence")?;
            let nodes: Vec<usize> = (0..n).collect();
            for (j, s) in nodes.iter().zip(wm.influence_scores(&nodes)?) {
                writeln!(w, "{j},{s}")?;
            }
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = BenchConfig {
        sizes: a.sizes,
        seeds: (a.seed.seed..a.seed.seed + a.seeds).collect(),
        attach: a.attach,
        tol: a.tol,
        ell: a.ell,
        column: 0,
        repeats: a.repeats as usize,
    };
    if cfg.sizes.iter().any(|&n| n < 3) || cfg.seeds.is_empty() {
        return Err(Error::InvalidInput("bench needs sizes >= 3 and at least one seed".into()));
    }
    let (rows, samples) = run_bench(&cfg)?;
    emit(a.out.as_ref(), out, |w| write_csv(&rows, w))?;
    writeln!(err, "note: backbone edges are stored as arc pairs; true arc counts are in the report")?;
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a BenchConfig,
        rows: &'a [crate::bench::BenchRow],
        samples: Vec<crate::bench::BenchSample>,
        trend: crate::bench::Trend,
    }
    write_json(a.report.as_ref(), &Report { config: &cfg, rows: &rows, trend: trend(&rows), samples })?;
    Ok(EXIT_OK)
}

fn print_checks(checks: &[Check], prefix: &str, out: &mut dyn Write) -> Result<()> {
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {prefix}{}: {:.3e} (limit {:.1e})", c.name, c.value, c.limit)?;
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = VerifyConfig { tol: a.tol, seed: a.seed.seed, ..VerifyConfig::default() };
    let mut all: Vec<(String, Check)> = Vec::new();
    if let Some(path) = &a.graph {
        let g = read_graph(path)?;
        let checks = match &a.pinv {
            Some(p) => verify_block(&g, kind_of(a.kind), &read_column_block_csv(open(p)?)?, &cfg)?,
            None => verify_graph(&g, &cfg)?,
        };
        print_checks(&checks, "", out)?;
        all.extend(checks.into_iter().map(|c| (path.display().to_string(), c)));
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed.seed);
        for idx in 0..a.count {
            let n = rng.random_range(5..=200);
            let (g, _) = preferential_attachment_digraph(&GenConfig::new(n, a.seed.seed.wrapping_add(idx as u64)))?;
            let checks = verify_graph(&g, &cfg)?;
            let label = format!("graph {idx} (n={n}) ");
            print_checks(&checks, &label, out)?;
            all.extend(checks.into_iter().map(|c| (label.clone(), c)));
        }
    }
    let failed = all.iter().filter(|(_, c)| !c.pass).count();
    writeln!(out, "{} checks, {failed} failed", all.len())?;
    #[derive(Serialize)]
    struct Entry<'a> {
        source: &'a str,
        #[serde(flatten)]
        check: &'a Check,
    }
    let entries: Vec<Entry> = all.iter().map(|(s, c)| Entry { source: s, check: c }).collect();
    write_json(a.report.as_ref(), &entries)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}
