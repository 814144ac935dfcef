//! End-to-end acceptance suite. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; any non-flag argument
//! filters criteria by name or number.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{dense_transition, family_graph, layered_periodic, max_abs_diff, random_digraph};
use dpinv::bench::{median, run_bench, trend, BenchConfig, BenchRow};
use dpinv::error::Error;
use dpinv::io::{read_column_block_csv, write_matrix_market};
use dpinv::krylov::{gmres_restarted, GmresConfig};
use dpinv::laplacian::{LaplacianKind, TransitionSystem};
use dpinv::metrics::{walk_metrics, MetricsConfig, WalkMetrics};
use dpinv::oracle::{
    dense_pinv_reference, eigenvalue_moduli, monte_carlo_walk, penrose_check, stationary_direct,
    symmetric_part_extremes,
};
use dpinv::smalldense::DenseMatrix;
use dpinv::sparse::{build_transition, Digraph};
use dpinv::stationary::{stationary_distribution, SubspaceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R: LaplacianKind = LaplacianKind::RandomWalk;
const D: LaplacianKind = LaplacianKind::DiagScaled;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn all_cols(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn penrose_certification() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let gcfg = GmresConfig { tol: 1e-10, ..GmresConfig::default() };
    for idx in 0..50 {
        let g = family_graph(idx, 5, 200);
        let ts = TransitionSystem::from_digraph(&g, &SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() }).unwrap();
        for kind in [R, D] {
            let sys = ts.eulerian(kind).unwrap();
            let (block, _) = sys.pinv_columns(&all_cols(g.n()), &gcfg, 1).unwrap();
            let rep = penrose_check(&sys.l.to_dense(), &block.to_square().unwrap(), 1e-6);
            worst = worst.max(rep.max_residual());
            if !rep.pass {
                failures.push(format!("graph {idx} M^{}", kind.letter()));
            }
        }
    }
    Outcome::new(failures.is_empty(), format!("100 pseudo-inverses, worst Penrose residual {worst:.2e} (limit 1e-6) {failures:?}"))
}

fn stationary_accuracy() -> Outcome {
    let (mut worst_diff, mut worst_res): (f64, f64) = (0.0, 0.0);
    for idx in 0..50 {
        let g = family_graph(idx, 5, 200);
        let (p, _) = build_transition(&g).unwrap();
        let r = stationary_distribution(&p, &SubspaceConfig::default()).unwrap();
        let direct = stationary_direct(&p.to_dense()).unwrap();
        worst_diff = worst_diff.max(max_abs_diff(&r.pi, &direct));
        worst_res = worst_res.max(r.residual);
    }
    Outcome::new(
        worst_diff <= 1e-8 && worst_res <= 1e-9,
        format!("50 graphs, max |pi - pi_direct| {worst_diff:.2e} (limit 1e-8), max residual {worst_res:.2e} (limit 1e-9)"),
    )
}

fn metric_identities() -> Outcome {
    let cfg = MetricsConfig { gmres: GmresConfig { tol: 1e-13, ..GmresConfig::default() }, ..MetricsConfig::default() };
    let mut e = [0.0f64; 4];
    for idx in 0..20 {
        let g = family_graph(100 + idx, 5, 100);
        let n = g.n();
        let md = walk_metrics(&g, D, &all_cols(n), &cfg).unwrap().0;
        let mr = walk_metrics(&g, R, &all_cols(n), &cfg).unwrap().0;
        let kemeny = md.kemeny_constant().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(idx);
        for _ in 0..10 {
            let (i, k) = (rng.random_range(0..n), rng.random_range(0..n));
            let h = md.hitting_time(i, k).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
            let sum_v: f64 = (0..n).map(|j| md.visits(i, j, k).unwrap()).sum();
            e[0] = e[0].max(rel(sum_v, h));
            let c = md.commute_time(i, k).unwrap();
            e[1] = e[1].max(rel(c, h + md.hitting_time(k, i).unwrap()));
            e[3] = e[3].max(rel(mr.hitting_time(i, k).unwrap(), h));
            e[3] = e[3].max(rel(mr.commute_time(i, k).unwrap(), c));
            let j = rng.random_range(0..n);
            e[3] = e[3].max(rel(mr.visits(i, j, k).unwrap(), md.visits(i, j, k).unwrap()));
        }
        let rel_k = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        let per_start: Vec<f64> = (0..n).map(|i| md.kemeny_from(i).unwrap()).collect();
        let hi = per_start.iter().copied().fold(f64::MIN, f64::max);
        let lo = per_start.iter().copied().fold(f64::MAX, f64::min);
        e[2] = e[2].max((hi - lo) / kemeny.abs().max(1.0)).max(rel_k(per_start[0], kemeny));
    }
    Outcome::new(
        e.iter().all(|&x| x <= 1e-8),
        format!(
            "20 graphs, errors relative to max(1, |value|): sum_j v vs h {:.1e}, c vs h + h' {:.1e}, Kemeny spread {:.1e}, r/d gap {:.1e} (limit 1e-8 each)",
            e[0], e[1], e[2], e[3]
        ),
    )
}

fn gmres_bound() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = Vec::new();
    let mut tightest: f64 = 0.0;
    let mut literal_violations = 0;
    for idx in 0..20 {
        let g = family_graph(200 + idx, 5, 200);
        let n = g.n();
        let ts = TransitionSystem::from_digraph(&g, &SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() }).unwrap();
        for kind in [R, D] {
            let sys = ts.eulerian(kind).unwrap();
            let c = sys.l.to_dense().add_outer(sys.shift_alpha, &sys.u, &sys.u);
            let (lmin, norm) = symmetric_part_extremes(&c).unwrap();
            if !(lmin > 0.0) {
                skipped += 1;
                continue;
            }
            let rho = 1.0 - (lmin / norm).powi(2);
            let mut rng = ChaCha8Rng::seed_from_u64(idx);
            let mut e0 = vec![0.0; n];
            e0[0] = 1.0;
            let random: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for b in [e0, random] {
                for ell in [5, 30] {
                    let cfg = GmresConfig { restart: ell, tol: 1e-10, max_outer: 100_000 };
                    let (_, rep) = gmres_restarted(&sys.operator(), &b, None, &cfg).unwrap();
                    let r0 = rep.residual_history[0];
                    let mut steps = 0;
                    for (k, &rk) in rep.residual_history.iter().enumerate().skip(1) {
                        steps += rep.inner_steps[k - 1];
                        if rk / r0 > rho.powf((k * ell) as f64 / 2.0) * (1.0 + 1e-12) {
                            literal_violations += 1;
                        }
                        let bound = rho.powf(steps as f64 / 2.0);
                        let ratio = rk / r0;
                        tightest = tightest.max(ratio / bound);
                        if ratio > bound * (1.0 + 1e-12) {
                            violations.push(format!("graph {idx} kind {} ell {ell} step {k}", kind.letter()));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Outcome::new(
        violations.is_empty() && skipped == 0,
        format!(
            "{checked} solves on 40 shifted systems, {skipped} without positive definite symmetric part, max residual/bound {tightest:.3}, {literal_violations} steps above the bound with exponent k*ell/2 {violations:?}"
        ),
    )
}

/// Least-squares slope of `ln r` against iteration over the tail of the
/// history above the rounding floor.
fn tail_slope(history: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        history.iter().enumerate().filter(|(_, r)| **r > 1e-11 && r.is_finite()).map(|(i, r)| (i as f64, r.ln())).collect();
    let tail = &pts[pts.len() / 2..];
    if tail.len() < 5 {
        return None;
    }
    let m = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(num / den)
}

fn subspace_rate() -> Outcome {
    let mut fitted = 0;
    let mut worst_margin = f64::MIN;
    let mut bad = Vec::new();
    for idx in 0..6 {
        let g = random_digraph(40, 60, 300 + idx);
        let (p, _) = build_transition(&g).unwrap();
        let moduli = eigenvalue_moduli(&p.to_dense()).unwrap();
        for ell in [2, 3, 5] {
            let cfg = SubspaceConfig { ell, tol: 1e-13, max_iterations: 5000, seed: idx, initial_block: None };
            let r = match stationary_distribution(&p, &cfg) {
                Ok(r) => r.residual_history,
                Err(Error::StationaryNotConverged { .. }) => {
                    bad.push(format!("graph {idx} ell {ell} did not converge"));
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let predicted = moduli[ell].ln();
            if let Some(slope) = tail_slope(&r) {
                fitted += 1;
                let limit = predicted + 0.2 * predicted.abs();
                worst_margin = worst_margin.max(slope - limit);
                if slope > limit {
                    bad.push(format!("graph {idx} ell {ell}: slope {slope:.3} vs limit {limit:.3}"));
                }
            }
        }
    }
    let g = layered_periodic(3, 4, 7);
    let (p, _) = build_transition(&g).unwrap();
    // a uniform vector has no component along the unit-modulus pair of a
    // layered cycle, so both runs start from the same seeded positive block
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let start = |width: usize, rng: &mut ChaCha8Rng| {
        let cols: Vec<Vec<f64>> = (0..width).map(|_| (0..p.n_rows()).map(|_| rng.random_range(0.1..1.0)).collect()).collect();
        DenseMatrix::from_columns(p.n_rows(), &cols)
    };
    let narrow_cfg = SubspaceConfig { ell: 2, max_iterations: 2000, initial_block: Some(start(2, &mut rng)), ..SubspaceConfig::default() };
    let narrow = stationary_distribution(&p, &narrow_cfg);
    let wide = stationary_distribution(&p, &SubspaceConfig { ell: 4, initial_block: Some(start(4, &mut rng)), ..SubspaceConfig::default() });
    let mut narrow_fails = matches!(narrow, Err(Error::StationaryNotConverged { .. }));
    let mut wide_ok = wide.as_ref().map(|r| r.residual <= 1e-9).unwrap_or(false);
    // the bare 3-cycle: ℓ = 4 is clamped to n = 3
    let c3 = Digraph::from_arcs(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
    let (p3, _) = build_transition(&c3).unwrap();
    let two = DenseMatrix::from_rows(&[&[0.9, 0.2], &[0.3, 0.7], &[0.1, 0.4]]);
    let narrow = stationary_distribution(&p3, &SubspaceConfig { ell: 2, max_iterations: 2000, initial_block: Some(two), ..SubspaceConfig::default() });
    narrow_fails &= matches!(narrow, Err(Error::StationaryNotConverged { .. }));
    let wide = stationary_distribution(&p3, &SubspaceConfig { ell: 4, ..SubspaceConfig::default() });
    wide_ok &= wide.map(|r| max_abs_diff(&r.pi, &[1.0 / 3.0; 3]) <= 1e-12).unwrap_or(false);
    Outcome::new(
        bad.is_empty() && fitted > 0 && narrow_fails && wide_ok,
        format!(
            "{fitted} tail slopes fitted, worst slope minus limit {worst_margin:.3}; period 3 (layered and bare cycle): ell=2 fails {narrow_fails}, ell=4 converges {wide_ok} {bad:?}"
        ),
    )
}

fn exact_small_cases() -> Outcome {
    let cfg = MetricsConfig::default();
    let c3 = Digraph::from_arcs(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
    let loop2 = Digraph::from_arcs(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let mut err: f64 = 0.0;
    for kind in [R, D] {
        let m: WalkMetrics = walk_metrics(&c3, kind, &all_cols(3), &cfg).unwrap().0;
        let got = [
            m.hitting_time(0, 1).unwrap() - 1.0,
            m.hitting_time(0, 2).unwrap() - 2.0,
            m.commute_time(0, 1).unwrap() - 3.0,
            m.visits(0, 1, 2).unwrap() - 1.0,
            m.kemeny_constant().unwrap() - 1.0,
            max_abs_diff(m.pi(), &[1.0 / 3.0; 3]),
        ];
        err = got.iter().fold(err, |a, x| a.max(x.abs()));
        let m = walk_metrics(&loop2, kind, &all_cols(2), &cfg).unwrap().0;
        err = err.max(max_abs_diff(m.pi(), &[2.0 / 3.0, 1.0 / 3.0]));
        err = err.max((m.hitting_time(0, 1).unwrap() - 2.0).abs());
    }
    Outcome::new(err <= 1e-9, format!("3-cycle and 2-node self-loop values, max error {err:.1e} (limit 1e-9)"))
}

fn table_trend() -> Outcome {
    let cfg = BenchConfig {
        sizes: vec![1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14],
        seeds: vec![0, 1, 2],
        ..BenchConfig::default()
    };
    let (rows, _) = run_bench(&cfg).unwrap();
    let t = trend(&rows);
    let med = |g: &[f64]| median(&mut g.to_vec());
    let worst = |g: &[f64]| g.iter().copied().fold(0.0, f64::max);
    let overall = |f: fn(&BenchRow) -> f64| (f(&rows[rows.len() - 1]) / f(&rows[0])).powf(1.0 / (rows.len() - 1) as f64);
    let (med_pi, med_col) = (med(&t.time_pi_growth), med(&t.time_col_growth));
    let mv_col: Vec<f64> = rows.iter().map(|r| r.mv_col).collect();
    let ms = |f: fn(&BenchRow) -> f64| rows.iter().map(|r| format!("{:.1}", f(r))).collect::<Vec<_>>().join("/");
    Outcome::new(
        med_pi <= 2.5 && med_col <= 2.5 && t.mv_col_growth <= 2.0,
        format!(
            "median time growth per doubling: pi {med_pi:.2}, column {med_col:.2} (limit 2.5; worst single doubling {:.2}/{:.2}, overall {:.2}/{:.2}); \
             column #Mv {mv_col:?} growth {:.2} (limit 2); pi ms {}, column ms {}",
            worst(&t.time_pi_growth),
            worst(&t.time_col_growth),
            overall(|r| r.time_pi_ms),
            overall(|r| r.time_col_ms),
            t.mv_col_growth,
            ms(|r| r.time_pi_ms),
            ms(|r| r.time_col_ms)
        ),
    )
}

fn general_pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (mut worst_penrose, mut worst_ref): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for idx in 0..10 {
        let g = family_graph(400 + idx, 5, 100);
        let n = g.n();
        let (p, d) = build_transition(&g).unwrap();
        let ones = vec![1.0; n];
        let la = p.scale_rows_cols(&d, &ones).unwrap().diagonal_minus(&d).unwrap();
        let mtx = dir.path().join(format!("l{idx}.mtx"));
        let out = dir.path().join(format!("b{idx}.csv"));
        write_matrix_market(&la, std::fs::File::create(&mtx).unwrap()).unwrap();
        let args = ["dpinv", "general-pinv", "--laplacian", mtx.to_str().unwrap(), "--nullvec", "ones", "--cols", "all", "--out", out.to_str().unwrap()];
        let (mut so, mut se) = (Vec::new(), Vec::new());
        let code = dpinv::cli::run(args, &mut so, &mut se);
        if code != 0 {
            failures.push(format!("graph {idx}: exit {code} {}", String::from_utf8_lossy(&se)));
            continue;
        }
        let b = read_column_block_csv(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap().to_square().unwrap();
        let a = la.to_dense();
        let rep = penrose_check(&a, &b, 1e-6);
        worst_penrose = worst_penrose.max(rep.max_residual());
        // left null vector of D(I - P) is D⁻¹π, taken from the direct solve
        let pi = stationary_direct(&dense_transition(&g)).unwrap();
        let v: Vec<f64> = pi.iter().zip(&d).map(|(a, b)| a / b).collect();
        let reference = dense_pinv_reference(&a, &ones, &v).unwrap();
        let diff = b.sub(&reference).max_abs() / reference.max_abs();
        worst_ref = worst_ref.max(diff);
        if !rep.pass || diff > 1e-7 {
            failures.push(format!("graph {idx}"));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "10 graphs, worst Penrose residual {worst_penrose:.2e} (limit 1e-6), worst relative gap to dense reference {worst_ref:.2e} (limit 1e-7) {failures:?}"
        ),
    )
}

fn monte_carlo_concordance() -> Outcome {
    let mut compared = 0;
    let mut worst_z: f64 = 0.0;
    let mut outside = Vec::new();
    let cfg = MetricsConfig::default();
    for idx in 0..5 {
        let g = random_digraph(10 + 4 * idx as usize, 20, 500 + idx);
        let n = g.n();
        let (p, _) = build_transition(&g).unwrap();
        let (i, k) = (0, n / 2);
        let m = walk_metrics(&g, D, &all_cols(n), &cfg).unwrap().0;
        let est = monte_carlo_walk(&p, i, k, 100_000, idx).unwrap();
        let mut cmp = |what: String, formula: f64, mean: f64, se: f64| {
            compared += 1;
            let z = if se > 0.0 { (formula - mean).abs() / se } else if (formula - mean).abs() < 1e-9 { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
            if z > 3.0 {
                outside.push(format!("graph {idx} {what}: z = {z:.2}"));
            }
        };
        cmp("h".into(), m.hitting_time(i, k).unwrap(), est.hitting, est.hitting_se);
        cmp("c".into(), m.commute_time(i, k).unwrap(), est.commute, est.commute_se);
        for j in 0..n {
            cmp(format!("v(.,{j},.)"), m.visits(i, j, k).unwrap(), est.visits[j], est.visits_se[j]);
        }
    }
    Outcome::new(
        outside.is_empty(),
        format!("{compared} estimates from 1e5 walks each, largest |z| {worst_z:.2} (limit 3) {outside:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("penrose_certification", penrose_certification),
        ("stationary_accuracy", stationary_accuracy),
        ("metric_identities", metric_identities),
        ("gmres_bound", gmres_bound),
        ("subspace_rate", subspace_rate),
        ("exact_small_cases", exact_small_cases),
        ("table_trend", table_trend),
        ("general_pipeline", general_pipeline),
        ("monte_carlo_concordance", monte_carlo_concordance),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (idx, (name, f)) in criteria.iter().enumerate() {
        let number = (idx + 1).to_string();
        if !filters.is_empty() && !filters.iter().any(|q| name.contains(q.as_str()) || *q == number) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("acceptance {number} {name}: {status} [{:.1}s] {}", t.elapsed().as_secs_f64(), outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
