//! Pseudo-inverses of general Laplacians `L̃` (irreducible Z-matrices with a
//! positive right null vector `x`) through the Eulerian scaling
//! `L^d = Π^{1/2} D̂⁻¹ L̃ Diag(x) Π^{-1/2}`.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_positive, ColumnBlock, EulerianSystem, LaplacianKind, EULERIAN_RTOL};
use crate::error::{check_len, Error, Property, Result};
use crate::krylov::{GmresConfig, SolveReport};
use crate::smalldense::dot;
use crate::sparse::{MvCounter, SparseMatrix};
use crate::stationary::{stationary_distribution, StationaryResult, SubspaceConfig};

/// Outcome of the structural checks (Pa), (Pb), (Pc) / (Pc').
#[derive(Clone, Debug, Default)]
pub struct PropertyReport {
    pub pa: bool,
    pub pb: bool,
    /// Present when a null vector was supplied.
    pub pc: Option<bool>,
    /// Present for the reduced `(n−1)×(n−1)` check.
    pub pc_prime: Option<bool>,
    /// `‖L x‖∞` when a null vector was supplied.
    pub null_residual: Option<f64>,
    pub failures: Vec<(Property, String)>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// The first failure as an error.
    pub fn into_result(self) -> Result<()> {
        match self.failures.into_iter().next() {
            None => Ok(()),
            Some((property, detail)) => Err(Error::PropertyViolated { property, detail }),
        }
    }
}

fn check_pa_pb(l: &SparseMatrix, report: &mut PropertyReport) {
    if !l.is_square() {
        report.failures.push((Property::Pb, format!("matrix is {}x{}, not square", l.n_rows(), l.n_cols())));
        return;
    }
    report.pb = true;
    'rows: for i in 0..l.n_rows() {
        if !(l.get(i, i) > 0.0) {
            report.pb = false;
            report.failures.push((Property::Pb, format!("diagonal entry ({i},{i}) = {} is not positive", l.get(i, i))));
            break;
        }
        for (j, v) in l.row(i) {
            if j != i && v > 0.0 {
                report.pb = false;
                report.failures.push((Property::Pb, format!("off-diagonal entry ({i},{j}) = {v} is positive")));
                break 'rows;
            }
        }
    }
    match l.unreachable_pair() {
        None => report.pa = true,
        Some((from, to)) => report
            .failures
            .push((Property::Pa, format!("node {to} is not reachable from node {from} in the off-diagonal pattern"))),
    }
}

/// Checks (Pa), (Pb) and, when `x` is given, (Pc): `x > 0` with
/// `‖L x‖∞ ≤ 1e-8 · ‖L‖_max · ‖x‖∞`.
pub fn check_properties(l: &SparseMatrix, x: Option<&[f64]>) -> PropertyReport {
    let mut report = PropertyReport::default();
    check_pa_pb(l, &mut report);
    if let Some(x) = x {
        let ok = (|| -> Result<(bool, f64)> {
            check_len(l.n_cols(), x.len())?;
            check_positive(x, "null vector")?;
            let lx = l.matvec(x, &MvCounter::new())?;
            let res = lx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let xmax = x.iter().fold(0.0f64, |m, v| m.max(*v));
            Ok((res <= EULERIAN_RTOL * l.max_abs() * xmax, res))
        })();
        match ok {
            Ok((pass, res)) => {
                report.pc = Some(pass);
                report.null_residual = Some(res);
                if !pass {
                    report.failures.push((Property::Pc, format!("‖L x‖∞ = {res:e} is not zero")));
                }
            }
            Err(e) => {
                report.pc = Some(false);
                report.failures.push((Property::Pc, e.to_string()));
            }
        }
    }
    report
}

/// Checks (Pa), (Pb) and (Pc'): `w > 0` with `L₁₁ w > 0` componentwise.
pub fn check_properties_reduced(l11: &SparseMatrix, w: &[f64]) -> PropertyReport {
    let mut report = PropertyReport::default();
    check_pa_pb(l11, &mut report);
    let ok = (|| -> Result<Option<usize>> {
        check_len(l11.n_cols(), w.len())?;
        check_positive(w, "w")?;
        let lw = l11.matvec(w, &MvCounter::new())?;
        Ok(lw.iter().position(|v| !(*v > 0.0)))
    })();
    let detail = match ok {
        Ok(None) => None,
        Ok(Some(i)) => Some(format!("(L11 w)[{i}] is not strictly positive")),
        Err(e) => Some(e.to_string()),
    };
    report.pc_prime = Some(detail.is_none());
    if let Some(d) = detail {
        report.failures.push((Property::PcPrime, d));
    }
    report
}

/// A Laplacian satisfying (Pa)–(Pc) with its scaled random walk
/// `P̂ = D̂⁻¹Â`, where `L̃ Diag(x) = D̂ − Â`.
#[derive(Clone, Debug)]
pub struct GeneralLaplacian {
    pub l: SparseMatrix,
    /// Right null vector.
    pub x: Vec<f64>,
    /// Row sums of `Â`, the diagonal of `L̃ Diag(x)`.
    pub d_hat: Vec<f64>,
    pub p_hat: SparseMatrix,
}

impl GeneralLaplacian {
    pub fn new(l: SparseMatrix, x: Vec<f64>) -> Result<Self> {
        if l.n_rows() < 2 {
            return Err(Error::InvalidInput("general Laplacian needs at least 2 nodes".into()));
        }
        check_properties(&l, Some(&x)).into_result()?;
        let n = l.n_rows();
        let ones = vec![1.0; n];
        let l_hat = l.scale_rows_cols(&ones, &x)?;
        let mut triplets = Vec::with_capacity(l_hat.nnz());
        for i in 0..n {
            for (j, v) in l_hat.row(i) {
                if j != i && v != 0.0 {
                    triplets.push((i, j, -v));
                }
            }
        }
        let a_hat = SparseMatrix::from_triplets(n, n, triplets)?;
        let d_hat = a_hat.row_sums();
        check_positive(&d_hat, "scaled degree")?;
        let inv: Vec<f64> = d_hat.iter().map(|d| 1.0 / d).collect();
        let p_hat = a_hat.scale_rows_cols(&inv, &ones)?;
        Ok(Self { l, x, d_hat, p_hat })
    }

    pub fn n(&self) -> usize {
        self.l.n_rows()
    }
}

/// Borders an `(n−1)×(n−1)` nonsingular M-matrix `L₁₁` into an `n×n`
/// Laplacian with right null vector `[w; 1]` and left null vector `[v₁; 1]`
/// (`v₁ = 1` by default).
pub fn embed_mmatrix(l11: &SparseMatrix, w: &[f64], v1: Option<&[f64]>) -> Result<GeneralLaplacian> {
    check_properties_reduced(l11, w).into_result()?;
    let m = l11.n_rows();
    let ones = vec![1.0; m];
    let v1 = v1.unwrap_or(&ones);
    check_len(m, v1.len())?;
    check_positive(v1, "v1")?;
    let mv = MvCounter::new();
    let lw = l11.matvec(w, &mv)?;
    let vl = l11.matvec_transpose(v1, &mv)?;
    let corner = dot(v1, &lw);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(l11.nnz() + 2 * m + 1);
    for i in 0..m {
        for (j, v) in l11.row(i) {
            triplets.push((i, j, v));
        }
        triplets.push((i, m, -lw[i]));
        if vl[i] != 0.0 {
            triplets.push((m, i, -vl[i]));
        }
    }
    triplets.push((m, m, corner));
    let l = SparseMatrix::from_triplets(m + 1, m + 1, triplets)?;
    let mut x = w.to_vec();
    x.push(1.0);
    GeneralLaplacian::new(l, x)
}

#[derive(Clone, Debug)]
pub struct GeneralPinvConfig {
    pub stationary: SubspaceConfig,
    pub gmres: GmresConfig,
    /// Index singled out by the reduction; defaults to the node with the
    /// largest stationary probability.
    pub pivot: Option<usize>,
    pub threads: usize,
}

impl Default for GeneralPinvConfig {
    fn default() -> Self {
        Self {
            stationary: SubspaceConfig { tol: 1e-12, ..SubspaceConfig::default() },
            gmres: GmresConfig::default(),
            pivot: None,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralPinvReport {
    pub stationary: StationaryResult,
    pub pivot: usize,
    /// Left null vector `D̂⁻¹π` of `L̃`.
    pub v: Vec<f64>,
    /// The extra solve for `w` first, then one per requested non-pivot column.
    pub solves: Vec<SolveReport>,
}

/// Columns `cols` of the Moore-Penrose pseudo-inverse of `gl.l`.
///
/// Needs the stationary vector of `P̂`, one GMRES solve per requested column
/// other than the pivot, and one extra solve for `w`.
pub fn general_pinv(gl: &GeneralLaplacian, cols: &[usize], cfg: &GeneralPinvConfig) -> Result<(ColumnBlock, GeneralPinvReport)> {
    let n = gl.n();
    if let Some(&j) = cols.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidInput(format!("column {j} out of range for n = {n}")));
    }
    let stat = stationary_distribution(&gl.p_hat, &cfg.stationary)?;
    let pi = stat.pi.clone();
    let k = match cfg.pivot {
        Some(k) if k < n => k,
        Some(k) => return Err(Error::InvalidInput(format!("pivot {k} out of range for n = {n}"))),
        None => (0..n).max_by(|&a, &b| pi[a].total_cmp(&pi[b])).expect("n >= 2"),
    };
    let s: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let ld = super::build_laplacian(&gl.p_hat, &pi, &[], LaplacianKind::DiagScaled)?;
    let snorm = dot(&s, &s).sqrt();
    let sys = EulerianSystem::from_parts(LaplacianKind::DiagScaled, ld, s.iter().map(|v| v / snorm).collect(), pi.clone())?;

    // (L^d₁₁)⁻¹ z₁ = [I, −s₁/s_k] L^d† z with z = [z₁; −s₁ᵀz₁/s_k];
    // returned as a full-length vector whose pivot entry is unused
    let reduced_apply = |z1: &[f64]| -> Result<(Vec<f64>, SolveReport)> {
        let mut z = z1.to_vec();
        z[k] = 0.0;
        z[k] = -dot(&s, &z) / s[k];
        let (y, rep) = sys.apply_pinv(&z, &cfg.gmres)?;
        let yk = y[k];
        let mut r: Vec<f64> = y.iter().zip(&s).map(|(yi, si)| yi - si / s[k] * yk).collect();
        r[k] = 0.0;
        Ok((r, rep))
    };
    // Diag(x₁) Π₁^{-1/2} applied to a reduced vector
    let unscale = |r: &mut Vec<f64>| {
        for i in 0..n {
            r[i] *= gl.x[i] / s[i];
        }
        r[k] = 0.0;
    };

    let u = &gl.x;
    let v: Vec<f64> = pi.iter().zip(&gl.d_hat).map(|(p, d)| p / d).collect();
    let uu = dot(u, u);
    let vv = dot(&v, &v);
    let (un, vn) = (u[k], v[k]);

    // w = A₁₁⁻¹ v₁ / vᵀv with A₁₁⁻¹ = Diag(x₁) Π₁^{-1/2} (L^d₁₁)⁻¹ Π₁^{1/2} D̂₁⁻¹
    let z1: Vec<f64> = (0..n).map(|i| if i == k { 0.0 } else { s[i] * v[i] / gl.d_hat[i] }).collect();
    let (mut w, w_rep) = reduced_apply(&z1)?;
    unscale(&mut w);
    w.iter_mut().for_each(|x| *x /= vv);
    let u1w = dot(u, &w) - u[k] * w[k];
    let sc = u1w / uu;

    let solve_col = |j: &usize| -> Result<Option<(Vec<f64>, SolveReport)>> {
        let j = *j;
        if j == k {
            return Ok(None);
        }
        let mut z1 = vec![0.0; n];
        z1[j] = s[j] / gl.d_hat[j];
        let (mut a, rep) = reduced_apply(&z1)?;
        unscale(&mut a);
        Ok(Some((a, rep)))
    };
    let solved: Vec<Result<Option<(Vec<f64>, SolveReport)>>> = if cfg.threads <= 1 || cols.len() <= 1 {
        cols.iter().map(solve_col).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| cols.par_iter().map(solve_col).collect())
    };

    let mut solves = vec![w_rep];
    let mut data = Vec::with_capacity(cols.len());
    for (&j, res) in cols.iter().zip(solved) {
        let mut col = vec![0.0; n];
        match res? {
            None => {
                for i in 0..n {
                    col[i] = vn * sc * u[i] - vn * w[i];
                }
                col[k] = un * vn * sc;
            }
            Some((a, rep)) => {
                solves.push(rep);
                let tj = (dot(u, &a) - u[k] * a[k]) / uu;
                for i in 0..n {
                    col[i] = a[i] - u[i] * tj - w[i] * v[j] + sc * u[i] * v[j];
                }
                col[k] = un * sc * v[j] - un * tj;
            }
        }
        data.push(col);
    }
    let block = ColumnBlock::new(n, cols.to_vec(), data)?;
    Ok((block, GeneralPinvReport { stationary: stat, pivot: k, v, solves }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{dense_solver, pinv_rank1_general, reduced_from_pinv_general};
    use crate::oracle::penrose_check;
    use crate::smalldense::DenseMatrix;
    use crate::sparse::{build_transition, Digraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unnormalized(g: &Digraph) -> SparseMatrix {
        let (p, d) = build_transition(g).unwrap();
        let ones = vec![1.0; g.n()];
        p.scale_rows_cols(&d, &ones).unwrap().diagonal_minus(&d).unwrap()
    }

    fn all(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    fn tight() -> GeneralPinvConfig {
        GeneralPinvConfig { gmres: GmresConfig { tol: 1e-12, ..GmresConfig::default() }, ..Default::default() }
    }

    #[test]
    fn path_graph_matches_dense_pinv() {
        let arcs: Vec<_> = (0..3).flat_map(|i| [(i, i + 1, 1.0), (i + 1, i, 1.0)]).collect();
        let l = unnormalized(&Digraph::from_arcs(4, &arcs).unwrap());
        let gl = GeneralLaplacian::new(l.clone(), vec![1.0; 4]).unwrap();
        let (block, rep) = general_pinv(&gl, &all(4), &tight()).unwrap();
        let b = block.to_square().unwrap();
        let a = l.to_dense();
        assert!(penrose_check(&a, &b, 1e-7).pass);
        // symmetric case: L† = (L + 11ᵀ/n)⁻¹ − 11ᵀ/n
        let ones = vec![1.0; 4];
        let reference = dense_solver(&a, &ones, &ones, 0.25).unwrap().inverse().add_outer(-0.25, &ones, &ones);
        assert!(b.sub(&reference).max_abs() < 1e-7);
        assert_eq!(rep.solves.len(), 4);
    }

    #[test]
    fn cycle_null_vectors_are_annihilated() {
        let g = Digraph::from_arcs(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let l = unnormalized(&g);
        let gl = GeneralLaplacian::new(l.clone(), vec![1.0; 3]).unwrap();
        let (block, rep) = general_pinv(&gl, &all(3), &tight()).unwrap();
        let b = block.to_square().unwrap();
        assert!(b.mul_vec(&rep.v).iter().all(|x| x.abs() < 1e-8));
        assert!(b.transpose().mul_vec(&[1.0; 3]).iter().all(|x| x.abs() < 1e-8));
        assert!(penrose_check(&l.to_dense(), &b, 1e-7).pass);
    }

    #[test]
    fn single_column_matches_full() {
        let g = Digraph::from_arcs(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (2, 0, 3.0), (1, 3, 0.5)]).unwrap();
        let gl = GeneralLaplacian::new(unnormalized(&g), vec![1.0; 4]).unwrap();
        let (full, rep) = general_pinv(&gl, &all(4), &tight()).unwrap();
        for j in 0..4 {
            let (one, _) = general_pinv(&gl, &[j], &tight()).unwrap();
            for i in 0..4 {
                assert!((one.column(0)[i] - full.column(j)[i]).abs() < 1e-9);
            }
        }
        let (alt, _) = general_pinv(&gl, &all(4), &GeneralPinvConfig { pivot: Some((rep.pivot + 1) % 4), ..tight() }).unwrap();
        assert!(alt.to_dense().sub(&full.to_dense()).max_abs() < 1e-8);
    }

    #[test]
    fn nonunit_null_vector() {
        // L̃ = L^a Diag(1/x) has right null vector x
        let g = Digraph::from_arcs(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 2, 2.0)]).unwrap();
        let x = vec![1.0, 2.0, 0.5];
        let inv: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
        let l = unnormalized(&g).scale_rows_cols(&[1.0; 3], &inv).unwrap();
        let gl = GeneralLaplacian::new(l.clone(), x.clone()).unwrap();
        let (block, rep) = general_pinv(&gl, &all(3), &tight()).unwrap();
        let b = block.to_square().unwrap();
        let a = l.to_dense();
        assert!(penrose_check(&a, &b, 1e-7).pass);
        assert!(a.transpose().mul_vec(&rep.v).iter().all(|v| v.abs() < 1e-10));
        let lu = dense_solver(&a, &x, &rep.v, 1.0).unwrap();
        let reference = pinv_rank1_general(&lu, &x, &rep.v, &all(3)).unwrap().to_square().unwrap();
        assert!(b.sub(&reference).max_abs() < 1e-8);
    }

    #[test]
    fn property_failures_are_named() {
        let l = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 0.5), (1, 0, -1.0), (1, 1, 1.0)]).unwrap();
        match GeneralLaplacian::new(l, vec![1.0, 1.0]) {
            Err(Error::PropertyViolated { property: Property::Pb, .. }) => {}
            other => panic!("expected (Pb) failure, got {other:?}"),
        }
        let reducible = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let rep = check_properties(&reducible, None);
        assert!(!rep.pa && rep.pb);
        let g = Digraph::from_arcs(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let rep = check_properties(&unnormalized(&g), Some(&[1.0; 3]));
        assert!(rep.all_pass() && rep.pc == Some(true));
        let rep = check_properties(&unnormalized(&g), Some(&[1.0, 2.0, 1.0]));
        assert_eq!(rep.pc, Some(false));
    }

    #[test]
    fn embed_one_by_one() {
        let l11 = SparseMatrix::from_triplets(1, 1, [(0, 0, 2.0)]).unwrap();
        let gl = embed_mmatrix(&l11, &[1.0], None).unwrap();
        assert_eq!(gl.l.to_dense(), DenseMatrix::from_rows(&[&[2.0, -2.0], &[-2.0, 2.0]]));
    }

    fn random_zmatrix(m: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    a[(i, j)] = -rng.random_range(0.0..1.0);
                }
            }
        }
        for i in 0..m {
            // dominant by rows and columns so the all-ones left border stays nonpositive
            let r: f64 = (0..m).map(|j| a[(i, j)].abs()).sum();
            let c: f64 = (0..m).map(|j| a[(j, i)].abs()).sum();
            a[(i, i)] = r.max(c) + rng.random_range(0.1..1.0);
        }
        SparseMatrix::from_dense(&a)
    }

    #[test]
    fn embedded_mmatrix_round_trip() {
        let l11 = random_zmatrix(5, 4);
        let w = vec![1.0; 5];
        let gl = embed_mmatrix(&l11, &w, None).unwrap();
        let rows = gl.l.scale_rows_cols(&[1.0; 6], &gl.x).unwrap().row_sums();
        assert!(rows.iter().all(|r| r.abs() < 1e-12));
        assert!(check_properties(&gl.l, Some(&gl.x)).all_pass());
        let (block, rep) = general_pinv(&gl, &all(6), &tight()).unwrap();
        let b = block.to_square().unwrap();
        let reduced = reduced_from_pinv_general(&b, &gl.x, &rep.v, 5).unwrap();
        let prod = reduced.matmul(&l11.to_dense());
        assert!(prod.sub(&DenseMatrix::identity(5)).max_abs() < 1e-8);
    }

    #[test]
    fn embed_rejects_bad_w() {
        let l11 = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, -2.0), (1, 0, -0.5), (1, 1, 1.0)]).unwrap();
        match embed_mmatrix(&l11, &[1.0, 1.0], None) {
            Err(Error::PropertyViolated { property: Property::PcPrime, .. }) => {}
            other => panic!("expected (Pc') failure, got {other:?}"),
        }
    }
}
