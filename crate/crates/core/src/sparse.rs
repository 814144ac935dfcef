//! Compressed-sparse-row matrices, weighted digraphs and the transition
//! matrix construction every solver starts from.
//!
//! Only row storage is kept. Products with the transpose walk the same
//! arrays and scatter into the output.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{check_len, Error, Result};
use crate::smalldense::DenseMatrix;

/// Counts sparse matrix-vector products (#Mv).
///
/// Shared by reference; safe to bump from concurrent solves.
#[derive(Debug, Default)]
pub struct MvCounter(AtomicUsize);

impl MvCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }

    pub(crate) fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// Real matrix in compressed-sparse-row form.
///
/// Column indices are strictly increasing inside each row, so duplicates
/// cannot exist. The structure is immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every invariant.
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len(n_rows + 1, row_offsets.len())?;
        check_len(col_indices.len(), values.len())?;
        if row_offsets[0] != 0 || row_offsets[n_rows] != col_indices.len() {
            return Err(Error::InvalidInput(
                "row offsets must start at 0 and end at the entry count".into(),
            ));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidInput(format!("row offsets decrease at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::InvalidInput(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &t {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("entry ({i}, {j}) is not finite")));
            }
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((i, j));
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Sparse copy of a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let trip = (0..a.n_rows())
            .flat_map(|i| (0..a.n_cols()).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = a[(i, j)];
                (v != 0.0).then_some((i, j, v))
            });
        Self::from_triplets(a.n_rows(), a.n_cols(), trip).expect("dense entries are in range")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Entry `(i, j)`; zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = M x`, one multiply-add per stored entry.
    pub fn matvec(&self, x: &[f64], mv: &MvCounter) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y, mv)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()> {
        check_len(self.n_cols, x.len())?;
        check_len(self.n_rows, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut acc = 0.0;
            for p in lo..hi {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yi = acc;
        }
        mv.bump();
        Ok(())
    }

    /// `y = Mᵀ x` by scattering over the row structure.
    pub fn matvec_transpose(&self, x: &[f64], mv: &MvCounter) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_cols];
        self.matvec_transpose_into(x, &mut y, mv)?;
        Ok(y)
    }

    pub fn matvec_transpose_into(&self, x: &[f64], y: &mut [f64], mv: &MvCounter) -> Result<()> {
        check_len(self.n_rows, x.len())?;
        check_len(self.n_cols, y.len())?;
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            for p in lo..hi {
                y[self.col_indices[p]] += self.values[p] * xi;
            }
        }
        mv.bump();
        Ok(())
    }

    /// `Diag(left) · M · Diag(right)` with the sparsity pattern unchanged.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Result<Self> {
        check_len(self.n_rows, left.len())?;
        check_len(self.n_cols, right.len())?;
        for (index, &value) in left.iter().chain(right.iter()).enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                let index = if index < left.len() { index } else { index - left.len() };
                return Err(Error::NonPositiveScale { index, value });
            }
        }
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.values[p] = left[i] * self.values[p] * right[self.col_indices[p]];
            }
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// `Diag(diag) − M` for a square matrix.
    pub fn diagonal_minus(&self, diag: &[f64]) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidInput("diagonal_minus needs a square matrix".into()));
        }
        check_len(self.n_rows, diag.len())?;
        let trip = (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, -v)))
            .chain(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
        Self::from_triplets(self.n_rows, self.n_cols, trip)
    }

    pub fn transpose(&self) -> Self {
        let trip = (0..self.n_rows).flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)));
        Self::from_triplets(self.n_cols, self.n_rows, trip).expect("transpose stays in range")
    }

    /// Applies `f` to every stored value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// A node pair `(from, to)` with `to` unreachable from `from` along the
    /// off-diagonal support, or `None` when that support is strongly connected.
    pub fn unreachable_pair(&self) -> Option<(usize, usize)> {
        let n = self.n_rows;
        if n == 0 {
            return None;
        }
        let forward = |i: usize| {
            self.row(i).filter(move |&(j, v)| j != i && v != 0.0).map(|(j, _)| j).collect::<Vec<_>>()
        };
        if let Some(v) = first_unvisited(n, forward) {
            return Some((0, v));
        }
        let t = self.transpose();
        let backward = |i: usize| {
            t.row(i).filter(move |&(j, v)| j != i && v != 0.0).map(|(j, _)| j).collect::<Vec<_>>()
        };
        first_unvisited(n, backward).map(|v| (v, 0))
    }
}

fn first_unvisited(n: usize, neighbors: impl Fn(usize) -> Vec<usize>) -> Option<usize> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.iter().position(|s| !s)
}

/// One weighted arc `src → dst`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Weighted directed graph on nodes `0..n`.
///
/// Parallel arcs are merged at construction by summing their weights and
/// the edge list is kept sorted by `(src, dst)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {} -> {} outside node range 0..{n}",
                    e.src, e.dst
                )));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "edge {} -> {} has non-positive weight {}",
                    e.src, e.dst, e.weight
                )));
            }
        }
        edges.sort_by(|a, b| (a.src, a.dst).cmp(&(b.src, b.dst)));
        let mut merged: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            match merged.last_mut() {
                Some(last) if last.src == e.src && last.dst == e.dst => last.weight += e.weight,
                _ => merged.push(e),
            }
        }
        Ok(Self { n, edges: merged })
    }

    /// Convenience constructor from `(src, dst, weight)` triples.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(n, arcs.iter().map(|&(src, dst, weight)| Edge { src, dst, weight }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Adjacency matrix `A` with `a_ij` the weight on `i → j`.
    pub fn adjacency(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.n, self.n, self.edges.iter().map(|e| (e.src, e.dst, e.weight)))
            .expect("edges validated at construction")
    }

    pub fn out_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.src] += e.weight;
        }
        d
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.unreachable_pair().is_none()
    }

    /// Witness `(from, to)` of a missing directed path, if any.
    pub fn unreachable_pair(&self) -> Option<(usize, usize)> {
        if self.n == 0 {
            return None;
        }
        let mut fwd = vec![Vec::new(); self.n];
        let mut bwd = vec![Vec::new(); self.n];
        for e in &self.edges {
            fwd[e.src].push(e.dst);
            bwd[e.dst].push(e.src);
        }
        if let Some(v) = first_unvisited(self.n, |i| fwd[i].clone()) {
            return Some((0, v));
        }
        first_unvisited(self.n, |i| bwd[i].clone()).map(|v| (v, 0))
    }
}

/// Returns `(P, d)` with `d = A·1` and `P = D⁻¹A`.
pub fn build_transition(g: &Digraph) -> Result<(SparseMatrix, Vec<f64>)> {
    let d = g.out_degrees();
    if let Some(node) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroOutDegree { node });
    }
    let a = g.adjacency();
    let inv: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
    let ones = vec![1.0; g.n()];
    let p = a.scale_rows_cols(&inv, &ones)?;
    Ok((p, d))
}
