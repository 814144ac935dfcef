//! Text and binary formats: edge lists, Matrix Market, vectors and
//! pseudo-inverse column blocks.
//!
//! Edge lists are UTF-8, one `src<TAB>dst[<TAB>weight]` per line with 0-based
//! ids; lines starting with `#` are comments, except that a leading
//! `# nodes: N` fixes the node count (otherwise it is one past the largest
//! id). Any run of whitespace separates fields on read.

use std::io::{BufRead, Read, Write};

use crate::error::{check_len, Error, Result};
use crate::laplacian::ColumnBlock;
use crate::sparse::{Digraph, Edge, SparseMatrix};

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} '{tok}'") })
}

pub fn read_edge_list(r: impl BufRead) -> Result<Digraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("nodes:") {
                declared = Some(parse_field(Some(v.trim()), lineno, "node count")?);
            }
            continue;
        }
        let mut f = t.split_whitespace();
        let src: usize = parse_field(f.next(), lineno, "source id")?;
        let dst: usize = parse_field(f.next(), lineno, "target id")?;
        let weight: f64 = match f.next() {
            Some(w) => parse_field(Some(w), lineno, "weight")?,
            None => 1.0,
        };
        if f.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "too many fields".into() });
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::Parse { line: lineno, msg: format!("weight must be positive, got {weight}") });
        }
        edges.push(Edge { src, dst, weight });
    }
    let inferred = edges.iter().map(|e| e.src.max(e.dst) + 1).max().unwrap_or(0);
    let n = match declared {
        Some(n) if n < inferred => {
            return Err(Error::InvalidInput(format!("edge list declares {n} nodes but uses id {}", inferred - 1)))
        }
        Some(n) => n,
        None => inferred,
    };
    Digraph::new(n, edges)
}

/// Writes weights with the shortest representation that reads back exactly.
pub fn write_edge_list(g: &Digraph, mut w: impl Write) -> Result<()> {
    writeln!(w, "# nodes: {}", g.n())?;
    for e in g.edges() {
        writeln!(w, "{}\t{}\t{}", e.src, e.dst, e.weight)?;
    }
    Ok(())
}

/// Reads a real `coordinate` Matrix Market file (`general` or `symmetric`).
pub fn read_matrix_market(r: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = header?.to_lowercase();
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: "expected '%%MatrixMarket matrix coordinate ...' header".into() });
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported field '{}'", h[3]) });
    }
    let symmetric = match h[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry '{other}'") }),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut f = t.split_whitespace();
        match size {
            None => {
                size = Some((
                    parse_field(f.next(), lineno, "row count")?,
                    parse_field(f.next(), lineno, "column count")?,
                    parse_field(f.next(), lineno, "entry count")?,
                ));
            }
            Some((rows, cols, _)) => {
                let i: usize = parse_field(f.next(), lineno, "row index")?;
                let j: usize = parse_field(f.next(), lineno, "column index")?;
                let v: f64 = parse_field(f.next(), lineno, "value")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse { line: lineno, msg: format!("index ({i}, {j}) outside {rows}x{cols}") });
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or(Error::Parse { line: 1, msg: "missing size line".into() })?;
    let stored = if symmetric { triplets.iter().filter(|t| t.0 <= t.1).count() } else { triplets.len() };
    if stored != nnz {
        return Err(Error::Parse { line: 0, msg: format!("size line announces {nnz} entries, found {stored}") });
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
}

pub fn write_matrix_market(a: &SparseMatrix, mut w: impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        for (j, v) in a.row(i) {
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

/// One value per line; `#` comments and blank lines are skipped.
pub fn read_vector(r: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(parse_field(Some(t), idx + 1, "value")?);
    }
    Ok(out)
}

pub fn write_vector(v: &[f64], mut w: impl Write) -> Result<()> {
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

/// CSV with a header of column ids and one row per matrix row.
pub fn write_column_block_csv(b: &ColumnBlock, mut w: impl Write) -> Result<()> {
    let header: Vec<String> = b.columns().iter().map(|c| c.to_string()).collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..b.n() {
        let row: Vec<String> = (0..b.len()).map(|p| format!("{:.16e}", b.column(p)[i])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_column_block_csv(r: impl BufRead) -> Result<ColumnBlock> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = header?;
    let columns: Vec<usize> = if header.trim().is_empty() {
        Vec::new()
    } else {
        header.split(',').map(|t| parse_field(Some(t.trim()), 1, "column id")).collect::<Result<_>>()?
    };
    let mut data = vec![Vec::new(); columns.len()];
    let mut n = 0;
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line.split(',').map(|t| parse_field(Some(t.trim()), idx + 1, "value")).collect::<Result<_>>()?;
        if vals.len() != columns.len() {
            return Err(Error::Parse { line: idx + 1, msg: format!("expected {} values, found {}", columns.len(), vals.len()) });
        }
        for (col, v) in data.iter_mut().zip(vals) {
            col.push(v);
        }
        n += 1;
    }
    ColumnBlock::new(n, columns, data)
}

/// Little-endian stream: `n` and `|J|` as `u32`, then the columns one after
/// another as `f64`. Column ids are not stored.
pub fn write_column_block_raw(b: &ColumnBlock, mut w: impl Write) -> Result<()> {
    let dim = |x: usize| u32::try_from(x).map_err(|_| Error::InvalidInput(format!("dimension {x} does not fit in 32 bits")));
    w.write_all(&dim(b.n())?.to_le_bytes())?;
    w.write_all(&dim(b.len())?.to_le_bytes())?;
    for p in 0..b.len() {
        for x in b.column(p) {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a raw block; `columns` names the stored columns (`0..|J|` if `None`).
pub fn read_column_block_raw(mut r: impl Read, columns: Option<Vec<usize>>) -> Result<ColumnBlock> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let m = u32::from_le_bytes(word) as usize;
    let columns = columns.unwrap_or_else(|| (0..m).collect());
    check_len(m, columns.len())?;
    let mut buf = [0u8; 8];
    let mut data = Vec::with_capacity(m);
    for _ in 0..m {
        let mut col = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            col.push(f64::from_le_bytes(buf));
        }
        data.push(col);
    }
    ColumnBlock::new(n, columns, data)
}
