//! Pseudo-inverse of a general Laplacian with a non-uniform right null
//! vector, compared with a dense reference.
//!
//! cargo run --example general_pinv

use dpinv::laplacian::{general_pinv, GeneralLaplacian, GeneralPinvConfig};
use dpinv::oracle::{dense_pinv_reference, penrose_check};
use dpinv::sparse::SparseMatrix;

fn main() -> dpinv::Result<()> {
    // directed 5-cycle with chords; columns rescaled so that x is the right
    // null vector
    let arcs = [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 1.5), (3, 4, 1.0), (4, 0, 3.0), (0, 2, 0.5), (3, 1, 1.0)];
    let n = 5;
    let x = [1.0, 2.0, 0.5, 1.0, 4.0];
    let mut trip = Vec::new();
    let mut deg = vec![0.0; n];
    for &(i, j, w) in &arcs {
        trip.push((i, j, -w / x[j]));
        deg[i] += w;
    }
    for (i, d) in deg.iter().enumerate() {
        trip.push((i, i, d / x[i]));
    }
    let l = SparseMatrix::from_triplets(n, n, trip)?;
    let gl = GeneralLaplacian::new(l.clone(), x.to_vec())?;
    let cfg = GeneralPinvConfig::default();
    let (block, rep) = general_pinv(&gl, &(0..n).collect::<Vec<_>>(), &cfg)?;
    let b = block.to_square()?;
    println!("pivot {}, left null vector {:.4?}", rep.pivot, rep.v);
    for i in 0..n {
        println!("  {:+.6?}", b.row(i));
    }
    let dense = l.to_dense();
    let pen = penrose_check(&dense, &b, 1e-8);
    println!("Penrose residual {:.1e}", pen.max_residual());
    let reference = dense_pinv_reference(&dense, &x, &rep.v)?;
    println!("max difference to dense reference {:.1e}", b.sub(&reference).max_abs());
    Ok(())
}
