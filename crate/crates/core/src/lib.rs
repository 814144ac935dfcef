//! Stationary distributions, Laplacian pseudo-inverses and random-walk
//! metrics for strongly connected weighted digraphs, built on sparse
//! matrix-vector products.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod graphgen;
pub mod io;
pub mod krylov;
pub mod laplacian;
pub mod metrics;
pub mod oracle;
pub mod smalldense;
pub mod sparse;
pub mod stationary;

pub use error::{Error, Result};
