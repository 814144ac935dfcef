use std::fmt;

use crate::krylov::SolveReport;

/// Structural property of a general Laplacian, used to name check failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    /// Irreducible (strongly connected off-diagonal support).
    Pa,
    /// Positive diagonal, nonpositive off-diagonal.
    Pb,
    /// Strictly positive right null vector.
    Pc,
    /// Strictly positive `w` with `L11 w` strictly positive.
    PcPrime,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::Pa => "(Pa)",
            Property::Pb => "(Pb)",
            Property::Pc => "(Pc)",
            Property::PcPrime => "(Pc')",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scale entry {index} is not strictly positive ({value})")]
    NonPositiveScale { index: usize, value: f64 },

    #[error("node {node} has no outgoing edges")]
    ZeroOutDegree { node: usize },

    #[error("graph is not strongly connected: node {to} is not reachable from node {from}")]
    NotStronglyConnected { from: usize, to: usize },

    #[error("transition matrix row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("rank deficient block: column {column} vanished during orthogonalization")]
    RankDeficient { column: usize },

    #[error("QR iteration did not converge after {sweeps} sweeps")]
    SchurNoConvergence { sweeps: usize },

    #[error("eigenvalue closest to the target lies in a complex 2x2 block")]
    ComplexLeadingBlock,

    #[error("matrix is singular to working precision (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("subspace iteration did not converge in {iterations} iterations (residual {residual:e})")]
    StationaryNotConverged { iterations: usize, residual: f64 },

    #[error("GMRES did not converge in {} outer steps (residual {:e})", .report.outer_iterations, .report.final_residual)]
    GmresNotConverged { report: Box<SolveReport> },

    #[error("pseudo-inverse column {column} was not computed")]
    MissingColumn { column: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{property} violated: {detail}")]
    PropertyViolated { property: Property, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
