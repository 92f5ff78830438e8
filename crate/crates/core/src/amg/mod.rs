//! Classical algebraic multigrid: strength of connection, C/F splitting,
//! direct interpolation, Galerkin coarse operators and the V-cycle.

mod coarsen;
mod hierarchy;
mod interp;
mod options;
mod strength;

pub use coarsen::{cf_split_pmis, cf_split_rs, pmis_jitter, CfSplit, Point};
pub use hierarchy::{setup_hierarchy, AmgHierarchy, AmgLevel, CoarseSolver, SolveReport};
pub use interp::{build_extended_interpolation, build_interpolation};
pub use options::{Coarsening, Interpolation, SolverOptions};
pub use strength::{strength_graph, Adjacency, StrengthGraph};

use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Setup followed by a solve from the zero vector.
pub fn setup_and_solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let h = setup_hierarchy(a, opts)?;
    h.solve(b, &vec![0.0; b.len()])
}
