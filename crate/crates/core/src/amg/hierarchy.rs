use std::time::Instant;

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use super::coarsen::{cf_split_pmis, cf_split_rs, CfSplit};
use super::interp::{build_extended_interpolation, build_interpolation};
use super::options::{Coarsening, Interpolation, SolverOptions};
use super::strength::strength_graph;
use crate::error::{Error, Result};
use crate::sparse::ops::{residual_into, sweep_with_diag};
use crate::sparse::{transpose, triple_product, CsrMatrix, Triangle};

/// One non-coarsest level: operator, transfers, and the split that produced them.
#[derive(Debug, Clone)]
pub struct AmgLevel {
    pub a: CsrMatrix,
    /// Prolongation, fine x coarse.
    pub p: CsrMatrix,
    /// Restriction, `P^T`.
    pub r: CsrMatrix,
    pub split: CfSplit,
    /// F points that received an empty interpolation row.
    pub orphan_fine: usize,
    diag: Vec<f64>,
}

/// Dense LU (partial pivoting) of the coarsest operator.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    pub a: CsrMatrix,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl CoarseSolver {
    fn factor(a: CsrMatrix, level: usize) -> Result<Self> {
        let n = a.nrows();
        let dense = DMatrix::from_row_slice(n, n, &a.to_dense());
        let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lu = dense.lu();
        let u = lu.u();
        let min_pivot = (0..n).fold(f64::INFINITY, |m, i| m.min(u[(i, i)].abs()));
        if n > 0 && !(min_pivot > 1e-14 * scale) {
            return Err(Error::SingularCoarse { level });
        }
        Ok(Self { a, lu })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_column_slice(b);
        // pivots were checked at factorization time
        self.lu
            .solve(&rhs)
            .map(|x| x.as_slice().to_vec())
            .unwrap_or_else(|| vec![0.0; b.len()])
    }
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    pub levels: Vec<AmgLevel>,
    pub coarsest: CoarseSolver,
    pub opts: SolverOptions,
    pub setup_seconds: f64,
}

/// SETUP phase: strength graph, split, interpolation and Galerkin product per
/// level until the operator is small enough, `max_levels` is reached, or the
/// split stalls (no C points, or every point C).
pub fn setup_hierarchy(a: &CsrMatrix, opts: &SolverOptions) -> Result<AmgHierarchy> {
    opts.validate()?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "setup_hierarchy",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let start = Instant::now();
    let mut levels = Vec::new();
    let mut current = a.clone();
    loop {
        let n = current.nrows();
        if n <= opts.coarse_cutoff || levels.len() + 1 >= opts.max_levels {
            break;
        }
        let s = strength_graph(&current, opts.theta)?;
        let split = match opts.coarsening {
            Coarsening::RugeStuben => cf_split_rs(&s),
            Coarsening::Pmis => cf_split_pmis(&s, opts.pmis_seed.wrapping_add(levels.len() as u64)),
        };
        let nc = split.coarse_count();
        if nc == 0 || nc == n {
            break;
        }
        let p = match opts.interpolation {
            Interpolation::Direct => build_interpolation(&current, &s, &split)?,
            Interpolation::ExtendedI => build_extended_interpolation(&current, &s, &split)?,
        };
        let orphan_fine = (0..n)
            .filter(|&i| !split.is_coarse(i) && p.row(i).0.is_empty())
            .count();
        let r = transpose(&p);
        let coarse = triple_product(&r, &current, &p)?;
        let diag = current.diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        levels.push(AmgLevel {
            a: current,
            p,
            r,
            split,
            orphan_fine,
            diag,
        });
        current = coarse;
    }
    let coarsest = CoarseSolver::factor(current, levels.len())?;
    Ok(AmgHierarchy {
        levels,
        coarsest,
        opts: opts.clone(),
        setup_seconds: start.elapsed().as_secs_f64(),
    })
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Unknowns per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.a.nrows())
            .chain(std::iter::once(self.coarsest.dim()))
            .collect()
    }

    pub fn fine_matrix(&self) -> &CsrMatrix {
        self.levels
            .first()
            .map(|l| &l.a)
            .unwrap_or(&self.coarsest.a)
    }

    /// Operator complexity: total nonzeros over fine nonzeros.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum::<usize>() + self.coarsest.a.nnz();
        total as f64 / self.fine_matrix().nnz().max(1) as f64
    }

    pub fn orphan_fine_points(&self) -> usize {
        self.levels.iter().map(|l| l.orphan_fine).sum()
    }

    /// Applies one V-cycle at `level` in place.
    pub fn vcycle(&self, level: usize, b: &[f64], x: &mut [f64]) -> Result<()> {
        if level > self.levels.len() {
            return Err(Error::InvalidParameter(format!(
                "level {level} does not exist ({} levels)",
                self.num_levels()
            )));
        }
        let n = if level == self.levels.len() {
            self.coarsest.dim()
        } else {
            self.levels[level].a.nrows()
        };
        for (op, len) in [("vcycle b", b.len()), ("vcycle x", x.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: n,
                    found: len,
                });
            }
        }
        self.cycle(level, b, x);
        Ok(())
    }

    fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        let Some(lvl) = self.levels.get(level) else {
            let sol = self.coarsest.solve(b);
            x.copy_from_slice(&sol);
            return;
        };
        sweep_with_diag(&lvl.a, &lvl.diag, Triangle::Lower, x, b, self.opts.pre_sweeps);
        let mut r = vec![0.0; x.len()];
        residual_into(&lvl.a, x, b, &mut r);
        let mut bc = vec![0.0; lvl.r.nrows()];
        crate::sparse::ops::spmv_into(&lvl.r, &r, &mut bc);
        let mut ec = vec![0.0; bc.len()];
        self.cycle(level + 1, &bc, &mut ec);
        for i in 0..x.len() {
            let (cols, vals) = lvl.p.row(i);
            x[i] += cols.iter().zip(vals).map(|(&j, &w)| w * ec[j]).sum::<f64>();
        }
        sweep_with_diag(&lvl.a, &lvl.diag, Triangle::Upper, x, b, self.opts.post_sweeps);
    }

    /// Repeats V-cycles from `x0` until the relative residual drops below
    /// `opts.tol` or `opts.max_iter` cycles have run.
    pub fn solve(&self, b: &[f64], x0: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let a = self.fine_matrix();
        let n = a.nrows();
        for (op, len) in [("solve b", b.len()), ("solve x0", x0.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: n,
                    found: len,
                });
            }
        }
        let start = Instant::now();
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((
                vec![0.0; n],
                SolveReport {
                    iterations: 0,
                    residual_history: vec![0.0],
                    converged: true,
                    setup_seconds: self.setup_seconds,
                    solve_seconds: start.elapsed().as_secs_f64(),
                },
            ));
        }
        let mut x = x0.to_vec();
        let mut r = vec![0.0; n];
        residual_into(a, &x, b, &mut r);
        let mut history = vec![norm2(&r) / bnorm];
        if !history[0].is_finite() {
            return Err(Error::Divergence { iteration: 0 });
        }
        let mut iterations = 0;
        while *history.last().unwrap() >= self.opts.tol && iterations < self.opts.max_iter {
            self.cycle(0, b, &mut x);
            iterations += 1;
            residual_into(a, &x, b, &mut r);
            let rel = norm2(&r) / bnorm;
            if !rel.is_finite() {
                return Err(Error::Divergence { iteration: iterations });
            }
            history.push(rel);
        }
        let converged = *history.last().unwrap() < self.opts.tol;
        Ok((
            x,
            SolveReport {
                iterations,
                residual_history: history,
                converged,
                setup_seconds: self.setup_seconds,
                solve_seconds: start.elapsed().as_secs_f64(),
            },
        ))
    }
}

/// Outcome of [`AmgHierarchy::solve`]. `residual_history[k]` is
/// `||b - A x^k|| / ||b||`, starting from the initial guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
