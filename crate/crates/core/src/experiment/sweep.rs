use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amg::{setup_hierarchy, SolverOptions};
use crate::error::{Error, Result};
use crate::problems::{assemble, ProblemInstance, ProblemSpec};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub step: f64,
    /// Iteration cap; a point that reaches it counts as non-convergent.
    pub max_iter_cap: usize,
    pub problem: ProblemSpec,
    /// Base options; `theta` and `max_iter` are overridden per point.
    pub solver_base: SolverOptions,
    /// Worker threads for the sweep; `None` uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl SweepConfig {
    /// Grid `step, 2 step, ..., 1` with cap 200.
    pub fn new(problem: ProblemSpec, step: f64) -> Self {
        Self {
            theta_min: step,
            theta_max: 1.0,
            step,
            max_iter_cap: 200,
            problem,
            solver_base: SolverOptions::default(),
            workers: None,
        }
    }

    pub fn with_problem(&self, problem: ProblemSpec) -> Self {
        Self {
            problem,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min > 0.0 && self.theta_min <= self.theta_max && self.theta_max <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sweep range must satisfy 0 < theta_min <= theta_max <= 1, got [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("sweep step must be positive, got {}", self.step)));
        }
        if self.max_iter_cap == 0 {
            return Err(Error::InvalidParameter("iteration cap must be >= 1".into()));
        }
        self.problem.validate()
    }

    /// Grid points in increasing order, rounded to nine decimals.
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.theta_max - self.theta_min) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| ((self.theta_min + k as f64 * self.step) * 1e9).round() / 1e9)
            .filter(|&t| t <= self.theta_max + 1e-12)
            .collect()
    }
}

/// Outcome of one setup+solve at a fixed strong threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    /// Capped iteration count; equals the cap for non-convergent points.
    pub iterations: usize,
    /// Final relative residual; infinite after divergence or setup failure.
    pub residual: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

/// One dataset row: the sweep winner at a grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub n: usize,
    pub theta_opt: f64,
    pub iter: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub row: DatasetRow,
    /// False when no grid point converged.
    pub converged: bool,
    pub curve: Vec<SweepPoint>,
}

/// Setup and solve `a x = b` from zero at `opts`; failures become
/// non-convergent points.
pub fn solve_point(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> SweepPoint {
    let start = Instant::now();
    let failed = |e: Error| SweepPoint {
        theta: opts.theta,
        iterations: opts.max_iter,
        residual: f64::INFINITY,
        converged: false,
        error: Some(e.to_string()),
        seconds: start.elapsed().as_secs_f64(),
    };
    let h = match setup_hierarchy(a, opts) {
        Ok(h) => h,
        Err(e) => return failed(e),
    };
    match h.solve(b, &vec![0.0; b.len()]) {
        Ok((_, rep)) => SweepPoint {
            theta: opts.theta,
            iterations: if rep.converged { rep.iterations } else { opts.max_iter },
            residual: rep.final_residual(),
            converged: rep.converged,
            error: None,
            seconds: start.elapsed().as_secs_f64(),
        },
        Err(e) => failed(e),
    }
}

/// Fewest iterations, then smallest residual, then smallest theta.
pub fn select_optimum(curve: &[SweepPoint]) -> Option<&SweepPoint> {
    let key = |p: &SweepPoint| {
        let r = if p.residual.is_nan() { f64::INFINITY } else { p.residual };
        (p.iterations, r, p.theta)
    };
    curve.iter().min_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
    })
}

/// Sweeps an already assembled instance.
pub fn sweep_instance(inst: &ProblemInstance, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let grid = cfg.grid();
    let run = || -> Vec<SweepPoint> {
        grid.par_iter()
            .map(|&theta| {
                let opts = SolverOptions {
                    theta,
                    max_iter: cfg.max_iter_cap,
                    ..cfg.solver_base.clone()
                };
                solve_point(&inst.a, &inst.b, &opts)
            })
            .collect()
    };
    let curve = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    let best = select_optimum(&curve).expect("grid is non-empty");
    let row = DatasetRow {
        n: inst.spec.n,
        theta_opt: best.theta,
        iter: best.iterations,
        residual: best.residual,
    };
    let converged = curve.iter().any(|p| p.converged);
    Ok(SweepResult { row, converged, curve })
}

/// Grid search over the strong threshold for `cfg.problem`.
pub fn sweep_theta(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let inst = assemble(&cfg.problem)?;
    sweep_instance(&inst, cfg)
}

/// Mean capped iteration count at `opts` over the matrices obtained by
/// setting `spec.seed` to each of `seeds`: `sum_s iter_s / seeds.len()`.
pub fn averaged_iterations(spec: &ProblemSpec, seeds: &[u64], opts: &SolverOptions) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("averaging needs at least one seed".into()));
    }
    let mut total = 0usize;
    for &seed in seeds {
        let inst = assemble(&ProblemSpec { seed, ..spec.clone() })?;
        total += solve_point(&inst.a, &inst.b, opts).iterations;
    }
    Ok(total as f64 / seeds.len() as f64)
}
