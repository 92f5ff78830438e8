use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{BaseKernel, KernelSpec};
use super::model::{factor_with_jitter, GprModel, Standardizer};
use super::optim::{minimize_box, projected_gradient};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    /// Total starts, the initial spec included.
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Projected-gradient tolerance in log-parameter space.
    pub gtol: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            max_iter: 400,
            gtol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub initial_lml: Option<f64>,
    pub final_lml: Option<f64>,
    pub iterations: usize,
    /// Infinity norm of the projected gradient at the end of the run.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub starts: Vec<StartOutcome>,
    pub best: usize,
}

/// Log marginal likelihood and its gradient with respect to
/// [`KernelSpec::log_params`], on already standardized inputs.
///
/// The gradient is `1/2 tr((w w^T - C^{-1}) dC/dp)` with `w = C^{-1} y`.
pub fn lml_and_grad(spec: &KernelSpec, xs: &[f64], ys: &[f64], noise_var: f64) -> Result<(f64, Vec<f64>)> {
    let n = xs.len();
    let np = spec.num_params();
    let mut c = DMatrix::zeros(n, n);
    let mut dc = vec![DMatrix::<f64>::zeros(n, n); np];
    let mut g = vec![0.0; np];
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval_with_grad(xs[i], xs[j], &mut g);
            c[(i, j)] = v;
            c[(j, i)] = v;
            for p in 0..np {
                dc[p][(i, j)] = g[p];
                dc[p][(j, i)] = g[p];
            }
        }
        c[(i, i)] += noise_var;
    }
    let (chol, _) = factor_with_jitter(&c)?;
    let y = DVector::from_column_slice(ys);
    let w = chol.solve(&y);
    let cinv = chol.inverse();
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let lml = -0.5 * y.dot(&w) - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    let mut grad = vec![0.0; np];
    for (p, d) in dc.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (w[i] * w[j] - cinv[(i, j)]) * d[(i, j)];
            }
        }
        grad[p] = 0.5 * acc;
    }
    Ok((lml, grad))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Random start: lengths in [0.05, 5], shapes in [0.1, 10], periods in
/// [0.2, 5] (standardized units); coefficients within a decade of the
/// per-term signal power.
fn random_start(template: &KernelSpec, ys: &[f64], rng: &mut ChaCha8Rng) -> KernelSpec {
    let power = (ys.iter().map(|y| y * y).sum::<f64>() / ys.len().max(1) as f64).max(1e-6);
    let c0 = power / template.terms.len() as f64;
    let mut s = template.clone();
    for t in &mut s.terms {
        t.length = log_uniform(rng, 0.05, 5.0);
        match t.base {
            BaseKernel::RationalQuadratic => t.alpha = Some(log_uniform(rng, 0.1, 10.0)),
            BaseKernel::Periodic => t.period = Some(log_uniform(rng, 0.2, 5.0)),
            _ => {}
        }
    }
    for c in &mut s.coeffs {
        *c = c0 * log_uniform(rng, 0.1, 10.0);
    }
    s
}

fn train_from(
    xs_raw: &[f64],
    ys: &[f64],
    first: &KernelSpec,
    noise_var: f64,
    standardizer: Standardizer,
    opts: &TrainOptions,
) -> Result<(GprModel, TrainReport)> {
    first.validate()?;
    if xs_raw.len() < 2 {
        return Err(Error::InvalidParameter("training needs at least two pairs".into()));
    }
    if xs_raw.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            op: "train",
            expected: xs_raw.len(),
            found: ys.len(),
        });
    }
    let xs: Vec<f64> = xs_raw.iter().map(|&x| standardizer.apply(x)).collect();
    let bounds = first.log_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![first.clone()];
    for _ in 1..opts.starts.max(1) {
        starts.push(random_start(first, ys, &mut rng));
    }

    let objective = |p: &[f64]| {
        let spec = first.with_log_params(p);
        lml_and_grad(&spec, &xs, ys, noise_var)
            .ok()
            .map(|(l, g)| (-l, g.into_iter().map(|v| -v).collect::<Vec<_>>()))
    };

    let mut outcomes = Vec::with_capacity(starts.len());
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (k, s) in starts.iter().enumerate() {
        let mut p0 = s.log_params();
        for (v, &(lo, hi)) in p0.iter_mut().zip(&bounds) {
            *v = v.clamp(lo, hi);
        }
        let initial = objective(&p0).map(|(f, _)| -f);
        let run = minimize_box(objective, &p0, &bounds, opts.max_iter, opts.gtol);
        let outcome = match &run {
            Some(m) => {
                let pg = projected_gradient(&m.x, &m.grad, &bounds);
                StartOutcome {
                    initial_lml: initial,
                    final_lml: Some(-m.f),
                    iterations: m.iterations,
                    grad_norm: pg.iter().fold(0.0f64, |a, v| a.max(v.abs())),
                }
            }
            None => StartOutcome {
                initial_lml: initial,
                final_lml: None,
                iterations: 0,
                grad_norm: f64::NAN,
            },
        };
        outcomes.push(outcome);
        if let Some(m) = run {
            if best.as_ref().is_none_or(|(_, f, _)| -m.f > *f) {
                best = Some((k, -m.f, m.x));
            }
        }
    }
    let (best_idx, _, p) = best.ok_or_else(|| {
        Error::Training("every start failed to factor the Gram matrix".into())
    })?;
    let model = GprModel::fit_with(xs_raw, ys, &first.with_log_params(&p), noise_var, standardizer)?;
    Ok((
        model,
        TrainReport {
            starts: outcomes,
            best: best_idx,
        },
    ))
}

/// Maximizes the log marginal likelihood over log hyperparameters and log
/// coefficients from `spec_init` plus seeded random starts.
pub fn train(
    train_x: &[f64],
    train_y: &[f64],
    spec_init: &KernelSpec,
    noise_var: f64,
    opts: &TrainOptions,
) -> Result<GprModel> {
    train_with_report(train_x, train_y, spec_init, noise_var, opts).map(|(m, _)| m)
}

pub fn train_with_report(
    train_x: &[f64],
    train_y: &[f64],
    spec_init: &KernelSpec,
    noise_var: f64,
    opts: &TrainOptions,
) -> Result<(GprModel, TrainReport)> {
    train_from(
        train_x,
        train_y,
        spec_init,
        noise_var,
        Standardizer::fit(train_x),
        opts,
    )
}

/// Appends data and retrains, warm-starting from the current optimum
/// converted to the enlarged data's standardization.
pub fn retrain(model: &GprModel, new_x: &[f64], new_y: &[f64], opts: &TrainOptions) -> Result<GprModel> {
    if new_x.len() != new_y.len() {
        return Err(Error::DimensionMismatch {
            op: "retrain",
            expected: new_x.len(),
            found: new_y.len(),
        });
    }
    if new_x.is_empty() {
        return Ok(model.clone());
    }
    let xs: Vec<f64> = model.train_x.iter().chain(new_x).copied().collect();
    let ys: Vec<f64> = model.train_y.iter().chain(new_y).copied().collect();
    let st = Standardizer::fit(&xs);
    let warm = model.spec.rescaled(model.standardizer.scale / st.scale);
    train_from(&xs, &ys, &warm, model.noise_var, st, opts).map(|(m, _)| m)
}
