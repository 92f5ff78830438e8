use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{build_dataset, stepped_range, DatasetBuild, ProtocolTag, ThetaDataset, Traversal};
use super::report::{emit_reports, CompareRow, Manifest, ReportSet};
use super::sweep::{solve_point, sweep_instance, SweepConfig};
use crate::amg::SolverOptions;
use crate::error::{Error, Result};
use crate::gpr::{retrain, train, GprModel, KernelSpec, TrainOptions};
use crate::metrics::{evaluate, pairs_from_model, MetricsReport};
use crate::problems::{assemble, ProblemSpec};

/// Thresholds handed to comparison solves are clipped into this range.
pub const THETA_CLIP: (f64, f64) = (1e-3, 1.0);

pub const DEFAULT_KERNELS: [&str; 6] = [
    "gaussian+laplacian",
    "gaussian",
    "gaussian+exponential",
    "gaussian+rq",
    "gaussian+matern52",
    "rq+laplacian",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Problem template; `n` is set per dataset row.
    pub problem: ProblemSpec,
    /// The first kernel drives the comparison runs.
    pub kernels: Vec<KernelSpec>,
    pub noise_var: f64,
    /// Master seed for draws, diffusion blocks and training restarts.
    pub seed: u64,
    pub theta_step: f64,
    pub max_iter_cap: usize,
    pub solver: SolverOptions,
    #[serde(default)]
    pub workers: Option<usize>,
    pub train_ns: Vec<usize>,
    pub retrain1_count: usize,
    pub retrain2_count: usize,
    pub test_count: usize,
    /// Candidate range for retrain and test sizes, multiples of `draw_multiple`.
    pub draw_range: (usize, usize),
    pub draw_multiple: usize,
    pub compare_ns: Vec<usize>,
    pub default_theta: f64,
    pub train: TrainOptions,
}

impl PipelineConfig {
    pub fn new(problem: ProblemSpec) -> Self {
        Self {
            problem,
            kernels: DEFAULT_KERNELS.iter().map(|k| k.parse().expect("built-in kernel name")).collect(),
            noise_var: 1e-8,
            seed: 0,
            theta_step: 0.001,
            max_iter_cap: 200,
            solver: SolverOptions::default(),
            workers: None,
            train_ns: stepped_range(64, 400, 16),
            retrain1_count: 10,
            retrain2_count: 12,
            test_count: 7,
            draw_range: (200, 600),
            draw_multiple: 8,
            compare_ns: vec![512],
            default_theta: 0.25,
            train: TrainOptions::default(),
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            solver_base: self.solver.clone(),
            max_iter_cap: self.max_iter_cap,
            workers: self.workers,
            ..SweepConfig::new(self.problem.clone(), self.theta_step)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.kernels.is_empty() {
            return bad("pipeline needs at least one kernel".into());
        }
        for k in &self.kernels {
            k.validate()?;
        }
        if !(self.noise_var > 0.0) {
            return bad(format!("noise variance must be positive, got {}", self.noise_var));
        }
        if self.train_ns.len() < 2 {
            return bad("training set needs at least two grid sizes".into());
        }
        if !(self.default_theta > 0.0 && self.default_theta <= 1.0) {
            return bad(format!("default theta {} is outside (0, 1]", self.default_theta));
        }
        self.solver.validate()?;
        self.sweep_config().validate()?;
        let pool = self.draw_pool().len();
        let need = self.retrain1_count + self.retrain2_count + self.test_count;
        if need > pool {
            return bad(format!("need {need} retrain/test sizes but only {pool} candidates exist"));
        }
        Ok(())
    }

    /// Candidate sizes for retrain and test draws, excluding training sizes.
    pub fn draw_pool(&self) -> Vec<usize> {
        let m = self.draw_multiple.max(1);
        let (lo, hi) = self.draw_range;
        (lo.div_ceil(m) * m..=hi)
            .step_by(m)
            .filter(|n| !self.train_ns.contains(n))
            .collect()
    }

    /// Retrain-1, retrain-2 and test sizes: disjoint draws without
    /// replacement, each list sorted.
    pub fn draw_sizes(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut pool = self.draw_pool();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        pool.shuffle(&mut rng);
        let mut take = |k: usize| {
            let mut v: Vec<usize> = pool.drain(..k.min(pool.len())).collect();
            v.sort_unstable();
            v
        };
        let r1 = take(self.retrain1_count);
        let r2 = take(self.retrain2_count);
        let test = take(self.test_count);
        (r1, r2, test)
    }
}

/// Outputs of [`run_pipeline`]. `reports.models` and `reports.metrics`
/// follow the order of `PipelineConfig::kernels`.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub reports: ReportSet,
    pub manifest: Option<Manifest>,
    /// Grid sizes per set where no threshold converged.
    pub unconverged: Vec<(ProtocolTag, usize)>,
}

impl PipelineRun {
    pub fn dataset(&self, tag: ProtocolTag) -> Option<&ThetaDataset> {
        self.reports.datasets.iter().find(|d| d.tag == tag)
    }

    pub fn primary_model(&self) -> Option<&GprModel> {
        self.reports.models.first()
    }
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    out_dir: Option<&'a Path>,
    reports: ReportSet,
    unconverged: Vec<(ProtocolTag, usize)>,
    stage_seconds: Vec<(String, f64)>,
}

impl Runner<'_> {
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.stage_seconds.push((name.to_string(), start.elapsed().as_secs_f64()));
        self.reports.timings = Some(self.timings());
        match out {
            Ok(v) => {
                self.checkpoint()?;
                Ok(v)
            }
            Err(e) => {
                // Keep whatever finished so far on disk.
                let _ = self.checkpoint();
                Err(Error::stage(name)(e))
            }
        }
    }

    fn checkpoint(&mut self) -> Result<()> {
        if let Some(dir) = self.out_dir {
            emit_reports(&self.reports, dir).map_err(Error::stage("emit"))?;
        }
        Ok(())
    }

    fn timings(&self) -> serde_json::Value {
        let compare: Vec<_> = self
            .reports
            .compare
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "pred_seconds": r.time_pred,
                    "opt_seconds": r.time_opt,
                    "default_seconds": r.time_default,
                })
            })
            .collect();
        let stages: serde_json::Map<_, _> = self
            .stage_seconds
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        serde_json::json!({ "stages": stages, "compare": compare })
    }

    fn sweep_set(&mut self, tag: ProtocolTag, ns: &[usize]) -> Result<ThetaDataset> {
        let seed = self.cfg.seed.wrapping_add(tag as u64);
        let DatasetBuild {
            dataset,
            curves,
            unconverged,
            failures,
        } = build_dataset(&self.cfg.sweep_config(), ns, tag, seed)?;
        if let Some((n, msg)) = failures.first() {
            return Err(Error::InvalidParameter(format!("sweep at n = {n} failed: {msg}")));
        }
        self.unconverged.extend(unconverged.into_iter().map(|n| (tag, n)));
        self.reports.curves.extend(curves.into_iter().map(|t| (tag, t)));
        self.reports.datasets.push(dataset.clone());
        Ok(dataset)
    }
}

fn clip_theta(t: f64) -> f64 {
    if t.is_nan() {
        THETA_CLIP.1
    } else {
        t.clamp(THETA_CLIP.0, THETA_CLIP.1)
    }
}

/// Runs sweep, train, two retrain rounds, held-out evaluation and the
/// comparison solves. With `out_dir`, artifacts are rewritten after every
/// stage so a failure leaves the completed parts on disk.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: Option<&Path>) -> Result<PipelineRun> {
    cfg.validate().map_err(Error::stage("config"))?;
    let mut run = Runner {
        cfg,
        out_dir,
        reports: ReportSet {
            config: Some(serde_json::to_value(cfg)?),
            ..ReportSet::default()
        },
        unconverged: Vec::new(),
        stage_seconds: Vec::new(),
    };
    let (r1_ns, r2_ns, test_ns) = cfg.draw_sizes();
    let train_opts = TrainOptions {
        seed: cfg.seed,
        ..cfg.train.clone()
    };

    let training = run.stage("sweep-training", |r| r.sweep_set(ProtocolTag::Training, &cfg.train_ns))?;
    let mut models: Vec<GprModel> = run.stage("train", |_| {
        cfg.kernels
            .iter()
            .map(|k| train(&training.xs(), &training.ys(), k, cfg.noise_var, &train_opts))
            .collect()
    })?;
    run.reports.models = models.clone();

    for (sweep_stage, train_stage, tag, ns) in [
        ("sweep-retrain1", "retrain1", ProtocolTag::Retrain1, &r1_ns),
        ("sweep-retrain2", "retrain2", ProtocolTag::Retrain2, &r2_ns),
    ] {
        let ds = run.stage(sweep_stage, |r| r.sweep_set(tag, ns))?;
        models = run.stage(train_stage, |_| {
            models
                .iter()
                .map(|m| retrain(m, &ds.xs(), &ds.ys(), &train_opts))
                .collect()
        })?;
        run.reports.models = models.clone();
    }

    let test = run.stage("sweep-test", |r| r.sweep_set(ProtocolTag::Test, &test_ns))?;
    let metrics: Vec<MetricsReport> = run.stage("evaluate", |_| {
        Ok(models
            .iter()
            .map(|m| evaluate(m, &pairs_from_model(m, &test.xs(), &test.ys())))
            .collect())
    })?;
    run.reports.metrics = metrics;

    let primary = models[0].clone();
    run.stage("compare", |r| {
        for &n in &cfg.compare_ns {
            let (row, traversal) = compare_at(cfg, &primary, n)?;
            r.reports.compare.push(row);
            r.reports.compare_curves.push(traversal);
        }
        r.reports.timings = Some(r.timings());
        Ok(())
    })?;

    let manifest = match out_dir {
        Some(dir) => Some(emit_reports(&run.reports, dir).map_err(Error::stage("emit"))?),
        None => None,
    };
    Ok(PipelineRun {
        reports: run.reports,
        manifest,
        unconverged: run.unconverged,
    })
}

/// Solves at `n` with the predicted, sweep-optimal and default thresholds.
pub fn compare_at(cfg: &PipelineConfig, model: &GprModel, n: usize) -> Result<(CompareRow, Traversal)> {
    let sweep_cfg = cfg.sweep_config().with_problem(cfg.problem.with_n(n));
    let inst = assemble(&sweep_cfg.problem)?;
    let res = sweep_instance(&inst, &sweep_cfg)?;
    let best = res
        .curve
        .iter()
        .find(|p| p.theta == res.row.theta_opt)
        .expect("winner comes from the curve");
    let theta_pred = clip_theta(model.predict(n as f64).mean);
    let at = |theta: f64| {
        let opts = SolverOptions {
            theta,
            max_iter: cfg.max_iter_cap,
            ..cfg.solver.clone()
        };
        solve_point(&inst.a, &inst.b, &opts)
    };
    let pred = at(theta_pred);
    let dflt = at(cfg.default_theta);
    let iters = |p: &super::sweep::SweepPoint| p.converged.then_some(p.iterations);
    let row = CompareRow {
        n,
        theta_pred,
        theta_opt: res.row.theta_opt,
        theta_default: cfg.default_theta,
        iter_pred: iters(&pred),
        iter_opt: iters(best),
        iter_default: iters(&dflt),
        time_pred: pred.seconds,
        time_opt: best.seconds,
        time_default: dflt.seconds,
    };
    Ok((
        row,
        Traversal {
            n,
            problem: sweep_cfg.problem,
            curve: res.curve,
        },
    ))
}
