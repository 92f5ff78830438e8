use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amgtune::amg::{setup_and_solve, Coarsening, Interpolation, SolverOptions};
use amgtune::experiment::{
    build_dataset, compare_at, curve_csv, run_pipeline, stepped_range, sweep_theta, PipelineConfig,
    ProtocolTag, SweepConfig, ThetaDataset,
};
use amgtune::gpr::{retrain, train, GprModel, KernelSpec, TrainOptions};
use amgtune::metrics::{evaluate, pairs_from_model, MetricsReport};
use amgtune::problems::{assemble, ProblemKind, ProblemSpec};
use amgtune::sparse::{write_matrix_market, write_vector, MmSymmetry};
use amgtune::{Error, Result};

#[derive(Parser)]
#[command(name = "amgtune", version, about = "AMG strong-threshold tuning with Gaussian process regression")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// poisson, diffusion or helmholtz.
    #[arg(long, default_value = "poisson")]
    family: ProblemKind,
    /// Blocks per axis for diffusion.
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// Multiscale exponent for diffusion.
    #[arg(long, default_value_t = 2.0)]
    multiscale: f64,
    /// Wave number for helmholtz.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    wave_k: f64,
}

impl ProblemArgs {
    fn spec(&self, n: usize, seed: u64) -> ProblemSpec {
        ProblemSpec {
            blocks: self.blocks,
            multiscale: self.multiscale,
            wave_k: self.wave_k,
            seed,
            ..ProblemSpec::new(self.family, n)
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.25)]
    theta: f64,
    #[arg(long, default_value_t = 1)]
    pre_sweeps: usize,
    #[arg(long, default_value_t = 1)]
    post_sweeps: usize,
    /// rs or pmis.
    #[arg(long, default_value = "rs")]
    coarsening: Coarsening,
    /// ext+i or direct.
    #[arg(long, default_value = "ext+i")]
    interpolation: Interpolation,
    #[arg(long, default_value_t = 400)]
    coarse_cutoff: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self, seed: u64) -> SolverOptions {
        SolverOptions {
            theta: self.theta,
            pre_sweeps: self.pre_sweeps,
            post_sweeps: self.post_sweeps,
            coarsening: self.coarsening,
            interpolation: self.interpolation,
            coarse_cutoff: self.coarse_cutoff,
            tol: self.tol,
            max_iter: self.max_iter,
            pmis_seed: seed,
            ..SolverOptions::default()
        }
    }
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.001)]
    theta_step: f64,
    /// Iteration cap; reaching it marks non-convergence.
    #[arg(long, default_value_t = 200)]
    cap: usize,
    /// Sweep worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct GprArgs {
    /// Comma-separated kernel combinations, e.g. gaussian+laplacian,gaussian.
    #[arg(long, value_delimiter = ',', default_value = "gaussian+laplacian")]
    kernels: Vec<KernelSpec>,
    /// Observation noise standard deviation.
    #[arg(long, default_value_t = 1e-4)]
    sigma: f64,
    /// Optimizer starts per training run.
    #[arg(long, default_value_t = 8)]
    starts: usize,
}

impl GprArgs {
    fn train_options(&self, seed: u64) -> TrainOptions {
        TrainOptions {
            starts: self.starts,
            seed,
            ..TrainOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem's matrix (Matrix Market) and right-hand side.
    Generate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one problem at a fixed threshold.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        n: usize,
    },
    /// Sweep the strong threshold at one grid size.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        n: usize,
        /// Traversal curve CSV (`theta,iter`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a list of grid sizes into a dataset CSV.
    Dataset {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Grid sizes, comma-separated or `lo:hi:step`.
        #[arg(long, default_value = "64:400:16")]
        ns: String,
        #[arg(long, default_value = "training")]
        tag: ProtocolTag,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model per kernel; later `--data` files are retraining rounds.
    Train {
        #[command(flatten)]
        gpr: GprArgs,
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        /// Output directory for model JSON files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the optimal threshold at grid sizes.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
    },
    /// Score models on a held-out dataset.
    Evaluate {
        #[arg(long, required = true)]
        model: Vec<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// Metrics CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare predicted, sweep-optimal and default thresholds.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "512")]
        compare_n: Vec<usize>,
        #[arg(long, default_value_t = 0.25)]
        default_theta: f64,
    },
    /// Run the full protocol and write every artifact.
    Pipeline {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Comma-separated kernel combinations; the first drives comparisons.
        /// Defaults to six gaussian-based combinations.
        #[arg(long, value_delimiter = ',')]
        kernels: Option<Vec<KernelSpec>>,
        #[arg(long, default_value_t = 1e-4)]
        sigma: f64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, value_delimiter = ',', default_value = "512")]
        compare_n: Vec<usize>,
        #[arg(long, default_value_t = 0.25)]
        default_theta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_ns(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad grid size list `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<usize> = parts
            .iter()
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        return Ok(stepped_range(v[0], v[1], v[2]));
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_model(path: &Path) -> Result<GprModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    GprModel::from_json(&text)
}

fn sweep_config(problem: ProblemSpec, solver: &SolverArgs, sweep: &SweepArgs, seed: u64) -> SweepConfig {
    SweepConfig {
        max_iter_cap: sweep.cap,
        solver_base: solver.options(seed),
        workers: sweep.workers,
        ..SweepConfig::new(problem, sweep.theta_step)
    }
}

fn print_metrics(reports: &[MetricsReport]) {
    println!("{}", MetricsReport::CSV_HEADER.join(","));
    for r in reports {
        println!("{}", r.csv_row().join(","));
    }
    for r in reports {
        println!("PICP {}: {}", r.kernel, r.picp.map_or("n/a".into(), |p| format!("{:.1}%", 100.0 * p)));
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.cmd {
        Command::Generate { problem, n, out } => {
            let inst = assemble(&problem.spec(n, seed))?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            write_matrix_market(&inst.a, MmSymmetry::Symmetric, out.join("matrix.mtx"))?;
            write_vector(&inst.b, out.join("rhs.txt"))?;
            write_text(&out.join("problem.txt"), &inst.spec.to_kv())?;
            println!("wrote {} unknowns, {} nonzeros to {}", inst.dim(), inst.a.nnz(), out.display());
        }
        Command::Solve { problem, solver, n } => {
            let inst = assemble(&problem.spec(n, seed))?;
            let (x, rep) = setup_and_solve(&inst.a, &inst.b, &solver.options(seed))?;
            println!(
                "iterations {} converged {} residual {:e} setup {:.3}s solve {:.3}s",
                rep.iterations,
                rep.converged,
                rep.final_residual(),
                rep.setup_seconds,
                rep.solve_seconds
            );
            if let Some(exact) = &inst.exact {
                let err = x.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                println!("max error vs exact {err:e}");
            }
        }
        Command::Sweep {
            problem,
            solver,
            sweep,
            n,
            out,
        } => {
            let res = sweep_theta(&sweep_config(problem.spec(n, seed), &solver, &sweep, seed))?;
            if let Some(path) = out {
                write_text(&path, &curve_csv(&res.curve))?;
            }
            let r = &res.row;
            println!(
                "n {} theta_opt {} iter {} residual {:e}{}",
                r.n,
                r.theta_opt,
                r.iter,
                r.residual,
                if res.converged { "" } else { " (no threshold converged)" }
            );
        }
        Command::Dataset {
            problem,
            solver,
            sweep,
            ns,
            tag,
            out,
        } => {
            let cfg = sweep_config(problem.spec(2, seed), &solver, &sweep, seed);
            let build = build_dataset(&cfg, &parse_ns(&ns)?, tag, seed)?;
            build.dataset.save(&out)?;
            for (n, msg) in &build.failures {
                eprintln!("n = {n} failed: {msg}");
            }
            println!("wrote {} rows to {}", build.dataset.len(), out.display());
        }
        Command::Train { gpr, data, out } => {
            let opts = gpr.train_options(seed);
            let tags = [ProtocolTag::Training, ProtocolTag::Retrain1, ProtocolTag::Retrain2];
            let sets: Vec<ThetaDataset> = data
                .iter()
                .enumerate()
                .map(|(i, p)| ThetaDataset::load(p, tags[i.min(2)]))
                .collect::<Result<_>>()?;
            for k in &gpr.kernels {
                let mut m = train(&sets[0].xs(), &sets[0].ys(), k, gpr.sigma * gpr.sigma, &opts)?;
                for ds in &sets[1..] {
                    m = retrain(&m, &ds.xs(), &ds.ys(), &opts)?;
                }
                let path = out.join(format!("{}.json", k.name().replace('+', "_")));
                write_text(&path, &(m.to_json()? + "\n"))?;
                println!("{} lml {:.4} -> {}", m.spec, m.log_marginal_likelihood(), path.display());
            }
        }
        Command::Predict { model, n } => {
            let m = load_model(&model)?;
            println!("n,theta_mean,theta_std,lo95,hi95");
            for n in n {
                let p = m.predict(n as f64);
                println!("{n},{},{},{},{}", p.mean, p.std_dev(), p.interval95.0, p.interval95.1);
            }
        }
        Command::Evaluate { model, data, out } => {
            let test = ThetaDataset::load(&data, ProtocolTag::Test)?;
            let mut reports = Vec::new();
            for path in &model {
                let m = load_model(path)?;
                reports.push(evaluate(&m, &pairs_from_model(&m, &test.xs(), &test.ys())));
            }
            if let Some(path) = out {
                let mut s = MetricsReport::CSV_HEADER.join(",") + "\n";
                for r in &reports {
                    s += &(r.csv_row().join(",") + "\n");
                }
                write_text(&path, &s)?;
            }
            print_metrics(&reports);
        }
        Command::Compare {
            problem,
            solver,
            sweep,
            model,
            compare_n,
            default_theta,
        } => {
            let m = load_model(&model)?;
            let mut cfg = PipelineConfig::new(problem.spec(2, seed));
            cfg.solver = solver.options(seed);
            cfg.theta_step = sweep.theta_step;
            cfg.max_iter_cap = sweep.cap;
            cfg.workers = sweep.workers;
            cfg.default_theta = default_theta;
            println!("{}", amgtune::experiment::CompareRow::CSV_HEADER);
            for n in compare_n {
                let (row, _) = compare_at(&cfg, &m, n)?;
                println!("{}", row.csv_line());
            }
        }
        Command::Pipeline {
            problem,
            solver,
            sweep,
            kernels,
            sigma,
            starts,
            compare_n,
            default_theta,
            out,
        } => {
            let mut cfg = PipelineConfig::new(problem.spec(2, seed));
            if let Some(k) = kernels {
                cfg.kernels = k;
            }
            cfg.noise_var = sigma * sigma;
            cfg.seed = seed;
            cfg.solver = solver.options(seed);
            cfg.theta_step = sweep.theta_step;
            cfg.max_iter_cap = sweep.cap;
            cfg.workers = sweep.workers;
            cfg.compare_ns = compare_n;
            cfg.default_theta = default_theta;
            cfg.train.starts = starts;
            let run = run_pipeline(&cfg, Some(&out))?;
            print_metrics(&run.reports.metrics);
            println!("{}", amgtune::experiment::CompareRow::CSV_HEADER);
            for r in &run.reports.compare {
                println!("{}", r.csv_line());
            }
            for (tag, n) in &run.unconverged {
                println!("no threshold converged: {tag} n = {n}");
            }
            let entries = run.manifest.map_or(0, |m| m.entries.len());
            println!("wrote {entries} files to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
