use std::collections::BTreeSet;

use amgtune::amg::{setup_hierarchy, SolverOptions};
use amgtune::error::Error;
use amgtune::experiment::*;
use amgtune::metrics::{evaluate, pairs_from_model};
use amgtune::problems::{assemble, ProblemKind, ProblemSpec};

/// Re-solves one grid point through the hierarchy API directly.
fn resolve(spec: &ProblemSpec, theta: f64, cap: usize) -> (usize, f64, bool) {
    let inst = assemble(spec).unwrap();
    let opts = SolverOptions {
        theta,
        max_iter: cap,
        ..SolverOptions::default()
    };
    let h = setup_hierarchy(&inst.a, &opts).unwrap();
    let (_, rep) = h.solve(&inst.b, &vec![0.0; inst.b.len()]).unwrap();
    let it = if rep.converged { rep.iterations } else { cap };
    (it, rep.final_residual(), rep.converged)
}

/// Curve contents without wall-clock fields.
fn curve_key(curve: &[SweepPoint]) -> Vec<(f64, usize, f64, bool)> {
    curve.iter().map(|p| (p.theta, p.iterations, p.residual, p.converged)).collect()
}

fn small_pipeline(problem: ProblemSpec) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(problem);
    cfg.kernels = ["gaussian+laplacian", "gaussian"].iter().map(|k| k.parse().unwrap()).collect();
    cfg.seed = 3;
    cfg.theta_step = 0.25;
    cfg.train_ns = stepped_range(16, 64, 8);
    cfg.retrain1_count = 3;
    cfg.retrain2_count = 3;
    cfg.test_count = 3;
    cfg.draw_range = (72, 160);
    cfg.compare_ns = vec![96];
    cfg
}

#[test]
fn sweep_winner_matches_exhaustive_resolve() {
    let spec = ProblemSpec::poisson(32);
    let cfg = SweepConfig {
        theta_min: 0.1,
        theta_max: 0.9,
        ..SweepConfig::new(spec.clone(), 0.1)
    };
    let res = sweep_theta(&cfg).unwrap();
    assert_eq!(res.curve.len(), 9);
    let mut best: Option<(usize, f64, f64)> = None;
    for (k, p) in res.curve.iter().enumerate() {
        let theta = (k + 1) as f64 / 10.0;
        assert!((p.theta - theta).abs() < 1e-12);
        let (it, r, conv) = resolve(&spec, theta, cfg.max_iter_cap);
        assert_eq!((p.iterations, p.converged), (it, conv), "theta {theta}");
        assert!((p.residual - r).abs() <= 1e-14 * r.max(1e-300));
        let better = match best {
            None => true,
            Some((bi, br, _)) => it < bi || (it == bi && r < br),
        };
        if better {
            best = Some((it, r, theta));
        }
    }
    let (it, _, theta) = best.unwrap();
    assert_eq!(res.row.iter, it);
    assert!((res.row.theta_opt - theta).abs() < 1e-12);
}

#[test]
fn singleton_grid_returns_its_point() {
    let cfg = SweepConfig {
        theta_min: 0.37,
        theta_max: 0.37,
        ..SweepConfig::new(ProblemSpec::poisson(24), 0.05)
    };
    let res = sweep_theta(&cfg).unwrap();
    assert_eq!(res.curve.len(), 1);
    assert_eq!(res.row.theta_opt, 0.37);
}

#[test]
fn poisson_64_fine_sweep_stays_in_band() {
    let res = sweep_theta(&SweepConfig::new(ProblemSpec::poisson(64), 0.001)).unwrap();
    assert_eq!(res.curve.len(), 1000);
    assert!((0.1..=0.5).contains(&res.row.theta_opt), "theta_opt {}", res.row.theta_opt);
    assert!(res.row.iter <= 26, "iterations {}", res.row.iter);
    let worst = res.curve.iter().map(|p| p.iterations).max().unwrap();
    assert!(worst > res.row.iter);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let inst = assemble(&ProblemSpec::poisson(40)).unwrap();
    let base = SweepConfig::new(inst.spec.clone(), 0.05);
    let one = sweep_instance(&inst, &SweepConfig { workers: Some(1), ..base.clone() }).unwrap();
    let two = sweep_instance(&inst, &SweepConfig { workers: Some(3), ..base }).unwrap();
    assert_eq!(one.row, two.row);
    assert_eq!(curve_key(&one.curve), curve_key(&two.curve));
}

#[test]
fn nonconvergent_sizes_are_flagged_and_kept() {
    let cfg = SweepConfig {
        max_iter_cap: 2,
        ..SweepConfig::new(ProblemSpec::poisson(48), 0.25)
    };
    let build = build_dataset(&cfg, &[32, 48], ProtocolTag::Training, 0).unwrap();
    assert_eq!(build.unconverged, vec![32, 48]);
    assert_eq!(build.dataset.len(), 2);
    assert!(build.dataset.rows.iter().all(|r| r.iter == 2));
    assert!(build.curves[0].curve.iter().all(|p| !p.converged && p.iterations == 2));
}

#[test]
fn dataset_bytes_are_reproducible() {
    let cfg = SweepConfig::new(ProblemSpec::poisson(8), 0.2);
    let ns = [16, 24, 32];
    let a = build_dataset(&cfg, &ns, ProtocolTag::Retrain1, 9).unwrap();
    let b = build_dataset(&cfg, &ns, ProtocolTag::Retrain1, 9).unwrap();
    assert_eq!(a.dataset.to_csv_string().unwrap(), b.dataset.to_csv_string().unwrap());
    assert_eq!(a.dataset.rows.iter().map(|r| r.n).collect::<Vec<_>>(), ns);
}

#[test]
fn training_grid_builds_one_row_per_size() {
    let cfg = SweepConfig {
        theta_min: 0.25,
        ..SweepConfig::new(ProblemSpec::poisson(8), 0.75)
    };
    let ns = stepped_range(64, 400, 16);
    let build = build_dataset(&cfg, &ns, ProtocolTag::Training, 0).unwrap();
    assert_eq!(build.dataset.len(), 22);
    assert!(build.failures.is_empty());
    build.dataset.validate().unwrap();
}

#[test]
fn diffusion_rows_draw_blocks_and_seed_by_index() {
    let cfg = SweepConfig::new(ProblemSpec::block_diffusion(8, 4, 2.0, 99), 0.5);
    let ns = [24, 32, 40, 48];
    let build = build_dataset(&cfg, &ns, ProtocolTag::Test, 5).unwrap();
    assert!(build.failures.is_empty());
    for (idx, t) in build.curves.iter().enumerate() {
        assert_eq!(t.problem.kind, ProblemKind::BlockDiffusion);
        assert!((11..=19).contains(&t.problem.blocks));
        assert_eq!(t.problem.seed, idx as u64);
        assert_eq!(t.problem.n, ns[idx]);
    }
    let again = build_dataset(&cfg, &ns, ProtocolTag::Test, 5).unwrap();
    assert_eq!(build.dataset, again.dataset);
    for (x, y) in build.curves.iter().zip(&again.curves) {
        assert_eq!(x.problem, y.problem);
        assert_eq!(curve_key(&x.curve), curve_key(&y.curve));
    }
    // a grid coarser than the smallest block count cannot be assembled
    let bad = build_dataset(&cfg, &[8], ProtocolTag::Test, 5).unwrap();
    assert_eq!(bad.failures.len(), 1);
    assert!(bad.dataset.is_empty());
}

#[test]
fn empty_report_set_emits_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let set = ReportSet::default();
    assert!(set.is_empty());
    let m = emit_reports(&set, dir.path()).unwrap();
    assert!(m.entries.is_empty());
    assert!(dir.path().join(Manifest::FILE).exists());
}

#[test]
fn curve_files_list_every_grid_point_in_order() {
    let spec = ProblemSpec::poisson(16);
    let res = sweep_theta(&SweepConfig::new(spec.clone(), 0.25)).unwrap();
    let set = ReportSet {
        curves: vec![(
            ProtocolTag::Training,
            Traversal {
                n: 16,
                problem: spec,
                curve: res.curve.clone(),
            },
        )],
        ..ReportSet::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let m = emit_reports(&set, dir.path()).unwrap();
    assert_eq!(m.entries.len(), 1);
    let text = std::fs::read_to_string(dir.path().join(&m.entries[0].path)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,iter");
    assert_eq!(lines.len(), 5);
    for (line, p) in lines[1..].iter().zip(&res.curve) {
        assert_eq!(*line, format!("{},{}", p.theta, p.iterations));
    }
    assert_eq!(m.entries[0].bytes as usize, text.len());
}

#[test]
fn small_pipeline_end_to_end() {
    let cfg = small_pipeline(ProblemSpec::poisson(8));
    let dir = tempfile::tempdir().unwrap();
    let run = run_pipeline(&cfg, Some(dir.path())).unwrap();

    let sizes: Vec<usize> = ProtocolTag::ALL.iter().map(|&t| run.dataset(t).unwrap().len()).collect();
    assert_eq!(sizes, vec![7, 3, 3, 3]);
    let mut seen = BTreeSet::new();
    for t in ProtocolTag::ALL {
        for r in &run.dataset(t).unwrap().rows {
            assert!(seen.insert(r.n), "size {} appears in two sets", r.n);
        }
    }
    assert_eq!(run.reports.models.len(), 2);
    // the final model saw training and both retrain sets
    assert_eq!(run.primary_model().unwrap().len(), 13);
    assert_eq!(run.reports.metrics.len(), 2);

    let row = &run.reports.compare[0];
    assert!(row.theta_pred > 0.0 && row.theta_pred <= 1.0);
    assert_eq!(row.n, 96);

    let m = run.manifest.as_ref().unwrap();
    let on_disk = Manifest::load(dir.path().join(Manifest::FILE)).unwrap();
    assert_eq!(&on_disk, m);
    for e in &m.entries {
        let bytes = std::fs::read(dir.path().join(&e.path)).unwrap();
        assert_eq!(bytes.len() as u64, e.bytes);
        assert_eq!(sha256_hex(&bytes), e.sha256);
    }
    for p in ["datasets/training.csv", "datasets/test.csv", "metrics.csv", "picp.csv", "compare.csv", "config.json"] {
        assert!(m.entries.iter().any(|e| e.path == p), "missing {p}");
    }
    assert!(dir.path().join("timings.json").exists());
    assert!(!m.entries.iter().any(|e| e.path == "timings.json"));

    let dir2 = tempfile::tempdir().unwrap();
    let again = run_pipeline(&cfg, Some(dir2.path())).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join(Manifest::FILE)).unwrap(),
        std::fs::read(dir2.path().join(Manifest::FILE)).unwrap()
    );
    assert_eq!(again.reports.compare[0].theta_pred, row.theta_pred);
}

#[test]
fn evaluating_on_training_data_fits_closely() {
    let mut cfg = small_pipeline(ProblemSpec::poisson(8));
    cfg.theta_step = 0.05;
    cfg.train_ns = stepped_range(16, 96, 8);
    cfg.draw_range = (104, 184);
    let run = run_pipeline(&cfg, None).unwrap();
    let m = run.primary_model().unwrap();
    let ys = &m.train_y;
    let spread = ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 0.0, "training targets are constant");
    let report = evaluate(m, &pairs_from_model(m, &m.train_x, ys));
    assert!(report.mse.unwrap() < 1e-4, "mse {:?}", report.mse);
    assert!(report.r2.unwrap() > 0.99, "r2 {:?}", report.r2);
}

#[test]
fn stage_errors_are_named_and_keep_earlier_artifacts() {
    let mut cfg = small_pipeline(ProblemSpec::block_diffusion(64, 11, 1.0, 0));
    cfg.theta_step = 0.5;
    cfg.train_ns = vec![24, 32];
    // retrain sizes fall below the smallest block count
    cfg.draw_range = (4, 10);
    cfg.draw_multiple = 1;
    cfg.retrain1_count = 2;
    cfg.retrain2_count = 2;
    cfg.test_count = 2;
    let dir = tempfile::tempdir().unwrap();
    let err = run_pipeline(&cfg, Some(dir.path())).unwrap_err();
    match &err {
        Error::Stage { stage, .. } => assert_eq!(*stage, "sweep-retrain1"),
        other => panic!("unexpected error {other}"),
    }
    assert!(dir.path().join("datasets/training.csv").exists());
    assert!(dir.path().join("config.json").exists());
    assert!(std::fs::read_dir(dir.path().join("models")).unwrap().count() == 2);
    assert!(!dir.path().join("compare.csv").exists());

    let mut bad = small_pipeline(ProblemSpec::poisson(8));
    bad.default_theta = 0.0;
    match run_pipeline(&bad, None).unwrap_err() {
        Error::Stage { stage, .. } => assert_eq!(stage, "config"),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn averaged_iterations_is_the_plain_mean() {
    let spec = ProblemSpec::block_diffusion(24, 4, 1.5, 0);
    let opts = SolverOptions::default().with_theta(0.25);
    let seeds = [0u64, 1, 2];
    let mean = averaged_iterations(&spec, &seeds, &opts).unwrap();
    let manual: usize = seeds
        .iter()
        .map(|&s| resolve(&ProblemSpec { seed: s, ..spec.clone() }, 0.25, opts.max_iter).0)
        .sum();
    assert_eq!(mean, manual as f64 / 3.0);
    assert!(averaged_iterations(&spec, &[], &opts).is_err());
}
