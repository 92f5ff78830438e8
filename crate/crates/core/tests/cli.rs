use std::path::Path;
use std::process::{Command, Output};

use amgtune::experiment::{ProtocolTag, ThetaDataset};
use amgtune::gpr::GprModel;
use amgtune::problems::{assemble, ProblemSpec};
use amgtune::sparse::read_matrix_market;

fn amgtune(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amgtune"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = amgtune(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_writes_the_assembled_system() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--family", "helmholtz", "--n", "10", "--out", "g"]);
    let a = read_matrix_market(dir.path().join("g/matrix.mtx")).unwrap();
    let want = assemble(&ProblemSpec::helmholtz(10)).unwrap();
    assert_eq!(a.to_dense(), want.a.to_dense());
    let spec = std::fs::read_to_string(dir.path().join("g/problem.txt")).unwrap();
    assert!(spec.contains("kind = helmholtz"));
}

#[test]
fn solve_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["solve", "--n", "48", "--theta", "0.3"]);
    assert!(out.contains("converged true"), "{out}");
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--n", "1"][..],
        &["solve", "--n", "16", "--theta", "1.5"],
        &["sweep", "--n", "16", "--theta-step", "0"],
        &["train", "--kernels", "cosine", "--data", "missing.csv", "--out", "m"],
        &["predict", "--model", "missing.json", "--n", "64"],
    ] {
        let out = amgtune(dir.path(), args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn sweep_dataset_train_predict_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["sweep", "--n", "32", "--theta-step", "0.25", "--out", "curve.csv"]);
    let curve = std::fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 5);
    assert!(curve.starts_with("theta,iter\n0.25,"));

    ok(d, &["dataset", "--ns", "16:48:8", "--theta-step", "0.1", "--out", "train.csv"]);
    ok(d, &["dataset", "--ns", "56,64", "--theta-step", "0.1", "--tag", "retrain1", "--out", "r1.csv"]);
    let train = ThetaDataset::load(d.join("train.csv"), ProtocolTag::Training).unwrap();
    assert_eq!(train.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![16, 24, 32, 40, 48]);

    ok(
        d,
        &["train", "--kernels", "gaussian+laplacian,gaussian", "--data", "train.csv", "--data", "r1.csv", "--out", "models"],
    );
    let json = std::fs::read_to_string(d.join("models/gaussian_laplacian.json")).unwrap();
    let model = GprModel::from_json(&json).unwrap();
    assert_eq!(model.len(), 7);

    let pred = ok(d, &["predict", "--model", "models/gaussian_laplacian.json", "--n", "40", "--n", "72"]);
    let lines: Vec<&str> = pred.lines().collect();
    assert_eq!(lines[0], "n,theta_mean,theta_std,lo95,hi95");
    let mean: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(mean, model.predict(72.0).mean);

    ok(
        d,
        &["evaluate", "--model", "models/gaussian_laplacian.json", "--model", "models/gaussian.json", "--data", "r1.csv", "--out", "m.csv"],
    );
    let metrics = std::fs::read_to_string(d.join("m.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), "kernel,MSE,RMSE,MAE,R2,BIC,Corr,MdAPE,LOO-SPE");
    assert_eq!(metrics.lines().count(), 3);
}
