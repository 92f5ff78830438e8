//! Score several kernels on held-out points and print the metric table.

use amgtune::gpr::{train, KernelSpec, TrainOptions};
use amgtune::metrics::{evaluate, pairs_from_model, MetricsReport};

fn main() -> amgtune::Result<()> {
    let truth = |n: f64| 0.28 + 0.05 * (n / 90.0).sin();
    let xs: Vec<f64> = (0..22).map(|i| 64.0 + 16.0 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&n| truth(n)).collect();
    let test_x = [248.0, 312.0, 424.0, 472.0, 520.0, 568.0, 600.0];
    let test_y: Vec<f64> = test_x.iter().map(|&n| truth(n)).collect();

    println!("{}", MetricsReport::CSV_HEADER.join(","));
    for name in ["gaussian", "gaussian+laplacian", "gaussian+matern52", "gaussian+rq"] {
        let spec: KernelSpec = name.parse()?;
        let model = train(&xs, &ys, &spec, 1e-8, &TrainOptions::default())?;
        let report = evaluate(&model, &pairs_from_model(&model, &test_x, &test_y));
        println!("{}", report.csv_row().join(","));
        println!("  PICP {:.1}%", 100.0 * report.picp.unwrap_or(f64::NAN));
    }
    Ok(())
}
