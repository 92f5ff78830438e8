//! Fit composite kernels to a small threshold-like dataset, then print the
//! learned coefficients, the marginal likelihood and a few predictions.

use amgtune::gpr::{train, KernelSpec, TrainOptions};

fn main() -> amgtune::Result<()> {
    let xs: Vec<f64> = (0..22).map(|i| 64.0 + 16.0 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|n| 0.3 + 0.04 * (n / 70.0).sin() + 0.01 * (n / 19.0).cos()).collect();

    for name in ["gaussian", "gaussian+laplacian", "gaussian+rq", "rq+laplacian"] {
        let spec: KernelSpec = name.parse()?;
        let model = train(&xs, &ys, &spec, 1e-8, &TrainOptions::default())?;
        let terms: Vec<String> = model
            .spec
            .terms
            .iter()
            .zip(&model.spec.coeffs)
            .map(|(t, c)| format!("{c:.3e}*{}(l={:.3})", t.base.name(), t.length))
            .collect();
        println!("{name}: lml {:.3}", model.log_marginal_likelihood());
        println!("  {}", terms.join(" + "));
        for n in [256.0, 512.0, 1024.0] {
            let p = model.predict(n);
            println!("  n={n:>5}: theta {:.4} +- {:.4}", p.mean, 1.96 * p.std_dev());
        }
    }
    Ok(())
}
