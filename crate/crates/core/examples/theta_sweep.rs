//! Sweep the strong threshold on one grid and print the iteration curve.

use amgtune::experiment::{sweep_theta, SweepConfig};
use amgtune::problems::ProblemSpec;

fn main() -> amgtune::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let res = sweep_theta(&SweepConfig::new(ProblemSpec::poisson(n), 0.02))?;
    let worst = res.curve.iter().map(|p| p.iterations).max().unwrap_or(1);
    for p in &res.curve {
        let bar = "#".repeat(p.iterations * 40 / worst);
        println!("{:>5.2} {:>4} {bar}", p.theta, p.iterations);
    }
    println!(
        "best theta {} with {} iterations (residual {:.2e})",
        res.row.theta_opt, res.row.iter, res.row.residual
    );
    Ok(())
}
