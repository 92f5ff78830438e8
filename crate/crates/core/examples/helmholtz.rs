//! The indefinite Helmholtz problem: many thresholds stall at the iteration
//! cap, so the sweep marks them non-convergent.

use amgtune::experiment::{sweep_theta, SweepConfig};
use amgtune::problems::ProblemSpec;

fn main() -> amgtune::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let cfg = SweepConfig {
        max_iter_cap: 100,
        ..SweepConfig::new(ProblemSpec::helmholtz(n), 0.05)
    };
    let res = sweep_theta(&cfg)?;
    for p in &res.curve {
        let mark = if p.converged { "" } else { "  (cap)" };
        println!("theta {:.2}: {:>3}{mark}", p.theta, p.iterations);
    }
    let stalled = res.curve.iter().filter(|p| !p.converged).count();
    println!("{stalled} of {} thresholds hit the cap", res.curve.len());
    println!("best theta {} with {} iterations", res.row.theta_opt, res.row.iter);
    Ok(())
}
