//! Anisotropic diffusion with random per-block coefficients. Compares
//! Ruge-Stuben and PMIS coarsening and averages over several coefficient
//! draws.

use amgtune::amg::{Coarsening, SolverOptions};
use amgtune::experiment::averaged_iterations;
use amgtune::problems::{assemble, block_coefficients, ProblemSpec};

fn main() -> amgtune::Result<()> {
    let spec = ProblemSpec::block_diffusion(96, 12, 2.0, 0);
    let coeffs = block_coefficients(&spec);
    let (lo, hi) = coeffs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)));
    println!("{} blocks, kappa in [{lo:.2}, {hi:.2}]", coeffs.len());
    println!("{} unknowns", assemble(&spec)?.dim());

    let seeds: Vec<u64> = (0..5).collect();
    for coarsening in [Coarsening::RugeStuben, Coarsening::Pmis] {
        for theta in [0.1, 0.25, 0.5, 0.8] {
            let opts = SolverOptions {
                coarsening,
                ..SolverOptions::default().with_theta(theta)
            };
            let mean = averaged_iterations(&spec, &seeds, &opts)?;
            println!("{coarsening:>5} theta {theta:.2}: {mean:.1} iterations on average");
        }
    }
    Ok(())
}
