//! Solve the 2D Poisson problem with the default classical AMG settings and
//! print the hierarchy and the residual history.

use amgtune::amg::{setup_hierarchy, SolverOptions};
use amgtune::problems::{assemble, ProblemSpec};

fn main() -> amgtune::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let problem = assemble(&ProblemSpec::poisson(n))?;
    let opts = SolverOptions::default().with_theta(0.25);
    let h = setup_hierarchy(&problem.a, &opts)?;

    println!("n = {n}, {} unknowns, {} levels", problem.dim(), h.num_levels());
    for (k, lvl) in h.levels.iter().enumerate() {
        println!("  level {k}: {:>7} rows {:>8} nnz", lvl.a.nrows(), lvl.a.nnz());
    }
    println!("  coarsest: {:>6} rows (direct solve)", h.coarsest.dim());
    println!("operator complexity {:.2}", h.operator_complexity());

    let (x, rep) = h.solve(&problem.b, &vec![0.0; problem.dim()])?;
    for (k, r) in rep.residual_history.iter().enumerate() {
        println!("  it {k:>2}  rel residual {r:.3e}");
    }
    let exact = problem.exact.as_ref().expect("poisson has a closed-form solution");
    let err = x.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("converged {} in {} iterations, max error {err:.2e}", rep.converged, rep.iterations);
    Ok(())
}
