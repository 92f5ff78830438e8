//! Write an assembled operator to Matrix Market, read it back and solve.

use amgtune::amg::{setup_and_solve, SolverOptions};
use amgtune::problems::{assemble, ProblemSpec};
use amgtune::sparse::{read_matrix_market, read_vector, write_matrix_market, write_vector, MmSymmetry};

fn main() -> amgtune::Result<()> {
    let dir = std::env::temp_dir().join("amgtune-mm-example");
    std::fs::create_dir_all(&dir).map_err(|e| amgtune::Error::Io { path: dir.clone(), source: e })?;
    let problem = assemble(&ProblemSpec::block_diffusion(48, 8, 1.5, 3))?;
    let (mpath, bpath) = (dir.join("a.mtx"), dir.join("b.mtx"));
    write_matrix_market(&problem.a, MmSymmetry::Symmetric, &mpath)?;
    write_vector(&problem.b, &bpath)?;

    let a = read_matrix_market(&mpath)?;
    let b = read_vector(&bpath)?;
    assert_eq!(a.to_dense(), problem.a.to_dense());
    println!("read {}x{} with {} nonzeros from {}", a.nrows(), a.ncols(), a.nnz(), mpath.display());

    let (_, rep) = setup_and_solve(&a, &b, &SolverOptions::default())?;
    println!("solved in {} iterations, residual {:.2e}", rep.iterations, rep.final_residual());
    Ok(())
}
