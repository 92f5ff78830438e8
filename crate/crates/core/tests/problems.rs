use std::f64::consts::PI;

use amgtune::problems::{assemble, block_coefficients, ProblemKind, ProblemSpec};
use amgtune::sparse::{spmv, CsrMatrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Plain conjugate gradients to a tight tolerance; independent of the AMG path.
fn cg(a: &CsrMatrix, b: &[f64], tol: f64) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..10 * n {
        if rr.sqrt() <= tol * bnorm {
            break;
        }
        let ap = spmv(a, &p).unwrap();
        let alpha = rr / p.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        for i in 0..n {
            p[i] = r[i] + rr_new / rr * p[i];
        }
        rr = rr_new;
    }
    x
}

fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense());
    m.lu().solve(&DVector::from_column_slice(b)).unwrap().as_slice().to_vec()
}

fn max_err(x: &[f64], exact: &[f64]) -> f64 {
    x.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

fn is_stieltjes_like(a: &CsrMatrix) -> bool {
    a.is_symmetric(1e-14)
        && (0..a.nrows()).all(|i| {
            let (cols, vals) = a.row(i);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                } else {
                    if v > 0.0 {
                        return false;
                    }
                    off += -v;
                }
            }
            diag > 0.0 && diag >= off * (1.0 - 1e-14)
        })
}

#[test]
fn poisson_stencil_and_sizes() {
    let p = assemble(&ProblemSpec::poisson(4)).unwrap();
    assert_eq!(p.dim(), 9);
    // center node touches four neighbours
    let (cols, vals) = p.a.row(4);
    assert_eq!(cols, &[1, 3, 4, 5, 7]);
    assert_eq!(vals, &[-1.0, -1.0, 4.0, -1.0, -1.0]);
    // corner node has two
    assert_eq!(p.a.row(0).0, &[0, 1, 3]);
    assert_eq!(p.a.nnz(), 9 * 5 - 4 * 3);
}

#[test]
fn poisson_converges_at_second_order() {
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let p = assemble(&ProblemSpec::poisson(n)).unwrap();
            max_err(&cg(&p.a, &p.b, 1e-13), p.exact.as_ref().unwrap())
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "error ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn coefficient_scales_operator_not_solution() {
    let p1 = assemble(&ProblemSpec::poisson(12)).unwrap();
    let p3 = assemble(&ProblemSpec {
        coeff_a: 3.0,
        ..ProblemSpec::poisson(12)
    })
    .unwrap();
    assert_eq!(p3.a.to_dense(), p1.a.scaled(3.0).to_dense());
    assert_eq!(p1.exact, p3.exact);
}

#[test]
fn helmholtz_converges_at_second_order() {
    let errs: Vec<f64> = [12, 24, 48]
        .iter()
        .map(|&n| {
            let p = assemble(&ProblemSpec::helmholtz(n)).unwrap();
            max_err(&dense_solve(&p.a, &p.b), p.exact.as_ref().unwrap())
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.4..4.6).contains(&ratio), "error ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn helmholtz_shift_recovers_laplacian() {
    let n = 10;
    let spec = ProblemSpec::helmholtz(n);
    let h = 2.0 / n as f64;
    let shift = spec.wave_k * spec.wave_k * h * h;
    let a = assemble(&spec).unwrap().a;
    let lap = assemble(&ProblemSpec::poisson(n)).unwrap().a;
    let m = a.nrows();
    let shifted: Vec<f64> = a
        .to_dense()
        .iter()
        .enumerate()
        .map(|(k, v)| if k / m == k % m { v + shift } else { *v })
        .collect();
    let want = lap.to_dense();
    assert!(shifted.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-14));
}

#[test]
fn helmholtz_is_indefinite_at_default_wave_number() {
    // the Dirichlet Laplacian's smallest eigenvalue is 2 (pi/2)^2 < (2 pi)^2
    let p = assemble(&ProblemSpec::helmholtz(16)).unwrap();
    let m = p.dim();
    let eig = DMatrix::from_row_slice(m, m, &p.a.to_dense()).symmetric_eigenvalues();
    assert!(eig.min() < 0.0 && eig.max() > 0.0);
}

#[test]
fn helmholtz_small_wave_number_tends_to_laplacian() {
    let n = 12;
    let lap = assemble(&ProblemSpec::poisson(n)).unwrap().a.to_dense();
    let a = assemble(&ProblemSpec {
        wave_k: 1e-9,
        ..ProblemSpec::helmholtz(n)
    })
    .unwrap()
    .a
    .to_dense();
    assert!(a.iter().zip(&lap).all(|(x, y)| (x - y).abs() < 1e-15));
}

#[test]
fn helmholtz_residual_of_exact_solution_is_small() {
    let p = assemble(&ProblemSpec::helmholtz(64)).unwrap();
    let u = p.exact.as_ref().unwrap();
    let au = spmv(&p.a, u).unwrap();
    let h: f64 = 2.0 / 64.0;
    // local truncation error is O(h^4) after the h^2 scaling
    assert!(au.iter().zip(&p.b).all(|(x, y)| (x - y).abs() < 3.0 * h.powi(4) * PI.powi(4)));
}

#[test]
fn diffusion_with_zero_exponent_is_poisson() {
    let d = assemble(&ProblemSpec::block_diffusion(20, 5, 0.0, 3)).unwrap();
    let p = assemble(&ProblemSpec::poisson(20)).unwrap();
    assert_eq!(d.a.to_dense(), p.a.to_dense());
    let h = 1.0 / 20.0;
    assert!(d.b.iter().all(|&v| v == h * h));
    assert!(d.exact.is_none());
}

#[test]
fn diffusion_coefficients_are_seeded_and_bounded() {
    let spec = ProblemSpec::block_diffusion(64, 12, 2.0, 5);
    let c = block_coefficients(&spec);
    assert_eq!(c.len(), 144);
    assert!(c.iter().all(|&(a, b)| (1.0..100.0).contains(&a) && (1.0..100.0).contains(&b)));
    assert_eq!(c, block_coefficients(&spec));
    assert_ne!(c, block_coefficients(&ProblemSpec { seed: 6, ..spec }));
}

#[test]
fn diffusion_is_anisotropic_m_matrix() {
    let d = assemble(&ProblemSpec::block_diffusion(48, 12, 2.0, 1)).unwrap();
    assert!(is_stieltjes_like(&d.a));
    let x = cg(&d.a, &d.b, 1e-12);
    assert!(x.iter().all(|&v| v > 0.0), "positive load must give a positive solution");
}

#[test]
fn kind_names_round_trip() {
    for k in [ProblemKind::ConstPoisson, ProblemKind::BlockDiffusion, ProblemKind::Helmholtz] {
        assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
    }
    assert!("wave".parse::<ProblemKind>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diffusion_is_symmetric_m_matrix(n in 4usize..40, t in 1usize..8, m in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(t <= n);
        let d = assemble(&ProblemSpec::block_diffusion(n, t, m, seed)).unwrap();
        prop_assert_eq!(d.dim(), (n - 1) * (n - 1));
        prop_assert!(is_stieltjes_like(&d.a));
    }

    #[test]
    fn poisson_rows_sum_to_boundary_count(n in 3usize..30) {
        let p = assemble(&ProblemSpec::poisson(n)).unwrap();
        let ones = vec![1.0; p.dim()];
        let s = spmv(&p.a, &ones).unwrap();
        let m = n - 1;
        for j in 0..m {
            for i in 0..m {
                let boundary = [i == 0, i + 1 == m, j == 0, j + 1 == m].iter().filter(|&&b| b).count();
                prop_assert_eq!(s[i + j * m], boundary as f64);
            }
        }
    }
}
