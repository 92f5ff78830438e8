//! Box-constrained quasi-Newton minimizer used for hyperparameter training.

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
}

/// Gradient with the components that push against an active bound zeroed.
pub(crate) fn projected_gradient(x: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&xi, &gi), &(lo, hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

/// Zeroes direction components that would leave the box from an active bound.
fn block_outward(x: &[f64], d: &mut [f64], bounds: &[(f64, f64)]) {
    for ((di, &xi), &(lo, hi)) in d.iter_mut().zip(x).zip(bounds) {
        if (xi <= lo && *di < 0.0) || (xi >= hi && *di > 0.0) {
            *di = 0.0;
        }
    }
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

/// Minimizes `f` over the box with projected BFGS and Armijo backtracking.
///
/// `f` returns `None` where the objective cannot be evaluated; such points
/// are treated as infinitely bad by the line search. Returns `None` only when
/// the starting point itself cannot be evaluated.
pub(crate) fn minimize_box<F>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_iter: usize,
    gtol: f64,
) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    clamp(&mut x, bounds);
    let (mut fx, mut g) = f(&x)?;
    let identity = |n: usize| {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
        h
    };
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;

    while iterations < max_iter {
        let pg = projected_gradient(&x, &g, bounds);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < gtol {
            break;
        }
        let free: Vec<bool> = pg
            .iter()
            .zip(&g)
            .map(|(p, gi)| *p != 0.0 || *gi == 0.0)
            .collect();
        let mut d = vec![0.0; n];
        for i in 0..n {
            if !free[i] {
                continue;
            }
            d[i] = -(0..n).filter(|&j| free[j]).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        block_outward(&x, &mut d, bounds);
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            h = identity(n);
            fresh = true;
            d = pg.iter().map(|v| -v).collect();
            block_outward(&x, &mut d, bounds);
        }
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if dmax > 2.0 {
            d.iter_mut().for_each(|v| *v *= 2.0 / dmax);
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            clamp(&mut xn, bounds);
            let decrease: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if let Some((fnew, gnew)) = f(&xn) {
                if fnew.is_finite() && fnew <= fx + 1e-4 * decrease.min(0.0) {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        let stalled = match &accepted {
            Some((xn, _, _)) => xn.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12),
            None => true,
        };
        if stalled {
            if fresh {
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        }
        let (xn, fnew, gnew) = accepted.unwrap();

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        x = xn;
        fx = fnew;
        g = gnew;
        if sy > 1e-12 {
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
    }
    Some(Minimum {
        x,
        f: fx,
        grad: g,
        iterations,
    })
}
