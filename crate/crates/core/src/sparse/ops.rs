use super::CsrMatrix;
use crate::error::{Error, Result};

/// `y = A x`.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            op: "spmv",
            expected: a.ncols(),
            found: x.len(),
        });
    }
    let mut y = vec![0.0; a.nrows()];
    spmv_into(a, x, &mut y);
    Ok(y)
}

#[inline]
pub(crate) fn spmv_into(a: &CsrMatrix, x: &[f64], y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
    }
}

/// `r = b - A x`.
#[inline]
pub(crate) fn residual_into(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    for (i, ri) in r.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        let ax: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        *ri = b[i] - ax;
    }
}

pub fn transpose(a: &CsrMatrix) -> CsrMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    let mut offsets = vec![0usize; n + 1];
    for &c in a.col_indices() {
        offsets[c + 1] += 1;
    }
    for j in 0..n {
        offsets[j + 1] += offsets[j];
    }
    let mut next = offsets.clone();
    let mut cols = vec![0usize; a.nnz()];
    let mut vals = vec![0.0; a.nnz()];
    // rows visited in increasing order keep each output row sorted
    for i in 0..m {
        let (rc, rv) = a.row(i);
        for (&j, &v) in rc.iter().zip(rv) {
            let k = next[j];
            cols[k] = i;
            vals[k] = v;
            next[j] += 1;
        }
    }
    CsrMatrix::from_parts_unchecked(n, m, offsets, cols, vals)
}

/// Sparse product `A B` (row-by-row Gustavson with a dense accumulator).
pub fn matmul(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            expected: a.ncols(),
            found: b.nrows(),
        });
    }
    let n = b.ncols();
    let mut acc = vec![0.0; n];
    let mut mark = vec![usize::MAX; n];
    let mut row_cols: Vec<usize> = Vec::new();

    let mut offsets = Vec::with_capacity(a.nrows() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..a.nrows() {
        row_cols.clear();
        let (ac, av) = a.row(i);
        for (&k, &aik) in ac.iter().zip(av) {
            let (bc, bv) = b.row(k);
            for (&j, &bkj) in bc.iter().zip(bv) {
                if mark[j] != i {
                    mark[j] = i;
                    acc[j] = 0.0;
                    row_cols.push(j);
                }
                acc[j] += aik * bkj;
            }
        }
        row_cols.sort_unstable();
        for &j in &row_cols {
            cols.push(j);
            vals.push(acc[j]);
        }
        offsets.push(cols.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(
        a.nrows(),
        n,
        offsets,
        cols,
        vals,
    ))
}

/// Galerkin product `R A P`.
pub fn triple_product(r: &CsrMatrix, a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    if r.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch {
            op: "triple_product (R*A)",
            expected: a.nrows(),
            found: r.ncols(),
        });
    }
    if a.ncols() != p.nrows() {
        return Err(Error::DimensionMismatch {
            op: "triple_product (A*P)",
            expected: a.ncols(),
            found: p.nrows(),
        });
    }
    let ra = matmul(r, a)?;
    matmul(&ra, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// Forward sweep with the lower triangle (diagonal included).
    Lower,
    /// Backward sweep with the upper triangle (diagonal included).
    Upper,
}

/// Runs `iters` sweeps of `x <- x + M^{-1}(b - A x)` where `M` is the chosen
/// triangle of `A`. This is forward (lower) or backward (upper) Gauss-Seidel.
pub fn tri_sweep(
    a: &CsrMatrix,
    part: Triangle,
    x: &mut [f64],
    b: &[f64],
    iters: usize,
) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "tri_sweep",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    for (op, len) in [("tri_sweep x", x.len()), ("tri_sweep b", b.len())] {
        if len != a.nrows() {
            return Err(Error::DimensionMismatch {
                op,
                expected: a.nrows(),
                found: len,
            });
        }
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    sweep_with_diag(a, &diag, part, x, b, iters);
    Ok(())
}

/// Sweep with a precomputed, nonzero diagonal.
#[inline]
pub(crate) fn sweep_with_diag(
    a: &CsrMatrix,
    diag: &[f64],
    part: Triangle,
    x: &mut [f64],
    b: &[f64],
    iters: usize,
) {
    let n = a.nrows();
    for _ in 0..iters {
        match part {
            Triangle::Lower => {
                for i in 0..n {
                    relax_row(a, diag, x, b, i);
                }
            }
            Triangle::Upper => {
                for i in (0..n).rev() {
                    relax_row(a, diag, x, b, i);
                }
            }
        }
    }
}

#[inline(always)]
fn relax_row(a: &CsrMatrix, diag: &[f64], x: &mut [f64], b: &[f64], i: usize) {
    let (cols, vals) = a.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        if j != i {
            s -= v * x[j];
        }
    }
    x[i] = s / diag[i];
}
