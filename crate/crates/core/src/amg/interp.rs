use super::coarsen::CfSplit;
use super::strength::StrengthGraph;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Direct interpolation.
///
/// C points copy their coarse value. An F point `i` interpolates from its
/// strong C dependencies `C_i`; negative and positive couplings are scaled
/// separately so the full off-diagonal row sum is distributed over `C_i`:
///
/// `w_ij = -alpha_i a_ij / a_ii` for `a_ij < 0`, with
/// `alpha_i = sum_{k != i} a_ik^- / sum_{k in C_i} a_ik^-` (and the same with
/// `beta_i` for positive entries). When `C_i` has no positive coupling the
/// positive row sum is lumped into the diagonal. For an all-negative
/// off-diagonal row this is exactly
/// `w_ij = -(sum_{k != i} a_ik / sum_{m in C_i} a_im) a_ij / a_ii`.
///
/// F points with no strong C dependency get an empty row.
pub fn build_interpolation(a: &CsrMatrix, s: &StrengthGraph, split: &CfSplit) -> Result<CsrMatrix> {
    let n = a.nrows();
    if split.len() != n || s.len() != n {
        return Err(Error::DimensionMismatch {
            op: "build_interpolation",
            expected: n,
            found: split.len(),
        });
    }
    let cnum = split.coarse_numbering();
    let nc = split.coarse_count();

    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);

    // marks strong C dependencies of the current row
    let mut is_ci = vec![false; n];
    for i in 0..n {
        if let Some(c) = cnum[i] {
            cols.push(c);
            vals.push(1.0);
            offsets.push(cols.len());
            continue;
        }
        let strong_c: Vec<usize> = s
            .depends_on(i)
            .iter()
            .copied()
            .filter(|&j| cnum[j].is_some())
            .collect();
        if strong_c.is_empty() {
            offsets.push(cols.len());
            continue;
        }
        for &j in &strong_c {
            is_ci[j] = true;
        }

        let (rc, rv) = a.row(i);
        let mut diag = 0.0;
        let (mut neg_all, mut pos_all, mut neg_c, mut pos_c) = (0.0, 0.0, 0.0, 0.0);
        for (&j, &v) in rc.iter().zip(rv) {
            if j == i {
                diag = v;
                continue;
            }
            if v < 0.0 {
                neg_all += v;
                if is_ci[j] {
                    neg_c += v;
                }
            } else {
                pos_all += v;
                if is_ci[j] {
                    pos_c += v;
                }
            }
        }
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        let alpha = if neg_c != 0.0 { neg_all / neg_c } else { 0.0 };
        let beta = if pos_c != 0.0 {
            pos_all / pos_c
        } else {
            diag += pos_all;
            0.0
        };
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }

        // rows of A are sorted and cnum is monotone, so output stays sorted
        for (&j, &v) in rc.iter().zip(rv) {
            if j == i || !is_ci[j] {
                continue;
            }
            let scale = if v < 0.0 { alpha } else { beta };
            cols.push(cnum[j].unwrap());
            vals.push(-scale * v / diag);
        }
        for &j in &strong_c {
            is_ci[j] = false;
        }
        offsets.push(cols.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(n, nc, offsets, cols, vals))
}

/// Extended+i interpolation.
///
/// The interpolatory set of an F point `i` is its strong C dependencies plus
/// the strong C dependencies of its strong F dependencies. Each strong F
/// neighbour `k` distributes `a_ik` over that set (and back onto `i`) in
/// proportion to its opposite-sign couplings `ā_kl`; weak couplings are
/// lumped into the diagonal:
///
/// `w_ij = -(a_ij + sum_k a_ik ā_kj / d_k) / ã_ii`,
/// `d_k = sum_{l in Ĉ_i ∪ {i}} ā_kl`,
/// `ã_ii = a_ii + sum_weak a_in + sum_k a_ik ā_ki / d_k`.
pub fn build_extended_interpolation(
    a: &CsrMatrix,
    s: &StrengthGraph,
    split: &CfSplit,
) -> Result<CsrMatrix> {
    let n = a.nrows();
    if split.len() != n || s.len() != n {
        return Err(Error::DimensionMismatch {
            op: "build_extended_interpolation",
            expected: n,
            found: split.len(),
        });
    }
    let cnum = split.coarse_numbering();
    let nc = split.coarse_count();
    let diag = a.diagonal();

    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);

    // in_hat[j] == i marks j as interpolatory for row i; strong_f likewise
    let mut in_hat = vec![usize::MAX; n];
    let mut strong_f = vec![usize::MAX; n];
    let mut acc = vec![0.0f64; n];
    let mut hat: Vec<usize> = Vec::new();

    for i in 0..n {
        if let Some(c) = cnum[i] {
            cols.push(c);
            vals.push(1.0);
            offsets.push(cols.len());
            continue;
        }
        hat.clear();
        let push = |j: usize, hat: &mut Vec<usize>, in_hat: &mut [usize], acc: &mut [f64]| {
            if in_hat[j] != i {
                in_hat[j] = i;
                acc[j] = 0.0;
                hat.push(j);
            }
        };
        for &j in s.depends_on(i) {
            if cnum[j].is_some() {
                push(j, &mut hat, &mut in_hat, &mut acc);
            } else {
                strong_f[j] = i;
                for &l in s.depends_on(j) {
                    if cnum[l].is_some() {
                        push(l, &mut hat, &mut in_hat, &mut acc);
                    }
                }
            }
        }
        if hat.is_empty() {
            offsets.push(cols.len());
            continue;
        }

        if diag[i] == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        let mut a_ii = diag[i];
        let (rc, rv) = a.row(i);
        for (&j, &v) in rc.iter().zip(rv) {
            if j == i || strong_f[j] == i {
                continue;
            }
            if in_hat[j] == i {
                acc[j] += v;
            } else {
                a_ii += v;
            }
        }
        for (&k, &a_ik) in rc.iter().zip(rv) {
            if k == i || strong_f[k] != i {
                continue;
            }
            let sign_k = diag[k].signum();
            let bar = |v: f64| if v.signum() != sign_k { v } else { 0.0 };
            let (kc, kv) = a.row(k);
            let d_k: f64 = kc
                .iter()
                .zip(kv)
                .filter(|(&l, _)| l == i || in_hat[l] == i)
                .map(|(_, &v)| bar(v))
                .sum();
            if d_k == 0.0 {
                a_ii += a_ik;
                continue;
            }
            for (&l, &v) in kc.iter().zip(kv) {
                if l == i {
                    a_ii += a_ik * bar(v) / d_k;
                } else if in_hat[l] == i {
                    acc[l] += a_ik * bar(v) / d_k;
                }
            }
        }
        if a_ii == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        // fine order matches coarse order because the numbering is monotone
        hat.sort_unstable();
        for &j in &hat {
            cols.push(cnum[j].unwrap());
            vals.push(-acc[j] / a_ii);
        }
        offsets.push(cols.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(n, nc, offsets, cols, vals))
}
