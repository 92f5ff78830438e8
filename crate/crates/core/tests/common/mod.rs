//! Dense reference implementations shared by the integration tests. Nothing
//! here calls into the crate's sparse kernels or solver.

#![allow(dead_code)]

use amgtune::amg::AmgHierarchy;
use amgtune::sparse::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Reads entries through the public triplet view only.
    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut d = Self::zeros(a.nrows(), a.ncols());
        for (i, j, v) in a.triplets() {
            d.data[i * a.ncols() + j] += v;
        }
        d
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, b: &Dense) -> Dense {
        assert_eq!(self.cols, b.rows);
        let mut c = Dense::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.at(i, k);
                if x == 0.0 {
                    continue;
                }
                for j in 0..b.cols {
                    c.data[i * b.cols + j] += x * b.at(k, j);
                }
            }
        }
        c
    }

    pub fn t(&self) -> Dense {
        let mut t = Dense::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.at(i, j);
            }
        }
        t
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn rel_diff(&self, other: &Dense) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let d = self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        d / other.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.rows;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap();
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    x
}

/// `x += T^{-1} (b - A x)` with `T` the lower (or upper) triangle of `A`.
pub fn triangular_correction(a: &Dense, x: &mut [f64], b: &[f64], lower: bool) {
    let n = a.rows;
    let ax = a.apply(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
    let mut d = vec![0.0; n];
    let order: Vec<usize> = if lower { (0..n).collect() } else { (0..n).rev().collect() };
    for &i in &order {
        let mut s = r[i];
        for j in 0..n {
            let inside = if lower { j < i } else { j > i };
            if inside {
                s -= a.at(i, j) * d[j];
            }
        }
        d[i] = s / a.at(i, i);
    }
    for i in 0..n {
        x[i] += d[i];
    }
}

/// Dense V-cycle on the hierarchy's fine operator and prolongations, with
/// coarse operators rebuilt densely as `P^T A P` and an exact coarsest solve.
pub struct DenseCycle {
    pub ops: Vec<Dense>,
    pub prolong: Vec<Dense>,
    pub pre: usize,
    pub post: usize,
}

impl DenseCycle {
    pub fn from_hierarchy(h: &AmgHierarchy) -> Self {
        let mut ops = vec![Dense::from_csr(h.fine_matrix())];
        let mut prolong = Vec::new();
        for lvl in &h.levels {
            let p = Dense::from_csr(&lvl.p);
            let a = ops.last().unwrap();
            let ac = p.t().mul(a).mul(&p);
            prolong.push(p);
            ops.push(ac);
        }
        Self {
            ops,
            prolong,
            pre: h.opts.pre_sweeps,
            post: h.opts.post_sweeps,
        }
    }

    pub fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        let a = &self.ops[level];
        if level == self.prolong.len() {
            x.copy_from_slice(&gauss_solve(a, b));
            return;
        }
        for _ in 0..self.pre {
            triangular_correction(a, x, b, true);
        }
        let ax = a.apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
        let p = &self.prolong[level];
        let bc = p.t().apply(&r);
        let mut ec = vec![0.0; bc.len()];
        self.cycle(level + 1, &bc, &mut ec);
        let e = p.apply(&ec);
        for i in 0..x.len() {
            x[i] += e[i];
        }
        for _ in 0..self.post {
            triangular_correction(a, x, b, false);
        }
    }
}

/// Sparse SPD matrix of dimension `n`: a weighted graph Laplacian with
/// random negative couplings, a few positive ones, and a diagonal shift.
pub fn random_spd(seed: u64, n: usize) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let near = j - i <= 2;
            if near || rng.random::<f64>() < 0.06 {
                let w = rng.random_range(0.1..2.0);
                let v = if rng.random::<f64>() < 0.15 { w } else { -w };
                t.push((i, j, v));
                t.push((j, i, v));
                diag[i] += w;
                diag[j] += w;
            }
        }
    }
    for (i, d) in diag.into_iter().enumerate() {
        t.push((i, i, d + rng.random_range(0.01..0.5)));
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

pub fn laplace_1d(n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

pub fn rel_vec_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn random_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
