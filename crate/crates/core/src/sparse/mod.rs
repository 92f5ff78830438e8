//! Compressed sparse row storage and the kernels the solver is built from.
//!
//! Every [`CsrMatrix`] keeps its column indices sorted and unique within each
//! row. Explicit zeros survive construction; call [`CsrMatrix::prune`] to drop
//! them.

mod mm;
pub(crate) mod ops;

pub use mm::{
    read_matrix_market, read_matrix_market_from, read_vector, read_vector_from, write_matrix_market,
    write_matrix_market_to, write_vector, write_vector_to, MmSymmetry,
};
pub use ops::{matmul, spmv, transpose, tri_sweep, triple_product, Triangle};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, then sort and merge each row
        let mut next = counts.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for r in 0..nrows {
            let row = &mut bucket[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            let start = col_indices.len();
            for &(c, v) in row.iter() {
                if col_indices.len() > start && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Wraps raw CSR arrays after checking the structural invariants.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Trusted constructor for kernels that produce sorted rows by construction.
    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(col_indices.len(), values.len());
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a CSR matrix from a dense row-major slice, keeping only nonzeros.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                op: "from_dense",
                expected: nrows * ncols,
                found: data.len(),
            });
        }
        let mut trip = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = data[i * ncols + j];
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    /// Checks the three structural invariants of the format.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("malformed CSR: {msg}")));
        if self.row_offsets.len() != self.nrows + 1 {
            return bad("row_offsets has wrong length");
        }
        if self.row_offsets[0] != 0 || self.row_offsets[self.nrows] != self.values.len() {
            return bad("row_offsets endpoints");
        }
        if self.col_indices.len() != self.values.len() {
            return bad("col_indices and values differ in length");
        }
        for i in 0..self.nrows {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if s > e {
                return bad("row_offsets decreasing");
            }
            let cols = &self.col_indices[s..e];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices not strictly increasing");
            }
            if cols.iter().any(|&c| c >= self.ncols) {
                return bad("column index out of range");
            }
        }
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Main diagonal; missing entries read as zero.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    /// Drops stored entries whose magnitude is `<= tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if v.abs() > tol {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_parts_unchecked(self.nrows, self.ncols, row_offsets, col_indices, values)
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= c);
        m
    }

    /// True when `|a_ij - a_ji| <= tol * max|a|` for every stored entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.triplets()
            .all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol * scale.max(f64::MIN_POSITIVE))
    }
}
