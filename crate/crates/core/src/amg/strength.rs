use super::options::check_theta;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Row-compressed adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl Adjacency {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn edge_count(&self) -> usize {
        self.indices.len()
    }

    /// Transposed relation: `j` lists `i` whenever `i` lists `j`.
    fn transposed(&self) -> Self {
        let n = self.len();
        let mut offsets = vec![0usize; n + 1];
        for &j in &self.indices {
            offsets[j + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        let mut next = offsets.clone();
        let mut indices = vec![0usize; self.indices.len()];
        for i in 0..n {
            for &j in self.row(i) {
                indices[next[j]] = i;
                next[j] += 1;
            }
        }
        Self { offsets, indices }
    }
}

/// Strong dependencies `S_i` and strong influences `S_i^T` of every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrengthGraph {
    pub strong: Adjacency,
    pub strong_transpose: Adjacency,
}

impl StrengthGraph {
    pub fn len(&self) -> usize {
        self.strong.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strong.edge_count() == 0
    }

    /// Points that `i` strongly depends on.
    pub fn depends_on(&self, i: usize) -> &[usize] {
        self.strong.row(i)
    }

    /// Points that strongly depend on `i`.
    pub fn influences(&self, i: usize) -> &[usize] {
        self.strong_transpose.row(i)
    }
}

/// `j` is a strong dependency of `i` when `|a_ij| >= theta * max_{k != i} |a_ik|`.
pub fn strength_graph(a: &CsrMatrix, theta: f64) -> Result<StrengthGraph> {
    check_theta(theta)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "strength_graph",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(a.nnz());
    offsets.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let max = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| j != i)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        if max > 0.0 {
            let cut = theta * max;
            for (&j, v) in cols.iter().zip(vals) {
                if j != i && v.abs() >= cut {
                    indices.push(j);
                }
            }
        }
        offsets.push(indices.len());
    }
    let strong = Adjacency { offsets, indices };
    let strong_transpose = strong.transposed();
    Ok(StrengthGraph {
        strong,
        strong_transpose,
    })
}
