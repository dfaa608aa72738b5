//! Compressed-row storage for real symmetric operators.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real symmetric matrix in compressed sparse row form.
///
/// Column indices within each row are sorted and unique. Construction goes
/// through [`SparseHamiltonian::from_triplets`], which sums duplicates and
/// rejects non-finite values; symmetry is the caller's responsibility and is
/// checked by [`SparseHamiltonian::is_symmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite entry {v} at ({r}, {c})"
                )));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub(crate) fn from_csr_parts(
        dim: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), dim + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// Stored entry at `(r, c)`, zero when absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: out.len(),
            });
        }
        self.matvec(v, out);
        Ok(())
    }

    /// Unchecked matvec used inside the Krylov loop.
    #[inline]
    pub(crate) fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut acc = 0.0;
            for (&c, &a) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                acc += a * v[c];
            }
            *o = acc;
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        for (_, c, v) in self.triplets() {
            col[c] += v.abs();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(r, c, v)| self.get(c, r) == v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// Principal submatrix on `indices` (which must be strictly increasing).
    ///
    /// Entries coupling `indices` to the complement are dropped, so this is
    /// only an exact restriction when the selected block is invariant.
    pub fn restrict(&self, indices: &[usize]) -> SparseHamiltonian {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            local[i] = k;
        }
        let mut row_ptr = Vec::with_capacity(indices.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &r in indices {
            for (c, v) in self.row(r) {
                let lc = local[c];
                if lc != usize::MAX {
                    col_idx.push(lc);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseHamiltonian::from_csr_parts(indices.len(), row_ptr, col_idx, values)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Linear combination `self + scale * other` on the union sparsity pattern.
    pub fn add_scaled(&self, other: &SparseHamiltonian, scale: f64) -> Result<SparseHamiltonian> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let entries: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, scale * v)))
            .collect();
        SparseHamiltonian::from_triplets(self.dim, &entries)
    }

    /// Writes `row col value` lines after a caller-supplied header line.
    pub fn write_triplets<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "{header}")?;
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
            .collect()
    }

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let h = SparseHamiltonian::from_triplets(
            3,
            &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 0.5), (2, 0, 1.5), (1, 1, -1.0)],
        )
        .unwrap();
        assert_eq!(h.nnz(), 4);
        assert_eq!(h.get(0, 2), 1.5);
        assert_eq!(h.row(0).map(|(c, _)| c).collect::<Vec<_>>(), vec![0, 2]);
        assert!(h.is_symmetric());
    }

    #[test]
    fn diagonal_matvec_on_unit_vector() {
        let h = SparseHamiltonian::from_triplets(3, &[(0, 0, 3.0), (1, 1, 1.0), (2, 2, 2.0)])
            .unwrap();
        assert_eq!(h.apply(&[1.0, 0.0, 0.0]).unwrap(), vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SparseHamiltonian::from_triplets(2, &[(0, 2, 1.0)]).is_err());
        assert!(SparseHamiltonian::from_triplets(2, &[(0, 0, f64::NAN)]).is_err());
        let h = SparseHamiltonian::from_triplets(2, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            h.apply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn restrict_keeps_block() {
        let h = SparseHamiltonian::from_triplets(
            3,
            &[(0, 0, 1.0), (0, 2, 4.0), (2, 0, 4.0), (1, 1, 5.0), (2, 2, 3.0)],
        )
        .unwrap();
        let b = h.restrict(&[0, 2]);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 4.0, 3.0]));
    }

    #[test]
    fn matches_dense_multiply() {
        let entries = [
            (0, 0, 1.0),
            (0, 1, -2.0),
            (1, 0, -2.0),
            (1, 3, 0.25),
            (3, 1, 0.25),
            (2, 2, 7.0),
        ];
        let h = SparseHamiltonian::from_triplets(4, &entries).unwrap();
        let v = [0.3, -1.1, 2.0, 0.7];
        let dense = dense_matvec(&h.to_dense(), &v);
        assert_eq!(h.apply(&v).unwrap(), dense);
        assert_eq!(h.norm1(), 7.0);
    }
}
