//! Compressed sparse row storage for real symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix in CSR form. Both triangles are stored and every row
/// has its column indices sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSymmetric {
    order: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Assembles from `(row, col, value)` triplets. Entries for the same
    /// position are summed; each off-diagonal entry must be given for both
    /// triangles or via [`SparseSymmetric::from_upper_triplets`].
    pub fn from_triplets(order: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; order + 1];
        for &(r, c, _) in triplets {
            if r >= order || c >= order {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a matrix of order {order}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..order {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0u32; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c as u32;
            vals[next[r]] = v;
            next[r] += 1;
        }
        // Sort within rows and merge duplicates.
        let mut row_ptr = vec![0usize; order + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut scratch: Vec<(u32, f64)> = Vec::new();
        for r in 0..order {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|e| e.0);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        let m = SparseSymmetric { order, row_ptr, col_idx, values };
        if !m.is_symmetric() {
            return Err(Error::InvalidArgument("triplets do not describe a symmetric matrix".into()));
        }
        Ok(m)
    }

    /// Assembles from triplets of the upper triangle (`row <= col`),
    /// mirroring off-diagonal entries.
    pub fn from_upper_triplets(order: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full = Vec::with_capacity(2 * triplets.len());
        for &(r, c, v) in triplets {
            full.push((r, c, v));
            if r != c {
                full.push((c, r, v));
            }
        }
        SparseSymmetric::from_triplets(order, &full)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument("dense matrix is not square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseSymmetric::from_triplets(n, &t)
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        SparseSymmetric {
            order: diag.len(),
            row_ptr: (0..=diag.len()).collect(),
            col_idx: (0..diag.len() as u32).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().map(|&c| c as usize).zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Exact entrywise symmetry check.
    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.order) {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *out = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.order];
        self.matvec(x, &mut y);
        y
    }

    /// Largest Gershgorin disc edge, an upper bound on every eigenvalue's
    /// magnitude.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.order)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Lower end of the Gershgorin discs.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.order)
            .map(|r| {
                let mut d = 0.0;
                let mut off = 0.0;
                for (c, v) in self.row(r) {
                    if c == r {
                        d = v;
                    } else {
                        off += v.abs();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Principal submatrix on the rows/columns with `keep[i]` set.
    pub fn principal_submatrix(&self, keep: &[bool]) -> SparseSymmetric {
        let mut new_index = vec![u32::MAX; self.order];
        let mut next = 0u32;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_index[i] = next;
                next += 1;
            }
        }
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in (0..self.order).filter(|&r| keep[r]) {
            for (c, v) in self.row(r) {
                if new_index[c] != u32::MAX {
                    col_idx.push(new_index[c]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymmetric { order: next as usize, row_ptr, col_idx, values }
    }

    /// `A - sigma I` with the diagonal made explicit.
    pub fn shifted(&self, sigma: f64) -> SparseSymmetric {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.order);
        for r in 0..self.order {
            for (c, v) in self.row(r) {
                triplets.push((r, c, v));
            }
            triplets.push((r, r, -sigma));
        }
        SparseSymmetric::from_triplets(self.order, &triplets).expect("shift preserves symmetry")
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.order;
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for (c, v) in self.row(r) {
                a[r * n + c] = v;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SparseSymmetric {
        SparseSymmetric::from_dense(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn triplet_assembly_merges_duplicates() {
        let m = SparseSymmetric::from_upper_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (0, 1, -1.0)])
            .unwrap();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        assert!(SparseSymmetric::from_triplets(2, &[(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn matvec_of_path() {
        let y = path3().mul(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn submatrix_and_shift() {
        let m = path3();
        let sub = m.principal_submatrix(&[true, false, true]);
        assert_eq!(sub.to_dense(), vec![1.0, 0.0, 0.0, 1.0]);
        let s = m.shifted(2.0);
        assert_eq!(s.get(1, 1), 0.0);
        assert_eq!(s.get(0, 0), -1.0);
        assert_eq!(m.gershgorin_bound(), 4.0);
        assert_eq!(m.gershgorin_lower(), 0.0);
    }
}
