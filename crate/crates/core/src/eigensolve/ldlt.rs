//! Sparse `LDL^T` factorization without pivoting, used for inertia counts
//! and shift-invert solves.
//!
//! The symbolic phase (fill-reducing ordering, elimination tree, column
//! counts) depends only on the sparsity pattern and is shared by every
//! shift. The numeric phase is an up-looking row-by-row factorization.

use crate::error::{Error, Result};
use crate::sparse::SparseSymmetric;

const NONE: usize = usize::MAX;

/// Pattern analysis of `A` reused across shifts `A - sigma I`.
#[derive(Debug, Clone)]
pub struct Symbolic {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// Upper triangle of `P A P^T` in CSC form; `src` maps each entry to its
    /// position in the original CSR value array, `diag_pos` gives the slot
    /// of each diagonal entry.
    up_p: Vec<usize>,
    up_i: Vec<usize>,
    src: Vec<usize>,
    diag_pos: Vec<usize>,
    etree: Vec<usize>,
    lnz: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Factor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Symbolic {
    pub fn analyze(matrix: &SparseSymmetric) -> Result<Self> {
        let n = matrix.order();
        let perm = if n == 0 {
            Vec::new()
        } else {
            // Pattern of A with an explicit diagonal.
            let mut ap = vec![0usize; n + 1];
            let mut ai = Vec::with_capacity(matrix.nnz() + n);
            for r in 0..n {
                let mut has_diag = false;
                for (c, _) in matrix.row(r) {
                    if c == r {
                        has_diag = true;
                    }
                }
                let mut cols: Vec<usize> = matrix.row(r).map(|(c, _)| c).collect();
                if !has_diag {
                    cols.push(r);
                    cols.sort_unstable();
                }
                ai.extend(cols);
                ap[r + 1] = ai.len();
            }
            let (p, _pinv, _info) = amd::order(n, &ap, &ai, &amd::Control::default())
                .map_err(|s| Error::InvalidArgument(format!("ordering failed: {s:?}")))?;
            p
        };
        let mut pinv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }

        // Upper triangle of P A P^T by columns, with an explicit diagonal.
        let mut counts = vec![0usize; n + 1];
        let rp = matrix.row_ptr();
        let ci = matrix.col_idx();
        let mut has_diag = vec![false; n];
        for r in 0..n {
            for k in rp[r]..rp[r + 1] {
                let c = ci[k] as usize;
                let (i, j) = (pinv[r], pinv[c]);
                if i <= j {
                    counts[j + 1] += 1;
                }
                if r == c {
                    has_diag[r] = true;
                }
            }
        }
        for old in 0..n {
            if !has_diag[old] {
                counts[pinv[old] + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let up_p = counts.clone();
        let mut next = counts;
        let total = up_p[n];
        let mut up_i = vec![0usize; total];
        let mut src = vec![NONE; total];
        let mut diag_pos = vec![NONE; n];
        for r in 0..n {
            for k in rp[r]..rp[r + 1] {
                let c = ci[k] as usize;
                let (i, j) = (pinv[r], pinv[c]);
                if i <= j {
                    up_i[next[j]] = i;
                    src[next[j]] = k;
                    if i == j {
                        diag_pos[j] = next[j];
                    }
                    next[j] += 1;
                }
            }
        }
        for old in 0..n {
            if !has_diag[old] {
                let j = pinv[old];
                up_i[next[j]] = j;
                diag_pos[j] = next[j];
                next[j] += 1;
            }
        }

        // Elimination tree and column counts of L.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &up_i[up_p[j]..up_p[j + 1]] {
                let mut i = row;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }

        Ok(Symbolic { n, perm, up_p, up_i, src, diag_pos, etree, lnz })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Nonzeros in the strict lower triangle of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.lnz.iter().sum()
    }

    /// Numeric factorization of `A - sigma I`. A pivot smaller than
    /// `pivot_tol` in magnitude is reported as breakdown.
    pub fn factor(&self, matrix: &SparseSymmetric, sigma: f64, pivot_tol: f64) -> Result<Factor> {
        let n = self.n;
        let vals = matrix.values();
        // Values of the permuted upper triangle.
        let mut ax: Vec<f64> =
            self.src.iter().map(|&k| if k == NONE { 0.0 } else { vals[k] }).collect();
        for &p in &self.diag_pos {
            ax[p] -= sigma;
        }

        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + self.lnz[i];
        }
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![0f64; lp[n]];
        let mut d = vec![0f64; n];
        let mut dinv = vec![0f64; n];
        let mut y_vals = vec![0f64; n];
        let mut y_marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = lp[..n].to_vec();

        for k in 0..n {
            let mut nnz_y = 0;
            d[k] = 0.0;
            for p in self.up_p[k]..self.up_p[k + 1] {
                let b = self.up_i[p];
                if b == k {
                    d[k] = ax[p];
                    continue;
                }
                y_vals[b] = ax[p];
                if !y_marked[b] {
                    y_marked[b] = true;
                    elim[0] = b;
                    let mut n_elim = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_marked[next] {
                            break;
                        }
                        y_marked[next] = true;
                        elim[n_elim] = next;
                        n_elim += 1;
                        next = self.etree[next];
                    }
                    while n_elim > 0 {
                        n_elim -= 1;
                        y_idx[nnz_y] = elim[n_elim];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let slot = next_space[c];
                let yc = y_vals[c];
                for j in lp[c]..slot {
                    y_vals[li[j]] -= lx[j] * yc;
                }
                li[slot] = k;
                let l = yc * dinv[c];
                lx[slot] = l;
                d[k] -= yc * l;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_marked[c] = false;
            }
            if !(d[k].abs() > pivot_tol) {
                return Err(Error::FactorizationBreakdown { sigma, attempts: 1 });
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Factor { n, perm: self.perm.clone(), lp, li, lx, d })
    }
}

impl Factor {
    /// Number of negative pivots, equal to the number of eigenvalues below
    /// the shift by Sylvester's law of inertia.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Solves `(A - sigma I) x = b`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        // L y = b: L is stored by columns.
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    y[self.li[p]] -= self.lx[p] * yj;
                }
            }
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s;
        }
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
    }
}

/// Relative size below which a pivot counts as a breakdown.
pub const PIVOT_TOL: f64 = 1e-13;

/// Tries `A - sigma I`, then shifts perturbed by `+/- 1e-12 * scale`
/// alternately, up to three retries.
pub fn factor_with_retry(
    symbolic: &Symbolic,
    matrix: &SparseSymmetric,
    sigma: f64,
    scale: f64,
) -> Result<(Factor, f64)> {
    let pivot_tol = PIVOT_TOL * scale;
    let step = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let shifts = [sigma, sigma + step, sigma - step, sigma + 2.0 * step];
    for &s in &shifts {
        if let Ok(f) = symbolic.factor(matrix, s, pivot_tol) {
            return Ok((f, s));
        }
    }
    Err(Error::FactorizationBreakdown { sigma, attempts: shifts.len() })
}

/// Number of eigenvalues of `matrix` strictly below `sigma`.
pub fn inertia_count(matrix: &SparseSymmetric, sigma: f64) -> Result<usize> {
    let symbolic = Symbolic::analyze(matrix)?;
    let scale = matrix.gershgorin_bound().max(1.0);
    let (f, _) = factor_with_retry(&symbolic, matrix, sigma, scale)?;
    Ok(f.negative_pivots())
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
    fn path_inertia() {
        let m = path3();
        assert_eq!(inertia_count(&m, 2.0).unwrap(), 2);
        assert_eq!(inertia_count(&m, 0.5).unwrap(), 1);
        assert_eq!(inertia_count(&m, -1.0).unwrap(), 0);
        assert_eq!(inertia_count(&m, 10.0).unwrap(), 3);
    }

    #[test]
    fn exact_eigenvalue_is_perturbed() {
        // sigma = 1 is an eigenvalue; a perturbed shift lands on either side.
        let c = inertia_count(&path3(), 1.0).unwrap();
        assert!(c == 1 || c == 2);
    }

    #[test]
    fn solve_recovers_rhs() {
        let m = path3();
        let s = Symbolic::analyze(&m).unwrap();
        let f = s.factor(&m, -0.5, 1e-14).unwrap();
        let b = [1.0, -2.0, 0.5];
        let mut x = [0.0; 3];
        f.solve(&b, &mut x);
        let ax = m.shifted(-0.5).mul(&x);
        for (a, b) in ax.iter().zip(b) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
