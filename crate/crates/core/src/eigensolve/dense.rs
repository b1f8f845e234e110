//! Full symmetric eigendecomposition: Householder reduction to tridiagonal
//! form followed by implicit-shift QL.
//!
//! The matrix is held as a packed lower triangle. Each reduction step makes
//! one pass over the trailing block that both applies the previous rank-2
//! update and forms the next matrix-vector product, so the block is read
//! once per step instead of twice.

use crate::eigensolve::tridiag::{tql, tridiagonal_eigenvector};
use crate::error::{Error, Result};
use crate::sparse::SparseSymmetric;

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Result of the tridiagonal reduction, with the reflectors kept so that
/// tridiagonal eigenvectors can be mapped back.
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// Packed lower triangle; column `k` below the diagonal holds reflector `k`.
    packed: Vec<f64>,
    tau: Vec<f64>,
}

impl Tridiagonal {
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Applies `Q = H_0 H_1 ... H_{n-2}` to a tridiagonal-basis vector.
    pub fn back_transform(&self, y: &mut [f64]) {
        let n = self.order();
        for k in (0..n.saturating_sub(1)).rev() {
            let tau = self.tau[k];
            if tau == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            for i in k + 1..n {
                dot += self.packed[row_start(i) + k] * y[i];
            }
            let f = tau * dot;
            for i in k + 1..n {
                y[i] -= f * self.packed[row_start(i) + k];
            }
        }
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let j = 4 * c;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..n {
        s += a[j] * b[j];
    }
    s
}

pub fn tridiagonalize(matrix: &SparseSymmetric) -> Tridiagonal {
    let n = matrix.order();
    let mut a = vec![0.0f64; row_start(n)];
    for i in 0..n {
        for (j, v) in matrix.row(i) {
            if j <= i {
                a[row_start(i) + j] = v;
            }
        }
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut tau = vec![0.0; n.saturating_sub(1)];

    // Pending rank-2 update `A -= v w^T + w v^T`, valid on indices >= its start.
    let mut pv = vec![0.0f64; n];
    let mut pw = vec![0.0f64; n];
    let mut pending = false;
    let mut v = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];

    for k in 0..n {
        if pending {
            for i in k..n {
                a[row_start(i) + k] -= pv[i] * pw[k] + pw[i] * pv[k];
            }
        }
        diag[k] = a[row_start(k) + k];
        if k + 1 == n {
            break;
        }

        // Reflector annihilating column k below the subdiagonal.
        let x0 = a[row_start(k + 1) + k];
        let mut tail = 0.0;
        for i in k + 2..n {
            let x = a[row_start(i) + k];
            tail += x * x;
        }
        let t;
        if tail == 0.0 {
            off[k] = x0;
            t = 0.0;
            v[k + 1..].iter_mut().for_each(|x| *x = 0.0);
        } else {
            let norm = (x0 * x0 + tail).sqrt();
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            off[k] = alpha;
            v[k + 1] = x0 - alpha;
            for i in k + 2..n {
                v[i] = a[row_start(i) + k];
            }
            let vv = v[k + 1] * v[k + 1] + tail;
            t = 2.0 / vv;
            for i in k + 1..n {
                a[row_start(i) + k] = v[i];
            }
        }
        tau[k] = t;

        // Fused pass over the trailing block: apply the pending update,
        // then accumulate p = A v using both triangles of each row.
        p[k + 1..].iter_mut().for_each(|x| *x = 0.0);
        for i in k + 1..n {
            let start = row_start(i) + k + 1;
            let len = i - k;
            let row = &mut a[start..start + len];
            if pending {
                let (vi, wi) = (pv[i], pw[i]);
                let pws = &pw[k + 1..=i];
                let pvs = &pv[k + 1..=i];
                for j in 0..len {
                    row[j] -= vi * pws[j] + wi * pvs[j];
                }
            }
            if t != 0.0 {
                let xi = v[i];
                let off_len = len - 1;
                let s = dot(&row[..off_len], &v[k + 1..i]);
                let ps = &mut p[k + 1..i];
                for j in 0..off_len {
                    ps[j] += row[j] * xi;
                }
                p[i] += s + row[off_len] * xi;
            }
        }

        if t != 0.0 {
            for x in p[k + 1..].iter_mut() {
                *x *= t;
            }
            let half = 0.5 * t * dot(&p[k + 1..], &v[k + 1..]);
            for i in k + 1..n {
                pv[i] = v[i];
                pw[i] = p[i] - half * v[i];
            }
            pending = true;
        } else {
            pending = false;
        }
    }

    Tridiagonal { diag, off, packed: a, tau }
}

#[derive(Debug, Clone, Copy)]
pub struct DenseOptions {
    /// Largest order accepted.
    pub cap: usize,
    /// Number of eigenpairs whose residual is checked.
    pub residual_samples: usize,
    /// Residual tolerance relative to the Gershgorin bound on `||A||`.
    pub residual_tol: f64,
}

impl Default for DenseOptions {
    fn default() -> Self {
        DenseOptions { cap: 10_000, residual_samples: 3, residual_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct DenseResult {
    pub eigenvalues: Vec<f64>,
    /// Largest `||A v - lambda v|| / ||A||` over the sampled pairs.
    pub max_residual: f64,
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn dense_eigenvalues(matrix: &SparseSymmetric, opts: &DenseOptions) -> Result<DenseResult> {
    let n = matrix.order();
    if n > opts.cap {
        return Err(Error::CapExceeded { requested: n as u128, cap: opts.cap as u64 });
    }
    let tri = tridiagonalize(matrix);
    let mut d = tri.diag.clone();
    let mut e = tri.off.clone();
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);

    let norm = matrix.gershgorin_bound().max(f64::MIN_POSITIVE);
    let mut max_residual = 0.0f64;
    if n > 0 && opts.residual_samples > 0 {
        let samples = opts.residual_samples.min(n);
        for s in 0..samples {
            let idx = if samples == 1 { 0 } else { s * (n - 1) / (samples - 1) };
            let lambda = d[idx];
            let mut y = tridiagonal_eigenvector(&tri.diag, &tri.off, lambda, 0x5EED + idx as u64);
            tri.back_transform(&mut y);
            let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if ynorm == 0.0 || !ynorm.is_finite() {
                return Err(Error::NoConvergence { index: idx, iterations: 3 });
            }
            let ay = matrix.mul(&y);
            let r = ay
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt()
                / ynorm
                / norm;
            max_residual = max_residual.max(r);
            if r > opts.residual_tol {
                return Err(Error::NoConvergence { index: idx, iterations: 3 });
            }
        }
    }
    Ok(DenseResult { eigenvalues: d, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> SparseSymmetric {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        SparseSymmetric::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn path_of_three() {
        let m = SparseSymmetric::from_dense(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap();
        let r = dense_eigenvalues(&m, &DenseOptions::default()).unwrap();
        for (a, b) in r.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eight_cycle() {
        let r = dense_eigenvalues(&cycle(8), &DenseOptions::default()).unwrap();
        let s2 = 2f64.sqrt();
        let expect = [0.0, 2.0 - s2, 2.0 - s2, 2.0, 2.0, 2.0 + s2, 2.0 + s2, 4.0];
        for (a, b) in r.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{:?}", r.eigenvalues);
        }
    }

    #[test]
    fn order_one() {
        let r = dense_eigenvalues(&SparseSymmetric::diagonal_matrix(&[5.0]), &DenseOptions::default())
            .unwrap();
        assert_eq!(r.eigenvalues, vec![5.0]);
    }

    #[test]
    fn cap_is_enforced() {
        let opts = DenseOptions { cap: 4, ..DenseOptions::default() };
        assert!(matches!(
            dense_eigenvalues(&cycle(8), &opts),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn large_cycle_matches_circulant_formula() {
        let n = 200;
        let r = dense_eigenvalues(&cycle(n), &DenseOptions::default()).unwrap();
        let mut expect: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in r.eigenvalues.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.max_residual < 1e-10);
    }
}
