//! Symmetric tridiagonal eigenproblems.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Implicit-shift QL on the tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i+1`; `e.len() == d.len()`,
/// the last entry is scratch). On return `d` holds the eigenvalues in no
/// particular order.
///
/// When `z` is given it must hold `rows` rows of length `n` (row-major);
/// the plane rotations are applied to those rows, so passing the identity
/// yields eigenvectors as columns and passing only selected rows yields
/// the matching components.
pub fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<(&mut [f64], usize)>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l, iterations: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some((z, rows)) = z.as_mut() {
                    for k in 0..*rows {
                        let row = &mut z[k * n..(k + 1) * n];
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a tridiagonal matrix, ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..off.len().min(n)].copy_from_slice(&off[..off.len().min(n)]);
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) and eigenvectors (columns of a row-major `n x n`
/// matrix, in the same order) of a tridiagonal matrix.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..off.len().min(n)].copy_from_slice(&off[..off.len().min(n)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some((&mut z, n)))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for r in 0..n {
        for (new, &old) in order.iter().enumerate() {
            vectors[r * n + new] = z[r * n + old];
        }
    }
    Ok((values, vectors))
}

/// Solves `(T - shift I) x = b` for tridiagonal `T` by Gaussian elimination
/// with partial pivoting. Exactly singular pivots are nudged so that inverse
/// iteration still proceeds.
pub fn tridiagonal_shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let tiny = f64::EPSILON * diag.iter().chain(off).fold(1e-300f64, |m, v| m.max(v.abs()));
    // Row i holds entries at columns i, i+1, i+2 after pivoting.
    let mut a0: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut a1: Vec<f64> = (0..n).map(|i| if i + 1 < n { off[i] } else { 0.0 }).collect();
    let mut a2 = vec![0.0; n];
    let mut sub: Vec<f64> = (0..n).map(|i| if i + 1 < n { off[i] } else { 0.0 }).collect();
    let mut x = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        // Candidate pivots: (i, i) and the subdiagonal (i+1, i).
        if sub[i].abs() > a0[i].abs() {
            // Swap rows i and i+1.
            let (r0, r1, r2) = (a0[i], a1[i], a2[i]);
            a0[i] = sub[i];
            a1[i] = a0[i + 1];
            a2[i] = a1[i + 1];
            a0[i + 1] = r1;
            a1[i + 1] = r2;
            sub[i] = r0;
            x.swap(i, i + 1);
        }
        if a0[i].abs() < tiny {
            a0[i] = tiny;
        }
        let m = sub[i] / a0[i];
        a0[i + 1] -= m * a1[i];
        if i + 2 < n {
            a1[i + 1] -= m * a2[i];
        }
        x[i + 1] -= m * x[i];
    }
    if a0[n - 1].abs() < tiny {
        a0[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        if i + 1 < n {
            v -= a1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= a2[i] * x[i + 2];
        }
        x[i] = v / a0[i];
    }
    x
}

/// Eigenvector of a tridiagonal matrix for an accurately known eigenvalue,
/// by inverse iteration.
pub fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], lambda: f64, seed: u64) -> Vec<f64> {
    let n = diag.len();
    let mut rng = SplitMix64::new(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    for _ in 0..3 {
        x = tridiagonal_shifted_solve(diag, off, lambda, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Small deterministic generator for start vectors.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
