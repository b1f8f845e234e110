//! Lanczos iteration with full reorthogonalization.

use crate::eigensolve::ldlt::{factor_with_retry, Symbolic};
use crate::eigensolve::tridiag::{tridiagonal_eigen, SplitMix64};
use crate::error::{Error, Result};
use crate::sparse::SparseSymmetric;

/// Krylov basis and the projected tridiagonal matrix.
pub(crate) struct Krylov {
    n: usize,
    pub basis: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    /// `beta[j]` couples basis vectors `j` and `j+1`; zero after a restart.
    pub beta: Vec<f64>,
    /// Norm of the residual after the last step.
    pub last_beta: f64,
    next: Vec<f64>,
    rng: SplitMix64,
}

pub(crate) struct Ritz {
    pub theta: f64,
    /// Residual norm bound `|beta_m s_m|` in operator units.
    pub residual: f64,
    pub coords: Vec<f64>,
}

impl Krylov {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        normalize(&mut v);
        Krylov {
            n,
            basis: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            last_beta: 0.0,
            next: v,
            rng,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn exhausted(&self) -> bool {
        self.basis.len() >= self.n
    }

    /// Adds up to `steps` basis vectors using `op` (`y = Op x`).
    /// `breakdown_tol` is the residual norm below which the Krylov space is
    /// treated as invariant and a fresh random direction is started.
    pub fn extend(
        &mut self,
        steps: usize,
        breakdown_tol: f64,
        op: &mut dyn FnMut(&[f64], &mut [f64]),
    ) {
        let mut w = vec![0.0; self.n];
        for _ in 0..steps {
            if self.exhausted() {
                break;
            }
            let q = std::mem::take(&mut self.next);
            op(&q, &mut w);
            let a = dot(&q, &w);
            axpy(-a, &q, &mut w);
            if let (Some(prev), Some(&b)) = (self.basis.last(), self.beta.last()) {
                axpy(-b, prev, &mut w);
            }
            self.basis.push(q);
            self.alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for v in &self.basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let mut b = norm(&w);
            if b <= breakdown_tol && !self.exhausted() {
                // Invariant subspace: restart with a random direction
                // orthogonal to the basis.
                b = 0.0;
                let mut fresh = vec![0.0; self.n];
                for attempt in 0..8 {
                    fresh.iter_mut().for_each(|x| *x = self.rng.next_f64() - 0.5);
                    for _ in 0..2 {
                        for v in &self.basis {
                            let c = dot(v, &fresh);
                            axpy(-c, v, &mut fresh);
                        }
                    }
                    if norm(&fresh) > 1e-8 || attempt == 7 {
                        break;
                    }
                }
                normalize(&mut fresh);
                w.copy_from_slice(&fresh);
            } else {
                let inv = 1.0 / b;
                w.iter_mut().for_each(|x| *x *= inv);
            }
            self.beta.push(b);
            self.last_beta = b;
            self.next = w.clone();
        }
    }

    /// Ritz values of the current projection with residual bounds.
    pub fn ritz(&self) -> Result<Vec<Ritz>> {
        let m = self.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        let (vals, vecs) = tridiagonal_eigen(&self.alpha, &self.beta[..m - 1])?;
        let tail = if self.exhausted() { 0.0 } else { self.last_beta };
        Ok((0..m)
            .map(|i| Ritz {
                theta: vals[i],
                residual: (tail * vecs[(m - 1) * m + i]).abs(),
                coords: (0..m).map(|r| vecs[r * m + i]).collect(),
            })
            .collect())
    }

    pub fn ritz_vector(&self, coords: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (v, &c) in self.basis.iter().zip(coords) {
            axpy(c, v, &mut y);
        }
        y
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let n = a.len();
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

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// True residual `||A y - lambda y|| / ||y||`.
pub(crate) fn residual(matrix: &SparseSymmetric, y: &[f64], lambda: f64) -> f64 {
    let ay = matrix.mul(y);
    let r: f64 = ay.iter().zip(y).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
    r / norm(y).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Relative residual tolerance for accepting a Ritz pair.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-10, seed: 0xC0FFEE }
    }
}

/// Groups sorted values closer than `tol` and returns one representative
/// per group (the mean).
pub(crate) fn cluster(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for &v in sorted {
        if let Some(&last) = group.last() {
            if v - last > tol {
                out.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(v);
    }
    if !group.is_empty() {
        out.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    out
}

/// The `k` smallest or largest eigenvalues, with multiplicity.
///
/// Lanczos only sees one copy of a repeated eigenvalue, so multiplicities
/// are read off inertia counts just above and below each converged value.
/// Returned in the order requested: ascending for `Smallest`, descending for
/// `Largest`.
pub fn lanczos_extremal(
    matrix: &SparseSymmetric,
    k: usize,
    which: Which,
    opts: &LanczosOptions,
) -> Result<Vec<f64>> {
    let n = matrix.order();
    if k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenvalues of an order-{n} matrix")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let scale = matrix.gershgorin_bound().max(f64::MIN_POSITIVE);
    let tol = opts.tol * scale;
    let symbolic = Symbolic::analyze(matrix)?;
    let count_below = |sigma: f64| -> Result<usize> {
        Ok(factor_with_retry(&symbolic, matrix, sigma, scale)?.0.negative_pivots())
    };

    let mut krylov = Krylov::new(n, opts.seed);
    let mut op = |x: &[f64], y: &mut [f64]| matrix.matvec(x, y);
    let mut target = n.min((2 * k + 20).max(30));
    let mut stalled_rounds = 0;
    loop {
        let steps = target - krylov.len();
        krylov.extend(steps, 1e-12 * scale, &mut op);
        let mut ritz = krylov.ritz()?;
        if which == Which::Largest {
            ritz.reverse();
        }
        // Accept the leading run of converged Ritz values.
        let mut accepted: Vec<f64> = Vec::new();
        for r in &ritz {
            if r.residual > tol {
                break;
            }
            let y = krylov.ritz_vector(&r.coords);
            if residual(matrix, &y, r.theta) > 100.0 * tol {
                break;
            }
            accepted.push(r.theta);
            // Enough distinct values cover k eigenvalues at the very least.
            if accepted.len() >= k {
                break;
            }
        }
        if !accepted.is_empty() {
            let mut sorted = accepted.clone();
            sorted.sort_by(f64::total_cmp);
            let values = cluster(&sorted, 1e3 * tol);
            let values: Vec<f64> = match which {
                Which::Smallest => values,
                Which::Largest => values.into_iter().rev().collect(),
            };
            let mut out = Vec::new();
            let mut consistent = true;
            let mut prev_edge = match which {
                Which::Smallest => 0,
                Which::Largest => n,
            };
            for (i, &v) in values.iter().enumerate() {
                let gap = [values.get(i.wrapping_sub(1)), values.get(i + 1)]
                    .iter()
                    .flatten()
                    .map(|&&w| (w - v).abs())
                    .fold(f64::INFINITY, f64::min);
                let delta = (1e-7 * scale).min(0.25 * gap);
                let lo = count_below(v - delta)?;
                let hi = count_below(v + delta)?;
                // Every eigenvalue between the previous value and this one
                // must be accounted for.
                let (outer, inner) = match which {
                    Which::Smallest => (lo, prev_edge),
                    Which::Largest => (hi, prev_edge),
                };
                if outer != inner {
                    consistent = false;
                    break;
                }
                prev_edge = match which {
                    Which::Smallest => hi,
                    Which::Largest => lo,
                };
                for _ in 0..hi.saturating_sub(lo).max(1) {
                    out.push(v);
                }
                if out.len() >= k {
                    break;
                }
            }
            if consistent && out.len() >= k {
                out.truncate(k);
                return Ok(out);
            }
        }
        if krylov.exhausted() {
            stalled_rounds += 1;
            if stalled_rounds > 1 {
                return Err(Error::NoConvergence { index: k, iterations: krylov.len() });
            }
            // Full-dimension basis: restart once from a different vector.
            krylov = Krylov::new(n, opts.seed ^ 0x9E37_79B9);
            target = n.min((2 * k + 20).max(30));
            continue;
        }
        target = n.min(target + target / 2 + 10);
    }
}
