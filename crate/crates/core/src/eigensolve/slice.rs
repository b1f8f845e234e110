//! Spectrum slicing: inertia bisection splits an interval into pieces
//! holding a bounded number of eigenvalues, then shift-invert Lanczos
//! resolves each piece.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::eigensolve::lanczos::{cluster, residual, Krylov};
use crate::eigensolve::ldlt::{Factor, Symbolic, PIVOT_TOL};
use crate::error::{Error, Result};
use crate::sparse::SparseSymmetric;

/// Pieces narrower than this (relative to the Gershgorin scale) are not
/// bisected further; a cluster wider than `max_per_slice` goes to Lanczos
/// whole instead of driving shifts onto a degenerate eigenvalue.
const CLUSTER_WIDTH: f64 = 1e-6;
/// Factorizations with a smaller relative pivot are accepted only when no
/// better shift is found nearby. Unpivoted LDL^T loses the inertia to
/// element growth when the shift sits next to a highly degenerate
/// eigenvalue, which integer-weighted graph Laplacians have in abundance.
const HEALTHY_PIVOT: f64 = 1e-8;
/// Offsets tried around a requested shift, in units of the allowed radius.
const SHIFT_OFFSETS: [f64; 7] = [0.0, 0.26, -0.34, 0.58, -0.62, 0.86, -0.94];

#[derive(Debug, Clone, Copy)]
pub struct SliceOptions {
    /// Largest eigenvalue count handed to one Lanczos run.
    pub max_per_slice: usize,
    /// Total numeric factorizations allowed.
    pub max_factorizations: usize,
    /// Relative eigenvalue tolerance.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { max_per_slice: 64, max_factorizations: 200_000, tol: 1e-10, seed: 0x51_1CE }
    }
}

#[derive(Debug, Clone)]
pub struct SliceResult {
    pub eigenvalues: Vec<f64>,
    /// False when the budget ran out before every slice was resolved.
    pub complete: bool,
    /// Eigenvalue count in the interval according to inertia.
    pub expected: usize,
    pub factorizations: usize,
}

struct Ctx<'a> {
    matrix: &'a SparseSymmetric,
    symbolic: Symbolic,
    scale: f64,
    opts: SliceOptions,
    used: AtomicUsize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    /// Eigenvalues below `lo` and below `hi`.
    n_lo: usize,
    n_hi: usize,
}

impl Ctx<'_> {
    /// Factors `A - s I` for `s` within `radius` of `sigma`, preferring
    /// the requested shift and falling back to the best-conditioned
    /// candidate. `None` when the budget is spent.
    fn factor_near(&self, sigma: f64, radius: f64) -> Result<Option<(Factor, f64)>> {
        let mut best: Option<(Factor, f64)> = None;
        for o in SHIFT_OFFSETS {
            if self.used.fetch_add(1, Ordering::Relaxed) >= self.opts.max_factorizations {
                return Ok(None);
            }
            let s = sigma + o * radius;
            let Ok(f) = self.symbolic.factor(self.matrix, s, PIVOT_TOL * self.scale) else { continue };
            let p = f.min_abs_pivot();
            if p >= HEALTHY_PIVOT * self.scale {
                return Ok(Some((f, s)));
            }
            if best.as_ref().map_or(true, |(b, _)| p > b.min_abs_pivot()) {
                best = Some((f, s));
            }
        }
        match best {
            Some(b) => Ok(Some(b)),
            None => Err(Error::FactorizationBreakdown { sigma, attempts: SHIFT_OFFSETS.len() }),
        }
    }

    /// Eigenvalue count below a shift within `radius` of `sigma`, with the
    /// shift actually used.
    fn count_below(&self, sigma: f64, radius: f64) -> Result<Option<(usize, f64)>> {
        Ok(self.factor_near(sigma, radius)?.map(|(f, s)| (f.negative_pivots(), s)))
    }

    /// Splits a piece at its midpoint until every part is small enough.
    fn partition(&self, piece: Piece, out: &mut Vec<Piece>) -> Result<bool> {
        let count = piece.n_hi - piece.n_lo;
        if count == 0 {
            return Ok(true);
        }
        let width = piece.hi - piece.lo;
        if count <= self.opts.max_per_slice || width <= CLUSTER_WIDTH * self.scale {
            out.push(piece);
            return Ok(true);
        }
        let Some((n_mid, mid)) = self.count_below(split_point(piece.lo, piece.hi), 0.25 * width)? else {
            return Ok(false);
        };
        let left = Piece { lo: piece.lo, hi: mid, n_lo: piece.n_lo, n_hi: n_mid };
        let right = Piece { lo: mid, hi: piece.hi, n_lo: n_mid, n_hi: piece.n_hi };
        Ok(self.partition(left, out)? && self.partition(right, out)?)
    }

    /// Resolves one piece; returns the eigenvalues found and whether the
    /// piece is complete.
    fn resolve(&self, piece: Piece, seed: u64) -> Result<(Vec<f64>, bool)> {
        let count = piece.n_hi - piece.n_lo;
        if count == 0 {
            return Ok((Vec::new(), true));
        }
        let width = piece.hi - piece.lo;
        let tol = self.opts.tol * self.scale;
        if width <= tol {
            return Ok((vec![0.5 * (piece.lo + piece.hi); count], true));
        }
        let n = self.matrix.order();
        let Some((factor, sigma)) = self.factor_near(split_point(piece.lo, piece.hi), 0.25 * width)? else {
            return Ok((Vec::new(), false));
        };
        let mut op = |x: &[f64], y: &mut [f64]| factor.solve(x, y);

        let mut krylov = Krylov::new(n, seed);
        let mut target = n.min(2 * count + 30);
        let mut previous_found = usize::MAX;
        let found = loop {
            let steps = target - krylov.len();
            krylov.extend(steps, 1e-14, &mut op);
            let ritz = krylov.ritz()?;
            let mut inside = 0;
            let mut converged = Vec::new();
            for r in &ritz {
                if r.theta == 0.0 {
                    continue;
                }
                let lambda = sigma + 1.0 / r.theta;
                if lambda < piece.lo - tol || lambda > piece.hi + tol {
                    continue;
                }
                inside += 1;
                // Error in lambda is about residual / theta^2.
                if r.residual / (r.theta * r.theta) <= tol {
                    let y = krylov.ritz_vector(&r.coords);
                    if residual(self.matrix, &y, lambda) <= 1e-8 * self.scale {
                        converged.push(lambda);
                    }
                }
            }
            let settled = converged.len() == inside && inside == previous_found;
            if settled || krylov.exhausted() || converged.len() >= count {
                break converged;
            }
            previous_found = inside;
            target = n.min(target + count.max(10));
        };

        let mut found = found;
        found.sort_by(f64::total_cmp);
        let values = cluster(&found, 1e2 * tol);
        let mut out = Vec::with_capacity(count);
        let mut edge = piece.n_lo;
        let mut consistent = true;
        for (i, &v) in values.iter().enumerate() {
            // Probes may cross the piece ends; the count check below catches
            // any eigenvalue they step over.
            let gap = [i.checked_sub(1).map(|j| values[j]), values.get(i + 1).copied()]
                .into_iter()
                .flatten()
                .map(|w| (w - v).abs())
                .fold(f64::INFINITY, f64::min);
            let delta = (CLUSTER_WIDTH * self.scale).min(0.25 * gap).max(2.0 * tol);
            let Some((lo, _)) = self.count_below(v - delta, 0.5 * delta)? else { return Ok((out, false)) };
            let Some((hi, _)) = self.count_below(v + delta, 0.5 * delta)? else { return Ok((out, false)) };
            if lo != edge || hi <= lo {
                consistent = false;
                break;
            }
            out.extend(std::iter::repeat(v).take(hi - lo));
            edge = hi;
        }
        if consistent && edge == piece.n_hi {
            return Ok((out, true));
        }

        // Something was missed: bisect and retry both halves.
        let Some((n_mid, mid)) = self.count_below(split_point(piece.lo, piece.hi), 0.25 * width)? else {
            return Ok((Vec::new(), false));
        };
        let (a, ok_a) = self.resolve(
            Piece { lo: piece.lo, hi: mid, n_lo: piece.n_lo, n_hi: n_mid },
            seed.wrapping_mul(31).wrapping_add(1),
        )?;
        let (b, ok_b) = self.resolve(
            Piece { lo: mid, hi: piece.hi, n_lo: n_mid, n_hi: piece.n_hi },
            seed.wrapping_mul(31).wrapping_add(2),
        )?;
        let mut all = a;
        all.extend(b);
        Ok((all, ok_a && ok_b))
    }
}

/// A point near the middle of `[lo, hi]`, offset by a small amount derived
/// from the endpoints. Exact midpoints of round intervals tend to land on
/// eigenvalues (integer degrees of graph Laplacians), where the unpivoted
/// factorization meets a zero pivot.
fn split_point(lo: f64, hi: f64) -> f64 {
    let h = lo.to_bits() ^ hi.to_bits().rotate_left(17) ^ 0x2545_F491_4F6C_DD1D;
    let u = (h.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
    lo + (0.5 + 0.02 * (u - 0.5)) * (hi - lo)
}

/// All eigenvalues in `[a, b]`, ascending.
pub fn slice_spectrum(
    matrix: &SparseSymmetric,
    a: f64,
    b: f64,
    opts: &SliceOptions,
) -> Result<SliceResult> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    let scale = matrix.gershgorin_bound().max(1.0);
    let ctx = Ctx {
        matrix,
        symbolic: Symbolic::analyze(matrix)?,
        scale,
        opts: *opts,
        used: AtomicUsize::new(0),
    };
    // Closed interval: nudge the ends outward by the eigenvalue tolerance.
    let lo = a - opts.tol * scale;
    let hi = b + opts.tol * scale;
    let nudge = 0.5 * opts.tol * scale;
    let (Some((n_lo, lo)), Some((n_hi, hi))) = (ctx.count_below(lo, nudge)?, ctx.count_below(hi, nudge)?) else {
        return Ok(SliceResult { eigenvalues: Vec::new(), complete: false, expected: 0, factorizations: 0 });
    };
    let mut pieces = Vec::new();
    let mut complete = ctx.partition(Piece { lo, hi, n_lo, n_hi }, &mut pieces)?;

    let results: Vec<Result<(Vec<f64>, bool)>> = pieces
        .par_iter()
        .enumerate()
        .map(|(i, &p)| ctx.resolve(p, opts.seed.wrapping_add(i as u64 * 0x9E37)))
        .collect();
    let mut eigenvalues = Vec::with_capacity(n_hi - n_lo);
    for r in results {
        let (vals, ok) = r?;
        complete &= ok;
        eigenvalues.extend(vals);
    }
    eigenvalues.sort_by(f64::total_cmp);
    complete &= eigenvalues.len() == n_hi - n_lo;
    Ok(SliceResult {
        eigenvalues,
        complete,
        expected: n_hi - n_lo,
        factorizations: ctx.used.load(Ordering::Relaxed).min(opts.max_factorizations),
    })
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
    fn path_interval() {
        let r = slice_spectrum(&path3(), 0.5, 3.5, &SliceOptions::default()).unwrap();
        assert!(r.complete);
        assert_eq!(r.eigenvalues.len(), 2);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((r.eigenvalues[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        let r = slice_spectrum(&path3(), 5.0, 6.0, &SliceOptions::default()).unwrap();
        assert!(r.complete);
        assert!(r.eigenvalues.is_empty());
    }

    #[test]
    fn double_eigenvalue() {
        let r = slice_spectrum(&cycle(8), 1.9, 2.1, &SliceOptions::default()).unwrap();
        assert!(r.complete);
        assert_eq!(r.eigenvalues.len(), 2);
        assert!(r.eigenvalues.iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn whole_cycle_spectrum() {
        let n = 150;
        let r = slice_spectrum(&cycle(n), 0.0, 5.0, &SliceOptions::default()).unwrap();
        assert!(r.complete);
        let mut exact: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        assert_eq!(r.eigenvalues.len(), n);
        for (a, b) in r.eigenvalues.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let opts = SliceOptions { max_factorizations: 3, max_per_slice: 4, ..SliceOptions::default() };
        let r = slice_spectrum(&cycle(60), 0.0, 5.0, &opts).unwrap();
        assert!(!r.complete);
    }
}
