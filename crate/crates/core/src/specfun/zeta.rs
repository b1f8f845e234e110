//! Riemann zeta function over the complex plane.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::gamma::{gamma, sin_pi};

/// Euler-Maclaurin settings.
#[derive(Debug, Clone, Copy)]
pub struct ZetaOptions {
    /// Terms summed directly before the correction (at least).
    pub min_terms: usize,
    /// Bernoulli correction terms.
    pub corrections: usize,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions { min_terms: 24, corrections: 24 }
    }
}

const MAX_CORRECTIONS: usize = 40;

/// `B_{2k} / (2k)!` for `k = 1..=MAX_CORRECTIONS`, from
/// `B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=MAX_CORRECTIONS)
            .map(|k| {
                let two_k = 2 * k as i32;
                let z = match k {
                    1 => PI * PI / 6.0,
                    2 => PI.powi(4) / 90.0,
                    3 => PI.powi(6) / 945.0,
                    _ => {
                        // Sum smallest terms first.
                        (1..=200).rev().map(|n| (n as f64).powi(-two_k)).sum::<f64>()
                    }
                };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * z / (2.0 * PI).powi(two_k)
            })
            .collect()
    })
}

/// Euler-Maclaurin evaluation, valid for every `s != 1`.
fn zeta_em(s: Complex64, opts: &ZetaOptions) -> Complex64 {
    let m = opts.corrections.min(MAX_CORRECTIONS);
    // The correction terms shrink like (|s + 2k| / (2 pi N))^2 per step.
    let n = opts.min_terms.max(s.norm() as usize + 10);
    let nf = n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        sum += (-s * (k as f64).ln()).exp();
    }
    let n_pow = (-s * nf.ln()).exp(); // N^{-s}
    sum += n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    // Rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}.
    let mut term = s * n_pow / nf;
    let ratios = bernoulli_ratios();
    for k in 1..=m {
        let t = ratios[k - 1] * term;
        sum += t;
        if t.norm() < 1e-18 * sum.norm() {
            break;
        }
        let a = 2.0 * k as f64;
        term *= (s + (a - 1.0)) * (s + a) / (nf * nf);
    }
    sum
}

pub fn riemann_zeta_with(s: Complex64, opts: &ZetaOptions) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { location: s, residue: Some(Complex64::new(1.0, 0.0)) });
    }
    if s.im == 0.0 && s.re < 0.0 && s.re == s.re.round() && (s.re as i64) % 2 == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if s == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(-0.5, 0.0));
    }
    if s.re < 0.0 {
        // zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)
        let one_minus = 1.0 - s;
        let g = gamma(one_minus)?;
        let two_s = (s * 2f64.ln()).exp();
        let pi_s = ((s - 1.0) * PI.ln()).exp();
        let v = two_s * pi_s * sin_pi(0.5 * s) * g * zeta_em(one_minus, opts);
        return Ok(if s.im == 0.0 { Complex64::new(v.re, 0.0) } else { v });
    }
    let v = zeta_em(s, opts);
    Ok(if s.im == 0.0 { Complex64::new(v.re, 0.0) } else { v })
}

/// `zeta(s)`; `s = 1` is a pole with residue 1.
pub fn riemann_zeta(s: Complex64) -> Result<Complex64> {
    riemann_zeta_with(s, &ZetaOptions::default())
}

pub fn zeta_real(s: f64) -> Result<f64> {
    Ok(riemann_zeta(Complex64::new(s, 0.0))?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        assert!((zeta_real(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_real(-1.0).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        assert!((zeta_real(0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((zeta_real(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert_eq!(zeta_real(-4.0).unwrap(), 0.0);
        assert!((zeta_real(-3.0).unwrap() - 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn pole_at_one() {
        assert!(matches!(riemann_zeta(Complex64::new(1.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn first_nontrivial_zero() {
        let z = riemann_zeta(Complex64::new(0.5, 14.134_725_141_734_693)).unwrap();
        assert!(z.norm() < 1e-12, "{z}");
    }

    #[test]
    fn bernoulli_ratio_spot_values() {
        let r = bernoulli_ratios();
        assert!((r[0] * 12.0 - 1.0).abs() < 1e-15);
        assert!((r[1] * 720.0 + 1.0).abs() < 1e-15);
        assert!((r[2] * 30240.0 - 1.0).abs() < 1e-15);
    }
}
