//! Polylogarithm `Li_s(z) = sum_{n>=1} z^n / n^s` for `0 <= z <= 1` and
//! complex order `s`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::gamma::gamma;
use crate::specfun::zeta::riemann_zeta;

/// Above this `z` the series in `ln z` replaces the direct sum.
const DIRECT_LIMIT: f64 = 0.5;
/// Orders within this distance of a positive integer use the expansion
/// with the singular pair combined analytically.
const INTEGER_GUARD: f64 = 1e-2;
/// Below this distance from a nonpositive integer the direct sum is used.
const NONPOSITIVE_GUARD: f64 = 1e-4;

/// Stieltjes constants `gamma_0 .. gamma_11`.
const STIELTJES: [f64; 12] = [
    0.577_215_664_901_532_9,
    -0.072_815_845_483_676_72,
    -0.009_690_363_192_872_318,
    0.002_053_834_420_303_346,
    0.002_325_370_065_467_3,
    0.000_793_323_817_301_062_7,
    -0.000_238_769_345_430_199_6,
    -0.000_527_289_567_057_751,
    -0.000_352_123_353_803_039_5,
    -0.000_034_394_774_418_088_05,
    0.000_205_332_814_909_064_8,
    0.000_270_184_439_543_903_5,
];

fn direct(s: Complex64, z: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zn = 1.0;
    for n in 1..10_000u32 {
        zn *= z;
        let term = zn * (-s * (n as f64).ln()).exp();
        sum += term;
        // Remaining tail is below |term| z / (1 - z).
        if term.norm() * z / (1.0 - z) <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn harmonic(n: u64) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Series in `mu = ln z` for a non-integer order:
/// `Li_s(e^mu) = Gamma(1-s)(-mu)^{s-1} + sum_k zeta(s-k) mu^k / k!`.
fn log_series(s: Complex64, mu: f64) -> Result<Complex64> {
    let mut sum = gamma(1.0 - s)? * Complex64::new(-mu, 0.0).powc(s - 1.0);
    let mut pow = 1.0; // mu^k / k!
    let mut last = f64::INFINITY;
    for k in 0..200u32 {
        let z = riemann_zeta(s - k as f64)?;
        let term = z * pow;
        sum += term;
        let prev = std::mem::replace(&mut last, term.norm());
        if k > 2 && term.norm() + prev < 1e-17 * sum.norm() {
            break;
        }
        pow *= mu / (k + 1) as f64;
    }
    Ok(sum)
}

/// Series in `mu = ln z` for `s = n + eps`, `n >= 1`, `|eps|` small.
///
/// With `m = n - 1` and `L = -mu`, the terms `Gamma(1-s) L^{s-1}` and
/// `zeta(1+eps) mu^m / m!` both blow up like `1/eps`. Their sum is
/// `(-L)^m / m! * [(1 - e^h) / eps + zeta(1+eps) - 1/eps]` where
/// `h = log(pi eps / sin(pi eps)) + eps log L - log(Gamma(n+eps) / Gamma(n))`,
/// and every piece has a regular Taylor series in `eps`.
fn log_series_near_integer(n: u64, eps: Complex64, mu: f64) -> Result<Complex64> {
    let m = n - 1;
    let big_l = -mu;
    const ORDER: usize = 12;
    // h / eps as a power series, summed directly.
    let mut h_over = Complex64::new(big_l.ln() - (harmonic(m) - STIELTJES[0]), 0.0);
    let mut pow = eps; // eps^{k-1}
    for k in 2..=ORDER {
        let zk = crate::specfun::zeta::zeta_real(k as f64)?;
        let partial: f64 = (1..=m).map(|j| (j as f64).powi(-(k as i32))).sum();
        // log Gamma(n + eps) - log Gamma(n), order k.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut c = -sign * (zk - partial) / k as f64;
        if k % 2 == 0 {
            // log(pi x / sin(pi x)) = sum_j zeta(2j) x^{2j} / j
            c += zk / (k / 2) as f64;
        }
        h_over += pow * c;
        pow *= eps;
    }
    let h = h_over * eps;
    // (1 - e^h) / eps = -h_over * (e^h - 1) / h
    let mut ratio = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 2..30 {
        term *= h / j as f64;
        ratio += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    let mut zeta_reg = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for (k, g) in STIELTJES.iter().enumerate() {
        if k > 0 {
            pow *= -eps;
            fact *= k as f64;
        }
        zeta_reg += pow * (*g / fact);
    }
    let mut coeff = 1.0; // mu^k / k!
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 0..200u64 {
        let term = if k == m {
            coeff * (zeta_reg - h_over * ratio)
        } else {
            riemann_zeta(Complex64::new(n as f64 - k as f64, 0.0) + eps)? * coeff
        };
        sum += term;
        let prev = std::mem::replace(&mut last, term.norm());
        // zeta is small near negative even integers; require two small
        // terms in a row.
        if k > n && term.norm() + prev < 1e-17 * sum.norm() {
            break;
        }
        coeff *= mu / (k + 1) as f64;
    }
    Ok(sum)
}

/// `Li_s(z)` for `0 <= z <= 1`. At `z = 1` this is `zeta(s)` and needs
/// `Re s > 1`.
pub fn polylog_complex(s: Complex64, z: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&z) || z.is_nan() {
        return Err(Error::Domain(format!("polylog argument {z} outside [0, 1]")));
    }
    if z == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z == 1.0 {
        if s.re <= 1.0 {
            return Err(Error::Domain(format!("Li_s(1) diverges for Re s = {} <= 1", s.re)));
        }
        return riemann_zeta(s);
    }
    if z <= DIRECT_LIMIT {
        return Ok(direct(s, z));
    }
    let mu = z.ln();
    let nearest = s.re.round();
    let eps = s - nearest;
    if nearest >= 1.0 && eps.norm() < INTEGER_GUARD {
        return log_series_near_integer(nearest as u64, eps, mu);
    }
    if s.im == 0.0 && nearest <= 0.0 && (s.re - nearest).abs() < NONPOSITIVE_GUARD {
        // Nonpositive integer orders are rational functions; the direct
        // series converges for every z < 1.
        return Ok(direct(s, z));
    }
    log_series(s, mu)
}

/// Real polylogarithm for real order `s > 1` and `0 < z <= 1`.
pub fn polylog(s: f64, z: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("polylog order {s} must exceed 1")));
    }
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::Domain(format!("polylog argument {z} outside (0, 1]")));
    }
    Ok(polylog_complex(Complex64::new(s, 0.0), z)?.re)
}
