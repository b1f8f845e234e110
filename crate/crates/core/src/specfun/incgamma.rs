//! Incomplete gamma functions of complex order and real argument.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::gamma::{gamma, nonpositive_integer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncGammaKind {
    /// `gamma(s, x) = int_0^x t^{s-1} e^{-t} dt`
    Lower,
    /// `Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt`
    Upper,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const EPS: f64 = 1e-17;

/// `x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n))`.
fn lower_series(s: Complex64, x: f64) -> Complex64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    for n in 1..2000 {
        term *= x / (s + n as f64);
        sum += term;
        if term.norm() < EPS * sum.norm() {
            break;
        }
    }
    sum * (s * x.ln() - x).exp()
}

/// Modified Lentz evaluation of the continued fraction for the upper
/// function; converges quickly once `x > Re s + 1`.
fn upper_fraction(s: Complex64, x: f64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = Complex64::new(x + 1.0, 0.0) - s;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..2000 {
        let an = -(i as f64) * (Complex64::new(i as f64, 0.0) - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < EPS {
            break;
        }
    }
    h * (s * x.ln() - x).exp()
}

/// `E_1(x) = Gamma(0, x)` for `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    if x > 1.0 {
        return upper_fraction(Complex64::new(0.0, 0.0), x).re;
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let t = term / k as f64;
        sum += t;
        if t.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Upper function at a nonpositive integer order `-n`, by the downward
/// recurrence `Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s` from `E_1`.
fn upper_at_pole(n: u64, x: f64) -> f64 {
    let mut g = exp_integral_e1(x);
    for k in 1..=n {
        let s = -(k as f64);
        g = (g - (s * x.ln() - x).exp()) / s;
    }
    g
}

/// Lower or upper incomplete gamma function for `x >= 0`.
pub fn incomplete_gamma(s: Complex64, x: f64, kind: IncGammaKind) -> Result<Complex64> {
    if !(x >= 0.0) || !x.is_finite() && kind == IncGammaKind::Lower {
        return Err(Error::Domain(format!("incomplete gamma needs finite x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(n) = nonpositive_integer(s) {
        return match kind {
            IncGammaKind::Upper if x > 0.0 => Ok(Complex64::new(upper_at_pole(n, x), 0.0)),
            _ => Err(Error::Pole { location: s, residue: None }),
        };
    }
    if x == 0.0 {
        return match kind {
            IncGammaKind::Upper => gamma(s),
            IncGammaKind::Lower if s.re > 0.0 => Ok(Complex64::new(0.0, 0.0)),
            IncGammaKind::Lower => Err(Error::Domain(format!("gamma({s}, 0) diverges for Re s <= 0"))),
        };
    }
    let use_fraction = x > s.re + 1.0 && x > 1.0;
    match (kind, use_fraction) {
        (IncGammaKind::Lower, false) => Ok(lower_series(s, x)),
        (IncGammaKind::Upper, true) => Ok(upper_fraction(s, x)),
        (IncGammaKind::Lower, true) => Ok(gamma(s)? - upper_fraction(s, x)),
        (IncGammaKind::Upper, false) => Ok(gamma(s)? - lower_series(s, x)),
    }
}

pub fn lower_gamma(s: Complex64, x: f64) -> Result<Complex64> {
    incomplete_gamma(s, x, IncGammaKind::Lower)
}

pub fn upper_gamma(s: Complex64, x: f64) -> Result<Complex64> {
    incomplete_gamma(s, x, IncGammaKind::Upper)
}
