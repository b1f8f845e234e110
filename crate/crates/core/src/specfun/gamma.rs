//! Gamma function over the complex plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 671.0 / 128.0;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_09;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Nonpositive integer `-n` if `z` is (exactly) one.
pub fn nonpositive_integer(z: Complex64) -> Option<u64> {
    (z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()).then(|| (-z.re) as u64)
}

/// `sin(pi z)` with the real part reduced exactly before scaling by pi, so
/// values near the integers keep full relative accuracy.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let r = z.re - n;
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (s, c) = (PI * r).sin_cos();
    let y = PI * z.im;
    Complex64::new(sign * s * y.cosh(), sign * c * y.sinh())
}

/// `ln Gamma(z)` for `Re z >= 1/2`, principal branch of the Lanczos form.
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    let mut y = z;
    for &c in &LANCZOS_COEFFS {
        y += 1.0;
        ser += c / y;
    }
    let tmp = z + LANCZOS_G;
    (z + 0.5) * tmp.ln() - tmp + (SQRT_2PI * ser / z).ln()
}

/// `Gamma(z)`; nonpositive integers are poles.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if let Some(n) = nonpositive_integer(z) {
        // Residue of Gamma at -n is (-1)^n / n!.
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        return Err(Error::Pole { location: z, residue: Some(Complex64::new(sign / fact, 0.0)) });
    }
    if z.im == 0.0 && z.re == z.re.round() && z.re <= 171.0 {
        // Exact factorials for positive integers.
        let mut f = 1.0;
        for k in 2..(z.re as u64) {
            f *= k as f64;
        }
        return Ok(Complex64::new(f, 0.0));
    }
    if z.re < 0.5 {
        let s = sin_pi(z);
        return Ok(PI / (s * gamma_right(1.0 - z)));
    }
    Ok(gamma_right(z))
}

fn gamma_right(z: Complex64) -> Complex64 {
    ln_gamma_right(z).exp()
}

/// `1 / Gamma(z)`, entire (zero at the poles of Gamma).
pub fn rgamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z).is_some() {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        // 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi
        return sin_pi(z) * gamma_right(1.0 - z) / PI;
    }
    1.0 / gamma_right(z)
}

/// `ln Gamma(z)` (a branch continuous in the right half-plane).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if nonpositive_integer(z).is_some() {
        return Err(Error::Pole { location: z, residue: None });
    }
    if z.re < 0.5 {
        // ln Gamma(z) = ln pi - ln sin(pi z) - ln Gamma(1 - z)
        return Ok(Complex64::new(PI.ln(), 0.0) - sin_pi(z).ln() - ln_gamma_right(1.0 - z));
    }
    Ok(ln_gamma_right(z))
}

/// Real gamma function.
pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma(Complex64::new(x, 0.0))?.re)
}
