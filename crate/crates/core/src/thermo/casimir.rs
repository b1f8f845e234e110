//! Casimir pressure in the waveguide `(a F) x [0, b]` with Dirichlet walls
//! at the ends of the interval.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::interval_trace_exact;
use crate::specfun::{gamma, riemann_zeta};
use crate::trace::HeatTraceModel;

/// Below this `a / b` the asymptotic formulas carry a warning.
pub const ASYMPTOTIC_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct CasimirReport {
    /// Zero-temperature energy (`None` for the thermal pressure).
    pub energy: Option<f64>,
    /// Scalar-field pressure per unit spectral area.
    pub pressure: f64,
    /// Residual imaginary part of the Fourier sum.
    pub imaginary: f64,
    /// Two polarizations: twice the scalar value.
    pub electromagnetic_pressure: f64,
    pub note: String,
    pub warning: Option<String>,
}

const FACTOR_NOTE: &str = "scalar field (one mode per eigenvalue); the electromagnetic plate value \
     -pi^2/(240 b^4) counts two polarizations and is twice the scalar -pi^2/(480 b^4)";

/// Heat trace of the waveguide: `K_F(t / a^2) K_[0,1](t / b^2)`.
pub fn waveguide_trace(model: &HeatTraceModel, a: f64, b: f64, t: f64) -> Result<f64> {
    check(model, a, b)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    Ok(model.evaluate(t / (a * a)) * interval_trace_exact(t / (b * b)))
}

fn check(model: &HeatTraceModel, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("need a, b > 0, got {a}, {b}")));
    }
    model.validate()
}

fn ratio_warning(a: f64, b: f64) -> Option<String> {
    (a / b < ASYMPTOTIC_RATIO)
        .then(|| format!("a/b = {:.3} is below {ASYMPTOTIC_RATIO}; asymptotic formula not reliable", a / b))
}

fn spectral_area(model: &HeatTraceModel, a: f64) -> f64 {
    (4.0 * PI).powf(0.5 * model.d_s) * model.g00() * a.powf(model.d_s)
}

/// Zero-temperature Casimir energy and pressure from the volume terms,
/// `E = -(1/4 pi) sum_p G_p Gamma(e_p + 1) zeta(2 e_p + 2) a^{2 e_p} b^{-2 e_p - 1}`
/// and `P = -(1 / V_s(aF)) dE/db`.
pub fn casimir_waveguide_zero_t(model: &HeatTraceModel, a: f64, b: f64) -> Result<CasimirReport> {
    check(model, a, b)?;
    let (la, lb) = (a.ln(), b.ln());
    let mut energy = Complex64::new(0.0, 0.0);
    let mut pressure = Complex64::new(0.0, 0.0);
    for term in model.terms.iter().filter(|t| t.k == 0) {
        let e = term.exponent;
        let c = term.coefficient * gamma(e + 1.0)? * riemann_zeta(2.0 * e + 2.0)? / (4.0 * PI);
        let scale = (2.0 * e * la - (2.0 * e + 1.0) * lb).exp();
        energy -= c * scale;
        pressure -= c * (2.0 * e + 1.0) * scale / b;
    }
    let pressure = pressure / spectral_area(model, a);
    Ok(CasimirReport {
        energy: Some(energy.re),
        pressure: pressure.re,
        imaginary: pressure.im.abs().max(energy.im.abs()),
        electromagnetic_pressure: 2.0 * pressure.re,
        note: FACTOR_NOTE.into(),
        warning: ratio_warning(a, b),
    })
}

/// Leading thermal pressure `beta^{-(d_s+2)} H_3(-log(beta / 2a))`; it does
/// not depend on `b`.
pub fn casimir_waveguide_thermal(model: &HeatTraceModel, a: f64, b: f64, beta: f64) -> Result<CasimirReport> {
    check(model, a, b)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let mut pressure = Complex64::new(0.0, 0.0);
    for term in model.terms.iter().filter(|t| t.k == 0) {
        let e = term.exponent;
        let c = term.coefficient * gamma(e + 1.0)? * riemann_zeta(2.0 * e + 2.0)? * (e * 4f64.ln()).exp() / PI;
        pressure += c * (2.0 * e * a.ln() - (2.0 * e + 2.0) * beta.ln()).exp();
    }
    let pressure = pressure / spectral_area(model, a);
    Ok(CasimirReport {
        energy: None,
        pressure: pressure.re,
        imaginary: pressure.im.abs(),
        electromagnetic_pressure: 2.0 * pressure.re,
        note: FACTOR_NOTE.into(),
        warning: ratio_warning(a, b),
    })
}
