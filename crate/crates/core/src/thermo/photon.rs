//! Photon gas, `H = sqrt(-Delta)`: blackbody energy density and pressure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{gamma, riemann_zeta};
use crate::spectrum::Spectrum;
use crate::trace::{compensated_sum, HeatTraceModel, ModelTerm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Blackbody {
    pub energy_density: f64,
    /// `P = energy / d_s`.
    pub pressure: f64,
    /// The non-oscillating `p = 0` part of the energy density.
    pub constant_term: f64,
    /// Size of the neglected boundary (`k >= 1`) terms relative to the
    /// volume terms at this `beta / L`.
    pub boundary_bound: f64,
    /// Imaginary residue of the Fourier sum (zero for Hermitian models).
    pub imaginary_residue: f64,
}

/// `sum_j e^{-a sqrt(lambda_j)} ~ G Gamma(e + 1/2) 4^e a^{-2e} / sqrt(pi)` for
/// one term `G t^{-e}`; the energy weight is `-d/da` of that, giving
/// `G Gamma(e + 1/2) 4^e 2e zeta(2e + 1)` after summing over Bose
/// harmonics.
fn energy_weight(term: &ModelTerm) -> Result<Complex64> {
    let e = term.exponent;
    Ok(term.coefficient * gamma(e + 0.5)? * (e * 4f64.ln()).exp() * (2.0 * e) * riemann_zeta(2.0 * e + 1.0)?
        / PI.sqrt())
}

/// Energy density from the model terms of codimension `k` (`None` for all).
fn energy_sum(model: &HeatTraceModel, beta: f64, l: f64, k: Option<usize>) -> Result<(Complex64, f64)> {
    let d_s = model.d_s;
    let volume = (4.0 * PI).powf(0.5 * d_s) * model.g00() * l.powf(d_s);
    let mut total = Complex64::new(0.0, 0.0);
    let mut constant = 0.0;
    for term in model.terms.iter().filter(|t| k.map_or(true, |k| t.k == k)) {
        let w = energy_weight(term)?;
        // L^{2e} from the scaled trace, beta^{-2e-1} from the harmonics.
        let scale = ((-2.0 * term.exponent - 1.0) * beta.ln() + 2.0 * term.exponent * l.ln()).exp();
        let v = w * scale / volume;
        if term.p == 0 {
            constant += v.re;
        }
        total += v;
    }
    Ok((total, constant))
}

/// Blackbody energy density `beta^{-(d_s+1)} H_1(-log(beta / 2L))` and
/// pressure `energy / d_s` from the volume terms of a model.
pub fn blackbody(model: &HeatTraceModel, beta: f64, l: f64) -> Result<Blackbody> {
    if !(beta > 0.0 && l > 0.0) {
        return Err(Error::InvalidArgument(format!("need beta, L > 0, got {beta}, {l}")));
    }
    if !(model.d_s > 0.0) {
        return Err(Error::InvalidArgument(format!("d_s must be positive, got {}", model.d_s)));
    }
    model.validate()?;
    let (volume, constant) = energy_sum(model, beta, l, Some(0))?;
    let mut boundary = 0.0;
    for k in 1..=model.k_max() {
        boundary += energy_sum(model, beta, l, Some(k))?.0.norm();
    }
    Ok(Blackbody {
        energy_density: volume.re,
        pressure: volume.re / model.d_s,
        constant_term: constant,
        boundary_bound: boundary / volume.re.abs(),
        imaginary_residue: volume.im,
    })
}

/// `H_1(x) = beta^{d_s+1} * energy density` at `x = -log(beta / 2L)`; it is
/// `log R / 2`-periodic in `x`.
pub fn h1(model: &HeatTraceModel, x: f64) -> Result<f64> {
    // Any beta works: the ratio L / beta = e^x / 2 is all that matters.
    let beta = 1.0;
    let l = 0.5 * x.exp();
    Ok(blackbody(model, beta, l)?.energy_density)
}

/// Direct mode sum `(1/V) sum_j w_j / (e^{beta w_j} - 1)` with
/// `w_j = sqrt(lambda_j) / L`; zero modes carry no energy.
pub fn photon_energy_spectrum(spectrum: &Spectrum, beta: f64, l: f64, volume: f64) -> Result<f64> {
    if !(beta > 0.0 && l > 0.0 && volume > 0.0) {
        return Err(Error::InvalidArgument("beta, L and volume must be positive".into()));
    }
    let tol = crate::spectrum::zero_tolerance(spectrum.largest());
    let sum = compensated_sum(spectrum.eigenvalues().iter().filter(|&&v| v > tol).map(|&lam| {
        let w = lam.sqrt() / l;
        w / (beta * w).exp_m1()
    }));
    Ok(sum / volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::euclid_blackbody;

    #[test]
    fn t4_law() {
        let m = HeatTraceModel::euclidean(3);
        for beta in [0.5, 1.0, 3.0] {
            let b = blackbody(&m, beta, 100.0).unwrap();
            let want = PI * PI / (30.0 * beta.powi(4));
            assert!((b.energy_density / want - 1.0).abs() < 1e-12);
            assert_eq!(b.pressure * 3.0, b.energy_density);
        }
    }

    #[test]
    fn other_dimensions_match_oracle() {
        for d in 1..=4 {
            let b = blackbody(&HeatTraceModel::euclidean(d), 0.8, 10.0).unwrap();
            let want = euclid_blackbody(d, 0.8).unwrap();
            assert!((b.energy_density / want - 1.0).abs() < 1e-12, "{d}");
        }
        let b = blackbody(&HeatTraceModel::euclidean(2), 1.0, 1.0).unwrap();
        assert!((b.energy_density - 1.202_056_903_159_594_3 / PI).abs() < 1e-13);
    }

    #[test]
    fn oscillating_model_is_real_and_periodic() {
        let m = HeatTraceModel { period: 2.2, ..HeatTraceModel::constant(1.86, 0.1) }
            .with_fourier_pair(0, 1, Complex64::new(0.002, 0.001));
        let b = blackbody(&m, 1.0, 20.0).unwrap();
        assert!(b.imaginary_residue.abs() < 1e-14);
        let a = h1(&m, 1.3).unwrap();
        let c = h1(&m, 1.3 + 0.5 * m.period).unwrap();
        assert!((a - c).abs() < 1e-12 * a.abs());
    }
}
