//! The ideal massive Bose gas on a scaled domain `L F`, where `beta`
//! multiplies eigenvalues of `-Delta / L^2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CarpetSpec;
use crate::specfun::{polylog_complex, zeta_real};
use crate::spectrum::Spectrum;
use crate::thermo::{Density, GasState, Source};
use crate::trace::{compensated_sum, spectral_volume, HeatTraceModel};

/// `beta E_0 / L^2 - log z`, the distance of the fugacity from its ceiling.
fn gap(state: &GasState, e0: f64) -> f64 {
    state.beta * e0 / (state.l * state.l) - state.log_z
}

fn check_volume(volume: f64) -> Result<()> {
    if volume > 0.0 && volume.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("spectral volume must be positive, got {volume}")))
    }
}

/// Occupation-number sum over eigenvalues above index `skip`, or `None` if
/// some occupation is infinite.
fn occupation_sum(state: &GasState, spectrum: &Spectrum, skip: usize) -> Result<Option<f64>> {
    let e0 = spectrum.smallest();
    let g = gap(state, e0);
    if g < 0.0 {
        return Err(Error::Domain(format!(
            "fugacity e^{} exceeds the ceiling e^(beta E_0 / L^2) = e^{}",
            state.log_z,
            g + state.log_z
        )));
    }
    let scale = state.beta / (state.l * state.l);
    let mut infinite = false;
    let sum = compensated_sum(spectrum.eigenvalues().iter().skip(skip).map(|&lam| {
        // beta (lambda - E_0) / L^2 + gap, exact in the gap near the ceiling.
        let x = scale * (lam - e0) + g;
        if x <= 0.0 {
            infinite = true;
            0.0
        } else {
            1.0 / x.exp_m1()
        }
    }));
    Ok((!infinite).then_some(sum))
}

/// Grand-canonical `log Xi`.
///
/// Spectrum path: `-sum_j log(1 - z e^{-beta lambda_j / L^2})`. Model path:
/// `sum_terms G (L^2/beta)^e Li_{e+1}(z)`, the exact transform of the model
/// trace.
pub fn log_partition(state: &GasState, source: Source) -> Result<Density> {
    match source {
        Source::Spectrum { spectrum, .. } => {
            let e0 = spectrum.smallest();
            let g = gap(state, e0);
            if g < 0.0 {
                return Err(Error::Domain("fugacity above e^(beta E_0 / L^2)".into()));
            }
            if g == 0.0 {
                return Ok(Density::Diverged);
            }
            let scale = state.beta / (state.l * state.l);
            // -log(1 - e^{-x}) with x the shifted Boltzmann exponent.
            let v = compensated_sum(spectrum.eigenvalues().iter().map(|&lam| {
                let x = scale * (lam - e0) + g;
                -(-(-x).exp_m1()).ln()
            }));
            Ok(Density::Finite(v))
        }
        Source::Model(model) => model_sum(state, model, 1.0),
    }
}

/// `sum_terms G (L^2/beta)^e Li_{e+shift}(z)` over every model term.
fn model_sum(state: &GasState, model: &HeatTraceModel, shift: f64) -> Result<Density> {
    let z = state.z();
    if state.log_z > 0.0 {
        return Err(Error::Domain(format!("model path needs z <= 1, got {z}")));
    }
    let ratio = (state.l * state.l / state.beta).ln();
    let mut total = Complex64::new(0.0, 0.0);
    for t in &model.terms {
        let order = t.exponent + shift;
        if state.log_z == 0.0 && order.re <= 1.0 {
            return Ok(Density::Diverged);
        }
        let li = polylog_complex(order, z.min(1.0))?;
        total += t.coefficient * (t.exponent * ratio).exp() * li;
    }
    Ok(Density::Finite(total.re))
}

/// Particle density `rho_L(beta, z)` per unit spectral volume.
pub fn particle_density(state: &GasState, source: Source) -> Result<Density> {
    match source {
        Source::Spectrum { spectrum, volume } => {
            check_volume(volume)?;
            Ok(match occupation_sum(state, spectrum, 0)? {
                Some(s) => Density::Finite(s / volume),
                None => Density::Diverged,
            })
        }
        Source::Model(model) => {
            let v = spectral_volume(model, state.l)?;
            Ok(match model_sum(state, model, 0.0)? {
                Density::Finite(x) => Density::Finite(x / v),
                d => d,
            })
        }
    }
}

/// Density carried by eigenvalues above index `m` (`rho^{m+}`).
pub fn excited_density(state: &GasState, spectrum: &Spectrum, volume: f64, m: usize) -> Result<Density> {
    check_volume(volume)?;
    Ok(match occupation_sum(state, spectrum, m + 1)? {
        Some(s) => Density::Finite(s / volume),
        None => Density::Diverged,
    })
}

/// Free energy density `f_L = -log Xi / (beta V_s)`.
pub fn free_energy_density(state: &GasState, source: Source) -> Result<Density> {
    let volume = match source {
        Source::Spectrum { volume, .. } => {
            check_volume(volume)?;
            volume
        }
        Source::Model(model) => spectral_volume(model, state.l)?,
    };
    Ok(match log_partition(state, source)? {
        Density::Finite(v) => Density::Finite(-v / (state.beta * volume)),
        d => d,
    })
}

/// Upper and lower critical densities
/// `max/min G_0 * zeta(d_s/2) / ((4 pi beta)^{d_s/2} G_00)`.
pub fn critical_densities(model: &HeatTraceModel, beta: f64) -> Result<(Density, Density)> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    model.validate()?;
    if model.d_s <= 2.0 {
        return Ok((Density::Diverged, Density::Diverged));
    }
    let h = 0.5 * model.d_s;
    let base = zeta_real(h)? / ((4.0 * std::f64::consts::PI * beta).powf(h) * model.g00());
    let (max, min) = model.g0_extrema();
    Ok((Density::Finite(max * base), Density::Finite(min * base)))
}

/// Condensate density `(1/V_s) / (z^{-1} e^{beta E_0 / L^2} - 1)`.
pub fn condensate_density(state: &GasState, spectrum: &Spectrum, volume: f64) -> Result<Density> {
    check_volume(volume)?;
    let g = gap(state, spectrum.smallest());
    if g < 0.0 {
        return Err(Error::Domain("fugacity above e^(beta E_0 / L^2)".into()));
    }
    if g == 0.0 {
        return Ok(Density::Diverged);
    }
    Ok(Density::Finite(1.0 / (volume * g.exp_m1())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fugacity {
    pub z: f64,
    pub log_z: f64,
    /// `beta E_0 / L^2 - log z` at the solution (0 when saturated).
    pub gap: f64,
    /// The target exceeds the largest density the model can hold at `z = 1`.
    pub saturated: bool,
}

/// Fugacity with `rho_L(beta, z) = target`, by bisection in the log of the
/// gap below the fugacity ceiling (`e^{beta E_0 / L^2}` for spectra, 1 for
/// models). The density is strictly decreasing in the gap.
pub fn solve_fugacity(target: f64, beta: f64, l: f64, source: Source) -> Result<Fugacity> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("target density must be positive, got {target}")));
    }
    let ceiling = match source {
        Source::Spectrum { spectrum, .. } => beta * spectrum.smallest() / (l * l),
        Source::Model(_) => 0.0,
    };
    let density = |g: f64| -> Result<Density> {
        let state = GasState::from_log_z(beta, ceiling - g, l)?;
        particle_density(&state, source)
    };
    let finish = |g: f64, saturated: bool| {
        let log_z = ceiling - g;
        Fugacity { z: log_z.exp(), log_z, gap: g, saturated }
    };
    if let Source::Model(_) = source {
        if let Density::Finite(top) = density(0.0)? {
            if top <= target {
                return Ok(finish(0.0, true));
            }
        }
    }
    let above = |g: f64| -> Result<bool> {
        Ok(match density(g)? {
            Density::Finite(v) => v > target,
            Density::Diverged => true,
        })
    };
    let mut hi = 1.0;
    while above(hi)? {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence { index: 0, iterations: 0 });
        }
    }
    let mut lo = hi * 0.5;
    while !above(lo)? {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(finish(0.0, true));
        }
    }
    // Bisect geometrically: the gap can be many orders below 1.
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi || hi / lo - 1.0 < 1e-15 {
            break;
        }
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(finish((lo * hi).sqrt(), false))
}

/// The two-sided difference-quotient bounds for `rho` (or `rho^{m+}` with
/// `m > 0`) between fugacities `z_2 < z_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub lower: f64,
    pub quotient: f64,
    pub upper: f64,
    /// Slack allowed for rounding in the difference quotient.
    pub slack: f64,
    pub holds: bool,
}

/// Checks `rho(z2)/z2 <= (rho(z1) - rho(z2))/(z1 - z2) <= rho(z1) / (z1 (1 - z1 e^{-beta E_m / L^2}))`.
/// `m = None` uses `rho` itself with `E_0`.
pub fn convexity_check(
    spectrum: &Spectrum,
    volume: f64,
    beta: f64,
    l: f64,
    z1: f64,
    z2: f64,
    m: Option<usize>,
) -> Result<ConvexityCheck> {
    if !(z1 > z2 && z2 > 0.0) {
        return Err(Error::InvalidArgument(format!("need z1 > z2 > 0, got {z1}, {z2}")));
    }
    let s1 = GasState::new(beta, z1, l)?;
    let s2 = GasState::new(beta, z2, l)?;
    let (r1, r2, em) = match m {
        None => (
            particle_density(&s1, Source::Spectrum { spectrum, volume })?,
            particle_density(&s2, Source::Spectrum { spectrum, volume })?,
            spectrum.smallest(),
        ),
        Some(m) => (
            excited_density(&s1, spectrum, volume, m)?,
            excited_density(&s2, spectrum, volume, m)?,
            *spectrum
                .eigenvalues()
                .get(m)
                .ok_or_else(|| Error::InvalidArgument(format!("spectrum has no eigenvalue {m}")))?,
        ),
    };
    let r1 = r1.finite("density at z1")?;
    let r2 = r2.finite("density at z2")?;
    let lower = r2 / z2;
    let quotient = (r1 - r2) / (z1 - z2);
    let upper = r1 / (z1 * -(-(beta * em / (l * l)) + s1.log_z).exp_m1());
    let slack = 64.0 * f64::EPSILON * (r1.abs() + r2.abs()) / (z1 - z2) + 64.0 * f64::EPSILON * upper.abs();
    let holds = lower <= quotient + slack && quotient <= upper + slack;
    Ok(ConvexityCheck { lower, quotient, upper, slack, holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BecReport {
    pub name: Option<String>,
    pub d_s_lower: f64,
    pub d_s_upper: f64,
    pub d_s_fitted: Option<f64>,
    /// Brownian motion is transient iff `d_s > 2`; BEC occurs iff transient.
    pub transient: Verdict,
    pub bec: Verdict,
    /// What the fitted value alone would say.
    pub fitted_bec: Option<bool>,
}

/// BEC verdict from the rigorous spectral-dimension bounds of the carpet,
/// with the fitted value attached when available.
pub fn bec_diagnose(spec: &CarpetSpec, fitted: Option<&HeatTraceModel>) -> BecReport {
    let b = spec.dimension_bounds();
    let verdict = if b.d_s_lower > 2.0 {
        Verdict::Yes
    } else if b.d_s_upper < 2.0 {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    BecReport {
        name: spec.name().map(str::to_string),
        d_s_lower: b.d_s_lower,
        d_s_upper: b.d_s_upper,
        d_s_fitted: fitted.map(|m| m.d_s),
        transient: verdict,
        bec: verdict,
        fitted_bec: fitted.map(|m| m.d_s > 2.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceTrend {
    Converging,
    Diverging,
    Undetermined,
}

/// Classifies an increasing sequence (densities along growing domains) by
/// the mean ratio of successive increments: below 0.9 the increments decay
/// geometrically, at or above 0.97 they do not.
pub fn classify_sequence(values: &[f64]) -> SequenceTrend {
    if values.len() < 4 {
        return SequenceTrend::Undetermined;
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.iter().any(|&d| !(d > 0.0)) {
        // Non-monotone sequences: converged to rounding if the increments
        // are negligible.
        let scale = values.last().unwrap().abs();
        return if inc.iter().rev().take(2).all(|d| d.abs() <= 1e-10 * scale) {
            SequenceTrend::Converging
        } else {
            SequenceTrend::Undetermined
        };
    }
    let ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean < 0.9 {
        SequenceTrend::Converging
    } else if mean >= 0.97 {
        SequenceTrend::Diverging
    } else {
        SequenceTrend::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BoundaryCondition;
    use crate::specfun::polylog;
    use std::f64::consts::PI;

    fn single() -> Spectrum {
        Spectrum::new(vec![1.0], BoundaryCondition::Dirichlet).unwrap()
    }

    #[test]
    fn one_mode_log_partition() {
        let s = single();
        let st = GasState::new(1.0, (-1f64).exp(), 1.0).unwrap();
        let v = log_partition(&st, Source::Spectrum { spectrum: &s, volume: 1.0 }).unwrap().value().unwrap();
        assert!((v + (1.0 - (-2f64).exp()).ln()).abs() < 1e-15);
        let tiny = GasState::new(1.0, 1e-300, 1.0).unwrap();
        let v = log_partition(&tiny, Source::Spectrum { spectrum: &s, volume: 1.0 }).unwrap().value().unwrap();
        assert!(v.abs() < 1e-299);
    }

    #[test]
    fn euclidean_density_closed_forms() {
        let m = HeatTraceModel::euclidean(3);
        let beta = 0.7;
        let at = |z: f64| {
            particle_density(&GasState::new(beta, z, 10.0).unwrap(), Source::Model(&m)).unwrap().value().unwrap()
        };
        let want1 = zeta_real(1.5).unwrap() / (4.0 * PI * beta).powf(1.5);
        assert!((at(1.0) / want1 - 1.0).abs() < 1e-12);
        let want = polylog(1.5, 0.5).unwrap() / (4.0 * PI * beta).powf(1.5);
        assert!((at(0.5) / want - 1.0).abs() < 1e-12);
        let low = HeatTraceModel::constant(1.8, 0.1);
        let st = GasState::new(beta, 1.0, 10.0).unwrap();
        assert!(particle_density(&st, Source::Model(&low)).unwrap().is_diverged());
    }

    #[test]
    fn critical_density_forms() {
        let m = HeatTraceModel::euclidean(3);
        let (hi, lo) = critical_densities(&m, 1.0).unwrap();
        let want = zeta_real(1.5).unwrap() / (4.0 * PI).powf(1.5);
        assert!((hi.value().unwrap() - want).abs() < 1e-15);
        assert_eq!(hi, lo);
        let rip = HeatTraceModel::constant(3.0, 1.0).with_fourier_pair(0, 1, Complex64::new(0.025, 0.0));
        let (hi, lo) = critical_densities(&rip, 1.0).unwrap();
        assert!((hi.value().unwrap() / lo.value().unwrap() - 1.05 / 0.95).abs() < 1e-6);
        let flat = HeatTraceModel::constant(2.0, 1.0);
        assert_eq!(critical_densities(&flat, 1.0).unwrap(), (Density::Diverged, Density::Diverged));
    }

    #[test]
    fn fugacity_round_trip() {
        let s = Spectrum::new((1..200).map(|j| (j * j) as f64 * PI * PI).collect(), BoundaryCondition::Dirichlet)
            .unwrap();
        let src = Source::Spectrum { spectrum: &s, volume: 1.0 };
        let st = GasState::new(0.01, 0.5, 1.0).unwrap();
        let target = particle_density(&st, src).unwrap().value().unwrap();
        let f = solve_fugacity(target, 0.01, 1.0, src).unwrap();
        assert!((f.z - 0.5).abs() < 1e-10);
    }

    #[test]
    fn fugacity_from_model_inverts_polylog() {
        let m = HeatTraceModel::euclidean(3);
        let beta = 1.0;
        let rc = zeta_real(1.5).unwrap() / (4.0 * PI * beta).powf(1.5);
        let f = solve_fugacity(0.5 * rc, beta, 5.0, Source::Model(&m)).unwrap();
        assert!((polylog(1.5, f.z).unwrap() - 0.5 * zeta_real(1.5).unwrap()).abs() < 1e-10);
        let sat = solve_fugacity(2.0 * rc, beta, 5.0, Source::Model(&m)).unwrap();
        assert!(sat.saturated && sat.z == 1.0);
    }

    #[test]
    fn excess_goes_to_condensate() {
        let s = Spectrum::new((1..400).map(|j| (j * j) as f64 * PI * PI).collect(), BoundaryCondition::Dirichlet)
            .unwrap();
        let (beta, l, vol) = (1e-3, 1.0, 1.0);
        let src = Source::Spectrum { spectrum: &s, volume: vol };
        let at_one = particle_density(&GasState::new(beta, 1.0, l).unwrap(), src).unwrap().value().unwrap();
        let target = 1e6 * at_one;
        let f = solve_fugacity(target, beta, l, src).unwrap();
        let st = GasState::from_log_z(beta, f.log_z, l).unwrap();
        let cond = condensate_density(&st, &s, vol).unwrap().value().unwrap();
        let rest = excited_density(&st, &s, vol, 0).unwrap().value().unwrap();
        assert!(((cond + rest) / target - 1.0).abs() < 1e-9);
        assert!(f.z < (beta * s.smallest()).exp());
    }

    #[test]
    fn free_energy_limit() {
        let m = HeatTraceModel::euclidean(3);
        let beta = 2.0;
        let f = free_energy_density(&GasState::new(beta, 1.0, 3.0).unwrap(), Source::Model(&m))
            .unwrap()
            .value()
            .unwrap();
        let want = -zeta_real(2.5).unwrap() / ((4.0 * PI).powf(1.5) * beta.powf(2.5));
        assert!((f / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn above_ceiling_is_domain_error() {
        let s = single();
        let st = GasState::new(1.0, 3.0, 1.0).unwrap();
        assert!(matches!(
            particle_density(&st, Source::Spectrum { spectrum: &s, volume: 1.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sequence_classes() {
        let div: Vec<f64> = (0..8).map(|n| 2f64.powf(0.2 * n as f64)).collect();
        assert_eq!(classify_sequence(&div), SequenceTrend::Diverging);
        let conv: Vec<f64> = (0..8).map(|n| 1.0 - 2f64.powf(-0.5 * n as f64)).collect();
        assert_eq!(classify_sequence(&conv), SequenceTrend::Converging);
    }

    #[test]
    fn table_verdicts() {
        let v = |n: &str| bec_diagnose(&CarpetSpec::preset(n).unwrap(), None).bec;
        assert_eq!(v("MS31"), Verdict::Yes);
        assert_eq!(v("MS64"), Verdict::No);
        assert_eq!(v("MS53"), Verdict::Inconclusive);
    }
}
