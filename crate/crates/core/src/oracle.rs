//! Exact Euclidean references: box spectra, the interval heat trace and the
//! classical Bose gas and blackbody formulas.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BoundaryCondition;
use crate::specfun::{gamma_real, integrate, zeta_real, QuadOptions};
use crate::spectrum::Spectrum;
use crate::thermo::Density;

/// Eigenvalue count above which `box_spectrum` refuses to enumerate.
pub const BOX_EIGENVALUE_CAP: u64 = 50_000_000;

/// A Euclidean box `prod [0, L_i]` with one boundary condition on every face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub sides: Vec<f64>,
    pub bc: BoundaryCondition,
}

impl BoxSpec {
    pub fn new(sides: Vec<f64>, bc: BoundaryCondition) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidArgument("box needs at least one side".into()));
        }
        if sides.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!("box sides must be positive, got {sides:?}")));
        }
        Ok(BoxSpec { sides, bc })
    }

    pub fn cube(d: usize, side: f64, bc: BoundaryCondition) -> Result<Self> {
        Self::new(vec![side; d], bc)
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Mode index range along one axis and the eigenvalue per unit index squared.
    fn axis(&self, side: f64, cutoff: f64) -> (i64, i64, f64) {
        match self.bc {
            BoundaryCondition::Dirichlet => {
                let k = PI / side;
                (1, (cutoff.sqrt() / k).floor() as i64, k * k)
            }
            BoundaryCondition::Neumann => {
                let k = PI / side;
                (0, (cutoff.sqrt() / k).floor() as i64, k * k)
            }
            BoundaryCondition::Periodic => {
                let k = 2.0 * PI / side;
                let m = (cutoff.sqrt() / k).floor() as i64;
                (-m, m, k * k)
            }
        }
    }

    /// Heat trace of the box from one-dimensional factors.
    pub fn heat_trace(&self, t: f64) -> f64 {
        self.sides
            .iter()
            .map(|&l| {
                let tau = t / (l * l);
                match self.bc {
                    BoundaryCondition::Dirichlet => interval_trace_exact(tau),
                    BoundaryCondition::Neumann => interval_trace_exact(tau) + 1.0,
                    // Circle of length L: theta(4 pi^2 tau) summed over all integers.
                    BoundaryCondition::Periodic => 2.0 * interval_trace_exact(4.0 * tau) + 1.0,
                }
            })
            .product()
    }
}

/// Every eigenvalue `sum_i (k_i n_i)^2 <= cutoff` of the box Laplacian,
/// enumerated exactly.
pub fn box_spectrum(spec: &BoxSpec, cutoff: f64) -> Result<Spectrum> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff must be positive, got {cutoff}")));
    }
    let axes: Vec<(i64, i64, f64)> = spec.sides.iter().map(|&l| spec.axis(l, cutoff)).collect();
    let bound: f64 = axes.iter().map(|&(lo, hi, _)| (hi - lo + 1).max(0) as f64).product();
    if bound > BOX_EIGENVALUE_CAP as f64 {
        return Err(Error::CapExceeded { requested: bound as u128, cap: BOX_EIGENVALUE_CAP });
    }
    let (lo0, hi0, k0) = axes[0];
    let mut values: Vec<f64> = (lo0..=hi0)
        .into_par_iter()
        .flat_map_iter(|n| {
            let mut out = Vec::new();
            let first = k0 * (n * n) as f64;
            if first <= cutoff {
                enumerate(&axes[1..], first, cutoff, &mut out);
            }
            out
        })
        .collect();
    if values.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    values.sort_by(f64::total_cmp);
    let mut s = Spectrum::new(values, spec.bc)?;
    s.solver = "box".into();
    Ok(s)
}

fn enumerate(axes: &[(i64, i64, f64)], partial: f64, cutoff: f64, out: &mut Vec<f64>) {
    let Some((&(lo, hi, k), rest)) = axes.split_first() else {
        out.push(partial);
        return;
    };
    for n in lo..=hi {
        let v = partial + k * (n * n) as f64;
        if v <= cutoff {
            enumerate(rest, v, cutoff, out);
        }
    }
}

/// `sum_{j>=1} exp(-j^2 pi^2 tau)`, the Dirichlet heat trace of the unit
/// interval. Uses the Poisson-resummed form below `tau = 0.1`, where it has
/// no cancellation and the direct sum gets long.
pub fn interval_trace_exact(tau: f64) -> f64 {
    if tau < 0.1 {
        interval_trace_poisson(tau)
    } else {
        interval_trace_direct(tau)
    }
}

/// Direct mode sum, truncated once terms fall below `1e-17` of the total.
pub fn interval_trace_direct(tau: f64) -> f64 {
    let mut sum = 0.0;
    for j in 1.. {
        let term = (-((j * j) as f64) * PI * PI * tau).exp();
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// `1/sqrt(4 pi tau) - 1/2 + (1/sqrt(pi tau)) sum_{j>=1} exp(-j^2/tau)`.
pub fn interval_trace_poisson(tau: f64) -> f64 {
    1.0 / (4.0 * PI * tau).sqrt() - 0.5 + interval_trace_remainder(tau)
}

/// The exponentially small part `(1/sqrt(pi tau)) sum_{j>=1} exp(-j^2/tau)`
/// left after the two power terms of the interval trace.
pub fn interval_trace_remainder(tau: f64) -> f64 {
    let mut theta = 0.0;
    for j in 1.. {
        let term = (-((j * j) as f64) / tau).exp();
        theta += term;
        if term < 1e-16 * theta.max(1e-300) || term == 0.0 {
            break;
        }
    }
    theta / (PI * tau).sqrt()
}

/// `sum_{m in Z} exp(-pi^2 m^2 tau) - 1/sqrt(pi tau)`, the periodic trace
/// of a unit circle (side 2 in the Dirichlet scaling) minus its Weyl term.
fn circle_excess(tau: f64) -> (f64, f64) {
    if tau < 1.0 {
        let mut w = 0.0;
        for k in 1.. {
            let term = (-((k * k) as f64) / tau).exp();
            w += term;
            if term < 1e-17 * w.max(1e-300) || term == 0.0 {
                break;
            }
        }
        let lead = 1.0 / (PI * tau).sqrt();
        (lead * (1.0 + 2.0 * w), 2.0 * w * lead)
    } else {
        let full = 1.0 + 2.0 * interval_trace_direct(tau);
        (full, full - 1.0 / (PI * tau).sqrt())
    }
}

/// `int_0^inf f(t) dt` for an integrand concentrated around `scale`, by
/// quadrature over dyadic pieces in both directions.
fn integrate_half_line(f: impl Fn(f64) -> f64, scale: f64) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-18, rel_tol: 1e-11, ..QuadOptions::default() };
    let mut total = integrate(&f, scale, 2.0 * scale, &opts)?.value;
    for dir in [-1i32, 1] {
        let mut quiet = 0;
        for k in 1..200 {
            let (lo, hi) = if dir < 0 {
                (scale * 2f64.powi(-k), scale * 2f64.powi(1 - k))
            } else {
                (scale * 2f64.powi(k), scale * 2f64.powi(k + 1))
            };
            let v = integrate(&f, lo, hi, &opts)?.value;
            total += v;
            quiet = if v.abs() <= 1e-17 * total.abs() { quiet + 1 } else { 0 };
            if quiet >= 3 {
                break;
            }
        }
    }
    Ok(total)
}

/// `sum_{j>=1} f(j h)` with `f(x) = e^{-x^2} (1 - 2x^2)`, `h^2 = h2`; for
/// `h < 1` through its Poisson dual `-1/2 + (sqrt(pi)/h) sum_k 2 k^2 q e^{-k^2 q}`,
/// `q = pi^2 / h^2`.
fn plate_derivative_sum(h2: f64) -> f64 {
    let mut sum = 0.0;
    if h2 >= 1.0 {
        for j in 1.. {
            let x = ((j * j) as f64) * h2;
            sum += (-x).exp() * (1.0 - 2.0 * x);
            if x > 745.0 || (-x).exp() * (1.0 + 2.0 * x) < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let q = PI * PI / h2;
    for k in 1.. {
        let x = ((k * k) as f64) * q;
        let term = 2.0 * x * (-x).exp();
        sum += term;
        if x > 745.0 || term < 1e-18 * sum {
            break;
        }
    }
    -0.5 + PI.sqrt() / h2.sqrt() * sum
}

/// Casimir pressure of a massless scalar between Dirichlet plates a
/// distance `b` apart with periodic transverse directions of period `a`:
/// `P = -(1/a^2) dE/db`, `E = zeta(-1/2)/2` from the Mellin form of the
/// exact trace. The pure power `a^2 b t^{-3/2}` has zero regularized
/// integral; every other piece converges.
pub fn torus_waveguide_pressure(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!("need a, b > 0, got {a}, {b}")));
    }
    let integrand = |t: f64| {
        // Torus trace prod over two circles of length a: tau = 4t/a^2.
        let (full, excess) = circle_excess(4.0 * t / (a * a));
        let torus = full * full;
        let torus_excess = excess * (full + 1.0 / (PI * 4.0 * t / (a * a)).sqrt());
        let js = plate_derivative_sum(b * b / t);
        let db = torus_excess / (4.0 * PI * t).sqrt() + torus * js / (PI * t).sqrt();
        t.powf(-1.5) * db
    };
    let de_db = 0.5 / (-2.0 * PI.sqrt()) * integrate_half_line(integrand, b * b)?;
    Ok(-de_db / (a * a))
}

/// Spectrum with exact Weyl counting `N(lambda) = g00 lambda^{d_s/2} / Gamma(1 + d_s/2)`:
/// `lambda_j = (j Gamma(1 + d_s/2) / g00)^{2/d_s}` for every `lambda_j <= cutoff`.
pub fn synthetic_weyl_spectrum(d_s: f64, g00: f64, cutoff: f64) -> Result<Spectrum> {
    if !(d_s > 0.0 && g00 > 0.0 && cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("need d_s, g00, cutoff > 0, got {d_s}, {g00}, {cutoff}")));
    }
    let c = gamma_real(1.0 + 0.5 * d_s)? / g00;
    let count = (cutoff.powf(0.5 * d_s) / c).floor();
    if count > BOX_EIGENVALUE_CAP as f64 {
        return Err(Error::CapExceeded { requested: count as u128, cap: BOX_EIGENVALUE_CAP });
    }
    let eigs: Vec<f64> = (1..=count as u64).map(|j| (j as f64 * c).powf(2.0 / d_s)).collect();
    if eigs.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut s = Spectrum::new(eigs, BoundaryCondition::Dirichlet)?;
    s.solver = "weyl".into();
    Ok(s)
}

/// Critical density `zeta(d/2) / (4 pi beta)^{d/2}` of the free Bose gas.
pub fn euclid_bec_critical(d: usize, beta: f64) -> Result<Density> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if d <= 2 {
        return Ok(Density::Diverged);
    }
    let h = d as f64 / 2.0;
    Ok(Density::Finite(zeta_real(h)? / (4.0 * PI * beta).powf(h)))
}

/// Photon energy density `(d / pi^{(d+1)/2}) Gamma((d+1)/2) zeta(d+1) beta^{-(d+1)}`.
pub fn euclid_blackbody(d: usize, beta: f64) -> Result<f64> {
    if d == 0 || !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("need d >= 1 and beta > 0, got d={d}, beta={beta}")));
    }
    let df = d as f64;
    let c = df / PI.powf(0.5 * (df + 1.0)) * gamma_real(0.5 * (df + 1.0))? * zeta_real(df + 1.0)?;
    Ok(c * beta.powf(-(df + 1.0)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTest {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, got: f64, want: f64, tol: f64) -> SelfTest {
    let err = (got - want).abs() / want.abs().max(1e-300);
    SelfTest { name, passed: err <= tol, detail: format!("got {got:e}, want {want:e}, rel err {err:e}") }
}

/// Internal consistency checks run by the CLI `oracle selftest` stage.
pub fn selftest() -> Result<Vec<SelfTest>> {
    let mut out = Vec::new();
    out.push(check("interval_trace_theta_point", interval_trace_poisson(1.0 / PI), interval_trace_direct(1.0 / PI), 1e-12));
    out.push(check("interval_trace_small_tau", interval_trace_poisson(0.01), interval_trace_direct(0.01), 1e-12));
    let iv = box_spectrum(&BoxSpec::new(vec![1.0], BoundaryCondition::Dirichlet)?, 100.0)?;
    out.push(SelfTest {
        name: "unit_interval_spectrum",
        passed: iv.len() == 3 && (iv.eigenvalues()[2] - 9.0 * PI * PI).abs() < 1e-12,
        detail: format!("{:?}", iv.eigenvalues()),
    });
    let sq = box_spectrum(&BoxSpec::cube(2, 1.0, BoundaryCondition::Dirichlet)?, 3.0 * PI * PI)?;
    out.push(SelfTest {
        name: "unit_square_spectrum",
        passed: sq.len() == 1 && (sq.eigenvalues()[0] - 2.0 * PI * PI).abs() < 1e-12,
        detail: format!("{:?}", sq.eigenvalues()),
    });
    let cube = BoxSpec::cube(3, 1.0, BoundaryCondition::Dirichlet)?;
    let t = 0.05;
    let spec = box_spectrum(&cube, 900.0)?;
    let direct: f64 = spec.eigenvalues().iter().rev().map(|v| (-t * v).exp()).sum();
    out.push(check("cube_trace_factorization", direct, cube.heat_trace(t), 1e-10));
    out.push(check("blackbody_d3", euclid_blackbody(3, 1.0)?, PI * PI / 30.0, 1e-12));
    out.push(check("blackbody_d1", euclid_blackbody(1, 1.0)?, PI / 6.0, 1e-12));
    let rc = euclid_bec_critical(3, 1.0)?.value().unwrap_or(f64::NAN);
    out.push(check("bec_critical_d3", rc, 2.612_375_348_685_488 / (4.0 * PI).powf(1.5), 1e-12));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_boxes() {
        let iv = box_spectrum(&BoxSpec::new(vec![1.0], BoundaryCondition::Dirichlet).unwrap(), 100.0).unwrap();
        let want = [PI * PI, 4.0 * PI * PI, 9.0 * PI * PI];
        assert_eq!(iv.len(), 3);
        for (a, b) in iv.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let cube = box_spectrum(&BoxSpec::cube(3, 1.0, BoundaryCondition::Neumann).unwrap(), 0.5).unwrap();
        assert_eq!(cube.eigenvalues(), &[0.0]);
    }

    #[test]
    fn brute_force_count() {
        let b = BoxSpec::new(vec![1.0, 1.3, 0.7], BoundaryCondition::Dirichlet).unwrap();
        let cutoff = 2000.0;
        let s = box_spectrum(&b, cutoff).unwrap();
        let mut count = 0;
        for i in 1..40 {
            for j in 1..40 {
                for k in 1..40 {
                    let v = PI * PI
                        * ((i as f64 / 1.0).powi(2) + (j as f64 / 1.3).powi(2) + (k as f64 / 0.7).powi(2));
                    if v <= cutoff {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(s.len(), count);
    }

    #[test]
    fn trace_forms_agree() {
        for tau in [0.01, 0.1, 1.0 / PI, 0.5, 1.0, 2.0] {
            let a = interval_trace_poisson(tau);
            let b = interval_trace_direct(tau);
            // The Poisson form cancels to ~1e-4 of its leading term near tau = 1.
            assert!((a - b).abs() <= 1e-12 * b.max(1e-4), "{tau}: {a} {b}");
        }
    }

    #[test]
    fn periodic_trace_matches_enumeration() {
        let b = BoxSpec::cube(2, 2.0, BoundaryCondition::Periodic).unwrap();
        let s = box_spectrum(&b, 4000.0).unwrap();
        let t = 0.02;
        let direct: f64 = s.eigenvalues().iter().rev().map(|v| (-t * v).exp()).sum();
        assert!((direct - b.heat_trace(t)).abs() < 1e-10 * direct);
    }

    #[test]
    fn closed_forms() {
        assert!((euclid_blackbody(3, 2.0).unwrap() - PI * PI / 30.0 / 16.0).abs() < 1e-15);
        assert!((euclid_blackbody(2, 1.0).unwrap() - 1.202_056_903_159_594_3 / PI).abs() < 1e-15);
        assert_eq!(euclid_bec_critical(2, 1.0).unwrap(), Density::Diverged);
        let a = euclid_bec_critical(4, 1.0).unwrap().value().unwrap();
        let b = euclid_bec_critical(4, 2.0).unwrap().value().unwrap();
        assert!((b / a - 0.25).abs() < 1e-15);
    }

    #[test]
    fn plate_sum_forms_agree() {
        let direct = |h2: f64| (1..400).map(|j| {
            let x = (j * j) as f64 * h2;
            (-x).exp() * (1.0 - 2.0 * x)
        }).sum::<f64>();
        for h2 in [0.05, 0.3, 0.99] {
            assert!((plate_derivative_sum(h2) - direct(h2)).abs() < 1e-13, "{h2}");
        }
    }

    #[test]
    fn torus_plates_approach_continuum() {
        let want = -PI * PI / 480.0;
        for (a, tol) in [(20.0, 1e-2), (40.0, 1e-4)] {
            let p = torus_waveguide_pressure(a, 1.0).unwrap();
            assert!((p / want - 1.0).abs() < tol, "{a}: {p} {want}");
        }
        let p = torus_waveguide_pressure(60.0, 2.0).unwrap();
        assert!((p / (want / 16.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn synthetic_counts_follow_weyl() {
        let s = synthetic_weyl_spectrum(1.8, 0.1, 1e5).unwrap();
        let g = gamma_real(1.9).unwrap();
        for lam in [1e3, 1e4, 9e4] {
            let n = s.counting_function(lam, false) as f64;
            let w = 0.1 * lam.powf(0.9) / g;
            assert!((n - w).abs() <= 1.0, "{lam}: {n} {w}");
        }
    }

    #[test]
    fn selftest_passes() {
        for t in selftest().unwrap() {
            assert!(t.passed, "{} {}", t.name, t.detail);
        }
    }
}
