//! Spectral zeta function `zeta(s, gamma) = Tr (-Delta + gamma)^{-s}`: direct
//! sums over finite spectra, and the meromorphic extension built from a
//! heat-trace model by splitting the Mellin integral at `t = split`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::oracle::{interval_trace_exact, interval_trace_remainder};
use crate::specfun::{integrate, rgamma, upper_gamma, QuadOptions};
use crate::spectrum::{zero_tolerance, Spectrum};
use crate::trace::HeatTraceModel;

/// A real function of `t > 0`.
pub type TraceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How `K(t)` is known for `t >= split`.
#[derive(Clone)]
pub enum TraceTail {
    /// Eigenvalues of a finite (or truncated) spectrum.
    Spectrum(Vec<f64>),
    /// Any exact evaluator of the trace.
    Exact(TraceFn),
}

/// Representation of the heat trace beyond the model terms.
#[derive(Clone, Default)]
pub struct TraceRepresentation {
    /// `K(t) - model(t)` on `(0, split]`; taken as zero when absent.
    pub remainder: Option<TraceFn>,
    pub tail: Option<TraceTail>,
}

impl TraceRepresentation {
    pub fn spectrum(spectrum: &Spectrum) -> Self {
        TraceRepresentation { remainder: None, tail: Some(TraceTail::Spectrum(spectrum.eigenvalues().to_vec())) }
    }

    pub fn exact(remainder: TraceFn, trace: TraceFn) -> Self {
        TraceRepresentation { remainder: Some(remainder), tail: Some(TraceTail::Exact(trace)) }
    }

    /// The unit Dirichlet interval, `K(t) = sum_j exp(-j^2 pi^2 t)`.
    pub fn interval() -> Self {
        Self::exact(Arc::new(interval_trace_remainder), Arc::new(interval_trace_exact))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZetaConfig {
    pub split: f64,
    /// Taylor terms of `exp(-gamma t)` in the pole sum.
    pub n_max: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        ZetaConfig { split: 1.0, n_max: 20, abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleEntry {
    pub k: usize,
    pub p: i64,
    pub n: usize,
    pub location: Complex64,
    pub residue: Complex64,
}

#[derive(Clone)]
pub struct ZetaExtension {
    pub model: HeatTraceModel,
    pub gamma: Complex64,
    pub poles: Vec<PoleEntry>,
    pub config: ZetaConfig,
    /// What the entire part is made of.
    pub entire_part: String,
    repr: TraceRepresentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaValue {
    pub value: Complex64,
    /// Quadrature error plus the bound on the truncated pole sum.
    pub error: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn near(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * b.norm().max(1.0)
}

pub fn build_extension(
    model: &HeatTraceModel,
    gamma: Complex64,
    repr: TraceRepresentation,
    config: ZetaConfig,
) -> Result<ZetaExtension> {
    if !model.terms.is_empty() {
        model.validate()?;
    }
    if !(config.split > 0.0 && config.split.is_finite()) {
        return Err(Error::InvalidArgument(format!("split must be positive, got {}", config.split)));
    }
    let tail = repr
        .tail
        .as_ref()
        .ok_or_else(|| Error::MissingRepresentation("no trace representation for t >= split".into()))?;
    if let TraceTail::Spectrum(eigs) = tail {
        let tol = eigs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let tol = zero_tolerance(tol);
        if eigs.iter().any(|&v| (Complex64::new(v, 0.0) + gamma).re <= tol) {
            return Err(Error::InvalidArgument(
                "spectrum has a mode with lambda + gamma <= 0 (a Neumann zero mode needs gamma > 0)".into(),
            ));
        }
    }
    let mut poles = Vec::new();
    for term in &model.terms {
        let top = if gamma == Complex64::new(0.0, 0.0) { 0 } else { config.n_max };
        for n in 0..=top {
            let location = term.exponent - n as f64;
            let residue =
                (-gamma).powu(n as u32) * term.coefficient / factorial(n) * rgamma(location);
            poles.push(PoleEntry { k: term.k, p: term.p, n, location, residue });
        }
    }
    let entire_part = format!(
        "(1/Gamma(s)) [int_0^{a} t^(s-1) e^(-gamma t) R(t) dt ({}) + int_{a}^inf t^(s-1) e^(-gamma t) K(t) dt ({})], \
         adaptive Gauss-Kronrod, abs tol {:e}",
        if repr.remainder.is_some() { "exact remainder" } else { "remainder taken as zero" },
        match tail {
            TraceTail::Spectrum(e) => format!("{} eigenvalues", e.len()),
            TraceTail::Exact(_) => "exact trace".into(),
        },
        config.abs_tol,
        a = config.split,
    );
    Ok(ZetaExtension { model: model.clone(), gamma, poles, config, entire_part, repr })
}

/// `int_a^inf t^{s-1} e^{-g t} f(t) dt` by quadrature over doubling
/// intervals until the pieces stop contributing.
fn tail_integral(f: impl Fn(f64) -> Complex64, a: f64, opts: &QuadOptions) -> Result<(Complex64, f64)> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut lo = a;
    for _ in 0..80 {
        let hi = 2.0 * lo;
        let r = integrate(&f, lo, hi, opts)?;
        total += r.value;
        err += r.error;
        if r.value.norm() <= 1e-17 * total.norm() || r.value.norm() < 1e-300 {
            return Ok((total, err));
        }
        lo = hi;
    }
    Err(Error::NoConvergence { index: 0, iterations: 80 })
}

fn entire_integrals(ext: &ZetaExtension, s: Complex64) -> Result<(Complex64, f64)> {
    let a = ext.config.split;
    let g = ext.gamma;
    let opts = QuadOptions { abs_tol: ext.config.abs_tol, rel_tol: ext.config.rel_tol, ..QuadOptions::default() };
    let weight = move |t: f64| ((s - 1.0) * t.ln() - g * t).exp();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    if let Some(r) = &ext.repr.remainder {
        let q = integrate(|t| weight(t) * r(t), 0.0, a, &opts)?;
        value += q.value;
        error += q.error;
    }
    match ext.repr.tail.as_ref().expect("checked at build") {
        TraceTail::Spectrum(eigs) if g.im == 0.0 => {
            // int_a^inf t^{s-1} e^{-mu t} dt = mu^{-s} Gamma(s, mu a)
            for &lam in eigs {
                let mu = lam + g.re;
                if mu * a > 740.0 {
                    continue;
                }
                value += (-s * mu.ln()).exp() * upper_gamma(s, mu * a)?;
            }
        }
        TraceTail::Spectrum(eigs) => {
            let (v, e) = tail_integral(|t| weight(t) * eigs.iter().map(|&l| (-l * t).exp()).sum::<f64>(), a, &opts)?;
            value += v;
            error += e;
        }
        TraceTail::Exact(k) => {
            let (v, e) = tail_integral(|t| weight(t) * k(t), a, &opts)?;
            value += v;
            error += e;
        }
    }
    Ok((value, error))
}

/// Meromorphic extension: pole sum plus entire part, all times `1/Gamma(s)`.
pub fn zeta_extended(ext: &ZetaExtension, s: Complex64) -> Result<ZetaValue> {
    let a = ext.config.split;
    let g = ext.gamma;
    let nearest = s.re.round();
    if s.im.abs() < 1e-12 && nearest <= 0.0 && (s.re - nearest).abs() < 1e-12 {
        // 1/Gamma vanishes here, so only pole terms sitting exactly at s
        // survive, through (1/Gamma(s)) / (s + m) -> (-1)^m m!.
        let m = (-nearest) as usize;
        let target = Complex64::new(nearest, 0.0);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut value = Complex64::new(0.0, 0.0);
        for term in &ext.model.terms {
            for n in 0..=ext.config.n_max.max(m + 1) {
                if near(term.exponent - n as f64, target) && (n == 0 || g != Complex64::new(0.0, 0.0)) {
                    value += (-g).powu(n as u32) * term.coefficient / factorial(n) * sign * factorial(m);
                }
            }
        }
        return Ok(ZetaValue { value, error: 0.0 });
    }
    let rg = rgamma(s);
    let mut poles = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    let gn = g.norm();
    for term in &ext.model.terms {
        let e = term.exponent;
        // Enough terms to pass every pole to the right of s.
        let top = if gn == 0.0 { 0 } else { ext.config.n_max.max((e.re - s.re).ceil().max(0.0) as usize + 2) };
        for n in 0..=top {
            let d = s + n as f64 - e;
            if d.norm() <= 1e-12 * e.norm().max(1.0) {
                let residue = (-g).powu(n as u32) * term.coefficient / factorial(n) * rgamma(e - n as f64);
                return Err(Error::Pole { location: e - n as f64, residue: Some(residue) });
            }
            poles += (-g).powu(n as u32) * term.coefficient / factorial(n) * (d * a.ln()).exp() / d;
        }
        if gn > 0.0 {
            // Geometric bound on the dropped Taylor terms.
            let n = top + 1;
            let d = (s + n as f64 - e).norm().max(1e-300);
            let first = gn.powi(n as i32) * term.coefficient.norm() / factorial(n) * a.powf((s - e).re + n as f64) / d;
            let ratio = gn * a / (n as f64 + 1.0);
            bound += if ratio < 1.0 { first / (1.0 - ratio) } else { f64::INFINITY };
        }
    }
    let (entire, qerr) = entire_integrals(ext, s)?;
    let value = rg * (poles + entire);
    Ok(ZetaValue { value, error: rg.norm() * (qerr + bound) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CasimirEnergy {
    /// `zeta(-1/2, 0) / 2`.
    pub energy: f64,
    pub imaginary: f64,
    pub error: f64,
}

pub fn casimir_energy(ext: &ZetaExtension) -> Result<CasimirEnergy> {
    if ext.gamma != Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument(format!("Casimir energy needs gamma = 0, got {}", ext.gamma)));
    }
    let z = zeta_extended(ext, Complex64::new(-0.5, 0.0))?;
    Ok(CasimirEnergy { energy: 0.5 * z.value.re, imaginary: 0.5 * z.value.im, error: 0.5 * z.error })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectZeta {
    /// The finite sum.
    pub sum: Complex64,
    /// Weyl estimate of the eigenvalues beyond the computed ones.
    pub tail: Option<Complex64>,
    pub warning: Option<String>,
}

impl DirectZeta {
    pub fn corrected(&self) -> Complex64 {
        self.sum + self.tail.unwrap_or_default()
    }
}

/// `sum_j (lambda_j + gamma)^{-s}` with a tail estimate from the counting
/// exponent `alpha` of the top half of the spectrum,
/// `sum_{j>N} ~ int_{N+1/2}^inf lambda(x)^{-s} dx` with
/// `lambda(x) = lambda_N (x/N)^{1/alpha}`.
pub fn zeta_direct(spectrum: &Spectrum, s: Complex64, gamma: Complex64) -> Result<DirectZeta> {
    let eigs = spectrum.eigenvalues();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut warning = None;
    for &lam in eigs.iter().rev() {
        let mu = lam + gamma;
        if mu.norm() < 1e-12 {
            return Err(Error::Pole { location: s, residue: None });
        }
        if mu.norm() < 1e-8 {
            warning = Some(format!("lambda + gamma = {mu} is close to zero"));
        }
        sum += (-s * mu.ln()).exp();
    }
    let n = eigs.len();
    let tail = if n >= 8 {
        let half = n / 2;
        let (lh, ln) = (eigs[half - 1], eigs[n - 1]);
        let alpha = ((n as f64) / half as f64).ln() / (ln / lh).ln();
        let r = s / alpha;
        (alpha.is_finite() && alpha > 0.0 && s.re > alpha).then(|| {
            let nf = n as f64;
            (-s * ln.ln() + r * nf.ln() + (1.0 - r) * (nf + 0.5).ln()).exp() / (r - 1.0)
        })
    } else {
        None
    };
    Ok(DirectZeta { sum, tail, warning })
}

/// Pole table: `k,p,n,re_location,im_location,re_residue,im_residue`.
pub fn pole_table_csv(ext: &ZetaExtension) -> String {
    let mut out = String::from("k,p,n,re_location,im_location,re_residue,im_residue\n");
    for e in &ext.poles {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.k,
            e.p,
            e.n,
            fmt_f64(e.location.re),
            fmt_f64(e.location.im),
            fmt_f64(e.residue.re),
            fmt_f64(e.residue.im)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BoundaryCondition;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn interval_ext() -> ZetaExtension {
        build_extension(&HeatTraceModel::interval(), c(0.0), TraceRepresentation::interval(), ZetaConfig::default())
            .unwrap()
    }

    #[test]
    fn direct_small_cases() {
        let one = Spectrum::new(vec![1.0], BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(zeta_direct(&one, c(2.0), c(0.0)).unwrap().sum, c(1.0));
        let s = Spectrum::new(vec![0.0, 1.0, 3.0], BoundaryCondition::Neumann).unwrap();
        let z = zeta_direct(&s, c(1.0), c(1.0)).unwrap().sum;
        assert!((z - c(1.75)).norm() < 1e-15);
        assert!(zeta_direct(&s, c(1.0), c(0.0)).is_err());
    }

    #[test]
    fn interval_direct_with_tail() {
        let eigs: Vec<f64> = (1..=1000).map(|j| (j * j) as f64 * PI * PI).collect();
        let s = Spectrum::new(eigs, BoundaryCondition::Dirichlet).unwrap();
        let z = zeta_direct(&s, c(1.0), c(0.0)).unwrap();
        assert!((z.corrected().re - 1.0 / 6.0).abs() < 1e-8);
        assert!((z.sum.re - 1.0 / 6.0).abs() > 1e-5);
    }

    #[test]
    fn interval_casimir() {
        let e = casimir_energy(&interval_ext()).unwrap();
        assert!((e.energy + PI / 24.0).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn interval_special_values() {
        let ext = interval_ext();
        assert!((zeta_extended(&ext, c(0.0)).unwrap().value - c(-0.5)).norm() < 1e-12);
        for n in 1..=5 {
            assert!(zeta_extended(&ext, c(-(n as f64))).unwrap().value.norm() < 1e-8);
        }
        // zeta(2s) pi^{-2s} at s = 2: pi^4/90 / pi^4.
        let v = zeta_extended(&ext, c(2.0)).unwrap().value;
        assert!((v.re - 1.0 / 90.0).abs() < 1e-10);
        let v = zeta_extended(&ext, c(-1.5)).unwrap().value;
        let want = crate::specfun::zeta_real(-3.0).unwrap() * PI.powi(3);
        assert!((v.re - want).abs() < 1e-8, "{v} {want}");
    }

    #[test]
    fn interval_pole() {
        let ext = interval_ext();
        let p = ext.poles.iter().find(|p| p.k == 0).unwrap();
        assert!((p.residue - c(1.0 / (2.0 * PI))).norm() < 1e-14);
        match zeta_extended(&ext, c(0.5)) {
            Err(Error::Pole { residue: Some(r), .. }) => assert!((r.re - 0.5 / PI).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shifted_interval_matches_direct() {
        let eigs: Vec<f64> = (1..=400).map(|j| (j * j) as f64 * PI * PI).collect();
        let spec = Spectrum::new(eigs, BoundaryCondition::Dirichlet).unwrap();
        let g = c(2.5);
        let ext = build_extension(&HeatTraceModel::interval(), g, TraceRepresentation::interval(), ZetaConfig::default())
            .unwrap();
        for s in [c(1.5), Complex64::new(2.0, 1.0)] {
            let d = zeta_direct(&spec, s, g).unwrap().corrected();
            let e = zeta_extended(&ext, s).unwrap().value;
            assert!((d - e).norm() < 1e-6 * d.norm(), "{s}: {d} {e}");
        }
    }

    #[test]
    fn neumann_zero_mode_needs_shift() {
        let s = Spectrum::new(vec![0.0, 2.0, 5.0], BoundaryCondition::Neumann).unwrap();
        let m = HeatTraceModel::constant(1.0, 0.3);
        assert!(build_extension(&m, c(0.0), TraceRepresentation::spectrum(&s), ZetaConfig::default()).is_err());
        assert!(build_extension(&m, c(0.5), TraceRepresentation::spectrum(&s), ZetaConfig::default()).is_ok());
        assert!(matches!(
            build_extension(&m, c(0.5), TraceRepresentation::default(), ZetaConfig::default()),
            Err(Error::MissingRepresentation(_))
        ));
    }

    #[test]
    fn empty_trace_has_zero_energy() {
        let m = HeatTraceModel::new(1.0, 2.0, 1.0);
        let repr = TraceRepresentation { remainder: None, tail: Some(TraceTail::Spectrum(Vec::new())) };
        let ext = build_extension(&m, c(0.0), repr, ZetaConfig::default()).unwrap();
        assert_eq!(casimir_energy(&ext).unwrap().energy, 0.0);
    }

    #[test]
    fn pole_table_layout() {
        let csv = pole_table_csv(&interval_ext());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,p,n,re_location,im_location,re_residue,im_residue");
        assert_eq!(lines.len(), 3);
    }
}
