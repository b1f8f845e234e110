use std::f64::consts::PI;
use std::path::PathBuf;

use carpet_core::eigensolve::carpet_spectrum;
use carpet_core::graph::ApproxGraph;
use carpet_core::oracle::selftest;
use carpet_core::thermo::{
    bec_diagnose, blackbody, casimir_waveguide_thermal, casimir_waveguide_zero_t, critical_densities,
    particle_density, solve_fugacity, Density, GasState, Source,
};
use carpet_core::trace::{
    counting_series, default_counting_grid, default_fourier_window, default_t_grid, default_window, detect_log_period, estimate_period,
    extract_fourier, extract_with_boundary, fit_spectral_dimension, heat_trace, log_grid, spectral_volume,
    walk_dimension, PeriodDetection, SpectralFit,
};
use carpet_core::zeta::{
    build_extension, casimir_energy, pole_table_csv, zeta_extended, TraceRepresentation, ZetaConfig, ZetaExtension,
};
use carpet_core::{BoundaryCondition, CarpetSpec, Error, HeatTraceModel, Result, Spectrum, WeylSeries};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::artifacts::{csv, Artifacts};
use crate::config::RunConfig;

const T_POINTS: usize = 400;
const S_POINTS: usize = 600;

fn provenance(cfg: &RunConfig, spec: Option<&CarpetSpec>) -> Value {
    json!({
        "tool": concat!("carpet ", env!("CARGO_PKG_VERSION")),
        "spec_hash": spec.map(|s| s.spec_hash()),
        "name": spec.and_then(|s| s.name().map(str::to_string)),
        "level": cfg.level,
        "bc": cfg.bc,
        "solver": cfg.solver,
    })
}

fn stage_dir(cfg: &RunConfig, stage: &str) -> PathBuf {
    cfg.out.join(stage)
}

pub fn validate(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.spec()?;
    let report = spec.validate();
    let summary = json!({
        "name": spec.name(),
        "spec_hash": spec.spec_hash(),
        "dimension": spec.dimension(),
        "length_scale": spec.length_scale(),
        "mass_scale": spec.mass_scale(),
        "d_h": spec.hausdorff_dimension(),
        "valid": report.is_valid(),
        "conditions": report,
    });
    let mut a = Artifacts::new(&stage_dir(cfg, "carpet"), "carpet", provenance(cfg, Some(&spec)))?;
    a.json("validation.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn info(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.spec()?;
    let bounds = spec.dimension_bounds();
    let counts: Vec<Value> = (0..=cfg.level)
        .map(|n| json!({ "level": n, "cells": spec.cell_count(n).map(|c| c.to_string()) }))
        .collect();
    let summary = json!({
        "name": spec.name(),
        "spec_hash": spec.spec_hash(),
        "dimension": spec.dimension(),
        "length_scale": spec.length_scale(),
        "mass_scale": spec.mass_scale(),
        "bounds": bounds,
        "walk_dimension_range": [bounds.d_w_lower, bounds.d_w_upper],
        "cell_counts": counts,
        "spec_text": spec.to_text(),
    });
    let mut a = Artifacts::new(&stage_dir(cfg, "carpet"), "carpet", provenance(cfg, Some(&spec)))?;
    a.json("info.json", &summary)?;
    a.write("carpet.spec", spec.to_text().as_bytes())?;
    a.finish()?;
    Ok(summary)
}

pub fn graph_build(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.spec()?;
    let g = ApproxGraph::build_with(&spec, cfg.level, cfg.solver.adjacency, cfg.solver.cell_cap)?;
    let lap = g.laplacian(cfg.bc)?;
    let summary = json!({
        "spec_hash": spec.spec_hash(),
        "level": cfg.level,
        "bc": cfg.bc,
        "vertices": g.vertex_count(),
        "edges": g.edges.len(),
        "laplacian_order": lap.order(),
        "laplacian_nnz": lap.nnz(),
        "components": g.components(),
        "degrees": g.degree_stats(),
    });
    let mut a = Artifacts::new(&stage_dir(cfg, "graph"), "graph", provenance(cfg, Some(&spec)))?;
    a.write("edges.txt", g.to_edge_list(Some(cfg.bc)).as_bytes())?;
    a.json("graph.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

/// Spectrum for `bc`, from the cache when present. The key covers the spec
/// hash, level, boundary condition and every solver setting.
pub fn load_spectrum(cfg: &RunConfig, spec: &CarpetSpec, bc: BoundaryCondition) -> Result<(Spectrum, bool)> {
    let settings = serde_json::to_string(&cfg.solver)?;
    let key = Spectrum::cache_key(&spec.spec_hash(), cfg.level, bc, &settings);
    let path = cfg.cache.join(format!("{key}.spectrum"));
    if path.is_file() {
        if let Ok(s) = Spectrum::read_cache(&path) {
            if s.spec_hash == spec.spec_hash() && s.level == Some(cfg.level) && s.bc == bc {
                return Ok((s, true));
            }
        }
    }
    let s = carpet_spectrum(spec, cfg.level, bc, &cfg.solver)?;
    std::fs::create_dir_all(&cfg.cache)?;
    s.write_cache(&path)?;
    Ok((s, false))
}

fn spectrum_summary(s: &Spectrum, cached: bool) -> Value {
    json!({
        "count": s.len(),
        "bc": s.bc,
        "level": s.level,
        "spec_hash": s.spec_hash,
        "solver": s.solver,
        "complete": s.complete,
        "zero_modes": s.zero_modes(),
        "lambda1": s.lambda1,
        "largest": s.largest(),
        "cached": cached,
    })
}

pub fn spectrum_compute(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.spec()?;
    let (s, cached) = load_spectrum(cfg, &spec, cfg.bc)?;
    let mut a = Artifacts::new(&stage_dir(cfg, "spectrum"), "spectrum", provenance(cfg, Some(&spec)))?;
    a.write(
        "eigenvalues.csv",
        csv(&["index", "eigenvalue"], s.eigenvalues().iter().enumerate().map(|(i, &v)| (vec![i as i64], vec![v]))).as_bytes(),
    )?;
    let summary = spectrum_summary(&s, cached);
    a.json("spectrum.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub struct Analysis {
    pub fit: SpectralFit,
    pub fourier_window: (f64, f64),
    pub period: f64,
    pub model: HeatTraceModel,
    pub heat: WeylSeries,
    pub counting: Option<WeylSeries>,
    pub detection: Option<PeriodDetection>,
    pub warnings: Vec<String>,
}

/// Spectral dimension, log-period and Fourier model of a carpet spectrum.
/// With a Dirichlet partner the boundary terms are fitted too.
pub fn analyze(cfg: &RunConfig, spec: &CarpetSpec, s: &Spectrum, dirichlet: Option<&Spectrum>) -> Result<Analysis> {
    let grid = default_t_grid(s, T_POINTS)?;
    let heat = heat_trace(s, &grid)?;
    let window = match cfg.window {
        Some(w) => w,
        None => default_window(&heat, s.len())?,
    };
    let fit = fit_spectral_dimension(&heat, window)?;
    let period = estimate_period(spec, fit.d_s)?;
    let mut warnings = Vec::new();
    let fw = match cfg.fourier_window {
        Some(w) => w,
        None => default_fourier_window(&heat, s.len()).unwrap_or(window),
    };
    let windowed = heat.window(fw.0, fw.1);
    let mut model = match dirichlet {
        Some(d) => {
            let hd = heat_trace(d, &grid)?;
            extract_with_boundary(&hd.window(fw.0, fw.1), &windowed, fit.d_s, period, cfg.p_max)?
        }
        None => match extract_fourier(&windowed, fit.d_s, period, cfg.p_max) {
            Ok(m) => m,
            Err(Error::InsufficientData(why)) => {
                // Too short a window for whole periods: keep the mean level only.
                warnings.push(format!("no Fourier coefficients: {why}"));
                let mean = windowed.clone().with_ratio(fit.d_s);
                let g00 = mean.ratio.iter().sum::<f64>() / mean.ratio.len() as f64;
                HeatTraceModel { period, ..HeatTraceModel::constant(fit.d_s, g00) }
            }
            Err(e) => return Err(e),
        },
    };
    model.d_w = walk_dimension(spec, fit.d_s);
    let (counting, detection) = match default_counting_grid(s, S_POINTS).and_then(|g| counting_series(s, &g)) {
        Ok(c) => {
            let c = c.with_ratio(fit.d_s);
            let det = match detect_log_period(&c, fit.d_s, 0.5, 10.0, 400) {
                Ok(d) => Some(d),
                Err(e) => {
                    warnings.push(format!("no period detection: {e}"));
                    None
                }
            };
            (Some(c), det)
        }
        Err(e) => {
            warnings.push(format!("no counting function: {e}"));
            (None, None)
        }
    };
    Ok(Analysis { fit, fourier_window: fw, period, model, heat: heat.with_ratio(fit.d_s), counting, detection, warnings })
}

const PLOT_SCRIPT: &str = r#"# Weyl ratio W(s) = N(s) / s^(d_s/2) and heat-trace ratio t^(d_s/2) K(t).
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def load(name, x, y):
    with open(os.path.join(here, name)) as f:
        rows = list(csv.DictReader(f))
    return [float(r[x]) for r in rows], [float(r[y]) for r in rows]


fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
if os.path.exists(os.path.join(here, "weyl_ratio.csv")):
    s, w = load("weyl_ratio.csv", "s", "weyl_ratio")
    ax1.semilogx(s, w, lw=1)
ax1.set_xlabel("s")
ax1.set_ylabel("N(s) / s^(d_s/2)")
t, r = load("heat_trace.csv", "t", "weyl_ratio")
ax2.semilogx(t, r, lw=1)
ax2.set_xlabel("t")
ax2.set_ylabel("t^(d_s/2) K(t)")
fig.suptitle(open(os.path.join(here, "title.txt")).read().strip())
fig.tight_layout()
fig.savefig(os.path.join(here, "weyl_ratio.png"), dpi=150)
"#;

fn model_rows(m: &HeatTraceModel) -> Vec<(Vec<i64>, Vec<f64>)> {
    m.terms
        .iter()
        .map(|t| (vec![t.k as i64, t.p], vec![t.exponent.re, t.exponent.im, t.coefficient.re, t.coefficient.im]))
        .collect()
}

pub fn trace_analyze(cfg: &RunConfig, boundary: bool) -> Result<Value> {
    let spec = cfg.spec()?;
    // Boundary terms come from the Dirichlet/Neumann pair.
    let main_bc = if boundary { BoundaryCondition::Neumann } else { cfg.bc };
    let (s, cached) = load_spectrum(cfg, &spec, main_bc)?;
    let d = if boundary { Some(load_spectrum(cfg, &spec, BoundaryCondition::Dirichlet)?.0) } else { None };
    let an = analyze(cfg, &spec, &s, d.as_ref())?;
    let mut a = Artifacts::new(&stage_dir(cfg, "trace"), "trace", provenance(cfg, Some(&spec)))?;
    a.write(
        "heat_trace.csv",
        csv(
            &["t", "heat_trace", "weyl_ratio"],
            (0..an.heat.len()).map(|i| (vec![], vec![an.heat.x[i], an.heat.value[i], an.heat.ratio[i]])),
        )
        .as_bytes(),
    )?;
    if let Some(c) = &an.counting {
        a.write(
            "weyl_ratio.csv",
            csv(&["s", "count", "weyl_ratio"], (0..c.len()).map(|i| (vec![], vec![c.x[i], c.value[i], c.ratio[i]]))).as_bytes(),
        )?;
    }
    if let Some(det) = &an.detection {
        a.write(
            "periodogram.csv",
            csv(&["period", "amplitude"], det.periodogram.iter().map(|&(p, v)| (vec![], vec![p, v]))).as_bytes(),
        )?;
    }
    a.write(
        "fourier.csv",
        csv(&["k", "p", "re_exponent", "im_exponent", "re_coefficient", "im_coefficient"], model_rows(&an.model))
            .as_bytes(),
    )?;
    a.write("model.json", an.model.to_json()?.as_bytes())?;
    let title = format!("{} level {}: d_s = {:.4}", spec.name().unwrap_or("carpet"), cfg.level, an.fit.d_s);
    a.write("title.txt", format!("{title}\n").as_bytes())?;
    a.write("plot_weyl_ratio.py", PLOT_SCRIPT.as_bytes())?;
    let bounds = spec.dimension_bounds();
    let summary = json!({
        "spectrum": spectrum_summary(&s, cached),
        "boundary_terms": boundary,
        "fit": an.fit,
        "fourier_window": [an.fourier_window.0, an.fourier_window.1],
        "d_s_bounds": [bounds.d_s_lower, bounds.d_s_upper],
        "walk_dimension": an.model.d_w,
        "period": an.period,
        "detected_period": an.detection.as_ref().map(|d| d.period),
        "g00": an.model.g00(),
        "g0_extrema": an.model.g0_extrema(),
        "warnings": an.warnings,
    });
    a.json("trace.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

/// A heat-trace model from `--model`, the Euclidean `--euclid d`, or the
/// fitted carpet model. The spectrum is returned when a carpet was used.
pub struct ModelChoice {
    pub model_file: Option<PathBuf>,
    pub euclid: Option<usize>,
}

fn resolve_model(cfg: &RunConfig, choice: &ModelChoice) -> Result<(HeatTraceModel, Option<(CarpetSpec, Spectrum)>)> {
    let carpet = if cfg.carpet.is_some() {
        let spec = cfg.spec()?;
        let (s, _) = load_spectrum(cfg, &spec, cfg.bc)?;
        Some((spec, s))
    } else {
        None
    };
    let model = match (&choice.model_file, choice.euclid) {
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either --model or --euclid".into())),
        (Some(path), None) => HeatTraceModel::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(d)) => {
            if d == 0 {
                return Err(Error::InvalidArgument("--euclid needs d >= 1".into()));
            }
            HeatTraceModel::euclidean(d)
        }
        (None, None) => match &carpet {
            Some((spec, s)) => analyze(cfg, spec, s, None)?.model,
            None => {
                return Err(Error::InvalidArgument("need a heat-trace model: --model, --euclid or a carpet".into()))
            }
        },
    };
    Ok((model, carpet))
}

fn extension(cfg: &RunConfig, interval: bool, choice: &ModelChoice, gamma: Complex64) -> Result<(ZetaExtension, Value)> {
    if interval {
        let ext = build_extension(&HeatTraceModel::interval(), gamma, TraceRepresentation::interval(), ZetaConfig::default())?;
        return Ok((ext, json!({ "domain": "unit Dirichlet interval" })));
    }
    let (model, carpet) = resolve_model(cfg, choice)?;
    let (_, s) = carpet.ok_or_else(|| {
        Error::MissingRepresentation("the zeta extension needs a spectrum for large t (give a carpet or --interval)".into())
    })?;
    let ext = build_extension(&model, gamma, TraceRepresentation::spectrum(&s), ZetaConfig::default())?;
    Ok((ext, json!({ "domain": "carpet", "spec_hash": s.spec_hash, "level": s.level, "bc": s.bc })))
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn zeta_eval(cfg: &RunConfig, interval: bool, choice: &ModelChoice, gamma: Complex64, points: &[Complex64]) -> Result<Value> {
    let (ext, domain) = extension(cfg, interval, choice, gamma)?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &s in points {
        let z = zeta_extended(&ext, s)?;
        rows.push((vec![], vec![s.re, s.im, z.value.re, z.value.im, z.error]));
        values.push(json!({ "s": complex_json(s), "value": complex_json(z.value), "error": z.error }));
    }
    let mut a = Artifacts::new(&stage_dir(cfg, "zeta"), "zeta", provenance(cfg, None))?;
    a.write("zeta.csv", csv(&["re_s", "im_s", "re_zeta", "im_zeta", "error"], rows).as_bytes())?;
    let summary = json!({ "domain": domain, "gamma": complex_json(gamma), "values": values });
    a.json("zeta.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn zeta_poles(cfg: &RunConfig, interval: bool, choice: &ModelChoice, gamma: Complex64) -> Result<Value> {
    let (ext, domain) = extension(cfg, interval, choice, gamma)?;
    let mut a = Artifacts::new(&stage_dir(cfg, "zeta"), "zeta", provenance(cfg, None))?;
    a.write("poles.csv", pole_table_csv(&ext).as_bytes())?;
    let summary = json!({ "domain": domain, "gamma": complex_json(gamma), "poles": ext.poles.len() });
    a.json("poles.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn zeta_casimir(cfg: &RunConfig, interval: bool, choice: &ModelChoice) -> Result<Value> {
    let (ext, domain) = extension(cfg, interval, choice, Complex64::new(0.0, 0.0))?;
    let e = casimir_energy(&ext)?;
    let summary = json!({ "domain": domain, "casimir": e });
    let mut a = Artifacts::new(&stage_dir(cfg, "zeta"), "zeta", provenance(cfg, None))?;
    a.json("casimir.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub struct BecArgs {
    pub beta: f64,
    pub l: f64,
    pub rho: Option<f64>,
}

pub fn thermo_bec(cfg: &RunConfig, choice: &ModelChoice, args: &BecArgs) -> Result<Value> {
    let (model, carpet) = resolve_model(cfg, choice)?;
    let (upper, lower) = critical_densities(&model, args.beta)?;
    let report = carpet.as_ref().map(|(spec, _)| bec_diagnose(spec, Some(&model)));
    let at_one = particle_density(&GasState::new(args.beta, 1.0, args.l)?, Source::Model(&model))?;
    let mut summary = json!({
        "model_d_s": model.d_s,
        "beta": args.beta,
        "l": args.l,
        "critical_density_upper": upper,
        "critical_density_lower": lower,
        "model_density_at_z1": at_one,
        "diagnosis": report,
    });
    if let Some(target) = args.rho {
        let from_model = solve_fugacity(target, args.beta, args.l, Source::Model(&model))?;
        summary["fugacity_model"] = serde_json::to_value(from_model)?;
        if let Some((_, s)) = &carpet {
            let volume = spectral_volume(&model, args.l)?;
            let f = solve_fugacity(target, args.beta, args.l, Source::Spectrum { spectrum: s, volume })?;
            summary["fugacity_spectrum"] = serde_json::to_value(f)?;
        }
    }
    let mut a = Artifacts::new(&stage_dir(cfg, "thermo"), "thermo", provenance(cfg, carpet.as_ref().map(|c| &c.0)))?;
    a.json("bec.json", &summary)?;
    a.write("model.json", model.to_json()?.as_bytes())?;
    a.finish()?;
    Ok(summary)
}

pub fn thermo_blackbody(cfg: &RunConfig, choice: &ModelChoice, beta: f64, l: f64) -> Result<Value> {
    let (model, carpet) = resolve_model(cfg, choice)?;
    let b = blackbody(&model, beta, l)?;
    let summary = json!({
        "model_d_s": model.d_s,
        "beta": beta,
        "l": l,
        "blackbody": b,
        "stefan_boltzmann_3d": PI * PI / (30.0 * beta.powi(4)),
    });
    let mut a = Artifacts::new(&stage_dir(cfg, "thermo"), "thermo", provenance(cfg, carpet.as_ref().map(|c| &c.0)))?;
    a.json("blackbody.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn thermo_casimir(cfg: &RunConfig, choice: &ModelChoice, a_len: f64, b_len: f64, beta: Option<f64>) -> Result<Value> {
    let (model, carpet) = resolve_model(cfg, choice)?;
    let zero = casimir_waveguide_zero_t(&model, a_len, b_len)?;
    let thermal = beta.map(|beta| casimir_waveguide_thermal(&model, a_len, b_len, beta)).transpose()?;
    let summary = json!({ "a": a_len, "b": b_len, "beta": beta, "zero_temperature": zero, "thermal": thermal });
    let mut a = Artifacts::new(&stage_dir(cfg, "thermo"), "thermo", provenance(cfg, carpet.as_ref().map(|c| &c.0)))?;
    a.json("casimir.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn thermo_sweep(cfg: &RunConfig, choice: &ModelChoice, lo: f64, hi: f64, steps: usize, l: f64) -> Result<Value> {
    let (model, carpet) = resolve_model(cfg, choice)?;
    let grid = log_grid(lo, hi, steps)?;
    let finite = |d: Density| d.value().unwrap_or(f64::INFINITY);
    let mut rows = Vec::new();
    for &beta in &grid {
        let (upper, lower) = critical_densities(&model, beta)?;
        let b = blackbody(&model, beta, l)?;
        rows.push((vec![], vec![beta, finite(lower), finite(upper), b.energy_density, b.pressure]));
    }
    let mut a = Artifacts::new(&stage_dir(cfg, "thermo"), "thermo", provenance(cfg, carpet.as_ref().map(|c| &c.0)))?;
    a.write(
        "sweep.csv",
        csv(&["beta", "critical_density_lower", "critical_density_upper", "energy_density", "pressure"], rows)
            .as_bytes(),
    )?;
    let summary = json!({ "model_d_s": model.d_s, "points": grid.len(), "beta_range": [lo, hi], "l": l });
    a.json("sweep.json", &summary)?;
    a.finish()?;
    Ok(summary)
}

pub fn oracle_selftest(cfg: &RunConfig) -> Result<(Value, bool)> {
    let tests = selftest()?;
    let ok = tests.iter().all(|t| t.passed);
    let summary = json!({ "passed": ok, "tests": tests });
    let mut a = Artifacts::new(&stage_dir(cfg, "oracle"), "oracle", provenance(cfg, None))?;
    a.json("selftest.json", &summary)?;
    a.finish()?;
    Ok((summary, ok))
}

/// Every carpet stage in order: validation, spectrum, trace analysis, pole
/// table and BEC report.
pub fn run_all(cfg: &RunConfig, beta: f64) -> Result<Value> {
    let v = validate(cfg)?;
    let s = spectrum_compute(cfg)?;
    let t = trace_analyze(cfg, false)?;
    let choice = ModelChoice { model_file: None, euclid: None };
    let gamma = if cfg.bc == BoundaryCondition::Neumann { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    let p = zeta_poles(cfg, false, &choice, gamma)?;
    let b = thermo_bec(cfg, &choice, &BecArgs { beta, l: 1.0, rho: None })?;
    Ok(json!({ "carpet": v, "spectrum": s, "trace": t, "zeta": p, "thermo": b }))
}
