//! Python bindings: carpet specs, spectra, heat-trace models, the continued
//! spectral zeta function and the gas observables.

use carpet_core::eigensolve::{carpet_spectrum, SolverSettings};
use carpet_core::oracle::{box_spectrum, euclid_blackbody, selftest, BoxSpec};
use carpet_core::specfun;
use carpet_core::thermo::{self, GasState, Source};
use carpet_core::trace::{
    default_fourier_window, default_t_grid, default_window, estimate_period, extract_fourier, fit_spectral_dimension,
    heat_trace, walk_dimension, DEFAULT_P_MAX,
};
use carpet_core::zeta::{build_extension, casimir_energy, zeta_direct, zeta_extended, TraceRepresentation, ZetaConfig, ZetaExtension};
use carpet_core::{BoundaryCondition, CarpetSpec, Error, HeatTraceModel, Spectrum};
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    let msg = format!("[{}] {e}", e.kind());
    match e {
        Error::Io(_) => PyOSError::new_err(msg),
        Error::Pole { .. } => PyZeroDivisionError::new_err(msg),
        Error::NoConvergence { .. } | Error::FactorizationBreakdown { .. } => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

/// Plain Python objects through JSON, so every serializable report maps to
/// dicts and lists without per-type glue.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_bc(bc: &str) -> PyResult<BoundaryCondition> {
    bc.parse().map_err(err)
}

#[pyclass(name = "CarpetSpec", module = "carpet", frozen)]
struct PyCarpetSpec {
    inner: CarpetSpec,
}

#[pymethods]
impl PyCarpetSpec {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(PyCarpetSpec { inner: CarpetSpec::preset(name).map_err(err)? })
    }

    #[staticmethod]
    fn presets() -> Vec<&'static str> {
        CarpetSpec::preset_names().to_vec()
    }

    /// Parses the `key = value` spec text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCarpetSpec { inner: CarpetSpec::parse(text).map_err(err)? })
    }

    #[staticmethod]
    fn menger(dimension: usize, length_scale: usize, hole: usize) -> PyResult<Self> {
        Ok(PyCarpetSpec { inner: CarpetSpec::menger(dimension, length_scale, hole).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_string)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn length_scale(&self) -> usize {
        self.inner.length_scale()
    }

    #[getter]
    fn mass_scale(&self) -> usize {
        self.inner.mass_scale()
    }

    #[getter]
    fn hausdorff_dimension(&self) -> f64 {
        self.inner.hausdorff_dimension()
    }

    #[getter]
    fn spec_hash(&self) -> String {
        self.inner.spec_hash()
    }

    /// `{"valid": bool, "conditions": {...}}`
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = self.inner.validate();
        to_py(py, &serde_json::json!({ "valid": r.is_valid(), "conditions": r }))
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().is_valid()
    }

    fn dimension_bounds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.dimension_bounds())
    }

    fn cell_count(&self, level: usize) -> Option<u128> {
        self.inner.cell_count(level)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "CarpetSpec(name={:?}, d={}, l={}, m={})",
            self.inner.name().unwrap_or(""),
            self.inner.dimension(),
            self.inner.length_scale(),
            self.inner.mass_scale()
        )
    }
}

#[pyclass(name = "Spectrum", module = "carpet", frozen)]
struct PySpectrum {
    inner: Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (eigenvalues, bc = "neumann"))]
    fn new(eigenvalues: Vec<f64>, bc: &str) -> PyResult<Self> {
        Ok(PySpectrum { inner: Spectrum::new(eigenvalues, parse_bc(bc)?).map_err(err)? })
    }

    /// Laplacian spectrum of the level-`level` approximation graph.
    #[staticmethod]
    #[pyo3(signature = (spec, level, bc = "neumann", dense_cap = None))]
    fn of_carpet(py: Python<'_>, spec: &PyCarpetSpec, level: usize, bc: &str, dense_cap: Option<usize>) -> PyResult<Self> {
        let bc = parse_bc(bc)?;
        let mut settings = SolverSettings::default();
        if let Some(cap) = dense_cap {
            settings.dense_cap = cap;
        }
        let s = py.detach(|| carpet_spectrum(&spec.inner, level, bc, &settings)).map_err(err)?;
        Ok(PySpectrum { inner: s })
    }

    /// Exact box eigenvalues up to `cutoff`.
    #[staticmethod]
    #[pyo3(signature = (sides, cutoff, bc = "dirichlet"))]
    fn of_box(sides: Vec<f64>, cutoff: f64, bc: &str) -> PyResult<Self> {
        let b = BoxSpec::new(sides, parse_bc(bc)?).map_err(err)?;
        Ok(PySpectrum { inner: box_spectrum(&b, cutoff).map_err(err)? })
    }

    #[staticmethod]
    fn read_cache(path: &str) -> PyResult<Self> {
        Ok(PySpectrum { inner: Spectrum::read_cache(path.as_ref()).map_err(err)? })
    }

    fn write_cache(&self, path: &str) -> PyResult<()> {
        self.inner.write_cache(path.as_ref()).map_err(err)
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    #[getter]
    fn bc(&self) -> &'static str {
        self.inner.bc.as_str()
    }

    #[getter]
    fn level(&self) -> Option<usize> {
        self.inner.level
    }

    #[getter]
    fn lambda1(&self) -> Option<f64> {
        self.inner.lambda1
    }

    #[getter]
    fn solver(&self) -> String {
        self.inner.solver.clone()
    }

    fn zero_modes(&self) -> usize {
        self.inner.zero_modes()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[pyo3(signature = (s, normalized = false))]
    fn counting_function(&self, s: f64, normalized: bool) -> usize {
        self.inner.counting_function(s, normalized)
    }

    fn heat_trace(&self, t: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(heat_trace(&self.inner, &t).map_err(err)?.value)
    }

    /// Power-law fit of the heat trace on the default grid and window.
    #[pyo3(signature = (window = None, points = 400))]
    fn fit_spectral_dimension<'py>(&self, py: Python<'py>, window: Option<(f64, f64)>, points: usize) -> PyResult<Bound<'py, PyAny>> {
        let grid = default_t_grid(&self.inner, points).map_err(err)?;
        let series = heat_trace(&self.inner, &grid).map_err(err)?;
        let w = match window {
            Some(w) => w,
            None => default_window(&series, self.inner.len()).map_err(err)?,
        };
        to_py(py, &fit_spectral_dimension(&series, w).map_err(err)?)
    }

    /// `sum_j (lambda_j + gamma)^{-s}` plus the Weyl tail estimate.
    #[pyo3(signature = (s, gamma = Complex64::new(0.0, 0.0)))]
    fn zeta_direct(&self, s: Complex64, gamma: Complex64) -> PyResult<Complex64> {
        Ok(zeta_direct(&self.inner, s, gamma).map_err(err)?.corrected())
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(n={}, bc={}, solver={:?})", self.inner.len(), self.inner.bc.as_str(), self.inner.solver)
    }
}

#[pyclass(name = "HeatTraceModel", module = "carpet", frozen)]
struct PyModel {
    inner: HeatTraceModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn euclidean(d: usize) -> Self {
        PyModel { inner: HeatTraceModel::euclidean(d) }
    }

    #[staticmethod]
    fn interval() -> Self {
        PyModel { inner: HeatTraceModel::interval() }
    }

    #[staticmethod]
    #[pyo3(signature = (d_s, g00, period = 1.0))]
    fn constant(d_s: f64, g00: f64, period: f64) -> Self {
        PyModel { inner: HeatTraceModel { period, ..HeatTraceModel::constant(d_s, g00) } }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel { inner: HeatTraceModel::from_json(text).map_err(err)? })
    }

    /// Fitted `d_s`, period `log R` and Fourier coefficients of a carpet
    /// spectrum.
    #[staticmethod]
    #[pyo3(signature = (spectrum, spec, p_max = DEFAULT_P_MAX))]
    fn fit(spectrum: &PySpectrum, spec: &PyCarpetSpec, p_max: usize) -> PyResult<Self> {
        let s = &spectrum.inner;
        let grid = default_t_grid(s, 400).map_err(err)?;
        let series = heat_trace(s, &grid).map_err(err)?;
        let window = default_window(&series, s.len()).map_err(err)?;
        let d_s = fit_spectral_dimension(&series, window).map_err(err)?.d_s;
        let period = estimate_period(&spec.inner, d_s).map_err(err)?;
        let fw = default_fourier_window(&series, s.len()).map_err(err)?;
        let mut m = extract_fourier(&series.window(fw.0, fw.1), d_s, period, p_max).map_err(err)?;
        m.d_w = walk_dimension(&spec.inner, d_s);
        Ok(PyModel { inner: m })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn d_s(&self) -> f64 {
        self.inner.d_s
    }

    #[getter]
    fn d_w(&self) -> f64 {
        self.inner.d_w
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period
    }

    #[getter]
    fn g00(&self) -> f64 {
        self.inner.g00()
    }

    /// `(k, p, exponent, coefficient)` rows.
    #[getter]
    fn terms(&self) -> Vec<(usize, i64, Complex64, Complex64)> {
        self.inner.terms.iter().map(|t| (t.k, t.p, t.exponent, t.coefficient)).collect()
    }

    fn coefficient(&self, k: usize, p: i64) -> Complex64 {
        self.inner.coefficient(k, p)
    }

    fn evaluate(&self, t: f64) -> f64 {
        self.inner.evaluate(t)
    }

    fn g0(&self, x: f64) -> f64 {
        self.inner.g0(x)
    }

    fn g0_extrema(&self) -> (f64, f64) {
        self.inner.g0_extrema()
    }

    fn with_fourier_pair(&self, k: usize, p: i64, coefficient: Complex64) -> Self {
        PyModel { inner: self.inner.clone().with_fourier_pair(k, p, coefficient) }
    }

    fn scaled(&self, c: f64) -> Self {
        PyModel { inner: self.inner.scaled(c) }
    }

    fn __repr__(&self) -> String {
        format!("HeatTraceModel(d_s={}, period={}, terms={})", self.inner.d_s, self.inner.period, self.inner.terms.len())
    }
}

/// Meromorphic continuation of `zeta(s, gamma) = sum (lambda + gamma)^{-s}`.
#[pyclass(name = "ZetaFunction", module = "carpet", frozen)]
struct PyZeta {
    inner: ZetaExtension,
}

#[pymethods]
impl PyZeta {
    /// The unit Dirichlet interval, with its exact trace.
    #[staticmethod]
    #[pyo3(signature = (gamma = Complex64::new(0.0, 0.0)))]
    fn interval(gamma: Complex64) -> PyResult<Self> {
        let ext = build_extension(&HeatTraceModel::interval(), gamma, TraceRepresentation::interval(), ZetaConfig::default())
            .map_err(err)?;
        Ok(PyZeta { inner: ext })
    }

    /// Model terms for small `t`, the spectrum itself for large `t`.
    #[staticmethod]
    #[pyo3(signature = (model, spectrum, gamma = Complex64::new(0.0, 0.0), split = 1.0))]
    fn from_spectrum(model: &PyModel, spectrum: &PySpectrum, gamma: Complex64, split: f64) -> PyResult<Self> {
        let config = ZetaConfig { split, ..ZetaConfig::default() };
        let ext = build_extension(&model.inner, gamma, TraceRepresentation::spectrum(&spectrum.inner), config)
            .map_err(err)?;
        Ok(PyZeta { inner: ext })
    }

    fn __call__(&self, py: Python<'_>, s: Complex64) -> PyResult<Complex64> {
        Ok(py.detach(|| zeta_extended(&self.inner, s)).map_err(err)?.value)
    }

    /// Value and error estimate.
    fn evaluate(&self, py: Python<'_>, s: Complex64) -> PyResult<(Complex64, f64)> {
        let z = py.detach(|| zeta_extended(&self.inner, s)).map_err(err)?;
        Ok((z.value, z.error))
    }

    fn poles<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.poles)
    }

    /// `zeta(-1/2) / 2`.
    fn casimir_energy(&self) -> PyResult<f64> {
        Ok(casimir_energy(&self.inner).map_err(err)?.energy)
    }
}

#[pyfunction]
fn gamma(z: Complex64) -> PyResult<Complex64> {
    specfun::gamma(z).map_err(err)
}

#[pyfunction]
fn ln_gamma(z: Complex64) -> PyResult<Complex64> {
    specfun::ln_gamma(z).map_err(err)
}

#[pyfunction]
fn riemann_zeta(s: Complex64) -> PyResult<Complex64> {
    specfun::riemann_zeta(s).map_err(err)
}

#[pyfunction]
fn polylog(s: Complex64, z: f64) -> PyResult<Complex64> {
    specfun::polylog_complex(s, z).map_err(err)
}

#[pyfunction]
fn lower_gamma(s: Complex64, x: f64) -> PyResult<Complex64> {
    specfun::lower_gamma(s, x).map_err(err)
}

#[pyfunction]
fn upper_gamma(s: Complex64, x: f64) -> PyResult<Complex64> {
    specfun::upper_gamma(s, x).map_err(err)
}

/// `(upper, lower)` critical densities; `None` where they diverge.
#[pyfunction]
fn critical_densities(model: &PyModel, beta: f64) -> PyResult<(Option<f64>, Option<f64>)> {
    let (a, b) = thermo::critical_densities(&model.inner, beta).map_err(err)?;
    Ok((a.value(), b.value()))
}

#[pyfunction]
#[pyo3(signature = (model, beta, z, l = 1.0))]
fn particle_density(model: &PyModel, beta: f64, z: f64, l: f64) -> PyResult<Option<f64>> {
    let st = GasState::new(beta, z, l).map_err(err)?;
    Ok(thermo::particle_density(&st, Source::Model(&model.inner)).map_err(err)?.value())
}

#[pyfunction]
#[pyo3(signature = (model, target, beta, l = 1.0))]
fn solve_fugacity<'py>(py: Python<'py>, model: &PyModel, target: f64, beta: f64, l: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &thermo::solve_fugacity(target, beta, l, Source::Model(&model.inner)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (model, beta, l = 1.0))]
fn blackbody<'py>(py: Python<'py>, model: &PyModel, beta: f64, l: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &thermo::blackbody(&model.inner, beta, l).map_err(err)?)
}

/// Waveguide Casimir pressure at zero temperature, or the leading thermal
/// pressure when `beta` is given.
#[pyfunction]
#[pyo3(signature = (model, a, b, beta = None))]
fn casimir_waveguide<'py>(py: Python<'py>, model: &PyModel, a: f64, b: f64, beta: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = match beta {
        None => thermo::casimir_waveguide_zero_t(&model.inner, a, b),
        Some(beta) => thermo::casimir_waveguide_thermal(&model.inner, a, b, beta),
    };
    to_py(py, &r.map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (spec, model = None))]
fn bec_diagnose<'py>(py: Python<'py>, spec: &PyCarpetSpec, model: Option<&PyModel>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &thermo::bec_diagnose(&spec.inner, model.map(|m| &m.inner)))
}

/// Energy density of black-body radiation in a `d`-dimensional box.
#[pyfunction]
fn euclidean_blackbody(d: usize, beta: f64) -> PyResult<f64> {
    euclid_blackbody(d, beta).map_err(err)
}

#[pyfunction]
fn oracle_selftest<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let tests = selftest().map_err(err)?;
    let passed = tests.iter().all(|t| t.passed);
    to_py(py, &serde_json::json!({ "passed": passed, "tests": tests }))
}

/// Registers every class and function on `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCarpetSpec>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyZeta>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(polylog, m)?)?;
    m.add_function(wrap_pyfunction!(lower_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(upper_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(critical_densities, m)?)?;
    m.add_function(wrap_pyfunction!(particle_density, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fugacity, m)?)?;
    m.add_function(wrap_pyfunction!(blackbody, m)?)?;
    m.add_function(wrap_pyfunction!(casimir_waveguide, m)?)?;
    m.add_function(wrap_pyfunction!(bec_diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean_blackbody, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
fn carpet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

