//! Heat kernel traces of spectra, spectral-dimension fits and the
//! log-periodic Fourier coefficients of the Weyl ratio.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CarpetSpec;
use crate::spectrum::Spectrum;

/// Default number of Fourier modes kept on each side of `p = 0`.
pub const DEFAULT_P_MAX: usize = 5;

/// Kahan-Babuska-Neumaier summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Gaussian elimination with partial pivoting for the small normal
/// equations used by the fits.
pub(crate) fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// One term `coefficient * t^{-exponent}` of the small-time expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelTerm {
    /// Codimension index; 0 is the volume term.
    pub k: usize,
    /// Fourier index.
    pub p: i64,
    pub exponent: Complex64,
    pub coefficient: Complex64,
}

/// Small-time model of a heat trace,
/// `K(t) ~ sum_{k,p} G_{k,p} t^{-(d_k/d_w + 2 pi i p / log R)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceModel {
    pub terms: Vec<ModelTerm>,
    /// Log-period `log R`.
    pub period: f64,
    pub d_s: f64,
    pub d_w: f64,
    /// Shape of the neglected remainder.
    pub remainder: String,
    /// True when terms with `k >= 1` were fitted rather than omitted.
    pub codimension_fitted: bool,
}

fn remainder_tag(d_w: f64) -> String {
    format!("stretched-exponential, rate exponent {}", 1.0 / (d_w - 1.0))
}

impl HeatTraceModel {
    pub fn new(d_s: f64, d_w: f64, period: f64) -> Self {
        HeatTraceModel {
            terms: Vec::new(),
            period,
            d_s,
            d_w,
            remainder: remainder_tag(d_w),
            codimension_fitted: false,
        }
    }

    /// `K(t) = g00 t^{-d_s/2}`, no oscillation and no boundary terms.
    pub fn constant(d_s: f64, g00: f64) -> Self {
        let mut m = HeatTraceModel::new(d_s, 2.0, 1.0);
        m.terms.push(ModelTerm {
            k: 0,
            p: 0,
            exponent: Complex64::new(0.5 * d_s, 0.0),
            coefficient: Complex64::new(g00, 0.0),
        });
        m
    }

    /// Unit-volume Euclidean model in `d` dimensions, `g00 = (4 pi)^{-d/2}`.
    pub fn euclidean(d: usize) -> Self {
        let d = d as f64;
        Self::constant(d, (4.0 * PI).powf(-0.5 * d))
    }

    /// Exact small-time expansion of the unit Dirichlet interval.
    pub fn interval() -> Self {
        let mut m = Self::constant(1.0, 1.0 / (4.0 * PI).sqrt());
        m.push_term(1, 0, Complex64::new(0.0, 0.0), Complex64::new(-0.5, 0.0));
        m.codimension_fitted = true;
        m
    }

    pub fn push_term(&mut self, k: usize, p: i64, exponent: Complex64, coefficient: Complex64) {
        self.terms.push(ModelTerm { k, p, exponent, coefficient });
    }

    /// Adds the pair `p, -p` of codimension `k` with conjugate coefficients.
    pub fn with_fourier_pair(mut self, k: usize, p: i64, coefficient: Complex64) -> Self {
        let base = self
            .terms
            .iter()
            .find(|t| t.k == k && t.p == 0)
            .map(|t| t.exponent.re)
            .unwrap_or(0.5 * self.d_s);
        let w = 2.0 * PI * p as f64 / self.period;
        self.push_term(k, p, Complex64::new(base, w), coefficient);
        self.push_term(k, -p, Complex64::new(base, -w), coefficient.conj());
        self
    }

    pub fn coefficient(&self, k: usize, p: i64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.k == k && t.p == p)
            .map(|t| t.coefficient)
            .sum()
    }

    /// The mean volume coefficient `G_{0,0}`.
    pub fn g00(&self) -> f64 {
        self.coefficient(0, 0).re
    }

    /// Largest Fourier index present.
    pub fn p_max(&self) -> usize {
        self.terms.iter().map(|t| t.p.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Highest codimension index present.
    pub fn k_max(&self) -> usize {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    /// `G_k(x) = sum_p G_{k,p} exp(2 pi i p x / log R)` (complex; real for
    /// Hermitian coefficient sets).
    pub fn periodic_part(&self, k: usize, x: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.k == k)
            .map(|t| t.coefficient * Complex64::from_polar(1.0, 2.0 * PI * t.p as f64 * x / self.period))
            .sum()
    }

    /// Real part of the volume periodic function `G_0(x)`.
    pub fn g0(&self, x: f64) -> f64 {
        self.periodic_part(0, x).re
    }

    /// Extrema of `G_0` over one period: dense sampling followed by golden
    /// section refinement around the best samples.
    pub fn g0_extrema(&self) -> (f64, f64) {
        if self.p_max() == 0 {
            let g = self.g00();
            return (g, g);
        }
        const SAMPLES: usize = 10_000;
        let h = self.period / SAMPLES as f64;
        let vals: Vec<f64> = (0..SAMPLES).map(|i| self.g0(i as f64 * h)).collect();
        let imax = (0..SAMPLES).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let imin = (0..SAMPLES).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        // Largest value of sign * G_0 near sample i.
        let peak = |i: usize, sign: f64| {
            let (mut a, mut b) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - r * (b - a);
                let d = a + r * (b - a);
                if sign * self.g0(c) > sign * self.g0(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            (sign * self.g0(0.5 * (a + b))).max(sign * vals[i])
        };
        let max = peak(imax, 1.0);
        let min = -peak(imin, -1.0);
        (max, min)
    }

    /// Model value of `K(t)` without the remainder.
    pub fn evaluate(&self, t: f64) -> f64 {
        let lt = t.ln();
        self.terms.iter().map(|term| (term.coefficient * (-term.exponent * lt).exp()).re).sum()
    }

    /// All coefficients multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        for t in &mut m.terms {
            t.coefficient *= c;
        }
        m
    }

    /// Checks positivity of `G_{0,0}` and Hermitian pairing.
    pub fn validate(&self) -> Result<()> {
        if !(self.g00() > 0.0) {
            return Err(Error::InvalidArgument(format!("G_00 must be positive, got {}", self.g00())));
        }
        if !(self.period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {}", self.period)));
        }
        for t in &self.terms {
            if t.p != 0 {
                let partner = self.coefficient(t.k, -t.p);
                if (partner - t.coefficient.conj()).norm() > 1e-12 * t.coefficient.norm().max(1e-300) {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient ({}, {}) lacks its conjugate partner",
                        t.k, t.p
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let m = HeatTraceModel::from(file);
        m.validate()?;
        Ok(m)
    }
}

/// On-disk form of a model: flat `(k, p, re, im)` rows.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    period: f64,
    d_s: f64,
    d_w: f64,
    #[serde(default)]
    codimension_fitted: bool,
    terms: Vec<TermRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermRow {
    k: usize,
    p: i64,
    exponent_re: f64,
    exponent_im: f64,
    re: f64,
    im: f64,
}

impl From<&HeatTraceModel> for ModelFile {
    fn from(m: &HeatTraceModel) -> Self {
        ModelFile {
            period: m.period,
            d_s: m.d_s,
            d_w: m.d_w,
            codimension_fitted: m.codimension_fitted,
            terms: m
                .terms
                .iter()
                .map(|t| TermRow {
                    k: t.k,
                    p: t.p,
                    exponent_re: t.exponent.re,
                    exponent_im: t.exponent.im,
                    re: t.coefficient.re,
                    im: t.coefficient.im,
                })
                .collect(),
        }
    }
}

impl From<ModelFile> for HeatTraceModel {
    fn from(f: ModelFile) -> Self {
        let mut m = HeatTraceModel::new(f.d_s, f.d_w, f.period);
        m.codimension_fitted = f.codimension_fitted;
        for r in f.terms {
            m.push_term(r.k, r.p, Complex64::new(r.exponent_re, r.exponent_im), Complex64::new(r.re, r.im));
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// `K(t)` against `t`; Weyl ratio `K(t) t^{d_s/2}`.
    HeatTrace,
    /// `N(s)` against `s`; Weyl ratio `N(s) / s^{d_s/2}`.
    Counting,
}

/// Samples of a heat trace or counting function on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylSeries {
    pub kind: SeriesKind,
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    /// Weyl ratio; empty until `with_ratio` is called.
    pub ratio: Vec<f64>,
}

impl WeylSeries {
    pub fn new(kind: SeriesKind, x: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if x.len() != value.len() {
            return Err(Error::InvalidArgument("grid and values differ in length".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) || x.first().is_some_and(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("grid must be positive and strictly increasing".into()));
        }
        Ok(WeylSeries { kind, x, value, ratio: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Points with `lo <= x <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> WeylSeries {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.x[i] >= lo && self.x[i] <= hi).collect();
        WeylSeries {
            kind: self.kind,
            x: keep.iter().map(|&i| self.x[i]).collect(),
            value: keep.iter().map(|&i| self.value[i]).collect(),
            ratio: if self.ratio.is_empty() { Vec::new() } else { keep.iter().map(|&i| self.ratio[i]).collect() },
        }
    }

    pub fn with_ratio(mut self, d_s: f64) -> Self {
        let h = 0.5 * d_s;
        self.ratio = self
            .x
            .iter()
            .zip(&self.value)
            .map(|(&x, &v)| match self.kind {
                SeriesKind::HeatTrace => v * x.powf(h),
                SeriesKind::Counting => v / x.powf(h),
            })
            .collect();
        self
    }

    /// Log-time coordinate used for the Fourier analysis: `-log t` for heat
    /// traces and `log s` for counting functions.
    fn log_coordinate(&self) -> Vec<f64> {
        match self.kind {
            SeriesKind::HeatTrace => self.x.iter().map(|t| -t.ln()).collect(),
            SeriesKind::Counting => self.x.iter().map(|s| s.ln()).collect(),
        }
    }
}

/// `n` points spaced evenly in `log` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidArgument(format!("bad log grid [{lo}, {hi}] with {n} points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// `K(t) = sum_j exp(-t lambda_j)` on the grid.
pub fn heat_trace(spectrum: &Spectrum, t_grid: &[f64]) -> Result<WeylSeries> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| compensated_sum(spectrum.eigenvalues().iter().map(|&l| (-t * l).exp())))
        .collect();
    WeylSeries::new(SeriesKind::HeatTrace, t_grid.to_vec(), values)
}

/// Counting function `N(s)` on the grid.
pub fn counting_series(spectrum: &Spectrum, s_grid: &[f64]) -> Result<WeylSeries> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let values = s_grid.iter().map(|&s| spectrum.counting_function(s, false) as f64).collect();
    WeylSeries::new(SeriesKind::Counting, s_grid.to_vec(), values)
}

/// Heat-trace grid spanning the spectrum: from `0.01/lambda_max` to
/// `100/lambda_1`.
pub fn default_t_grid(spectrum: &Spectrum, n: usize) -> Result<Vec<f64>> {
    let l1 = spectrum
        .lambda1
        .ok_or_else(|| Error::InsufficientData("spectrum has no positive eigenvalue".into()))?;
    log_grid(0.01 / spectrum.largest(), 100.0 / l1, n)
}

/// Counting-function grid from the 10th eigenvalue to the one at 30% of the
/// spectrum: above the discreteness floor, below the graph cutoff.
pub fn default_counting_grid(spectrum: &Spectrum, n: usize) -> Result<Vec<f64>> {
    let eigs: Vec<f64> = spectrum.eigenvalues().iter().copied().filter(|&v| v > 0.0).collect();
    if eigs.len() < 40 {
        return Err(Error::InsufficientData(format!("{} positive eigenvalues, need 40", eigs.len())));
    }
    let hi = (3 * spectrum.len() / 10).min(eigs.len()) - 1;
    log_grid(eigs[9], eigs[hi], n)
}

/// The `t` range where `10 <= K(t) <= 0.1 * size`, between the
/// discreteness floor and the graph cutoff.
pub fn default_window(series: &WeylSeries, size: usize) -> Result<(f64, f64)> {
    let upper = 0.1 * size as f64;
    let inside: Vec<f64> = series
        .x
        .iter()
        .zip(&series.value)
        .filter(|(_, &k)| (10.0..=upper).contains(&k))
        .map(|(&t, _)| t)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) if b > a => Ok((a, b)),
        _ => Err(Error::InsufficientData(format!(
            "no window with 10 <= K(t) <= {upper} (spectrum too small)"
        ))),
    }
}

/// Window for the Fourier projection, `2 <= K(t) <= size / 2`. Whole
/// log-periods need more span than the power-law fit window holds at
/// moderate levels, so some discreteness and cutoff bias is traded for it.
pub fn default_fourier_window(series: &WeylSeries, size: usize) -> Result<(f64, f64)> {
    let upper = 0.5 * size as f64;
    let inside: Vec<f64> = series
        .x
        .iter()
        .zip(&series.value)
        .filter(|(_, &k)| (2.0..=upper).contains(&k))
        .map(|(&t, _)| t)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) if b > a => Ok((a, b)),
        _ => Err(Error::InsufficientData(format!("no window with 2 <= K(t) <= {upper}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFit {
    pub d_s: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least-squares slope of `log K` against `log t`; `d_s = -2 slope`.
pub fn fit_spectral_dimension(series: &WeylSeries, window: (f64, f64)) -> Result<SpectralFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("degenerate window [{lo}, {hi}]")));
    }
    let w = series.window(lo, hi);
    if w.len() < 20 {
        return Err(Error::InsufficientData(format!("{} points in the fit window, need 20", w.len())));
    }
    if w.value.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("nonpositive values in the fit window".into()));
    }
    let xs: Vec<f64> = w.x.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = w.value.iter().map(|v| v.ln()).collect();
    let (slope, _, se) = linear_fit(&xs, &ys);
    let sign = match series.kind {
        SeriesKind::HeatTrace => -2.0,
        SeriesKind::Counting => 2.0,
    };
    Ok(SpectralFit { d_s: sign * slope, stderr: 2.0 * se, window, points: w.len() })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, stderr(a))`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 && sxx > 0.0 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, intercept, se)
}

/// Trapezoid weights for an increasing, possibly nonuniform grid.
fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Weighted least-squares fit of `y(x)` by a real trigonometric polynomial
/// with angular frequency `omega`; returns complex coefficients `c_p`,
/// `p = 0..=p_max`.
fn trig_fit(x: &[f64], y: &[f64], w: &[f64], omega: f64, p_max: usize) -> Result<Vec<Complex64>> {
    let m = 2 * p_max + 1;
    let basis = |xv: f64| {
        let mut b = Vec::with_capacity(m);
        b.push(1.0);
        for p in 1..=p_max {
            let (s, c) = (omega * p as f64 * xv).sin_cos();
            b.push(c);
            b.push(s);
        }
        b
    };
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for i in 0..x.len() {
        let b = basis(x[i]);
        for r in 0..m {
            aty[r] += w[i] * b[r] * y[i];
            for c in 0..m {
                ata[r][c] += w[i] * b[r] * b[c];
            }
        }
    }
    let sol = solve_small(ata, aty)
        .ok_or_else(|| Error::InsufficientData("Fourier fit is singular (too few samples)".into()))?;
    let mut out = vec![Complex64::new(sol[0], 0.0)];
    for p in 1..=p_max {
        out.push(Complex64::new(sol[2 * p - 1], -sol[2 * p]) * 0.5);
    }
    Ok(out)
}

/// Whole-period sub-window `[x_hi - M P, x_hi]` of a log coordinate.
fn whole_periods(x: &[f64], period: f64) -> Result<(f64, f64, usize)> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let periods = ((hi - lo) / period * (1.0 + 1e-9)).floor() as usize;
    if periods < 2 {
        return Err(Error::InsufficientData(format!(
            "window spans {:.3} periods, need at least 2",
            (hi - lo) / period
        )));
    }
    Ok((hi - periods as f64 * period * (1.0 + 1e-12), hi, periods))
}

/// Fourier coefficients `G_{0,p}` of the Weyl ratio `W = K(t) t^{d_s/2}`,
/// averaged over the whole periods contained in the series.
pub fn extract_fourier(series: &WeylSeries, d_s: f64, period: f64, p_max: usize) -> Result<HeatTraceModel> {
    if !(period > 0.0) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    if series.kind != SeriesKind::HeatTrace {
        return Err(Error::InvalidArgument("Fourier extraction expects a heat-trace series".into()));
    }
    let s = series.clone().with_ratio(d_s);
    let coeffs = fourier_coefficients(&s.log_coordinate(), &s.ratio, period, p_max)?;
    let d_w = 2.0; // refined by the caller when the carpet is known
    let mut model = HeatTraceModel::new(d_s, d_w, period);
    model.push_term(0, 0, Complex64::new(0.5 * d_s, 0.0), Complex64::new(coeffs[0].re, 0.0));
    for (p, &c) in coeffs.iter().enumerate().skip(1) {
        model = model.with_fourier_pair(0, p as i64, c);
    }
    if !(model.g00() > 0.0) {
        return Err(Error::InsufficientData(format!("extracted G_00 = {} is not positive", model.g00())));
    }
    Ok(model)
}

fn fourier_coefficients(x: &[f64], y: &[f64], period: f64, p_max: usize) -> Result<Vec<Complex64>> {
    let (lo, hi, _) = whole_periods(x, period)?;
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= lo && x[i] <= hi).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    if idx.len() < 4 * p_max + 4 {
        return Err(Error::InsufficientData(format!("{} samples for {} Fourier modes", idx.len(), p_max)));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let w = trapezoid_weights(&xs);
    trig_fit(&xs, &ys, &w, 2.0 * PI / period, p_max)
}

/// Fourier extraction with boundary terms from a Dirichlet/Neumann pair on
/// the same grid. The mean isolates the volume term; half the difference
/// isolates the boundary term, whose power is fitted. Returns the Dirichlet
/// model.
pub fn extract_with_boundary(
    dirichlet: &WeylSeries,
    neumann: &WeylSeries,
    d_s: f64,
    period: f64,
    p_max: usize,
) -> Result<HeatTraceModel> {
    if dirichlet.x != neumann.x {
        return Err(Error::InvalidArgument("Dirichlet and Neumann series need the same grid".into()));
    }
    let mean = WeylSeries::new(
        SeriesKind::HeatTrace,
        dirichlet.x.clone(),
        dirichlet.value.iter().zip(&neumann.value).map(|(a, b)| 0.5 * (a + b)).collect(),
    )?;
    let mut model = extract_fourier(&mean, d_s, period, p_max)?;
    let half: Vec<f64> = dirichlet.value.iter().zip(&neumann.value).map(|(a, b)| 0.5 * (b - a)).collect();
    if half.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InsufficientData("Neumann trace does not dominate the Dirichlet trace".into()));
    }
    let xs: Vec<f64> = dirichlet.x.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = half.iter().map(|v| v.ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &ys);
    // Snap to zero when the boundary term is flat to fit accuracy.
    let e1 = if slope.abs() < 1e-6 { 0.0 } else { -slope };
    let ratio: Vec<f64> = dirichlet.x.iter().zip(&half).map(|(t, v)| v * t.powf(e1)).collect();
    let lx: Vec<f64> = dirichlet.x.iter().map(|t| -t.ln()).collect();
    let c = fourier_coefficients(&lx, &ratio, period, p_max)?;
    model.push_term(1, 0, Complex64::new(e1, 0.0), Complex64::new(-c[0].re, 0.0));
    for (p, &cp) in c.iter().enumerate().skip(1) {
        model = model.with_fourier_pair(1, p as i64, -cp);
    }
    model.codimension_fitted = true;
    Ok(model)
}

/// `log R = 2 log m_F / d_s`, the log-period of the Weyl ratio.
pub fn estimate_period(spec: &CarpetSpec, d_s: f64) -> Result<f64> {
    let d = spec.dimension() as f64;
    if !(d_s > 0.0 && d_s <= d) {
        return Err(Error::Domain(format!("d_s = {d_s} outside (0, {d}]")));
    }
    Ok(2.0 * (spec.mass_scale() as f64).ln() / d_s)
}

/// Walk dimension implied by `d_s`: `d_w = 2 d_h / d_s`.
pub fn walk_dimension(spec: &CarpetSpec, d_s: f64) -> f64 {
    2.0 * spec.hausdorff_dimension() / d_s
}

/// `V_s = (4 pi)^{d_s/2} G_00 L^{d_s}`.
pub fn spectral_volume(model: &HeatTraceModel, l: f64) -> Result<f64> {
    let g = model.g00();
    if !(g > 0.0) {
        return Err(Error::InvalidArgument(format!("G_00 must be positive, got {g}")));
    }
    Ok((4.0 * PI).powf(0.5 * model.d_s) * g * l.powf(model.d_s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDetection {
    /// Period with the largest single-harmonic amplitude.
    pub period: f64,
    pub amplitude: f64,
    /// `(period, amplitude)` over the scanned range.
    pub periodogram: Vec<(f64, f64)>,
}

/// Least-squares periodogram of the detrended log Weyl ratio. Periods longer
/// than half the window are not scanned.
///
/// The residual is `log W` minus its best linear fit in the log coordinate,
/// so a pure power law leaves nothing behind whatever `d_s` is used.
pub fn detect_log_period(
    series: &WeylSeries,
    d_s: f64,
    min_period: f64,
    max_period: f64,
    steps: usize,
) -> Result<PeriodDetection> {
    if !(min_period > 0.0 && max_period > min_period) || steps < 2 {
        return Err(Error::InvalidArgument(format!("bad period range [{min_period}, {max_period}]")));
    }
    let s = series.clone().with_ratio(d_s);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s.ratio[i] > 0.0).collect();
    if keep.len() < 20 {
        return Err(Error::InsufficientData("fewer than 20 positive Weyl-ratio samples".into()));
    }
    let lc = s.log_coordinate();
    let mut pairs: Vec<(f64, f64)> = keep.iter().map(|&i| (lc[i], s.ratio[i].ln())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    // A period is only resolved with two full cycles in the window.
    let span = xs[xs.len() - 1] - xs[0];
    let max_period = max_period.min(0.5 * span);
    if !(max_period > min_period) {
        return Err(Error::InsufficientData(format!(
            "window spans {span:.3} in log scale, too short for periods above {min_period}"
        )));
    }
    let (a, b, _) = linear_fit(&xs, &ys);
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - a * x - b).collect();
    let w = trapezoid_weights(&xs);
    let grid = log_grid(min_period, max_period, steps)?;
    let periodogram: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&period| {
            let amp = trig_fit(&xs, &resid, &w, 2.0 * PI / period, 1)
                .map(|c| 2.0 * c[1].norm())
                .unwrap_or(0.0);
            (period, amp)
        })
        .collect();
    let &(period, amplitude) = periodogram
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    Ok(PeriodDetection { period, amplitude, periodogram })
}

/// Synthetic trace `t^{-d_s/2} (1 + amp cos(2 pi (-log t) / period))`.
pub fn synthetic_log_periodic(t: f64, d_s: f64, amp: f64, period: f64) -> f64 {
    t.powf(-0.5 * d_s) * (1.0 + amp * (2.0 * PI * (-t.ln()) / period).cos())
}
