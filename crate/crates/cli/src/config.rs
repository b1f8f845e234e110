use std::path::{Path, PathBuf};

use carpet_core::eigensolve::SolverSettings;
use carpet_core::{BoundaryCondition, CarpetSpec, Error, Result};
use serde::Deserialize;

pub const DEFAULT_LEVEL: usize = 3;
pub const MAX_LEVEL: usize = 12;
pub const CACHE_ENV: &str = "CARPET_CACHE_DIR";

/// Contents of a `--config` TOML file. Every field is optional; command-line
/// flags win over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub spec: Option<PathBuf>,
    pub level: Option<usize>,
    pub bc: Option<BoundaryCondition>,
    pub out: Option<PathBuf>,
    pub solver: SolverSettings,
    /// Fit window `[t_lo, t_hi]` for the heat trace.
    pub window: Option<[f64; 2]>,
    /// Window `[t_lo, t_hi]` for the Fourier projection.
    pub fourier_window: Option<[f64; 2]>,
    pub p_max: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))
    }
}

/// Where the carpet comes from.
#[derive(Debug, Clone)]
pub enum CarpetSource {
    Preset(String),
    File(PathBuf),
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub carpet: Option<CarpetSource>,
    pub level: usize,
    pub bc: BoundaryCondition,
    pub solver: SolverSettings,
    pub window: Option<(f64, f64)>,
    pub fourier_window: Option<(f64, f64)>,
    pub p_max: usize,
    pub out: PathBuf,
    pub cache: PathBuf,
}

pub struct Overrides {
    pub preset: Option<String>,
    pub spec: Option<PathBuf>,
    pub level: Option<usize>,
    pub bc: Option<BoundaryCondition>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<Self> {
        let file = match &o.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let carpet = match (o.preset, o.spec) {
            (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either --preset or --spec, not both".into())),
            (Some(p), None) => Some(CarpetSource::Preset(p)),
            (None, Some(s)) => Some(CarpetSource::File(s)),
            (None, None) => match (file.preset, file.spec) {
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidArgument("config sets both preset and spec".into()))
                }
                (Some(p), None) => Some(CarpetSource::Preset(p)),
                (None, Some(s)) => Some(CarpetSource::File(s)),
                (None, None) => None,
            },
        };
        let out = o.out.or(file.out).unwrap_or_else(|| PathBuf::from("carpet-out"));
        let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| out.join("cache"));
        let cfg = RunConfig {
            carpet,
            level: o.level.or(file.level).unwrap_or(DEFAULT_LEVEL),
            bc: o.bc.or(file.bc).unwrap_or(BoundaryCondition::Neumann),
            solver: file.solver,
            window: file.window.map(|[a, b]| (a, b)),
            fourier_window: file.fourier_window.map(|[a, b]| (a, b)),
            p_max: file.p_max.unwrap_or(carpet_core::trace::DEFAULT_P_MAX),
            out,
            cache,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.level > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!("level {} above the maximum {MAX_LEVEL}", self.level)));
        }
        for (a, b) in self.window.iter().chain(&self.fourier_window).copied() {
            if !(a > 0.0 && b > a && b.is_finite()) {
                return Err(Error::InvalidArgument(format!("window [{a}, {b}] must satisfy 0 < lo < hi")));
            }
        }
        if self.p_max > 20 {
            return Err(Error::InvalidArgument(format!("p_max {} above 20", self.p_max)));
        }
        let s = &self.solver;
        if s.dense_cap == 0 || s.max_per_slice == 0 || s.max_factorizations == 0 {
            return Err(Error::InvalidArgument("solver counts must be positive".into()));
        }
        if !(s.eigen_tol > 0.0 && s.eigen_tol < 1e-2 && s.residual_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must lie in (0, 1e-2)".into()));
        }
        if let Some(CarpetSource::File(p)) = &self.carpet {
            if !p.is_file() {
                return Err(Error::InvalidArgument(format!("spec file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<CarpetSpec> {
        match &self.carpet {
            Some(CarpetSource::Preset(name)) => CarpetSpec::preset(name),
            Some(CarpetSource::File(path)) => CarpetSpec::parse(&std::fs::read_to_string(path)?),
            None => Err(Error::InvalidArgument("no carpet given (use --preset or --spec)".into())),
        }
    }
}
