//! Sorted eigenvalue lists with their provenance, and the on-disk cache.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::graph::BoundaryCondition;

/// Cache file format version.
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    pub bc: BoundaryCondition,
    pub level: Option<usize>,
    /// Smallest eigenvalue above the zero tolerance.
    pub lambda1: Option<f64>,
    pub spec_hash: String,
    /// False for partial results (slicing budget exhausted).
    pub complete: bool,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub version: u32,
    pub spec_hash: String,
    pub level: Option<usize>,
    pub bc: BoundaryCondition,
    pub solver: String,
    pub count: usize,
    pub complete: bool,
}

impl Spectrum {
    /// Sorts the values and clamps round-off negatives to zero. Values below
    /// `-zero_tolerance` are rejected.
    pub fn new(mut eigenvalues: Vec<f64>, bc: BoundaryCondition) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be finite".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let tol = zero_tolerance(*eigenvalues.last().unwrap());
        if eigenvalues[0] < -tol {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {} in a Laplacian spectrum",
                eigenvalues[0]
            )));
        }
        for v in eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let lambda1 = eigenvalues.iter().copied().find(|&v| v > tol);
        Ok(Spectrum {
            eigenvalues,
            bc,
            level: None,
            lambda1,
            spec_hash: String::new(),
            complete: true,
            solver: "given".into(),
        })
    }

    pub fn with_provenance(mut self, spec_hash: &str, level: usize, solver: &str) -> Self {
        self.spec_hash = spec_hash.to_string();
        self.level = Some(level);
        self.solver = solver.to_string();
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Number of (numerically) zero eigenvalues.
    pub fn zero_modes(&self) -> usize {
        let tol = zero_tolerance(self.largest());
        self.eigenvalues.iter().take_while(|&&v| v <= tol).count()
    }

    /// Eigenvalues divided by `lambda1`.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let l1 = self.lambda1.ok_or_else(|| {
            Error::InsufficientData("spectrum has no nonzero eigenvalue to normalize by".into())
        })?;
        Ok(self.eigenvalues.iter().map(|v| v / l1).collect())
    }

    /// `N(s)`: eigenvalues strictly below `s`, optionally after dividing by
    /// `lambda1`.
    pub fn counting_function(&self, s: f64, normalized: bool) -> usize {
        let threshold = match (normalized, self.lambda1) {
            (true, Some(l1)) => s * l1,
            (true, None) => return if s > 0.0 { self.len() } else { 0 },
            (false, _) => s,
        };
        self.eigenvalues.partition_point(|&v| v < threshold)
    }

    /// Cache key for a spectrum computed from a carpet graph.
    pub fn cache_key(spec_hash: &str, level: usize, bc: BoundaryCondition, solver: &str) -> String {
        let mut h = Sha256::new();
        h.update(format!("{spec_hash}|{level}|{}|{solver}|v{CACHE_VERSION}", bc.as_str()).as_bytes());
        h.finalize().iter().take(16).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Text serialization: one JSON header line, then one eigenvalue per
    /// line with 17 significant digits.
    pub fn to_cache_text(&self) -> String {
        let header = CacheHeader {
            version: CACHE_VERSION,
            spec_hash: self.spec_hash.clone(),
            level: self.level,
            bc: self.bc,
            solver: self.solver.clone(),
            count: self.len(),
            complete: self.complete,
        };
        let mut s = serde_json::to_string(&header).expect("header serializes");
        s.push('\n');
        for &v in &self.eigenvalues {
            s.push_str(&fmt_f64(v));
            s.push('\n');
        }
        s
    }

    pub fn from_cache_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty spectrum file".into(),
        })?;
        let header: CacheHeader = serde_json::from_str(header_line)?;
        if header.version != CACHE_VERSION {
            return Err(Error::Parse {
                line: 1,
                message: format!("unsupported cache version {}", header.version),
            });
        }
        let mut values = Vec::with_capacity(header.count);
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            values.push(line.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("'{line}' is not a number"),
            })?);
        }
        if values.len() != header.count {
            return Err(Error::Parse {
                line: 1,
                message: format!("header announces {} values, found {}", header.count, values.len()),
            });
        }
        let mut s = Spectrum::new(values, header.bc)?;
        s.spec_hash = header.spec_hash;
        s.level = header.level;
        s.solver = header.solver;
        s.complete = header.complete;
        Ok(s)
    }

    /// Atomic write: a temporary file in the same directory, then rename.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_cache_text().as_bytes())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        Spectrum::from_cache_text(&std::fs::read_to_string(path)?)
    }
}

/// Eigenvalues at or below this are treated as zero modes.
pub fn zero_tolerance(largest: f64) -> f64 {
    1e-10 * largest.abs().max(1.0)
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file_name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let s = Spectrum::new(vec![3.0, 0.0, 1.0], BoundaryCondition::Neumann).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 1.0, 3.0]);
        assert_eq!(s.lambda1, Some(1.0));
        assert_eq!(s.counting_function(2.0, false), 2);
        assert_eq!(s.counting_function(0.0, false), 0);
        assert_eq!(s.counting_function(3.5, true), 3);
    }

    #[test]
    fn round_off_negative_is_clamped() {
        let s = Spectrum::new(vec![-1e-15, 2.0], BoundaryCondition::Neumann).unwrap();
        assert_eq!(s.smallest(), 0.0);
        assert_eq!(s.zero_modes(), 1);
        assert!(Spectrum::new(vec![-0.1, 2.0], BoundaryCondition::Neumann).is_err());
    }

    #[test]
    fn cache_round_trip_is_exact() {
        let s = Spectrum::new(vec![0.0, 0.1, 1.0 / 3.0, std::f64::consts::PI], BoundaryCondition::Dirichlet)
            .unwrap()
            .with_provenance("abc", 2, "dense");
        let back = Spectrum::from_cache_text(&s.to_cache_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn cache_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("s.txt");
        let s = Spectrum::new(vec![1.0, 2.0], BoundaryCondition::Neumann).unwrap();
        s.write_cache(&path).unwrap();
        assert_eq!(Spectrum::read_cache(&path).unwrap(), s);
    }
}
