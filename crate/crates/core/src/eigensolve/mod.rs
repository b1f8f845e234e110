//! Eigenvalue solvers for sparse symmetric matrices.

pub mod dense;
pub mod lanczos;
pub mod ldlt;
pub mod slice;
pub mod tridiag;

use serde::{Deserialize, Serialize};

pub use dense::{dense_eigenvalues, DenseOptions, DenseResult};
pub use lanczos::{lanczos_extremal, LanczosOptions, Which};
pub use ldlt::inertia_count;
pub use slice::{slice_spectrum, SliceOptions, SliceResult};

use crate::error::Result;
use crate::geometry::{CarpetSpec, DEFAULT_CELL_CAP};
use crate::graph::{Adjacency, ApproxGraph, BoundaryCondition};
use crate::sparse::SparseSymmetric;
use crate::spectrum::Spectrum;

/// Solver settings surfaced in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Matrices up to this order use the dense solver.
    pub dense_cap: usize,
    pub residual_tol: f64,
    pub eigen_tol: f64,
    pub max_per_slice: usize,
    pub max_factorizations: usize,
    pub cell_cap: u64,
    pub adjacency: Adjacency,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dense_cap: 10_000,
            residual_tol: 1e-8,
            eigen_tol: 1e-10,
            max_per_slice: 64,
            max_factorizations: 200_000,
            cell_cap: DEFAULT_CELL_CAP,
            adjacency: Adjacency::Face,
        }
    }
}

impl SolverSettings {
    /// Short label stored with cached spectra.
    pub fn label(&self, order: usize) -> String {
        let adjacency = match self.adjacency {
            Adjacency::Face => "face",
            Adjacency::Full => "full",
        };
        if order <= self.dense_cap {
            format!("dense;adj={adjacency}")
        } else {
            format!("slice;tol={:e};adj={adjacency}", self.eigen_tol)
        }
    }
}

/// Full spectrum of a matrix: dense when small enough, otherwise sliced
/// over the Gershgorin interval.
pub fn full_spectrum(
    matrix: &SparseSymmetric,
    bc: BoundaryCondition,
    settings: &SolverSettings,
) -> Result<Spectrum> {
    let n = matrix.order();
    if n <= settings.dense_cap {
        let opts = DenseOptions {
            cap: settings.dense_cap,
            residual_samples: 3,
            residual_tol: settings.residual_tol,
        };
        let r = dense_eigenvalues(matrix, &opts)?;
        let mut s = Spectrum::new(r.eigenvalues, bc)?;
        s.solver = settings.label(n);
        Ok(s)
    } else {
        let opts = SliceOptions {
            max_per_slice: settings.max_per_slice,
            max_factorizations: settings.max_factorizations,
            tol: settings.eigen_tol,
            ..SliceOptions::default()
        };
        let upper = matrix.gershgorin_bound();
        let r = slice_spectrum(matrix, matrix.gershgorin_lower().min(0.0), upper, &opts)?;
        let mut s = Spectrum::new(r.eigenvalues, bc)?;
        s.complete = r.complete;
        s.solver = settings.label(n);
        Ok(s)
    }
}

/// Builds the level-`n` graph of a carpet and returns its Laplacian
/// spectrum.
pub fn carpet_spectrum(
    spec: &CarpetSpec,
    level: usize,
    bc: BoundaryCondition,
    settings: &SolverSettings,
) -> Result<Spectrum> {
    let graph = ApproxGraph::build_with(spec, level, settings.adjacency, settings.cell_cap)?;
    let lap = graph.laplacian(bc)?;
    let mut s = full_spectrum(&lap, bc, settings)?;
    s.spec_hash = spec.spec_hash();
    s.level = Some(level);
    Ok(s)
}
