//! Spectral analysis of generalized Sierpinski carpets and the quantum-gas
//! thermodynamics built on it.

pub mod eigensolve;
pub mod error;
pub mod format;
pub mod geometry;
pub mod graph;
pub mod oracle;
pub mod sparse;
pub mod specfun;
pub mod spectrum;
pub mod thermo;
pub mod trace;
pub mod zeta;

pub use error::{Error, Result};
pub use geometry::{CarpetSpec, CellAddress, CellGeometry, DimensionBounds, ValidationReport};
pub use graph::{Adjacency, ApproxGraph, BoundaryCondition, DegreeStats};
pub use sparse::SparseSymmetric;
pub use spectrum::Spectrum;
pub use trace::{HeatTraceModel, ModelTerm, WeylSeries};
