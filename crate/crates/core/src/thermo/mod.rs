//! Quantum-gas observables: the massive Bose gas, blackbody radiation and
//! waveguide Casimir pressures.

pub mod casimir;
pub mod massive;
pub mod photon;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use crate::trace::HeatTraceModel;

pub use casimir::{
    casimir_waveguide_thermal, casimir_waveguide_zero_t, waveguide_trace, CasimirReport, ASYMPTOTIC_RATIO,
};
pub use massive::{
    bec_diagnose, classify_sequence, condensate_density, convexity_check, critical_densities,
    excited_density, free_energy_density, log_partition, particle_density, solve_fugacity, BecReport,
    ConvexityCheck, Fugacity, SequenceTrend, Verdict,
};
pub use photon::{blackbody, h1, photon_energy_spectrum, Blackbody};

/// A density-like observable that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Finite(f64),
    Diverged,
}

impl Density {
    pub fn value(self) -> Option<f64> {
        match self {
            Density::Finite(v) => Some(v),
            Density::Diverged => None,
        }
    }

    pub fn is_diverged(self) -> bool {
        self == Density::Diverged
    }

    /// The finite value, or an error naming the quantity.
    pub fn finite(self, what: &str) -> Result<f64> {
        self.value().ok_or_else(|| Error::Domain(format!("{what} diverges")))
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Density::Finite(v) => s.serialize_f64(*v),
            Density::Diverged => s.serialize_str("diverged"),
        }
    }
}

/// Inverse temperature, fugacity (stored as `log z = beta mu`) and domain
/// scale `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasState {
    pub beta: f64,
    pub log_z: f64,
    pub l: f64,
}

impl GasState {
    pub fn new(beta: f64, z: f64, l: f64) -> Result<Self> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!("fugacity must be positive, got {z}")));
        }
        Self::from_log_z(beta, z.ln(), l)
    }

    pub fn from_log_z(beta: f64, log_z: f64, l: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
        }
        if log_z.is_nan() || log_z == f64::INFINITY {
            return Err(Error::Domain(format!("invalid log fugacity {log_z}")));
        }
        Ok(GasState { beta, log_z, l })
    }

    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    /// Chemical potential `mu = log z / beta`.
    pub fn mu(&self) -> f64 {
        self.log_z / self.beta
    }
}

/// Where an observable comes from: an exact finite spectrum of the unit
/// domain (with the spectral volume of the `L`-scaled domain), or a
/// heat-trace model.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Spectrum { spectrum: &'a Spectrum, volume: f64 },
    Model(&'a HeatTraceModel),
}
