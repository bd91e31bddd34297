//! Nonlinear least-squares extraction of physical parameters from spectra
//! and time traces.

mod engine;
mod models;
mod zfs;

pub use engine::{fit_least_squares, minimize_residuals, EngineOptions};
pub use models::{
    debye_waller, fit_exponential_settle, fit_lifetime_convolved, fit_ramsey, gaussian_response,
    BaselineMode,
};
pub use zfs::{
    fit_zero_field_odmr, seed_zfs_guesses, unpack_family_fits, ZfsFamilyFit, ZfsFamilyGuess,
    ZfsFitOptions,
};

use crate::error::{Error, Result};

/// Named best-fit parameters with 1σ uncertainties from the Jacobian-based
/// covariance estimate. Uncertainties are reported only on convergence.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .and_then(|i| self.uncertainties.get(i).copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeUnit {
    Ns,
    Ps,
}

impl TimeUnit {
    pub fn suffix(self) -> &'static str {
        match self {
            TimeUnit::Ns => "ns",
            TimeUnit::Ps => "ps",
        }
    }
}

/// A sampled time trace, optionally with an instrument-response trace on
/// the same grid.
#[derive(Clone, Debug)]
pub struct TimeTrace {
    pub t: Vec<f64>,
    pub signal: Vec<f64>,
    pub response: Option<Vec<f64>>,
    pub unit: TimeUnit,
}

impl TimeTrace {
    pub fn new(t: Vec<f64>, signal: Vec<f64>, response: Option<Vec<f64>>) -> Result<Self> {
        Self::with_unit(t, signal, response, TimeUnit::Ns)
    }

    pub fn with_unit(
        t: Vec<f64>,
        signal: Vec<f64>,
        response: Option<Vec<f64>>,
        unit: TimeUnit,
    ) -> Result<Self> {
        if t.is_empty()
            || t.len() != signal.len()
            || response.as_ref().is_some_and(|r| r.len() != t.len())
            || t.windows(2).any(|w| !(w[1] > w[0]))
            || signal.iter().any(|v| !v.is_finite())
        {
            return Err(Error::BadGrid);
        }
        Ok(TimeTrace {
            t,
            signal,
            response,
            unit,
        })
    }
}

/// PL intensity versus wavelength.
#[derive(Clone, Debug)]
pub struct OpticalSpectrum {
    pub wavelength_nm: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl OpticalSpectrum {
    pub fn new(wavelength_nm: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if wavelength_nm.is_empty()
            || wavelength_nm.len() != intensity.len()
            || wavelength_nm.windows(2).any(|w| !(w[1] > w[0]))
            || intensity.iter().any(|v| !v.is_finite())
        {
            return Err(Error::BadGrid);
        }
        Ok(OpticalSpectrum {
            wavelength_nm,
            intensity,
        })
    }
}
