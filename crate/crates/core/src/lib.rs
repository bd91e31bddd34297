//! Simulation and fitting toolkit for optically detected magnetic resonance
//! (ODMR) of spin-active color centers.
//!
//! The crate models a coupled electron-nuclear spin system, synthesizes ODMR
//! spectra versus magnetic field, simulates the optical spin-polarization
//! cycle and common pulse sequences, and extracts physical parameters from
//! measured spectra and time traces by nonlinear least squares.
//!
//! Units follow the h = 1 convention: energies and frequencies in MHz,
//! magnetic fields in mT, rates in 1/ns.

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod presets;
pub mod spectra;
pub mod spin;

pub use error::{Error, Result};
pub use spectra::{
    annotate_half_frequency, field_sweep, synthesize_spectrum, transitions, FieldSweepMap,
    LineShape, LineShapeKind, RfDrive, Spectrum, Transition, TransitionSet,
};
pub use spin::{
    build_hamiltonian, degeneracy_census, diagonalize, spin_matrices, EigenSolution, FieldVector,
    HamiltonianMatrix, Spin, SpinSystem,
};

pub use dynamics::{
    evolve_rate_model, fft_peaks, ramsey_closed_form, ramsey_from_hamiltonian,
    simulate_pl_transient, t1_trace, PopulationTrace, PulseMode, PulseSequence, RamseyTrace,
    RateModel,
};
pub use fit::{
    debye_waller, fit_exponential_settle, fit_least_squares, fit_lifetime_convolved, fit_ramsey,
    fit_zero_field_odmr, FitResult, OpticalSpectrum, TimeTrace,
};
