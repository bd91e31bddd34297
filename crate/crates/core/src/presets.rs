//! Canonical parameter presets: the four resonance families and the
//! default optical-cycle rate model.
//!
//! Family parameters (D, E, isotropic A in MHz):
//!
//! | family | orientation | D   | E  | A   |
//! |--------|-------------|-----|----|-----|
//! | nu1    | off-axis    | 560 | 60 | -34 |
//! | nu2    | off-axis    | 455 | 60 | -30 |
//! | nu3    | on-axis     | 326 | 40 | --  |
//! | nu4    | on-axis     | 221 | 20 | --  |
//!
//! The on-axis families carry no resolved hyperfine structure and are
//! modeled without a nuclear spin. Azimuth conventions make the default
//! lab-x RF drive effectively transverse for the off-axis families and
//! split equally between the transverse defect axes for the on-axis ones,
//! mimicking the orientational average of a defect ensemble.

use crate::dynamics::{RateModel, LEVEL_ES0, LEVEL_ES1, LEVEL_GS0, LEVEL_GS1, LEVEL_SE};
use crate::spectra::{LineShape, WeightedSystem};
use crate::spin::{Spin, SpinSystem};

/// Off-axis defect tilt: the tetrahedral bond angle relative to the c-axis.
pub const OFF_AXIS_POLAR_DEG: f64 = 70.53;
/// Azimuth placing the off-axis defect plane perpendicular to the lab-x
/// RF drive.
pub const OFF_AXIS_AZIMUTH_DEG: f64 = 90.0;
/// Azimuth splitting the drive equally between the transverse axes of an
/// on-axis defect.
pub const ON_AXIS_AZIMUTH_DEG: f64 = 45.0;

pub fn family_nu1() -> SpinSystem {
    SpinSystem::with_isotropic_hyperfine(
        Spin::ONE,
        Spin::THREE_HALVES,
        560.0,
        60.0,
        -34.0,
        OFF_AXIS_POLAR_DEG,
        OFF_AXIS_AZIMUTH_DEG,
    )
    .unwrap()
}

pub fn family_nu2() -> SpinSystem {
    SpinSystem::with_isotropic_hyperfine(
        Spin::ONE,
        Spin::THREE_HALVES,
        455.0,
        60.0,
        -30.0,
        OFF_AXIS_POLAR_DEG,
        OFF_AXIS_AZIMUTH_DEG,
    )
    .unwrap()
}

pub fn family_nu3() -> SpinSystem {
    SpinSystem::with_isotropic_hyperfine(Spin::ONE, Spin::ZERO, 326.0, 40.0, 0.0, 0.0, ON_AXIS_AZIMUTH_DEG)
        .unwrap()
}

pub fn family_nu4() -> SpinSystem {
    SpinSystem::with_isotropic_hyperfine(Spin::ONE, Spin::ZERO, 221.0, 20.0, 0.0, 0.0, ON_AXIS_AZIMUTH_DEG)
        .unwrap()
}

pub fn family_by_name(name: &str) -> Option<SpinSystem> {
    match name {
        "nu1" => Some(family_nu1()),
        "nu2" => Some(family_nu2()),
        "nu3" => Some(family_nu3()),
        "nu4" => Some(family_nu4()),
        _ => None,
    }
}

pub const FAMILY_NAMES: [&str; 4] = ["nu1", "nu2", "nu3", "nu4"];

/// Relative ODMR amplitudes used when overlaying the four families; free
/// parameters in any fit.
pub fn default_family_scale(name: &str) -> f64 {
    match name {
        "nu1" => 1.0,
        "nu2" => 0.3,
        "nu3" => 0.8,
        "nu4" => 0.8,
        _ => 1.0,
    }
}

/// All four families with their default scales.
pub fn all_families() -> Vec<WeightedSystem> {
    FAMILY_NAMES
        .iter()
        .map(|name| WeightedSystem {
            system: family_by_name(name).unwrap(),
            family_scale: default_family_scale(name),
        })
        .collect()
}

/// Narrow ground-state lines.
pub fn default_lineshape() -> LineShape {
    LineShape::lorentzian(10.0).unwrap()
}

/// Broad-line preset for the wide unidentified resonances.
pub fn wide_lineshape() -> LineShape {
    LineShape::lorentzian(40.0).unwrap()
}

/// Radiative decay rate 1/(450 ps) in 1/ns.
pub const RADIATIVE_RATE_PER_NS: f64 = 1.0 / 0.45;

/// Default optical-cycle rate model ("fig1f-default").
///
/// Rate ordering: the intersystem crossing out of the m_S = ±1 excited
/// state is fast, the m_S = 0 channel is slow, and the singlet returns
/// exclusively to the m_S = ±1 ground state, so optical pumping
/// polarizes into the dark state and RF mixing raises the PL. The pump
/// rate is tuned so the PL settles with a 300 ns fitted time constant
/// after RF switch-off.
pub fn rate_model_fig1f_default() -> RateModel {
    let mut m = RateModel::new_default_levels();
    m.set_rate(LEVEL_ES0, LEVEL_GS0, RADIATIVE_RATE_PER_NS, true);
    m.set_rate(LEVEL_ES1, LEVEL_GS1, RADIATIVE_RATE_PER_NS, true);
    m.set_rate(LEVEL_ES0, LEVEL_SE, 0.1, false);
    m.set_rate(LEVEL_ES1, LEVEL_SE, 10.0, false);
    m.set_rate(LEVEL_SE, LEVEL_GS1, 1.0, false);
    m.pump_rate = FIG1F_PUMP_RATE_PER_NS;
    m.rf_mix_rate = 0.05;
    m
}

/// Pump rate giving the 300 ns PL reinitialization time constant under the
/// fig1f-default rate ordering.
pub const FIG1F_PUMP_RATE_PER_NS: f64 = 0.0799640;
