//! Command-line argument definitions.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "spin-toolkit",
    version,
    about = "Spin Hamiltonian levels, ODMR spectra, optical-cycle rate models and spectroscopy fits",
    max_term_width = 100
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Eigenvalues versus magnetic field (CSV: b_mt, level_index, energy_mhz)
    Levels(LevelsArgs),
    /// Synthetic ODMR spectrum at fixed field (CSV: frequency_mhz, amplitude)
    Spectrum(SpectrumArgs),
    /// Spectrum versus field, long format (CSV: b_mt, frequency_mhz, amplitude)
    Sweep(SweepArgs),
    /// Optical-cycle rate model under an RF on/off transient (CSV trace)
    RateSim(RateSimArgs),
    /// Ramsey fringe trace, closed form or from a spin system (CSV trace)
    RamseySim(RamseySimArgs),
    /// Longitudinal relaxation trace (CSV: tau_ns, contrast)
    T1Sim(T1SimArgs),
    /// Fit zero-field splittings and hyperfine constants to a spectrum
    FitZfs(FitZfsArgs),
    /// Fit an instrument-response-convolved lifetime decay
    FitLifetime(FitLifetimeArgs),
    /// Fit a mono-exponential decay with a floor
    FitT1(FitT1Args),
    /// Fit multi-component Ramsey fringes
    FitRamsey(FitRamseyArgs),
    /// Fraction of emission inside the zero-phonon-line window
    DwFactor(DwFactorArgs),
    /// Write the canonical parameter presets as a configuration document
    Presets(PresetsArgs),
}

#[derive(Args, Clone)]
pub struct FamilySelection {
    /// Preset family names (nu1, nu2, nu3, nu4)
    #[arg(long, value_delimiter = ',')]
    pub preset: Vec<String>,
    /// Configuration file with [family.*] sections
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct GridArgs {
    /// Frequency grid start (MHz)
    #[arg(long)]
    pub f_min_mhz: Option<f64>,
    /// Frequency grid end (MHz)
    #[arg(long)]
    pub f_max_mhz: Option<f64>,
    /// Frequency grid step (MHz)
    #[arg(long)]
    pub f_step_mhz: Option<f64>,
}

#[derive(Args)]
pub struct LevelsArgs {
    #[command(flatten)]
    pub family: FamilySelection,
    #[arg(long, default_value_t = 0.0)]
    pub b_min_mt: f64,
    #[arg(long, default_value_t = 7.0)]
    pub b_max_mt: f64,
    #[arg(long, default_value_t = 0.125)]
    pub b_step_mt: f64,
    /// Field direction: c, x, y or 'ax,ay,az'
    #[arg(long, default_value = "c")]
    pub b_axis: String,
    /// Output path, '-' for stdout
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub family: FamilySelection,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Field magnitude (mT)
    #[arg(long, default_value_t = 0.0)]
    pub b_mt: f64,
    /// Field direction: c, x, y or 'ax,ay,az'
    #[arg(long, default_value = "c")]
    pub b_axis: String,
    /// RF drive: x, y, unpolarized or 'ax,ay,az'
    #[arg(long, default_value = "x")]
    pub drive: String,
    /// Override the lineshape width (MHz)
    #[arg(long)]
    pub fwhm_mhz: Option<f64>,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilySelection,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub b_min_mt: Option<f64>,
    #[arg(long)]
    pub b_max_mt: Option<f64>,
    #[arg(long)]
    pub b_step_mt: Option<f64>,
    /// Field direction: c, x, y or 'ax,ay,az'
    #[arg(long, default_value = "c")]
    pub b_axis: String,
    /// RF drive: x, y, unpolarized or 'ax,ay,az'
    #[arg(long, default_value = "x")]
    pub drive: String,
    #[arg(long)]
    pub fwhm_mhz: Option<f64>,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct RateSimArgs {
    /// Configuration file with a [rates] section (default preset otherwise)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// RF-on stretch before the switch-off edge (ns)
    #[arg(long, default_value_t = 200.0)]
    pub rf_on_ns: f64,
    /// RF-off stretch after the edge (ns)
    #[arg(long, default_value_t = 2000.0)]
    pub rf_off_ns: f64,
    /// Output sample spacing (ns)
    #[arg(long, default_value_t = 1.0)]
    pub dt_ns: f64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct RamseySimArgs {
    #[command(flatten)]
    pub family: FamilySelection,
    /// First cosine amplitude (closed form)
    #[arg(long, default_value_t = 0.5)]
    pub a1: f64,
    /// Second cosine amplitude (closed form)
    #[arg(long, default_value_t = 0.5)]
    pub a2: f64,
    /// First fringe frequency (MHz, closed form)
    #[arg(long, default_value_t = 1.6)]
    pub f1_mhz: f64,
    /// Second fringe frequency (MHz, closed form)
    #[arg(long, default_value_t = 10.1)]
    pub f2_mhz: f64,
    /// Coherence time (us)
    #[arg(long, default_value_t = 2.0)]
    pub t2star_us: f64,
    /// RF carrier frequency (MHz); required with --preset/--config
    #[arg(long)]
    pub rf_mhz: Option<f64>,
    /// Hard-pulse addressing window (MHz)
    #[arg(long, default_value_t = 25.0)]
    pub window_mhz: f64,
    #[arg(long, default_value_t = 0.0)]
    pub b_mt: f64,
    #[arg(long, default_value = "c")]
    pub b_axis: String,
    #[arg(long, default_value = "x")]
    pub drive: String,
    #[arg(long, default_value_t = 4000.0)]
    pub tau_max_ns: f64,
    #[arg(long, default_value_t = 4.0)]
    pub dtau_ns: f64,
    /// Gaussian noise sigma added to the trace
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Noise seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct T1SimArgs {
    #[arg(long, default_value_t = 660.0)]
    pub t1_ns: f64,
    /// Contrast at tau = 0
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Residual contrast floor
    #[arg(long, default_value_t = 0.06)]
    pub c_floor: f64,
    #[arg(long, default_value_t = 4000.0)]
    pub tau_max_ns: f64,
    #[arg(long, default_value_t = 10.0)]
    pub dtau_ns: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args)]
pub struct FitZfsArgs {
    /// Spectrum CSV with columns frequency_mhz, amplitude
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub family: FamilySelection,
    /// Seed this many families from spectrum peaks instead of guesses
    #[arg(long)]
    pub families: Option<usize>,
    #[arg(long, default_value = "x")]
    pub drive: String,
    /// Disable the global search fallback stage
    #[arg(long)]
    pub no_fallback: bool,
    /// Write the machine-readable report here ('-' for stdout)
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Args)]
pub struct FitLifetimeArgs {
    /// Trace CSV with columns t_ps, signal and optionally response
    #[arg(long)]
    pub input: PathBuf,
    /// Synthesize a Gaussian response of this width when the input has no
    /// response column (ps)
    #[arg(long)]
    pub response_fwhm_ps: Option<f64>,
    /// Center of the synthesized response (ps)
    #[arg(long)]
    pub response_center_ps: Option<f64>,
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Args)]
pub struct FitT1Args {
    /// Trace CSV with columns tau_ns, contrast
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Args)]
pub struct FitRamseyArgs {
    /// Trace CSV with columns tau_ns, contrast
    #[arg(long)]
    pub input: PathBuf,
    /// Number of cosine components
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Args)]
pub struct DwFactorArgs {
    /// Optical spectrum CSV with columns wavelength_nm, intensity
    #[arg(long)]
    pub input: PathBuf,
    /// Zero-phonon-line window (nm)
    #[arg(long, default_value_t = 1340.7)]
    pub zpl_min_nm: f64,
    #[arg(long, default_value_t = 1356.7)]
    pub zpl_max_nm: f64,
    /// Total integration window (nm)
    #[arg(long, default_value_t = 1300.0)]
    pub total_min_nm: f64,
    #[arg(long, default_value_t = 1500.0)]
    pub total_max_nm: f64,
    /// Subtract a straight baseline through the window edges
    #[arg(long)]
    pub linear_baseline: bool,
}

#[derive(Args)]
pub struct PresetsArgs {
    #[arg(long, default_value = "-")]
    pub out: String,
}
