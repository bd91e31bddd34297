//! Optical spin-polarization cycle as a classical rate model, plus the
//! coherent-sequence traces (Ramsey, T1) and FFT peak extraction used to
//! analyze them.
//!
//! The rate model solves dp/dt = R p with fixed-step RK4; R has zero column
//! sums so the total population is conserved. Coherent traces are closed
//! forms in the hard-pulse limit: a sum of detuning cosines under a T2*
//! envelope.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fit::{fit_exponential_settle, FitResult, TimeTrace};
use crate::spectra::{transitions_default_cutoff, RfDrive};
use crate::spin::{build_hamiltonian, diagonalize, FieldVector, SpinSystem};

pub const LEVEL_GS0: usize = 0;
pub const LEVEL_GS1: usize = 1;
pub const LEVEL_ES0: usize = 2;
pub const LEVEL_ES1: usize = 3;
pub const LEVEL_SE: usize = 4;
pub const LEVEL_SA: usize = 5;

/// Directed level-rate graph for the optical polarization cycle.
///
/// `rates[from][to]` are spontaneous rates in 1/ns. Optical pumping adds
/// `pump_rate` along `pump_edges` while the laser is on; RF driving adds
/// `rf_mix_rate` in both directions across `rf_edge`.
#[derive(Clone, Debug)]
pub struct RateModel {
    pub level_names: Vec<String>,
    pub rates: Vec<Vec<f64>>,
    pub radiative_flags: Vec<Vec<bool>>,
    pub pump_rate: f64,
    pub pump_edges: Vec<(usize, usize)>,
    pub rf_mix_rate: f64,
    pub rf_edge: (usize, usize),
}

pub fn default_level_names() -> Vec<String> {
    ["GS0", "GS1", "ES0", "ES1", "SE", "SA"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

impl RateModel {
    /// Empty model over the default six-level scheme.
    pub fn new_default_levels() -> Self {
        let n = 6;
        RateModel {
            level_names: default_level_names(),
            rates: vec![vec![0.0; n]; n],
            radiative_flags: vec![vec![false; n]; n],
            pump_rate: 0.0,
            pump_edges: vec![(LEVEL_GS0, LEVEL_ES0), (LEVEL_GS1, LEVEL_ES1)],
            rf_mix_rate: 0.0,
            rf_edge: (LEVEL_GS0, LEVEL_GS1),
        }
    }

    pub fn n_levels(&self) -> usize {
        self.level_names.len()
    }

    pub fn set_rate(&mut self, from: usize, to: usize, rate: f64, radiative: bool) {
        self.rates[from][to] = rate;
        self.radiative_flags[from][to] = radiative;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_levels();
        if self.rates.len() != n || self.rates.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.rates.len(),
            });
        }
        for (i, row) in self.rates.iter().enumerate() {
            for (j, &r) in row.iter().enumerate() {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(Error::NegativeRate(r));
                }
                if i == j && r != 0.0 {
                    return Err(Error::InvalidArgument("self-rates are not allowed".into()));
                }
            }
        }
        if !(self.pump_rate >= 0.0) || !(self.rf_mix_rate >= 0.0) {
            return Err(Error::NegativeRate(self.pump_rate.min(self.rf_mix_rate)));
        }
        Ok(())
    }

    /// Generator matrix R (column-sum zero): R[i][j] is the rate from j
    /// into i for j != i.
    pub fn generator(&self, laser_on: bool, rf_on: bool) -> Vec<Vec<f64>> {
        let n = self.n_levels();
        let mut r = vec![vec![0.0; n]; n];
        let mut add = |from: usize, to: usize, k: f64| {
            r[to][from] += k;
            r[from][from] -= k;
        };
        for from in 0..n {
            for to in 0..n {
                if self.rates[from][to] > 0.0 {
                    add(from, to, self.rates[from][to]);
                }
            }
        }
        if laser_on && self.pump_rate > 0.0 {
            for &(from, to) in &self.pump_edges {
                add(from, to, self.pump_rate);
            }
        }
        if rf_on && self.rf_mix_rate > 0.0 {
            let (a, b) = self.rf_edge;
            add(a, b, self.rf_mix_rate);
            add(b, a, self.rf_mix_rate);
        }
        r
    }

    fn max_total_rate(&self, laser_on: bool, rf_on: bool) -> f64 {
        let gen = self.generator(laser_on, rf_on);
        gen.iter()
            .enumerate()
            .map(|(j, _)| -self.generator_diag(&gen, j))
            .fold(0.0, f64::max)
    }

    fn generator_diag(&self, gen: &[Vec<f64>], j: usize) -> f64 {
        gen[j][j]
    }

    /// Detected photon rate (photons/ns) for a population vector.
    pub fn pl_rate(&self, p: &[f64], laser_on: bool) -> f64 {
        let _ = laser_on;
        let mut total = 0.0;
        for (from, row) in self.radiative_flags.iter().enumerate() {
            for (to, &flag) in row.iter().enumerate() {
                if flag {
                    total += self.rates[from][to] * p[from];
                }
            }
        }
        total
    }
}

/// Populations and PL rate over a time grid. `populations[k]` is the
/// population vector at `t_ns[k]`.
#[derive(Clone, Debug)]
pub struct PopulationTrace {
    pub t_ns: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub pl_rate: Vec<f64>,
}

fn validate_populations(p0: &[f64]) -> Result<()> {
    let sum: f64 = p0.iter().sum();
    if p0.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadPopulations);
    }
    Ok(())
}

fn rk4_step(gen: &[Vec<f64>], p: &mut [f64], h: f64, scratch: &mut [Vec<f64>]) {
    let n = p.len();
    let (k1, rest) = scratch.split_at_mut(1);
    let (k2, rest) = rest.split_at_mut(1);
    let (k3, rest) = rest.split_at_mut(1);
    let (k4, tmp) = rest.split_at_mut(1);
    let (k1, k2, k3, k4, tmp) = (&mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut tmp[0]);

    matvec_into(gen, p, k1);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k1[i];
    }
    matvec_into(gen, tmp, k2);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k2[i];
    }
    matvec_into(gen, tmp, k3);
    for i in 0..n {
        tmp[i] = p[i] + h * k3[i];
    }
    matvec_into(gen, tmp, k4);
    for i in 0..n {
        p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn matvec_into(m: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    for (i, row) in m.iter().enumerate() {
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Integrate dp/dt = R p over `t_grid` (laser and RF held on).
///
/// Fixed-step RK4 with internal step capped at 0.1 / max_rate; grid points
/// are hit exactly by subdividing each interval.
pub fn evolve_rate_model(m: &RateModel, p0: &[f64], t_grid: &[f64]) -> Result<PopulationTrace> {
    evolve_with_switches(m, p0, t_grid, |_| (true, true))
}

/// As `evolve_rate_model` but laser/RF state is a function of time.
pub fn evolve_with_switches<F>(
    m: &RateModel,
    p0: &[f64],
    t_grid: &[f64],
    switches: F,
) -> Result<PopulationTrace>
where
    F: Fn(f64) -> (bool, bool),
{
    m.validate()?;
    validate_populations(p0)?;
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadGrid);
    }
    let n = m.n_levels();
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p0.len(),
        });
    }
    let max_rate = m.max_total_rate(true, true).max(1e-12);
    let h_max = 0.1 / max_rate;

    let mut p = p0.to_vec();
    let mut scratch = vec![vec![0.0; n]; 5];
    let mut populations = Vec::with_capacity(t_grid.len());
    let mut pl = Vec::with_capacity(t_grid.len());

    let (laser0, rf0) = switches(t_grid[0]);
    populations.push(p.clone());
    pl.push(m.pl_rate(&p, laser0));
    let _ = rf0;

    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let steps = (dt / h_max).ceil().max(1.0) as usize;
        let h = dt / steps as f64;
        // switch state sampled at the interval start; grids must resolve edges
        let (laser, rf) = switches(w[0]);
        let gen = m.generator(laser, rf);
        for _ in 0..steps {
            rk4_step(&gen, &mut p, h, &mut scratch);
        }
        populations.push(p.clone());
        pl.push(m.pl_rate(&p, laser));
    }

    Ok(PopulationTrace {
        t_ns: t_grid.to_vec(),
        populations,
        pl_rate: pl,
    })
}

/// Steady state of the rate model restricted to the levels reachable from
/// `support`, solved from the nullspace of the generator by LU.
pub fn steady_state(
    m: &RateModel,
    laser_on: bool,
    rf_on: bool,
    support: &[usize],
) -> Result<Vec<f64>> {
    m.validate()?;
    let n = m.n_levels();
    let gen = m.generator(laser_on, rf_on);

    let mut reachable = vec![false; n];
    let mut stack: Vec<usize> = support.to_vec();
    for &s in support {
        reachable[s] = true;
    }
    while let Some(a) = stack.pop() {
        for b in 0..n {
            if b != a && gen[b][a] > 0.0 && !reachable[b] {
                reachable[b] = true;
                stack.push(b);
            }
        }
    }
    let idx: Vec<usize> = (0..n).filter(|&i| reachable[i]).collect();
    let k = idx.len();
    let mut a = vec![vec![0.0; k]; k];
    for (ii, &gi) in idx.iter().enumerate() {
        for (jj, &gj) in idx.iter().enumerate() {
            a[ii][jj] = gen[gi][gj];
        }
    }
    // replace the last equation with the normalization constraint
    for v in a[k - 1].iter_mut() {
        *v = 1.0;
    }
    let mut b = vec![0.0; k];
    b[k - 1] = 1.0;
    let x = crate::linalg::solve_lu(&a, &b)?;
    let mut p = vec![0.0; n];
    for (ii, &gi) in idx.iter().enumerate() {
        p[gi] = x[ii];
    }
    Ok(p)
}

/// A stretch of a pulse/transient protocol with fixed laser and RF state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub duration_ns: f64,
    pub laser_on: bool,
    pub rf_on: bool,
}

/// Result of an RF on/off transient simulation.
#[derive(Clone, Debug)]
pub struct PlTransient {
    pub trace: PopulationTrace,
    /// Time of the last RF on->off edge, if any.
    pub rf_off_time_ns: Option<f64>,
}

/// Piecewise evolution across RF on/off edges with the laser held on.
///
/// Starts from the steady state of the first segment, mirroring a chopped-RF
/// measurement that has run for many periods. `segments` are
/// (duration_ns, rf_on) pairs.
pub fn simulate_pl_transient(
    m: &RateModel,
    segments: &[(f64, bool)],
    dt_ns: f64,
) -> Result<PlTransient> {
    if segments.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(dt_ns > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let segs: Vec<Segment> = segments
        .iter()
        .map(|&(duration_ns, rf_on)| Segment {
            duration_ns,
            laser_on: true,
            rf_on,
        })
        .collect();
    let p0 = steady_state(m, true, segs[0].rf_on, &[LEVEL_GS0])?;
    let trace = evolve_segments(m, &p0, &segs, dt_ns)?;

    let mut rf_off_time = None;
    let mut t = 0.0;
    for w in segs.windows(2) {
        t += w[0].duration_ns;
        if w[0].rf_on && !w[1].rf_on {
            rf_off_time = Some(t);
        }
    }
    Ok(PlTransient {
        trace,
        rf_off_time_ns: rf_off_time,
    })
}

/// Evolve through an arbitrary laser/RF segment program from `p0`.
pub fn evolve_segments(
    m: &RateModel,
    p0: &[f64],
    segments: &[Segment],
    dt_ns: f64,
) -> Result<PopulationTrace> {
    if segments.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut edges = vec![0.0];
    for s in segments {
        if !(s.duration_ns >= 0.0) {
            return Err(Error::InvalidArgument("segment durations must be >= 0".into()));
        }
        let last = *edges.last().unwrap();
        edges.push(last + s.duration_ns);
    }
    let total = *edges.last().unwrap();
    let n_pts = (total / dt_ns).round() as usize;
    let grid: Vec<f64> = (0..=n_pts).map(|k| k as f64 * dt_ns).collect();

    let state_at = |t: f64| -> (bool, bool) {
        let mut acc = 0.0;
        for s in segments {
            acc += s.duration_ns;
            if t < acc - 1e-9 {
                return (s.laser_on, s.rf_on);
            }
        }
        let last = segments.last().unwrap();
        (last.laser_on, last.rf_on)
    };
    evolve_with_switches(m, p0, &grid, state_at)
}

/// Mono-exponential settling time of the PL trace after the RF-off edge.
pub fn pl_settling_time(transient: &PlTransient) -> Result<FitResult> {
    let edge = transient
        .rf_off_time_ns
        .ok_or_else(|| Error::InvalidArgument("transient has no RF-off edge".into()))?;
    let t: Vec<f64> = transient
        .trace
        .t_ns
        .iter()
        .copied()
        .filter(|&t| t >= edge)
        .map(|t| t - edge)
        .collect();
    let y: Vec<f64> = transient
        .trace
        .t_ns
        .iter()
        .zip(&transient.trace.pl_rate)
        .filter(|(&t, _)| t >= edge)
        .map(|(_, &v)| v)
        .collect();
    fit_exponential_settle(&TimeTrace::new(t, y, None)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseMode {
    Rabi,
    T1,
    Ramsey,
}

/// Timing template of the optically detected pulse sequences: a laser
/// initialization pulse, an RF manipulation interval of variable length,
/// and a short detection window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSequence {
    pub init_laser_ns: f64,
    pub rf_pulse_ns: f64,
    pub detect_window_ns: f64,
    pub mode: PulseMode,
}

impl PulseSequence {
    pub fn new(init_laser_ns: f64, rf_pulse_ns: f64, detect_window_ns: f64, mode: PulseMode) -> Result<Self> {
        for (name, v) in [
            ("init_laser_ns", init_laser_ns),
            ("rf_pulse_ns", rf_pulse_ns),
            ("detect_window_ns", detect_window_ns),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(PulseSequence {
            init_laser_ns,
            rf_pulse_ns,
            detect_window_ns,
            mode,
        })
    }

    /// Laser/RF program implementing this sequence for the rate model.
    /// For T1 the RF pulse is followed by a dark wait of the same τ.
    pub fn segments(&self) -> Vec<Segment> {
        let rf = Segment {
            duration_ns: self.rf_pulse_ns,
            laser_on: false,
            rf_on: true,
        };
        let init = Segment {
            duration_ns: self.init_laser_ns,
            laser_on: true,
            rf_on: false,
        };
        let detect = Segment {
            duration_ns: self.detect_window_ns,
            laser_on: true,
            rf_on: false,
        };
        match self.mode {
            PulseMode::Rabi | PulseMode::Ramsey => vec![init, rf, detect],
            PulseMode::T1 => vec![
                init,
                rf,
                Segment {
                    duration_ns: self.rf_pulse_ns,
                    laser_on: false,
                    rf_on: false,
                },
                detect,
            ],
        }
    }
}

impl Default for PulseSequence {
    fn default() -> Self {
        PulseSequence {
            init_laser_ns: 5000.0,
            rf_pulse_ns: 0.0,
            detect_window_ns: 250.0,
            mode: PulseMode::Ramsey,
        }
    }
}

/// Contrast versus free-evolution time.
#[derive(Clone, Debug, PartialEq)]
pub struct RamseyTrace {
    pub tau_ns: Vec<f64>,
    pub contrast: Vec<f64>,
}

impl RamseyTrace {
    pub fn new(tau_ns: Vec<f64>, contrast: Vec<f64>) -> Result<Self> {
        if tau_ns.is_empty()
            || tau_ns.len() != contrast.len()
            || tau_ns.windows(2).any(|w| !(w[1] > w[0]))
            || contrast.iter().any(|v| !v.is_finite())
        {
            return Err(Error::BadGrid);
        }
        Ok(RamseyTrace { tau_ns, contrast })
    }
}

const MHZ_NS: f64 = 1e-3; // MHz * ns in cycles

/// Two-component Ramsey fringe model
/// `C(τ) = (a1 cos ω1 τ + a2 cos ω2 τ) e^(-τ/T2*)`.
pub fn ramsey_closed_form(
    a1: f64,
    a2: f64,
    f1_mhz: f64,
    f2_mhz: f64,
    t2star_us: f64,
    tau_grid_ns: &[f64],
) -> Result<RamseyTrace> {
    if !(t2star_us > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t2star must be positive, got {t2star_us}"
        )));
    }
    let t2_ns = t2star_us * 1000.0;
    let w1 = 2.0 * std::f64::consts::PI * f1_mhz * MHZ_NS;
    let w2 = 2.0 * std::f64::consts::PI * f2_mhz * MHZ_NS;
    let contrast = tau_grid_ns
        .iter()
        .map(|&tau| (a1 * (w1 * tau).cos() + a2 * (w2 * tau).cos()) * (-tau / t2_ns).exp())
        .collect();
    RamseyTrace::new(tau_grid_ns.to_vec(), contrast)
}

/// Hard-pulse window: transitions detuned from the drive by more than this
/// are treated as unaddressed.
pub const DEFAULT_RAMSEY_DETUNING_WINDOW_MHZ: f64 = 25.0;

/// Ramsey fringes predicted from the spin Hamiltonian: a detuning cosine
/// per addressable transition, weighted by relative intensity (weights
/// normalized to 1) under a common T2* envelope.
pub fn ramsey_from_hamiltonian(
    sys: &SpinSystem,
    b: &FieldVector,
    rf_freq_mhz: f64,
    t2star_us: f64,
    tau_grid_ns: &[f64],
    drive: RfDrive,
    max_detuning_mhz: f64,
) -> Result<RamseyTrace> {
    if !(t2star_us > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t2star must be positive, got {t2star_us}"
        )));
    }
    let eig = diagonalize(&build_hamiltonian(sys, b))?;
    let ts = transitions_default_cutoff(&eig, sys, drive)?;
    if let Some(nearest) = ts
        .iter()
        .map(|t| (t.freq_mhz - rf_freq_mhz).abs())
        .min_by(f64::total_cmp)
    {
        if nearest > 10.0 {
            log::warn!(
                "RF frequency {rf_freq_mhz} MHz is {nearest:.1} MHz from the nearest transition"
            );
        }
    }
    let addressed: Vec<(f64, f64)> = ts
        .iter()
        .filter(|t| (t.freq_mhz - rf_freq_mhz).abs() <= max_detuning_mhz)
        .map(|t| (t.freq_mhz - rf_freq_mhz, t.intensity))
        .collect();
    let total: f64 = addressed.iter().map(|&(_, w)| w).sum();
    if addressed.is_empty() || total <= 0.0 {
        return Err(Error::NoAddressableTransitions);
    }
    let t2_ns = t2star_us * 1000.0;
    let contrast = tau_grid_ns
        .iter()
        .map(|&tau| {
            let osc: f64 = addressed
                .iter()
                .map(|&(df, w)| {
                    w / total * (2.0 * std::f64::consts::PI * df * MHZ_NS * tau).cos()
                })
                .sum();
            osc * (-tau / t2_ns).exp()
        })
        .collect();
    RamseyTrace::new(tau_grid_ns.to_vec(), contrast)
}

/// Longitudinal relaxation trace
/// `C(τ) = (c0 - c_floor) e^(-τ/T1) + c_floor`.
pub fn t1_trace(t1_ns: f64, c0: f64, c_floor: f64, tau_grid_ns: &[f64]) -> Result<RamseyTrace> {
    if !(t1_ns > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t1 must be positive, got {t1_ns}"
        )));
    }
    let contrast = tau_grid_ns
        .iter()
        .map(|&tau| (c0 - c_floor) * (-tau / t1_ns).exp() + c_floor)
        .collect();
    RamseyTrace::new(tau_grid_ns.to_vec(), contrast)
}

/// Discrete Fourier magnitude spectrum of a uniformly sampled trace:
/// mean-subtracted, optionally Hann-windowed; local maxima sorted by
/// magnitude with 3-point parabolic frequency refinement.
pub fn fft_peaks(trace: &RamseyTrace, n_peaks: usize, hann_window: bool) -> Result<Vec<(f64, f64)>> {
    let n = trace.tau_ns.len();
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 samples, got {n}"
        )));
    }
    let dt = trace.tau_ns[1] - trace.tau_ns[0];
    for w in trace.tau_ns.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::InvalidArgument("tau grid must be uniform".into()));
        }
    }

    let mean = trace.contrast.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = trace
        .contrast
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = if hann_window {
                let x = std::f64::consts::PI * k as f64 / (n - 1) as f64;
                x.sin() * x.sin()
            } else {
                1.0
            };
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mag: Vec<f64> = buf[..half].iter().map(|z| 2.0 * z.norm() / n as f64).collect();
    let df_mhz = 1000.0 / (n as f64 * dt);

    let mut peaks: Vec<(usize, f64)> = (1..half.saturating_sub(1))
        .filter(|&i| mag[i] > mag[i - 1] && mag[i] > mag[i + 1])
        .map(|i| (i, mag[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    peaks.truncate(n_peaks);

    let mut out: Vec<(f64, f64)> = peaks
        .into_iter()
        .map(|(i, m)| {
            let (alpha, beta, gamma) = (mag[i - 1], mag[i], mag[i + 1]);
            let denom = alpha - 2.0 * beta + gamma;
            let delta = if denom.abs() > 0.0 {
                (0.5 * (alpha - gamma) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            ((i as f64 + delta) * df_mhz, m)
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn absorbing_ground_state_is_constant() {
        let mut m = RateModel::new_default_levels();
        m.set_rate(LEVEL_ES0, LEVEL_GS0, 2.0, true);
        // no pump: GS0 never leaves
        let mut p0 = vec![0.0; 6];
        p0[LEVEL_GS0] = 1.0;
        let grid: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        let trace = evolve_rate_model(&m, &p0, &grid).unwrap();
        for p in &trace.populations {
            assert!((p[LEVEL_GS0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn population_is_conserved() {
        let m = presets::rate_model_fig1f_default();
        let p0 = vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0];
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.5).collect();
        let trace = evolve_rate_model(&m, &p0, &grid).unwrap();
        for p in &trace.populations {
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn steady_state_matches_long_time_evolution() {
        let m = presets::rate_model_fig1f_default();
        let ss = steady_state(&m, true, true, &[LEVEL_GS0]).unwrap();
        let mut p0 = vec![0.0; 6];
        p0[LEVEL_GS0] = 1.0;
        let grid: Vec<f64> = (0..=60).map(|k| k as f64 * 100.0).collect();
        let trace = evolve_rate_model(&m, &p0, &grid).unwrap();
        let last = trace.populations.last().unwrap();
        for (a, b) in last.iter().zip(&ss) {
            assert!((a - b).abs() < 1e-6, "evolved {a} vs nullspace {b}");
        }
    }

    #[test]
    fn rf_mixing_raises_steady_pl() {
        let m = presets::rate_model_fig1f_default();
        let on = steady_state(&m, true, true, &[LEVEL_GS0]).unwrap();
        let off = steady_state(&m, true, false, &[LEVEL_GS0]).unwrap();
        assert!(m.pl_rate(&on, true) > m.pl_rate(&off, true));
    }

    #[test]
    fn rejects_negative_rates() {
        let mut m = RateModel::new_default_levels();
        m.rates[0][1] = -1.0;
        assert!(matches!(m.validate(), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn ramsey_closed_form_basics() {
        let tau: Vec<f64> = (0..256).map(|k| k as f64 * 10.0).collect();
        let trace = ramsey_closed_form(0.7, 0.0, 3.0, 0.0, 2.0, &tau).unwrap();
        assert!((trace.contrast[0] - 0.7).abs() < 1e-15);
        // envelope bound
        let trace2 = ramsey_closed_form(0.5, 0.5, 1.6, 10.1, 2.0, &tau).unwrap();
        for (&t, &c) in trace2.tau_ns.iter().zip(&trace2.contrast) {
            assert!(c.abs() <= 1.0 * (-t / 2000.0).exp() + 1e-12);
        }
    }

    #[test]
    fn fft_finds_pure_tone() {
        let tau: Vec<f64> = (0..1024).map(|k| k as f64 * (10_000.0 / 1024.0)).collect();
        let contrast: Vec<f64> = tau
            .iter()
            .map(|&t| (2.0 * std::f64::consts::PI * 5.0 * 1e-3 * t).cos())
            .collect();
        let trace = RamseyTrace::new(tau, contrast).unwrap();
        let peaks = fft_peaks(&trace, 1, true).unwrap();
        assert!((peaks[0].0 - 5.0).abs() < 0.05, "peak at {}", peaks[0].0);
    }

    #[test]
    fn fft_two_tone_paper_values() {
        let tau: Vec<f64> = (0..1000).map(|k| k as f64 * 4.0).collect();
        let trace = ramsey_closed_form(0.5, 0.5, 1.6, 10.1, 2.0, &tau).unwrap();
        let peaks = fft_peaks(&trace, 2, true).unwrap();
        let bin = 1000.0 / (1000.0 * 4.0);
        let mut freqs: Vec<f64> = peaks.iter().map(|p| p.0).collect();
        freqs.sort_by(f64::total_cmp);
        assert!((freqs[0] - 1.6).abs() <= bin, "f1 {}", freqs[0]);
        assert!((freqs[1] - 10.1).abs() <= bin, "f2 {}", freqs[1]);
    }

    #[test]
    fn fft_constant_trace_has_no_peaks() {
        let tau: Vec<f64> = (0..64).map(|k| k as f64).collect();
        let trace = RamseyTrace::new(tau, vec![0.35; 64]).unwrap();
        let peaks = fft_peaks(&trace, 3, true).unwrap();
        assert!(peaks.is_empty());
    }

    #[test]
    fn fft_rejects_nonuniform_grid() {
        let mut tau: Vec<f64> = (0..32).map(|k| k as f64).collect();
        tau[20] += 0.3;
        let trace = RamseyTrace::new(tau, vec![0.0; 32]).unwrap();
        assert!(fft_peaks(&trace, 1, true).is_err());
    }

    #[test]
    fn t1_trace_values() {
        let tau = [0.0, 660.0, 1e9];
        let trace = t1_trace(660.0, 1.0, 0.06, &tau).unwrap();
        assert!((trace.contrast[0] - 1.0).abs() < 1e-15);
        assert!((trace.contrast[1] - (0.94 / std::f64::consts::E + 0.06)).abs() < 1e-12);
        assert!((trace.contrast[2] - 0.06).abs() < 1e-12);
    }

    #[test]
    fn ramsey_single_transition_detuning() {
        // single-transition system: S=1, I=0, E=0 at zero field
        let sys = crate::spin::SpinSystem::electron_only(crate::spin::Spin::ONE, 560.0, 0.0).unwrap();
        let tau: Vec<f64> = (0..512).map(|k| k as f64 * 8.0).collect();
        // on resonance: pure envelope
        let on = ramsey_from_hamiltonian(
            &sys,
            &FieldVector::ZERO,
            560.0,
            2.0,
            &tau,
            RfDrive::default(),
            DEFAULT_RAMSEY_DETUNING_WINDOW_MHZ,
        )
        .unwrap();
        for (&t, &c) in on.tau_ns.iter().zip(&on.contrast) {
            assert!((c - (-t / 2000.0).exp()).abs() < 1e-12);
        }
        // detuned by 5 MHz: cosine under envelope
        let det = ramsey_from_hamiltonian(
            &sys,
            &FieldVector::ZERO,
            555.0,
            2.0,
            &tau,
            RfDrive::default(),
            DEFAULT_RAMSEY_DETUNING_WINDOW_MHZ,
        )
        .unwrap();
        for (&t, &c) in det.tau_ns.iter().zip(&det.contrast) {
            let expect = (2.0 * std::f64::consts::PI * 5.0 * 1e-3 * t).cos() * (-t / 2000.0).exp();
            assert!((c - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn ramsey_errors_when_nothing_addressable() {
        let sys = crate::spin::SpinSystem::electron_only(crate::spin::Spin::ONE, 560.0, 0.0).unwrap();
        let tau: Vec<f64> = (0..64).map(|k| k as f64 * 10.0).collect();
        let err = ramsey_from_hamiltonian(
            &sys,
            &FieldVector::ZERO,
            100.0,
            2.0,
            &tau,
            RfDrive::default(),
            DEFAULT_RAMSEY_DETUNING_WINDOW_MHZ,
        );
        assert!(matches!(err, Err(Error::NoAddressableTransitions)));
    }

    #[test]
    fn sequence_segments_shapes() {
        let seq = PulseSequence::new(5000.0, 120.0, 250.0, PulseMode::T1).unwrap();
        let segs = seq.segments();
        assert_eq!(segs.len(), 4);
        assert!(segs[0].laser_on && !segs[0].rf_on);
        assert!(!segs[1].laser_on && segs[1].rf_on);
        assert!(!segs[2].laser_on && !segs[2].rf_on);
        assert!(PulseSequence::new(-1.0, 0.0, 0.0, PulseMode::Rabi).is_err());
    }
}
