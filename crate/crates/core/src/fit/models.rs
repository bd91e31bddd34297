//! Concrete fit models: exponential settling, multi-component Ramsey
//! fringes, instrument-response-convolved lifetime decay, and the
//! Debye-Waller integral ratio.

use crate::dynamics::{fft_peaks, RamseyTrace};
use crate::error::{Error, Result};
use crate::fit::engine::{minimize_residuals, EngineOptions};
use crate::fit::{FitResult, OpticalSpectrum, TimeTrace};

/// Fit `a·exp(-t/t_const) + floor`.
pub fn fit_exponential_settle(trace: &TimeTrace) -> Result<FitResult> {
    let n = trace.t.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    let t0 = trace.t[0];
    let t: Vec<f64> = trace.t.iter().map(|&x| x - t0).collect();
    let y = &trace.signal;
    let span = t[n - 1];

    let tail = &y[n - n / 10 - 1..];
    let floor0 = tail.iter().sum::<f64>() / tail.len() as f64;
    let amp0 = y[0] - floor0;
    let scale = y.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    // first crossing of 1/e estimates the time constant
    let target = floor0 + amp0 / std::f64::consts::E;
    let tc0 = t
        .iter()
        .zip(y)
        .find(|(_, &v)| {
            if amp0 >= 0.0 {
                v <= target
            } else {
                v >= target
            }
        })
        .map(|(&tt, _)| tt.max(span * 1e-3))
        .unwrap_or(span / 3.0);

    let guess = [amp0, tc0, floor0];
    let bounds = [
        (f64::NEG_INFINITY, f64::INFINITY),
        (span * 1e-6, span * 1e4),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    let mut residual = |p: &[f64]| -> Vec<f64> {
        t.iter()
            .zip(y)
            .map(|(&tt, &d)| p[0] * (-tt / p[1]).exp() + p[2] - d)
            .collect()
    };
    let out = minimize_residuals(&mut residual, &guess, &bounds, &EngineOptions::default());

    let mut warnings = Vec::new();
    let amp_sigma = out.uncertainties.first().copied().unwrap_or(f64::INFINITY);
    if out.params[0].abs() < (2.0 * amp_sigma).max(1e-9 * scale) {
        warnings.push("amplitude consistent with zero; t_const unconstrained".to_string());
    }
    let suffix = trace.unit.suffix();
    Ok(FitResult {
        names: vec![
            "amplitude".to_string(),
            format!("t_const_{suffix}"),
            "floor".to_string(),
        ],
        values: out.params,
        uncertainties: out.uncertainties,
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        warnings,
    })
}

/// Fit `Σ_i a_i cos(2π f_i τ) · exp(-τ/T2*)` with `n_components` cosines.
///
/// Frequency guesses are seeded from the FFT peak list; components are
/// reported sorted by ascending frequency, T2* in microseconds.
pub fn fit_ramsey(trace: &RamseyTrace, n_components: usize) -> Result<FitResult> {
    if n_components == 0 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    let n = trace.tau_ns.len();
    let tau = &trace.tau_ns;
    let y = &trace.contrast;
    let span = tau[n - 1] - tau[0];
    let dt = tau[1] - tau[0];
    let nyquist_mhz = 500.0 / dt;

    let mut warnings = Vec::new();
    let peaks = fft_peaks(trace, n_components, true)?;
    let amp_scale = y.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-12);
    let bin_mhz = 1000.0 / (n as f64 * dt);

    let mut f_guess: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    let mut a_guess: Vec<f64> = peaks.iter().map(|p| p.1).collect();
    while f_guess.len() < n_components {
        let k = f_guess.len();
        f_guess.push(bin_mhz * 2.0 * (k + 1) as f64);
        a_guess.push(amp_scale / n_components as f64);
        if k == peaks.len() {
            warnings.push(format!(
                "only {} FFT peaks found for {} components; remaining guesses are synthetic",
                peaks.len(),
                n_components
            ));
        }
    }

    // params: [a_1..a_n, f_1..f_n, t2star_ns]
    let mut guess = a_guess;
    guess.extend(f_guess);
    guess.push(span / 3.0);
    let mut bounds = vec![(-4.0 * amp_scale, 4.0 * amp_scale); n_components];
    bounds.extend(vec![(0.0, nyquist_mhz); n_components]);
    bounds.push((dt, 1e4 * span));

    let model = |p: &[f64], tt: f64| -> f64 {
        let t2 = p[2 * n_components];
        let osc: f64 = (0..n_components)
            .map(|k| {
                p[k] * (2.0 * std::f64::consts::PI * p[n_components + k] * 1e-3 * tt).cos()
            })
            .sum();
        osc * (-tt / t2).exp()
    };
    let mut residual = |p: &[f64]| -> Vec<f64> {
        tau.iter().zip(y).map(|(&tt, &d)| model(p, tt) - d).collect()
    };
    let opts = EngineOptions {
        max_iterations: 400,
        ..Default::default()
    };
    let out = minimize_residuals(&mut residual, &guess, &bounds, &opts);

    // order components by frequency
    let mut order: Vec<usize> = (0..n_components).collect();
    order.sort_by(|&a, &b| out.params[n_components + a].total_cmp(&out.params[n_components + b]));

    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut uncertainties = Vec::new();
    let have_sigma = !out.uncertainties.is_empty();
    for (rank, &k) in order.iter().enumerate() {
        names.push(format!("a{}", rank + 1));
        values.push(out.params[k]);
        if have_sigma {
            uncertainties.push(out.uncertainties[k]);
        }
    }
    for (rank, &k) in order.iter().enumerate() {
        names.push(format!("f{}_mhz", rank + 1));
        values.push(out.params[n_components + k]);
        if have_sigma {
            uncertainties.push(out.uncertainties[n_components + k]);
        }
    }
    names.push("t2star_us".to_string());
    values.push(out.params[2 * n_components] / 1000.0);
    if have_sigma {
        uncertainties.push(out.uncertainties[2 * n_components] / 1000.0);
    }

    Ok(FitResult {
        names,
        values,
        uncertainties,
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        warnings,
    })
}

/// Unit-area Gaussian instrument response sampled on `t`; rejected when the
/// stated width cannot be represented on the grid.
pub fn gaussian_response(t: &[f64], center: f64, fwhm: f64) -> Result<Vec<f64>> {
    if t.len() < 2 {
        return Err(Error::BadGrid);
    }
    let dt = t[1] - t[0];
    if !(fwhm >= dt) {
        return Err(Error::InvalidArgument(format!(
            "response width {fwhm} is narrower than the grid step {dt}"
        )));
    }
    let sigma = fwhm / (8.0 * 2f64.ln()).sqrt();
    let norm = sigma * (2.0 * std::f64::consts::PI).sqrt();
    Ok(t.iter()
        .map(|&x| (-0.5 * ((x - center) / sigma).powi(2)).exp() / norm)
        .collect())
}

/// Fit a mono-exponential decay convolved with the instrument response:
/// `baseline + amplitude · (response ⊛ exp(-u/τ)·step(u))(t - t0)`.
pub fn fit_lifetime_convolved(trace: &TimeTrace) -> Result<FitResult> {
    let response = trace
        .response
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("instrument-response trace required".into()))?;
    let n = trace.t.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    let dt = trace.t[1] - trace.t[0];
    for w in trace.t.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidArgument(
                "lifetime fit needs a uniform time grid".into(),
            ));
        }
    }
    let area: f64 = response.iter().sum::<f64>() * dt;
    if !(area > 0.0) || response.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "instrument response must be nonnegative with positive area".into(),
        ));
    }
    let r_norm: Vec<f64> = response.iter().map(|&v| v / area).collect();
    let t = &trace.t;
    let y = &trace.signal;

    // Direct convolution over the grid. The decay kernel is averaged over
    // each sample bin, which keeps the model continuous in t0 (a raw
    // step*exp sample jumps whenever t0 crosses a grid point) and
    // discretizes the convolution integral to O(dt^2).
    let bin_avg_decay = move |u: f64, tau: f64| -> f64 {
        let (lo, hi) = (u - dt / 2.0, u + dt / 2.0);
        if hi <= 0.0 {
            0.0
        } else if lo >= 0.0 {
            tau / dt * ((-lo / tau).exp() - (-hi / tau).exp())
        } else {
            tau / dt * (1.0 - (-hi / tau).exp())
        }
    };
    let eval = |p: &[f64]| -> Vec<f64> {
        let (tau, amp, t0, baseline) = (p[0], p[1], p[2], p[3]);
        let mut out = vec![baseline; n];
        for (j, &rj) in r_norm.iter().enumerate() {
            if rj == 0.0 {
                continue;
            }
            let w = amp * rj * dt;
            for i in 0..n {
                let u = t[i] - t[j] - t0;
                if u + dt / 2.0 > 0.0 {
                    out[i] += w * bin_avg_decay(u, tau);
                }
            }
        }
        out
    };

    // initial guesses from the trace shape
    let (i_peak, &y_peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let head = &y[..(n / 20).max(2)];
    let baseline0 = head.iter().sum::<f64>() / head.len() as f64;
    let amp0 = (y_peak - baseline0).max(1e-12);
    // 1/e point after the peak estimates tau
    let target = baseline0 + amp0 / std::f64::consts::E;
    let tau0 = t[i_peak..]
        .iter()
        .zip(&y[i_peak..])
        .find(|(_, &v)| v <= target)
        .map(|(&tt, _)| (tt - t[i_peak]).max(dt))
        .unwrap_or((t[n - 1] - t[i_peak]) / 3.0);
    let r_peak = r_norm
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| t[i])
        .unwrap_or(t[0]);
    // the convolved peak sits just after t0 + response center
    let t0_0 = t[i_peak] - r_peak;

    let span = t[n - 1] - t[0];
    let guess = [tau0, amp0, t0_0, baseline0];
    let bounds = [
        (dt / 10.0, span * 100.0),
        (0.0, f64::INFINITY),
        (t0_0 - span / 5.0, t0_0 + span / 5.0),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    let mut residual = |p: &[f64]| -> Vec<f64> {
        eval(p).iter().zip(y).map(|(m, d)| m - d).collect()
    };
    let opts = EngineOptions {
        max_iterations: 300,
        ..Default::default()
    };
    let out = minimize_residuals(&mut residual, &guess, &bounds, &opts);
    let suffix = trace.unit.suffix();
    Ok(FitResult {
        names: vec![
            format!("tau_{suffix}"),
            "amplitude".to_string(),
            format!("t0_{suffix}"),
            "baseline".to_string(),
        ],
        values: out.params,
        uncertainties: out.uncertainties,
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        warnings: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMode {
    None,
    /// Subtract the straight line through the spectrum values at the edges
    /// of the total integration window.
    Linear,
}

/// Fraction of emission inside the zero-phonon-line window:
/// trapezoidal `∫_zpl I dλ / ∫_total I dλ`.
pub fn debye_waller(
    spec: &OpticalSpectrum,
    zpl_window_nm: (f64, f64),
    total_window_nm: (f64, f64),
    baseline: BaselineMode,
) -> Result<f64> {
    let (z0, z1) = zpl_window_nm;
    let (t0, t1) = total_window_nm;
    if !(z0 < z1 && t0 < t1 && t0 <= z0 && z1 <= t1) {
        return Err(Error::InvalidArgument(
            "zpl window must lie inside the total window".into(),
        ));
    }
    let grid = &spec.wavelength_nm;
    if t0 < grid[0] || t1 > grid[grid.len() - 1] {
        return Err(Error::InvalidArgument(
            "integration window extends beyond the spectrum".into(),
        ));
    }
    let intensity: Vec<f64> = match baseline {
        BaselineMode::None => spec.intensity.clone(),
        BaselineMode::Linear => {
            let y0 = interp(grid, &spec.intensity, t0);
            let y1 = interp(grid, &spec.intensity, t1);
            let slope = (y1 - y0) / (t1 - t0);
            grid.iter()
                .zip(&spec.intensity)
                .map(|(&x, &y)| y - (y0 + slope * (x - t0)))
                .collect()
        }
    };
    let total = window_integral(grid, &intensity, t0, t1);
    if total == 0.0 {
        return Err(Error::InvalidArgument(
            "total window integral is zero".into(),
        ));
    }
    Ok(window_integral(grid, &intensity, z0, z1) / total)
}

fn interp(x: &[f64], y: &[f64], xq: f64) -> f64 {
    match x.binary_search_by(|v| v.total_cmp(&xq)) {
        Ok(i) => y[i],
        Err(i) => {
            let i = i.clamp(1, x.len() - 1);
            let w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
            y[i - 1] * (1.0 - w) + y[i] * w
        }
    }
}

/// Trapezoidal integral over [a, b] with linear interpolation at the window
/// boundaries.
fn window_integral(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..x.len() {
        let (x0, x1) = (x[i - 1], x[i]);
        if x1 <= a || x0 >= b {
            continue;
        }
        let lo = x0.max(a);
        let hi = x1.min(b);
        let y_lo = y[i - 1] + (y[i] - y[i - 1]) * (lo - x0) / (x1 - x0);
        let y_hi = y[i - 1] + (y[i] - y[i - 1]) * (hi - x0) / (x1 - x0);
        acc += 0.5 * (y_lo + y_hi) * (hi - lo);
    }
    acc
}
