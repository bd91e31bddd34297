//! Zero-field ODMR spectrum fit: per-family zero-field splittings,
//! hyperfine constant, amplitude scale and linewidth.
//!
//! The residual landscape is multimodal (lines can lock onto a neighbor one
//! picket over, families can claim each other's peaks), so the fit layers
//! deterministic global stages before the final polish:
//!
//! 1. alternating per-family grid scans in the rotated coordinates
//!    u = D+E, v = D-E (and the hyperfine constant), strongest family
//!    first, against the residual left by the other families;
//! 2. a per-family Levenberg-Marquardt refit after each scan;
//! 3. a joint Levenberg-Marquardt polish over all parameters;
//! 4. if the polished residual is still far from the noise floor, a seeded
//!    differential-evolution search over the guess box, followed by another
//!    joint polish; the better of the two results wins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::engine::{minimize_residuals, EngineOptions};
use crate::fit::FitResult;
use crate::spectra::{
    transitions_default_cutoff, LineShape, LineShapeKind, RfDrive, Spectrum,
};
use crate::spin::{build_hamiltonian, diagonalize, FieldVector, Spin, SpinSystem};

/// Structure and initial guess for one family. The template's D, E and
/// (isotropic) A fields serve as the starting values; spins, orientation
/// and gyromagnetic ratios are held fixed.
#[derive(Clone, Debug)]
pub struct ZfsFamilyGuess {
    pub template: SpinSystem,
    pub family_scale: f64,
    pub fwhm_mhz: f64,
}

#[derive(Clone, Debug)]
pub struct ZfsFitOptions {
    pub drive: RfDrive,
    pub shape_kind: LineShapeKind,
    /// Alternating scan/refit rounds before the joint polish.
    pub scan_rounds: usize,
    /// Run the differential-evolution fallback when the polished relative
    /// residual stays above `fallback_rel_rss`.
    pub global_fallback: bool,
    pub fallback_rel_rss: f64,
    pub de_seed: u64,
}

impl Default for ZfsFitOptions {
    fn default() -> Self {
        ZfsFitOptions {
            drive: RfDrive::default(),
            shape_kind: LineShapeKind::Lorentzian,
            scan_rounds: 4,
            global_fallback: true,
            fallback_rel_rss: 1e-8,
            de_seed: 0x5eed_0d3e,
        }
    }
}

/// Best-fit values for one family, unpacked from the joint result.
#[derive(Clone, Copy, Debug)]
pub struct ZfsFamilyFit {
    pub d_mhz: f64,
    pub e_mhz: f64,
    pub a_mhz: f64,
    pub family_scale: f64,
    pub fwhm_mhz: f64,
}

#[derive(Clone)]
struct Family {
    template: SpinSystem,
    fit_hyperfine: bool,
    /// current values [d, e, a, scale, fwhm]
    p: [f64; 5],
    /// original guess, anchors the scan windows
    guess: [f64; 5],
}

impl Family {
    fn lines(&self, d: f64, e: f64, a: f64, drive: RfDrive) -> Result<Vec<(f64, f64)>> {
        let mut sys = self.template.clone();
        sys.d_mhz = d;
        sys.e_mhz = e;
        if self.fit_hyperfine {
            let mut t = [[0.0; 3]; 3];
            for (k, row) in t.iter_mut().enumerate() {
                row[k] = a;
            }
            sys.a_tensor_mhz = t;
        }
        let eig = diagonalize(&build_hamiltonian(&sys, &FieldVector::ZERO))?;
        Ok(transitions_default_cutoff(&eig, &sys, drive)?
            .into_iter()
            .map(|t| (t.freq_mhz, t.intensity))
            .collect())
    }

    fn spectrum_into(
        &self,
        buf: &mut [f64],
        grid: &[f64],
        p: &[f64; 5],
        drive: RfDrive,
        kind: LineShapeKind,
    ) -> Result<()> {
        buf.fill(0.0);
        let lines = self.lines(p[0], p[1], p[2], drive)?;
        let shape = LineShape::new(kind, p[4].abs().max(1e-6))?;
        for &(f0, inten) in &lines {
            let w = p[3] * inten;
            if w == 0.0 {
                continue;
            }
            for (b, &f) in buf.iter_mut().zip(grid) {
                *b += w * shape.eval(f - f0);
            }
        }
        Ok(())
    }
}

fn rss_against(buf: &[f64], target: &[f64]) -> f64 {
    buf.iter()
        .zip(target)
        .map(|(m, d)| (m - d) * (m - d))
        .sum()
}

/// Peak-seeded initial guesses: local maxima above 3x the median absolute
/// amplitude, paired (low, high) into D = (u+v)/2, E = (u-v)/2 per family.
pub fn seed_zfs_guesses(spectrum: &Spectrum, n_families: usize) -> Result<Vec<ZfsFamilyGuess>> {
    if n_families == 0 {
        return Err(Error::EmptyInput);
    }
    let amp = &spectrum.amplitude;
    let mut sorted: Vec<f64> = amp.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = 3.0 * median;

    let mut peaks: Vec<(f64, f64)> = Vec::new(); // (freq, amplitude)
    for i in 1..amp.len() - 1 {
        if amp[i] > threshold && amp[i] > amp[i - 1] && amp[i] > amp[i + 1] {
            peaks.push((spectrum.freq_grid_mhz[i], amp[i]));
        }
    }
    if peaks.is_empty() {
        return Err(Error::InvalidArgument(
            "no peaks above 3x the median amplitude".into(),
        ));
    }
    // strongest peaks first, two per family when available
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(2 * n_families);
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let fwhm = 10.0;
    let mut guesses = Vec::new();
    let mut iter = peaks.chunks(2);
    for _ in 0..n_families {
        let chunk = match iter.next() {
            Some(c) => c,
            None => break,
        };
        let (d, e, amp_ref) = if chunk.len() == 2 {
            let (v, u) = (chunk[0].0, chunk[1].0);
            ((u + v) / 2.0, (u - v) / 2.0, chunk[0].1.max(chunk[1].1))
        } else {
            (chunk[0].0, 0.1 * chunk[0].0, chunk[0].1)
        };
        let template = SpinSystem::with_isotropic_hyperfine(Spin::ONE, Spin::ZERO, d, e, 0.0, 0.0, 45.0)?;
        guesses.push(ZfsFamilyGuess {
            template,
            family_scale: amp_ref * std::f64::consts::PI * fwhm / 2.0,
            fwhm_mhz: fwhm,
        });
    }
    if guesses.is_empty() {
        return Err(Error::InvalidArgument(
            "not enough peaks to seed any family".into(),
        ));
    }
    Ok(guesses)
}

/// Fit the zero-field spectrum with `guesses.len()` families.
pub fn fit_zero_field_odmr(
    spectrum: &Spectrum,
    guesses: &[ZfsFamilyGuess],
    opts: &ZfsFitOptions,
) -> Result<FitResult> {
    if guesses.is_empty() {
        return Err(Error::EmptyInput);
    }
    let grid = &spectrum.freq_grid_mhz;
    let data = &spectrum.amplitude;
    let data_norm: f64 = data.iter().map(|v| v * v).sum();

    let mut families: Vec<Family> = guesses
        .iter()
        .map(|g| {
            let fit_hyperfine = g.template.i_nuclear.doubled() > 0;
            let p = [
                g.template.d_mhz,
                g.template.e_mhz,
                g.template.isotropic_hyperfine_mhz(),
                g.family_scale,
                g.fwhm_mhz,
            ];
            Family {
                template: g.template.clone(),
                fit_hyperfine,
                p,
                guess: p,
            }
        })
        .collect();

    // strongest families claim their lines first
    let mut order: Vec<usize> = (0..families.len()).collect();
    order.sort_by(|&a, &b| families[b].guess[3].total_cmp(&families[a].guess[3]));

    let mut scratch = vec![0.0; grid.len()];
    for _round in 0..opts.scan_rounds {
        for &fi in &order {
            // residual target with every other family subtracted
            let mut target = data.to_vec();
            for (gi, fam) in families.iter().enumerate() {
                if gi != fi {
                    fam.spectrum_into(&mut scratch, grid, &fam.p, opts.drive, opts.shape_kind)?;
                    for (t, s) in target.iter_mut().zip(&scratch) {
                        *t -= s;
                    }
                }
            }
            let fam = &mut families[fi];
            scan_family(fam, grid, &target, opts)?;
            refit_family(fam, grid, &target, opts)?;
        }
    }

    let joint = |fams: &[Family]| -> Vec<f64> {
        let mut x = Vec::new();
        for f in fams {
            x.extend_from_slice(&f.p[..2]);
            if f.fit_hyperfine {
                x.push(f.p[2]);
            }
            x.extend_from_slice(&f.p[3..]);
        }
        x
    };
    let unpack = |fams: &mut [Family], x: &[f64]| {
        let mut idx = 0;
        for f in fams {
            f.p[0] = x[idx];
            f.p[1] = x[idx + 1];
            idx += 2;
            if f.fit_hyperfine {
                f.p[2] = x[idx];
                idx += 1;
            }
            f.p[3] = x[idx];
            f.p[4] = x[idx + 1];
            idx += 2;
        }
    };

    let n_params: usize = families
        .iter()
        .map(|f| if f.fit_hyperfine { 5 } else { 4 })
        .sum();
    let free_bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n_params];

    let polish = |families: &mut Vec<Family>| -> Result<(Vec<f64>, f64, usize, Vec<f64>, bool)> {
        let start = joint(families);
        let fams = families.clone();
        let mut buf = vec![0.0; grid.len()];
        let mut work = fams.clone();
        let mut residual = |x: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; grid.len()];
            // unpack into work copies
            let mut idx = 0;
            for f in work.iter_mut() {
                f.p[0] = x[idx];
                f.p[1] = x[idx + 1];
                idx += 2;
                if f.fit_hyperfine {
                    f.p[2] = x[idx];
                    idx += 1;
                }
                f.p[3] = x[idx];
                f.p[4] = x[idx + 1];
                idx += 2;
            }
            for f in work.iter() {
                if f
                    .spectrum_into(&mut buf, grid, &f.p, opts.drive, opts.shape_kind)
                    .is_err()
                {
                    return vec![f64::MAX; grid.len()];
                }
                for (o, s) in out.iter_mut().zip(&buf) {
                    *o += s;
                }
            }
            out.iter().zip(data).map(|(m, d)| m - d).collect()
        };
        let engine_opts = EngineOptions {
            max_iterations: 400,
            ftol: 1e-15,
            xtol: 1e-12,
            ..Default::default()
        };
        let out = minimize_residuals(&mut residual, &start, &free_bounds, &engine_opts);
        unpack(families, &out.params);
        Ok((
            out.params,
            out.rss,
            out.iterations,
            out.uncertainties,
            out.converged,
        ))
    };

    let (mut best_x, mut best_rss, mut iterations, mut best_sigma, mut converged) =
        polish(&mut families)?;

    if opts.global_fallback && best_rss > opts.fallback_rel_rss * data_norm {
        let mut de_families = families.clone();
        // reset to the original guesses for an unbiased search box
        for f in de_families.iter_mut() {
            f.p = f.guess;
        }
        differential_evolution(&mut de_families, grid, data, opts)?;
        let (x2, rss2, it2, sigma2, conv2) = polish(&mut de_families)?;
        iterations += it2;
        if rss2 < best_rss {
            best_x = x2;
            best_rss = rss2;
            best_sigma = sigma2;
            converged = conv2;
            families = de_families;
        }
    }

    unpack(&mut families, &best_x);

    // assemble the public result
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut uncertainties = Vec::new();
    let mut warnings = Vec::new();
    let have_sigma = !best_sigma.is_empty();
    let mut idx = 0;
    for (k, f) in families.iter().enumerate() {
        let tag = format!("f{}", k + 1);
        let mut push = |name: String, value: f64, sig: Option<f64>| {
            names.push(name);
            values.push(value);
            if let Some(s) = sig {
                uncertainties.push(s);
            }
        };
        let sig = |i: usize| have_sigma.then(|| best_sigma[i]);
        push(format!("{tag}_d_mhz"), f.p[0], sig(idx));
        push(format!("{tag}_e_mhz"), f.p[1], sig(idx + 1));
        if have_sigma && f.p[1].abs() < 2.0 * best_sigma[idx + 1] {
            warnings.push(format!(
                "{tag}: E consistent with 0; its sign is not identifiable at zero field"
            ));
        }
        idx += 2;
        if f.fit_hyperfine {
            push(format!("{tag}_a_mhz"), f.p[2], sig(idx));
            idx += 1;
        }
        push(format!("{tag}_scale"), f.p[3], sig(idx));
        push(format!("{tag}_fwhm_mhz"), f.p[4], sig(idx + 1));
        idx += 2;
    }

    Ok(FitResult {
        names,
        values,
        uncertainties,
        rss: best_rss,
        converged,
        iterations,
        warnings,
    })
}

/// Unpack per-family values from a `fit_zero_field_odmr` result.
pub fn unpack_family_fits(result: &FitResult, n_families: usize) -> Vec<ZfsFamilyFit> {
    (0..n_families)
        .map(|k| {
            let tag = format!("f{}", k + 1);
            ZfsFamilyFit {
                d_mhz: result.value(&format!("{tag}_d_mhz")).unwrap_or(f64::NAN),
                e_mhz: result.value(&format!("{tag}_e_mhz")).unwrap_or(f64::NAN),
                a_mhz: result.value(&format!("{tag}_a_mhz")).unwrap_or(0.0),
                family_scale: result.value(&format!("{tag}_scale")).unwrap_or(f64::NAN),
                fwhm_mhz: result.value(&format!("{tag}_fwhm_mhz")).unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// 1-D/2-D grid scans in (u = D+E, A) then v = D-E, windows anchored on the
/// original guess so a mis-locked family can escape in later rounds.
fn scan_family(fam: &mut Family, grid: &[f64], target: &[f64], opts: &ZfsFitOptions) -> Result<()> {
    let (u0, v0) = (fam.guess[0] + fam.guess[1], fam.guess[0] - fam.guess[1]);
    let a0 = fam.guess[2];
    let u_window = (0.14 * u0.abs()).max(12.0);
    let v_window = (0.14 * v0.abs()).max(12.0);
    let a_window = (0.25 * a0.abs()).max(4.0);

    let v_now = fam.p[0] - fam.p[1];
    let u_trials = linspace_step(u0 - u_window, u0 + u_window, 1.0);
    let a_trials = if fam.fit_hyperfine {
        linspace_step(a0 - a_window, a0 + a_window, 0.75)
    } else {
        vec![fam.p[2]]
    };

    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(u_trials.len() * a_trials.len());
    for &u in &u_trials {
        for &a in &a_trials {
            candidates.push((u, a));
        }
    }
    let best_ua = candidates
        .par_iter()
        .map(|&(u, a)| {
            let p = [(u + v_now) / 2.0, (u - v_now) / 2.0, a, fam.p[3], fam.p[4]];
            let mut buf = vec![0.0; grid.len()];
            let rss = match fam.spectrum_into(&mut buf, grid, &p, opts.drive, opts.shape_kind) {
                Ok(()) => rss_against(&buf, target),
                Err(_) => f64::MAX,
            };
            (rss, u, a)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)))
        .unwrap();
    let (u_best, a_best) = (best_ua.1, best_ua.2);
    fam.p[0] = (u_best + v_now) / 2.0;
    fam.p[1] = (u_best - v_now) / 2.0;
    fam.p[2] = a_best;

    let v_trials = linspace_step(v0 - v_window, v0 + v_window, 1.0);
    let best_v = v_trials
        .par_iter()
        .map(|&v| {
            let p = [(u_best + v) / 2.0, (u_best - v) / 2.0, a_best, fam.p[3], fam.p[4]];
            let mut buf = vec![0.0; grid.len()];
            let rss = match fam.spectrum_into(&mut buf, grid, &p, opts.drive, opts.shape_kind) {
                Ok(()) => rss_against(&buf, target),
                Err(_) => f64::MAX,
            };
            (rss, v)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
        .unwrap()
        .1;
    fam.p[0] = (u_best + best_v) / 2.0;
    fam.p[1] = (u_best - best_v) / 2.0;
    Ok(())
}

fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Per-family LM refit against the residual target.
fn refit_family(fam: &mut Family, grid: &[f64], target: &[f64], opts: &ZfsFitOptions) -> Result<()> {
    let n_p = if fam.fit_hyperfine { 5 } else { 4 };
    let mut start = Vec::with_capacity(n_p);
    start.extend_from_slice(&fam.p[..2]);
    if fam.fit_hyperfine {
        start.push(fam.p[2]);
    }
    start.extend_from_slice(&fam.p[3..]);
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n_p];
    let fam_snapshot = fam.clone();
    let mut buf = vec![0.0; grid.len()];
    let mut residual = |x: &[f64]| -> Vec<f64> {
        let p = expand_params(&fam_snapshot, x);
        match fam_snapshot.spectrum_into(&mut buf, grid, &p, opts.drive, opts.shape_kind) {
            Ok(()) => buf.iter().zip(target).map(|(m, d)| m - d).collect(),
            Err(_) => vec![f64::MAX; grid.len()],
        }
    };
    let engine_opts = EngineOptions {
        max_iterations: 120,
        ..Default::default()
    };
    let out = minimize_residuals(&mut residual, &start, &bounds, &engine_opts);
    fam.p = expand_params(fam, &out.params);
    Ok(())
}

fn expand_params(fam: &Family, x: &[f64]) -> [f64; 5] {
    if fam.fit_hyperfine {
        [x[0], x[1], x[2], x[3], x[4]]
    } else {
        [x[0], x[1], fam.p[2], x[2], x[3]]
    }
}

/// Seeded rand/1/bin differential evolution over the guess box.
fn differential_evolution(
    families: &mut [Family],
    grid: &[f64],
    data: &[f64],
    opts: &ZfsFitOptions,
) -> Result<()> {
    // search box anchored on the original guesses
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for f in families.iter() {
        let g = f.guess;
        lo.push(g[0] - (0.13 * g[0].abs()).max(8.0));
        hi.push(g[0] + (0.13 * g[0].abs()).max(8.0));
        lo.push(g[1] - (0.13 * g[1].abs()).max(4.0));
        hi.push(g[1] + (0.13 * g[1].abs()).max(4.0));
        if f.fit_hyperfine {
            lo.push(g[2] - (0.13 * g[2].abs()).max(3.0));
            hi.push(g[2] + (0.13 * g[2].abs()).max(3.0));
        }
        lo.push(0.5 * g[3]);
        hi.push(2.0 * g[3]);
        lo.push(0.5 * g[4]);
        hi.push(2.0 * g[4]);
    }
    let dim = lo.len();
    let np = (5 * dim).max(40);
    let generations = 300;
    let f_weight = 0.7;
    let crossover = 0.9;

    let evaluate = |x: &[f64], work: &mut [Family], buf: &mut [f64], acc: &mut [f64]| -> f64 {
        let mut idx = 0;
        for f in work.iter_mut() {
            f.p[0] = x[idx];
            f.p[1] = x[idx + 1];
            idx += 2;
            if f.fit_hyperfine {
                f.p[2] = x[idx];
                idx += 1;
            }
            f.p[3] = x[idx];
            f.p[4] = x[idx + 1];
            idx += 2;
        }
        acc.fill(0.0);
        for f in work.iter() {
            if f
                .spectrum_into(buf, grid, &f.p, opts.drive, opts.shape_kind)
                .is_err()
            {
                return f64::MAX;
            }
            for (a, b) in acc.iter_mut().zip(buf.iter()) {
                *a += b;
            }
        }
        acc.iter().zip(data).map(|(m, d)| (m - d) * (m - d)).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.de_seed);
    let mut population: Vec<Vec<f64>> = (0..np)
        .map(|k| {
            if k == 0 {
                // keep the original guess in the gene pool
                families
                    .iter()
                    .flat_map(|f| {
                        let g = f.guess;
                        let mut v = vec![g[0], g[1]];
                        if f.fit_hyperfine {
                            v.push(g[2]);
                        }
                        v.push(g[3]);
                        v.push(g[4]);
                        v
                    })
                    .collect()
            } else {
                (0..dim).map(|j| rng.gen_range(lo[j]..=hi[j])).collect()
            }
        })
        .collect();

    let mut fitness: Vec<f64> = population
        .par_iter()
        .map_init(
            || (families.to_vec(), vec![0.0; grid.len()], vec![0.0; grid.len()]),
            |(work, buf, acc), x| evaluate(x, work, buf, acc),
        )
        .collect();

    for _gen in 0..generations {
        // build all trial vectors sequentially (deterministic rng), then
        // evaluate in parallel
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.gen_range(0..np);
                    if r != i {
                        return r;
                    }
                };
                let (r1, r2, r3) = (pick(), pick(), pick());
                let j_rand = rng.gen_range(0..dim);
                (0..dim)
                    .map(|j| {
                        if j == j_rand || rng.gen::<f64>() < crossover {
                            let v = population[r1][j]
                                + f_weight * (population[r2][j] - population[r3][j]);
                            v.clamp(lo[j], hi[j])
                        } else {
                            population[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fitness: Vec<f64> = trials
            .par_iter()
            .map_init(
                || (families.to_vec(), vec![0.0; grid.len()], vec![0.0; grid.len()]),
                |(work, buf, acc), x| evaluate(x, work, buf, acc),
            )
            .collect();
        for i in 0..np {
            if trial_fitness[i] <= fitness[i] {
                population[i] = trials[i].clone();
                fitness[i] = trial_fitness[i];
            }
        }
    }

    let best = fitness
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let x = &population[best];
    let mut idx = 0;
    for f in families.iter_mut() {
        f.p[0] = x[idx];
        f.p[1] = x[idx + 1];
        idx += 2;
        if f.fit_hyperfine {
            f.p[2] = x[idx];
            idx += 1;
        }
        f.p[3] = x[idx];
        f.p[4] = x[idx + 1];
        idx += 2;
    }
    Ok(())
}
