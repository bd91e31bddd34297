//! Subcommand implementations.

use std::path::PathBuf;

use spin_toolkit::dynamics::{
    pl_settling_time, ramsey_closed_form, ramsey_from_hamiltonian, simulate_pl_transient,
    t1_trace, RamseyTrace,
};
use spin_toolkit::fit::{
    debye_waller, fit_exponential_settle, fit_lifetime_convolved, fit_ramsey,
    fit_zero_field_odmr, gaussian_response, seed_zfs_guesses, BaselineMode, OpticalSpectrum,
    TimeTrace, TimeUnit, ZfsFamilyGuess, ZfsFitOptions,
};
use spin_toolkit::spectra::{
    field_sweep, frequency_grid, multi_family_spectrum, RfDrive, Spectrum, WeightedSystem,
};
use spin_toolkit::spin::{build_hamiltonian, diagonalize, FieldVector};

use crate::args::*;
use crate::config::{ConfigDocument, FamilyConfig};
use crate::exit::{CliError, CliResult};
use crate::report;
use crate::table::{emit_table, write_atomic, DataTable};

fn load_config(path: &Option<PathBuf>) -> CliResult<ConfigDocument> {
    match path {
        Some(p) => ConfigDocument::read(p),
        None => Ok(ConfigDocument::default()),
    }
}

/// Families from --config when given, otherwise the named presets,
/// otherwise every preset family.
fn resolve_families(sel: &FamilySelection) -> CliResult<(ConfigDocument, Vec<FamilyConfig>)> {
    let doc = load_config(&sel.config)?;
    if sel.config.is_some() {
        if !sel.preset.is_empty() {
            return Err(CliError::Usage(
                "--preset and --config are mutually exclusive".into(),
            ));
        }
        if doc.families.is_empty() {
            return Err(CliError::Usage(
                "configuration defines no [family.*] sections".into(),
            ));
        }
        let families = doc.families.clone();
        return Ok((doc, families));
    }
    let names: Vec<String> = if sel.preset.is_empty() {
        spin_toolkit::presets::FAMILY_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        sel.preset.clone()
    };
    let mut families = Vec::new();
    for name in &names {
        let system = spin_toolkit::presets::family_by_name(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown preset '{name}' (known: {})",
                spin_toolkit::presets::FAMILY_NAMES.join(", ")
            ))
        })?;
        families.push(FamilyConfig {
            name: name.clone(),
            system,
            family_scale: spin_toolkit::presets::default_family_scale(name),
        });
    }
    Ok((doc, families))
}

fn parse_drive(s: &str) -> CliResult<RfDrive> {
    match s {
        "x" => Ok(RfDrive::Axis([1.0, 0.0, 0.0])),
        "y" => Ok(RfDrive::Axis([0.0, 1.0, 0.0])),
        "unpolarized" => Ok(RfDrive::Unpolarized),
        other => {
            let parts: Vec<&str> = other.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::Usage(format!(
                    "drive must be x, y, unpolarized or 'ax,ay,az', got '{other}'"
                )));
            }
            let mut axis = [0.0; 3];
            for (slot, p) in axis.iter_mut().zip(&parts) {
                *slot = p
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad drive component '{p}'")))?;
            }
            Ok(RfDrive::Axis(axis))
        }
    }
}

fn parse_axis(s: &str) -> CliResult<[f64; 3]> {
    match s {
        "c" | "z" => Ok([0.0, 0.0, 1.0]),
        "x" => Ok([1.0, 0.0, 0.0]),
        "y" => Ok([0.0, 1.0, 0.0]),
        other => {
            let parts: Vec<&str> = other.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::Usage(format!(
                    "axis must be c, x, y or 'ax,ay,az', got '{other}'"
                )));
            }
            let mut axis = [0.0; 3];
            for (slot, p) in axis.iter_mut().zip(&parts) {
                *slot = p
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad axis component '{p}'")))?;
            }
            Ok(axis)
        }
    }
}

fn make_grid(doc: &ConfigDocument, g: &GridArgs) -> CliResult<Vec<f64>> {
    let min = g.f_min_mhz.unwrap_or(doc.grid.f_min_mhz);
    let max = g.f_max_mhz.unwrap_or(doc.grid.f_max_mhz);
    let step = g.f_step_mhz.unwrap_or(doc.grid.f_step_mhz);
    Ok(frequency_grid(min, max, step)?)
}

fn make_lineshape(
    doc: &ConfigDocument,
    fwhm: Option<f64>,
) -> CliResult<spin_toolkit::spectra::LineShape> {
    match fwhm {
        Some(w) => Ok(spin_toolkit::spectra::LineShape::new(doc.lineshape.kind, w)?),
        None => Ok(doc.lineshape),
    }
}

fn uniform_grid(max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && max > 0.0) {
        return Err(CliError::Usage("grid step and span must be positive".into()));
    }
    let n = (max / step).round() as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

/// Deterministic Gaussian noise for the simulators.
fn add_noise(values: &mut [f64], sigma: f64, seed: u64) {
    if sigma <= 0.0 {
        return;
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut spare: Option<f64> = None;
    for v in values.iter_mut() {
        let n = if let Some(s) = spare.take() {
            s
        } else {
            loop {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                let s = a * a + b * b;
                if s > 0.0 && s < 1.0 {
                    let f = (-2.0 * s.ln() / s).sqrt();
                    spare = Some(b * f);
                    break a * f;
                }
            }
        };
        *v += sigma * n;
    }
}

pub fn run_levels(args: &LevelsArgs) -> CliResult<()> {
    let (_, families) = resolve_families(&args.family)?;
    if families.len() != 1 {
        return Err(CliError::Usage(format!(
            "levels needs exactly one family, got {} (use --preset <name>)",
            families.len()
        )));
    }
    let sys = &families[0].system;
    let axis = parse_axis(&args.b_axis)?;
    let mut table = DataTable::new(vec![
        "b_mt".into(),
        "level_index".into(),
        "energy_mhz".into(),
    ]);
    let n = ((args.b_max_mt - args.b_min_mt) / args.b_step_mt).round() as usize;
    for k in 0..=n {
        let b_mag = args.b_min_mt + k as f64 * args.b_step_mt;
        let b = FieldVector::along(axis, b_mag)?;
        let eig = diagonalize(&build_hamiltonian(sys, &b))?;
        for (idx, &e) in eig.values.iter().enumerate() {
            table.push_row(vec![b_mag, idx as f64, e]);
        }
    }
    emit_table(&table, &args.out)
}

fn spectrum_to_table(spec: &Spectrum) -> DataTable {
    let mut table = DataTable::new(vec!["frequency_mhz".into(), "amplitude".into()]);
    for (f, a) in spec.freq_grid_mhz.iter().zip(&spec.amplitude) {
        table.push_row(vec![*f, *a]);
    }
    table
}

pub fn run_spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let (doc, families) = resolve_families(&args.family)?;
    let grid = make_grid(&doc, &args.grid)?;
    let shape = make_lineshape(&doc, args.fwhm_mhz)?;
    let drive = parse_drive(&args.drive)?;
    let axis = parse_axis(&args.b_axis)?;
    let systems: Vec<WeightedSystem> = families
        .iter()
        .map(|f| WeightedSystem {
            system: f.system.clone(),
            family_scale: f.family_scale,
        })
        .collect();
    let b = FieldVector::along(axis, args.b_mt)?;
    let spec = multi_family_spectrum(&systems, &b, drive, &shape, &grid)?;
    emit_table(&spectrum_to_table(&spec), &args.out)
}

pub fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let (doc, families) = resolve_families(&args.family)?;
    let grid = make_grid(&doc, &args.grid)?;
    let shape = make_lineshape(&doc, args.fwhm_mhz)?;
    let drive = parse_drive(&args.drive)?;
    let axis = parse_axis(&args.b_axis)?;
    let systems: Vec<WeightedSystem> = families
        .iter()
        .map(|f| WeightedSystem {
            system: f.system.clone(),
            family_scale: f.family_scale,
        })
        .collect();
    let b_min = args.b_min_mt.unwrap_or(doc.sweep.b_min_mt);
    let b_max = args.b_max_mt.unwrap_or(doc.sweep.b_max_mt);
    let b_step = args.b_step_mt.unwrap_or(doc.sweep.b_step_mt);
    if !(b_step > 0.0 && b_max >= b_min) {
        return Err(CliError::Usage("bad field grid".into()));
    }
    let n = ((b_max - b_min) / b_step).round() as usize;
    let b_grid: Vec<f64> = (0..=n).map(|k| b_min + k as f64 * b_step).collect();
    let map = field_sweep(&systems, axis, &b_grid, drive, &shape, &grid)?;

    let mut table = DataTable::new(vec![
        "b_mt".into(),
        "frequency_mhz".into(),
        "amplitude".into(),
    ]);
    for (b, row) in map.b_grid_mt.iter().zip(&map.rows) {
        for (f, a) in map.freq_grid_mhz.iter().zip(row) {
            table.push_row(vec![*b, *f, *a]);
        }
    }
    emit_table(&table, &args.out)
}

pub fn run_rate_sim(args: &RateSimArgs) -> CliResult<()> {
    let doc = load_config(&args.config)?;
    let model = doc.rates.clone();
    let transient = simulate_pl_transient(
        &model,
        &[(args.rf_on_ns, true), (args.rf_off_ns, false)],
        args.dt_ns,
    )?;
    let mut columns = vec!["t_ns".to_string()];
    for name in &model.level_names {
        columns.push(format!("p_{}", name.to_lowercase()));
    }
    columns.push("pl_rate_per_ns".into());
    let mut table = DataTable::new(columns);
    let trace = &transient.trace;
    for (k, &t) in trace.t_ns.iter().enumerate() {
        let mut row = vec![t];
        row.extend(&trace.populations[k]);
        row.push(trace.pl_rate[k]);
        table.push_row(row);
    }
    emit_table(&table, &args.out)?;
    if transient.rf_off_time_ns.is_some() {
        if let Ok(fit) = pl_settling_time(&transient) {
            if let Some(tc) = fit.value("t_const_ns") {
                eprintln!("PL settling time after RF off: {tc:.3} ns");
            }
        }
    }
    Ok(())
}

fn trace_to_table(trace: &RamseyTrace) -> DataTable {
    let mut table = DataTable::new(vec!["tau_ns".into(), "contrast".into()]);
    for (t, c) in trace.tau_ns.iter().zip(&trace.contrast) {
        table.push_row(vec![*t, *c]);
    }
    table
}

pub fn run_ramsey_sim(args: &RamseySimArgs) -> CliResult<()> {
    let tau = uniform_grid(args.tau_max_ns, args.dtau_ns)?;
    let mut trace = match (&args.family.preset.is_empty(), &args.family.config) {
        (true, None) => ramsey_closed_form(
            args.a1,
            args.a2,
            args.f1_mhz,
            args.f2_mhz,
            args.t2star_us,
            &tau,
        )?,
        _ => {
            let (_, families) = resolve_families(&args.family)?;
            if families.len() != 1 {
                return Err(CliError::Usage(
                    "ramsey-sim from a spin system needs exactly one family".into(),
                ));
            }
            let rf = args.rf_mhz.ok_or_else(|| {
                CliError::Usage("--rf-mhz is required when simulating from a spin system".into())
            })?;
            let axis = parse_axis(&args.b_axis)?;
            let b = FieldVector::along(axis, args.b_mt)?;
            ramsey_from_hamiltonian(
                &families[0].system,
                &b,
                rf,
                args.t2star_us,
                &tau,
                parse_drive(&args.drive)?,
                args.window_mhz,
            )?
        }
    };
    add_noise(&mut trace.contrast, args.noise_sigma, args.seed);
    emit_table(&trace_to_table(&trace), &args.out)
}

pub fn run_t1_sim(args: &T1SimArgs) -> CliResult<()> {
    let tau = uniform_grid(args.tau_max_ns, args.dtau_ns)?;
    let mut trace = t1_trace(args.t1_ns, args.c0, args.c_floor, &tau)?;
    add_noise(&mut trace.contrast, args.noise_sigma, args.seed);
    emit_table(&trace_to_table(&trace), &args.out)
}

pub fn run_fit_zfs(args: &FitZfsArgs) -> CliResult<()> {
    let table = DataTable::read(&args.input)?;
    let freq = table.column("frequency_mhz")?;
    let amp = table.column("amplitude")?;
    let spectrum = Spectrum {
        freq_grid_mhz: freq,
        amplitude: amp,
    };

    let guesses: Vec<ZfsFamilyGuess> = if args.family.preset.is_empty()
        && args.family.config.is_none()
    {
        let n = args.families.ok_or_else(|| {
            CliError::Usage(
                "fit-zfs needs --preset, --config or --families <n> for peak seeding".into(),
            )
        })?;
        seed_zfs_guesses(&spectrum, n)?
    } else {
        let (doc, families) = resolve_families(&args.family)?;
        families
            .iter()
            .map(|f| ZfsFamilyGuess {
                template: f.system.clone(),
                family_scale: f.family_scale,
                fwhm_mhz: doc.lineshape.fwhm_mhz,
            })
            .collect()
    };

    let opts = ZfsFitOptions {
        drive: parse_drive(&args.drive)?,
        global_fallback: !args.no_fallback,
        ..Default::default()
    };
    let fit = fit_zero_field_odmr(&spectrum, &guesses, &opts)?;
    report::emit("zero-field-odmr", &fit, args.json.as_deref())
}

pub fn run_fit_lifetime(args: &FitLifetimeArgs) -> CliResult<()> {
    let table = DataTable::read(&args.input)?;
    let t = table.column("t_ps")?;
    let signal = table.column("signal")?;
    let response = if table.columns.iter().any(|c| c == "response") {
        table.column("response")?
    } else {
        let fwhm = args.response_fwhm_ps.ok_or_else(|| {
            CliError::Usage(
                "input has no 'response' column; provide --response-fwhm-ps".into(),
            )
        })?;
        let center = args
            .response_center_ps
            .unwrap_or(t.first().copied().unwrap_or(0.0) + 3.0 * fwhm);
        gaussian_response(&t, center, fwhm)?
    };
    let trace = TimeTrace::with_unit(t, signal, Some(response), TimeUnit::Ps)?;
    let fit = fit_lifetime_convolved(&trace)?;
    report::emit("lifetime-deconvolution", &fit, args.json.as_deref())
}

pub fn run_fit_t1(args: &FitT1Args) -> CliResult<()> {
    let table = DataTable::read(&args.input)?;
    let t = table.column("tau_ns")?;
    let c = table.column("contrast")?;
    let trace = TimeTrace::new(t, c, None)?;
    let fit = fit_exponential_settle(&trace)?;
    report::emit("t1-relaxation", &fit, args.json.as_deref())
}

pub fn run_fit_ramsey(args: &FitRamseyArgs) -> CliResult<()> {
    let table = DataTable::read(&args.input)?;
    let tau = table.column("tau_ns")?;
    let c = table.column("contrast")?;
    let trace = RamseyTrace::new(tau, c).map_err(CliError::from)?;
    let fit = fit_ramsey(&trace, args.components)?;
    report::emit("ramsey-fringes", &fit, args.json.as_deref())
}

pub fn run_dw_factor(args: &DwFactorArgs) -> CliResult<()> {
    let table = DataTable::read(&args.input)?;
    let wl = table.column("wavelength_nm")?;
    let inten = table.column("intensity")?;
    let spec = OpticalSpectrum::new(wl, inten)?;
    let baseline = if args.linear_baseline {
        BaselineMode::Linear
    } else {
        BaselineMode::None
    };
    let f = debye_waller(
        &spec,
        (args.zpl_min_nm, args.zpl_max_nm),
        (args.total_min_nm, args.total_max_nm),
        baseline,
    )?;
    println!("{f}");
    Ok(())
}

pub fn run_presets(args: &PresetsArgs) -> CliResult<()> {
    let text = ConfigDocument::preset_document();
    if args.out == "-" {
        print!("{text}");
        Ok(())
    } else {
        write_atomic(std::path::Path::new(&args.out), &text)
    }
}
