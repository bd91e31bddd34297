use std::time::Instant;
use spin_toolkit::fit::{fit_zero_field_odmr, unpack_family_fits, ZfsFamilyGuess, ZfsFitOptions};
use spin_toolkit::presets;
use spin_toolkit::spectra::{default_frequency_grid, multi_family_spectrum, LineShape, RfDrive, WeightedSystem};
use spin_toolkit::spin::FieldVector;

fn main() {
    let grid = default_frequency_grid();
    let systems: Vec<WeightedSystem> = vec![
        WeightedSystem { system: presets::family_nu1(), family_scale: 1.0 },
        WeightedSystem { system: presets::family_nu3(), family_scale: 0.8 },
    ];
    let data = multi_family_spectrum(&systems, &FieldVector::ZERO, RfDrive::default(), &LineShape::lorentzian(10.0).unwrap(), &grid).unwrap();
    let guesses: Vec<ZfsFamilyGuess> = systems.iter().enumerate().map(|(k, ws)| {
        let mut t = ws.system.clone();
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        t.d_mhz *= 1.0 + 0.10 * s;
        t.e_mhz *= 1.0 - 0.10 * s;
        let a = t.isotropic_hyperfine_mhz() * 1.1;
        let mut tensor = [[0.0; 3]; 3];
        for j in 0..3 { tensor[j][j] = a; }
        t.a_tensor_mhz = tensor;
        ZfsFamilyGuess { template: t, family_scale: ws.family_scale * 0.9, fwhm_mhz: 11.0 }
    }).collect();
    // disable the scan stages: joint LM alone stalls, the DE fallback must rescue
    let opts = ZfsFitOptions { scan_rounds: 0, ..Default::default() };
    let started = Instant::now();
    let result = fit_zero_field_odmr(&data, &guesses, &opts).unwrap();
    let fits = unpack_family_fits(&result, systems.len());
    println!("rss={:.3e} t={:.1}s", result.rss, started.elapsed().as_secs_f64());
    for (f, ws) in fits.iter().zip(&systems) {
        println!("  D {:+.4}  E {:+.4}  A {:+.4}", f.d_mhz - ws.system.d_mhz, f.e_mhz - ws.system.e_mhz, f.a_mhz - ws.system.isotropic_hyperfine_mhz());
    }
}
