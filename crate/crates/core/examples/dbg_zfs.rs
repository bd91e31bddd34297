use std::time::Instant;
use spin_toolkit::fit::{fit_zero_field_odmr, unpack_family_fits, ZfsFamilyGuess, ZfsFitOptions};
use spin_toolkit::presets;
use spin_toolkit::spectra::{default_frequency_grid, multi_family_spectrum, LineShape, RfDrive};
use spin_toolkit::spin::FieldVector;

fn main() {
    let grid = default_frequency_grid();
    let systems = presets::all_families();
    let truth: Vec<(f64, f64, f64, f64, f64)> = systems
        .iter()
        .map(|ws| (ws.system.d_mhz, ws.system.e_mhz, ws.system.isotropic_hyperfine_mhz(), ws.family_scale, 10.0))
        .collect();
    let data = multi_family_spectrum(&systems, &FieldVector::ZERO, RfDrive::default(), &LineShape::lorentzian(10.0).unwrap(), &grid).unwrap();

    // simple xorshift for deterministic sign patterns
    let mut state = 0x12345678u64;
    let mut sign = move || {
        state ^= state << 13; state ^= state >> 7; state ^= state << 17;
        if state & 1 == 0 { 1.0 } else { -1.0 }
    };

    let mut pass_count = 0;
    let n_seeds = 10;
    for seed in 0..n_seeds {
        let started = Instant::now();
        let guesses: Vec<ZfsFamilyGuess> = systems.iter().map(|ws| {
            let mut t = ws.system.clone();
            t.d_mhz *= 1.0 + 0.10 * sign();
            t.e_mhz *= 1.0 + 0.10 * sign();
            let a = t.isotropic_hyperfine_mhz() * (1.0 + 0.10 * sign());
            let mut tensor = [[0.0; 3]; 3];
            for k in 0..3 { tensor[k][k] = a; }
            t.a_tensor_mhz = tensor;
            ZfsFamilyGuess {
                template: t,
                family_scale: ws.family_scale * (1.0 + 0.10 * sign()),
                fwhm_mhz: 10.0 * (1.0 + 0.10 * sign()),
            }
        }).collect();
        let opts = ZfsFitOptions::default();
        let result = fit_zero_field_odmr(&data, &guesses, &opts).unwrap();
        let fits = unpack_family_fits(&result, systems.len());
        let mut ok = true;
        let mut msg = String::new();
        for (f, t) in fits.iter().zip(&truth) {
            let (dd, de, da) = (f.d_mhz - t.0, f.e_mhz - t.1, f.a_mhz - t.2);
            ok &= dd.abs() < 1.0 && de.abs() < 1.0 && da.abs() < 2.0;
            msg.push_str(&format!(" ({dd:+.3},{de:+.3},{da:+.3})"));
        }
        if ok { pass_count += 1; }
        println!("seed {seed}: pass={ok} rss={:.2e} iters={} t={:.1}s {}",
            result.rss, result.iterations, started.elapsed().as_secs_f64(), if ok { String::new() } else { msg });
    }
    println!("passed {pass_count}/{n_seeds}");
}
