use spin_toolkit::presets;
use spin_toolkit::spectra::{default_frequency_grid, multi_family_spectrum, RfDrive};
use spin_toolkit::spin::FieldVector;

fn main() {
    let grid = default_frequency_grid();
    let spec = multi_family_spectrum(
        &presets::all_families(),
        &FieldVector::ZERO,
        RfDrive::default(),
        &presets::default_lineshape(),
        &grid,
    )
    .unwrap();
    let amp = &spec.amplitude;
    for i in 1..amp.len() - 1 {
        if amp[i] > amp[i - 1] && amp[i] > amp[i + 1] && amp[i] > 0.002 {
            println!("peak {:8.1}  amp {:.6}", spec.freq_grid_mhz[i], amp[i]);
        }
    }
}
