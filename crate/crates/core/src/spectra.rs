//! RF-driven transition frequencies/intensities and ODMR spectrum synthesis.
//!
//! Transition intensity is the magnetic-dipole matrix element
//! `|⟨v_k| S·n |v_j⟩|²` of the electron spin along the RF drive direction
//! (rotated into the defect frame). Spectra are sums of unit-area
//! lineshapes weighted by intensity and a per-family amplitude scale.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spin::{build_hamiltonian, diagonalize, spin_matrices, EigenSolution, FieldVector, SpinSystem};

/// One RF-driven transition between eigenstates.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub lower_index: usize,
    pub upper_index: usize,
    pub freq_mhz: f64,
    /// Dimensionless relative weight.
    pub intensity: f64,
    pub label: Option<String>,
}

pub type TransitionSet = Vec<Transition>;

/// RF drive polarization in the lab frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RfDrive {
    /// Linear drive along a fixed lab axis (normalized internally).
    Axis([f64; 3]),
    /// Average over two orthogonal axes transverse to the c-axis.
    Unpolarized,
}

impl Default for RfDrive {
    /// Single linear axis perpendicular to the c-axis.
    fn default() -> Self {
        RfDrive::Axis([1.0, 0.0, 0.0])
    }
}

fn normalize(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument("drive axis must be a nonzero finite vector".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// Electron spin operator along `axis_lab` (rotated to the defect frame),
/// extended over the nuclear factor by the identity.
fn drive_operator(sys: &SpinSystem, axis_lab: [f64; 3]) -> Result<CMatrix> {
    let axis = normalize(axis_lab)?;
    let axis_defect = sys.to_defect_frame(axis);
    let s_ops = spin_matrices(sys.s_electron);
    let small = s_ops.along(axis_defect);
    let ni = sys.i_nuclear.multiplicity();
    let dim = sys.dim();
    let mut op = CMatrix::zeros(dim, dim);
    for i in 0..small.n_rows {
        for j in 0..small.n_cols {
            let v = small[(i, j)];
            if v != Complex64::ZERO {
                for k in 0..ni {
                    op[(i * ni + k, j * ni + k)] += v;
                }
            }
        }
    }
    Ok(op)
}

/// All transitions `j < k` with intensity above `min_intensity`, sorted by
/// frequency. `min_intensity` is an absolute cutoff; pass 0 to keep all.
pub fn transitions(
    eig: &EigenSolution,
    sys: &SpinSystem,
    drive: RfDrive,
    min_intensity: f64,
) -> Result<TransitionSet> {
    if eig.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: eig.dim(),
        });
    }
    let intensity_tables: Vec<Vec<Vec<f64>>> = match drive {
        RfDrive::Axis(axis) => vec![pair_intensities(eig, &drive_operator(sys, axis)?)],
        RfDrive::Unpolarized => vec![
            pair_intensities(eig, &drive_operator(sys, [1.0, 0.0, 0.0])?),
            pair_intensities(eig, &drive_operator(sys, [0.0, 1.0, 0.0])?),
        ],
    };

    let n = eig.dim();
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let intensity = intensity_tables.iter().map(|t| t[j][k]).sum::<f64>()
                / intensity_tables.len() as f64;
            if intensity >= min_intensity {
                out.push(Transition {
                    lower_index: j,
                    upper_index: k,
                    freq_mhz: eig.values[k] - eig.values[j],
                    intensity,
                    label: None,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.freq_mhz
            .total_cmp(&b.freq_mhz)
            .then(a.lower_index.cmp(&b.lower_index))
            .then(a.upper_index.cmp(&b.upper_index))
    });
    Ok(out)
}

fn pair_intensities(eig: &EigenSolution, op: &CMatrix) -> Vec<Vec<f64>> {
    let n = eig.dim();
    // op * v_j for all j, then brackets
    let columns: Vec<Vec<Complex64>> = (0..n).map(|j| op.matvec(&eig.vector(j))).collect();
    let mut table = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            let amp: Complex64 = eig
                .vector(k)
                .iter()
                .zip(&columns[j])
                .map(|(vk, ov)| vk.conj() * ov)
                .sum();
            table[j][k] = amp.norm_sqr();
        }
    }
    table
}

/// Relative cutoff used by the synthesis pipeline: transitions weaker than
/// `1e-4` of the strongest are dropped.
pub const DEFAULT_MIN_INTENSITY_REL: f64 = 1e-4;

/// Transitions with the default relative intensity cutoff applied.
pub fn transitions_default_cutoff(
    eig: &EigenSolution,
    sys: &SpinSystem,
    drive: RfDrive,
) -> Result<TransitionSet> {
    let all = transitions(eig, sys, drive, 0.0)?;
    let max = all.iter().map(|t| t.intensity).fold(0.0, f64::max);
    Ok(all
        .into_iter()
        .filter(|t| t.intensity >= DEFAULT_MIN_INTENSITY_REL * max)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineShapeKind {
    Lorentzian,
    Gaussian,
}

/// Unit-area lineshape of a given full width at half maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineShape {
    pub kind: LineShapeKind,
    pub fwhm_mhz: f64,
}

impl LineShape {
    pub fn lorentzian(fwhm_mhz: f64) -> Result<Self> {
        Self::new(LineShapeKind::Lorentzian, fwhm_mhz)
    }

    pub fn gaussian(fwhm_mhz: f64) -> Result<Self> {
        Self::new(LineShapeKind::Gaussian, fwhm_mhz)
    }

    pub fn new(kind: LineShapeKind, fwhm_mhz: f64) -> Result<Self> {
        if !(fwhm_mhz.is_finite() && fwhm_mhz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lineshape fwhm must be positive, got {fwhm_mhz}"
            )));
        }
        Ok(LineShape { kind, fwhm_mhz })
    }

    /// Normalized profile value at offset `df` from line center.
    pub fn eval(&self, df: f64) -> f64 {
        match self.kind {
            LineShapeKind::Lorentzian => {
                let gamma = self.fwhm_mhz / 2.0;
                gamma / std::f64::consts::PI / (df * df + gamma * gamma)
            }
            LineShapeKind::Gaussian => {
                let sigma = self.fwhm_mhz / (8.0 * 2f64.ln()).sqrt();
                (-0.5 * (df / sigma) * (df / sigma)).exp()
                    / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }
}

impl Default for LineShape {
    fn default() -> Self {
        LineShape {
            kind: LineShapeKind::Lorentzian,
            fwhm_mhz: 10.0,
        }
    }
}

/// Intensity versus RF frequency on a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freq_grid_mhz: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl Spectrum {
    pub fn zeros(grid: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        let n = grid.len();
        Ok(Spectrum {
            freq_grid_mhz: grid,
            amplitude: vec![0.0; n],
        })
    }

    pub fn add_assign(&mut self, other: &Spectrum) {
        assert_eq!(self.freq_grid_mhz.len(), other.freq_grid_mhz.len());
        for (a, b) in self.amplitude.iter_mut().zip(&other.amplitude) {
            *a += b;
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite())
    {
        return Err(Error::BadGrid);
    }
    Ok(())
}

/// Uniform grid helper: `start`, `start+step`, ... up to and including `end`
/// (within half a step).
pub fn frequency_grid(start_mhz: f64, end_mhz: f64, step_mhz: f64) -> Result<Vec<f64>> {
    if !(step_mhz > 0.0 && end_mhz > start_mhz) {
        return Err(Error::BadGrid);
    }
    let n = ((end_mhz - start_mhz) / step_mhz).round() as usize + 1;
    Ok((0..n).map(|k| start_mhz + k as f64 * step_mhz).collect())
}

/// Default grid mirroring a 10 MHz - 2 GHz sweep at 0.5 MHz resolution.
pub fn default_frequency_grid() -> Vec<f64> {
    frequency_grid(10.0, 2000.0, 0.5).unwrap()
}

/// Sum of lineshapes centered on each transition:
/// `amplitude(f) = family_scale · Σ_t intensity_t · shape(f - freq_t)`.
pub fn synthesize_spectrum(
    ts: &[Transition],
    shape: &LineShape,
    grid: &[f64],
    family_scale: f64,
) -> Result<Spectrum> {
    validate_grid(grid)?;
    let mut amplitude = vec![0.0; grid.len()];
    for t in ts {
        let w = family_scale * t.intensity;
        if w == 0.0 {
            continue;
        }
        for (a, &f) in amplitude.iter_mut().zip(grid) {
            *a += w * shape.eval(f - t.freq_mhz);
        }
    }
    Ok(Spectrum {
        freq_grid_mhz: grid.to_vec(),
        amplitude,
    })
}

/// Spectra stacked over a magnetic-field grid, sharing one frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSweepMap {
    pub b_grid_mt: Vec<f64>,
    pub freq_grid_mhz: Vec<f64>,
    /// `rows[i]` is the spectrum amplitude at `b_grid_mt[i]`.
    pub rows: Vec<Vec<f64>>,
}

/// One spin system family paired with its amplitude scale.
#[derive(Clone, Debug)]
pub struct WeightedSystem {
    pub system: SpinSystem,
    pub family_scale: f64,
}

/// Zero- or fixed-field spectrum summed over families.
pub fn multi_family_spectrum(
    systems: &[WeightedSystem],
    b: &FieldVector,
    drive: RfDrive,
    shape: &LineShape,
    grid: &[f64],
) -> Result<Spectrum> {
    if systems.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = Spectrum::zeros(grid.to_vec())?;
    for ws in systems {
        let h = build_hamiltonian(&ws.system, b);
        let eig = diagonalize(&h)?;
        let ts = transitions_default_cutoff(&eig, &ws.system, drive)?;
        let spec = synthesize_spectrum(&ts, shape, grid, ws.family_scale)?;
        total.add_assign(&spec);
    }
    Ok(total)
}

/// Spectrum versus field magnitude applied along `b_axis`. Rows are
/// independent and computed in parallel; assembly order is fixed by the
/// field grid, so output is deterministic.
pub fn field_sweep(
    systems: &[WeightedSystem],
    b_axis: [f64; 3],
    b_grid_mt: &[f64],
    drive: RfDrive,
    shape: &LineShape,
    grid: &[f64],
) -> Result<FieldSweepMap> {
    if systems.is_empty() || b_grid_mt.is_empty() {
        return Err(Error::EmptyInput);
    }
    if b_grid_mt.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadGrid);
    }
    validate_grid(grid)?;
    let axis = normalize(b_axis)?;
    let rows: Result<Vec<Vec<f64>>> = b_grid_mt
        .par_iter()
        .map(|&b_mag| {
            let b = FieldVector::new([axis[0] * b_mag, axis[1] * b_mag, axis[2] * b_mag])?;
            Ok(multi_family_spectrum(systems, &b, drive, shape, grid)?.amplitude)
        })
        .collect();
    Ok(FieldSweepMap {
        b_grid_mt: b_grid_mt.to_vec(),
        freq_grid_mhz: grid.to_vec(),
        rows: rows?,
    })
}

/// Half-frequency annotations for comparing measured spectra against
/// two-photon features: copies of transitions above `intensity_cutoff`
/// with halved frequency and scaled intensity.
pub fn annotate_half_frequency(
    ts: &[Transition],
    intensity_cutoff: f64,
    intensity_scale: f64,
) -> TransitionSet {
    ts.iter()
        .filter(|t| t.intensity > intensity_cutoff)
        .map(|t| Transition {
            lower_index: t.lower_index,
            upper_index: t.upper_index,
            freq_mhz: t.freq_mhz / 2.0,
            intensity: t.intensity * intensity_scale,
            label: Some("two-photon".to_string()),
        })
        .collect()
}

pub const DEFAULT_HALF_FREQUENCY_SCALE: f64 = 0.1;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Spin;

    fn eig_for(sys: &SpinSystem, b: &FieldVector) -> EigenSolution {
        diagonalize(&build_hamiltonian(sys, b)).unwrap()
    }

    #[test]
    fn two_transitions_at_zfs_axial() {
        let sys = SpinSystem::electron_only(Spin::ONE, 560.0, 0.0).unwrap();
        let eig = eig_for(&sys, &FieldVector::ZERO);
        let ts = transitions(&eig, &sys, RfDrive::Axis([1.0, 0.0, 0.0]), 1e-6).unwrap();
        assert_eq!(ts.len(), 2);
        for t in &ts {
            assert!((t.freq_mhz - 560.0).abs() < 1e-9);
            assert!((t.intensity - 0.5).abs() < 1e-9, "intensity {}", t.intensity);
        }
    }

    #[test]
    fn split_zfs_unpolarized_equal_intensity() {
        let sys = SpinSystem::electron_only(Spin::ONE, 560.0, 60.0).unwrap();
        let eig = eig_for(&sys, &FieldVector::ZERO);
        let ts = transitions(&eig, &sys, RfDrive::Unpolarized, 1e-6).unwrap();
        assert_eq!(ts.len(), 2);
        assert!((ts[0].freq_mhz - 500.0).abs() < 1e-9);
        assert!((ts[1].freq_mhz - 620.0).abs() < 1e-9);
        assert!((ts[0].intensity - 0.5).abs() < 1e-9);
        assert!((ts[1].intensity - 0.5).abs() < 1e-9);
    }

    #[test]
    fn split_zfs_45_degree_axis_equal_intensity() {
        // a single drive axis at 45° in the transverse plane excites both
        // zero-field branches equally
        let sys = SpinSystem::electron_only(Spin::ONE, 560.0, 60.0).unwrap();
        let eig = eig_for(&sys, &FieldVector::ZERO);
        let ts = transitions(&eig, &sys, RfDrive::Axis([1.0, 1.0, 0.0]), 1e-6).unwrap();
        assert_eq!(ts.len(), 2);
        assert!((ts[0].intensity - 0.5).abs() < 1e-9);
        assert!((ts[1].intensity - 0.5).abs() < 1e-9);
    }

    #[test]
    fn intensity_sum_rule() {
        let sys = SpinSystem::with_isotropic_hyperfine(
            Spin::ONE,
            Spin::THREE_HALVES,
            560.0,
            60.0,
            -34.0,
            70.53,
            90.0,
        )
        .unwrap();
        let b = FieldVector::new([0.3, -1.1, 4.2]).unwrap();
        let eig = eig_for(&sys, &b);
        let op = drive_operator(&sys, [1.0, 0.0, 0.0]).unwrap();
        let table = pair_intensities(&eig, &op);
        let n = eig.dim();
        let mut total = 0.0;
        for j in 0..n {
            for k in 0..n {
                total += table[j][k];
            }
        }
        // trace((S·n)² ⊗ 1) = (2I+1)·s(s+1)(2s+1)/3 = 4·2 = 8
        assert!((total - 8.0).abs() < 1e-9, "sum rule total {total}");
    }

    #[test]
    fn spectrum_peak_at_line_center() {
        let ts = vec![Transition {
            lower_index: 0,
            upper_index: 1,
            freq_mhz: 560.0,
            intensity: 1.0,
            label: None,
        }];
        let grid = frequency_grid(400.0, 700.0, 0.5).unwrap();
        let spec = synthesize_spectrum(&ts, &LineShape::lorentzian(10.0).unwrap(), &grid, 1.0).unwrap();
        let (imax, _) = spec
            .amplitude
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((spec.freq_grid_mhz[imax] - 560.0).abs() <= 0.25);
    }

    #[test]
    fn spectrum_additivity_and_integral() {
        let mk = |f| Transition {
            lower_index: 0,
            upper_index: 1,
            freq_mhz: f,
            intensity: 1.0,
            label: None,
        };
        let shape = LineShape::lorentzian(10.0).unwrap();
        // 200-FWHM wide grid keeps Lorentzian tail truncation below 1%
        let grid = frequency_grid(-440.0, 1560.0, 0.5).unwrap();
        let both = synthesize_spectrum(&[mk(500.0), mk(620.0)], &shape, &grid, 1.0).unwrap();
        let single = synthesize_spectrum(&[mk(500.0)], &shape, &grid, 1.0).unwrap();
        let other = synthesize_spectrum(&[mk(620.0)], &shape, &grid, 1.0).unwrap();
        // exact linearity
        for i in 0..grid.len() {
            let sum = single.amplitude[i] + other.amplitude[i];
            assert!((both.amplitude[i] - sum).abs() <= 1e-15 * sum.abs().max(1.0));
        }
        let integral = |s: &Spectrum| -> f64 {
            s.amplitude.windows(2).map(|w| 0.5 * (w[0] + w[1]) * 0.5).sum()
        };
        let ratio = integral(&both) / integral(&single);
        assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn lineshape_normalization() {
        // Lorentzian needs a much wider support than the Gaussian for the
        // same tail coverage
        for (shape, half_span) in [
            (LineShape::lorentzian(10.0).unwrap(), 1000.0),
            (LineShape::gaussian(10.0).unwrap(), 100.0),
        ] {
            let grid = frequency_grid(-half_span, half_span, 0.25).unwrap();
            let integral: f64 = grid.iter().map(|&f| shape.eval(f) * 0.25).sum();
            assert!((integral - 1.0).abs() < 0.01, "integral {integral}");
        }
    }

    #[test]
    fn sweep_row_zero_matches_standalone() {
        let sys = SpinSystem::with_isotropic_hyperfine(
            Spin::ONE,
            Spin::THREE_HALVES,
            560.0,
            60.0,
            -34.0,
            70.53,
            90.0,
        )
        .unwrap();
        let systems = [WeightedSystem {
            system: sys,
            family_scale: 1.0,
        }];
        let grid = frequency_grid(10.0, 800.0, 0.5).unwrap();
        let shape = LineShape::default();
        let sweep = field_sweep(&systems, [0.0, 0.0, 1.0], &[0.0, 1.0, 2.0], RfDrive::default(), &shape, &grid).unwrap();
        let standalone =
            multi_family_spectrum(&systems, &FieldVector::ZERO, RfDrive::default(), &shape, &grid).unwrap();
        assert_eq!(sweep.rows[0], standalone.amplitude);
    }

    #[test]
    fn zeeman_peaks_move_linearly() {
        let sys = SpinSystem::electron_only(Spin::ONE, 0.0, 0.0).unwrap();
        let b_grid: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let mut slopes = Vec::new();
        for &bm in &b_grid {
            let b = FieldVector::new([0.0, 0.0, bm]).unwrap();
            let eig = eig_for(&sys, &b);
            let ts = transitions_default_cutoff(&eig, &sys, RfDrive::default()).unwrap();
            // all surviving lines sit at gamma_e * B
            for t in &ts {
                slopes.push(t.freq_mhz / bm);
            }
        }
        for s in slopes {
            assert!((s - 28.0).abs() / 28.0 < 1e-3);
        }
    }

    #[test]
    fn zero_field_invariant_under_drive_sign() {
        let sys = SpinSystem::with_isotropic_hyperfine(
            Spin::ONE,
            Spin::THREE_HALVES,
            560.0,
            60.0,
            -34.0,
            70.53,
            90.0,
        )
        .unwrap();
        let eig = eig_for(&sys, &FieldVector::ZERO);
        let plus = transitions(&eig, &sys, RfDrive::Axis([1.0, 0.0, 0.0]), 0.0).unwrap();
        let minus = transitions(&eig, &sys, RfDrive::Axis([-1.0, 0.0, 0.0]), 0.0).unwrap();
        for (a, b) in plus.iter().zip(&minus) {
            assert_eq!(a.freq_mhz, b.freq_mhz);
            assert_eq!(a.intensity, b.intensity);
        }
    }

    #[test]
    fn half_frequency_annotations() {
        let ts = vec![
            Transition {
                lower_index: 0,
                upper_index: 1,
                freq_mhz: 367.0,
                intensity: 1.0,
                label: None,
            },
            Transition {
                lower_index: 0,
                upper_index: 2,
                freq_mhz: 245.0,
                intensity: 0.8,
                label: None,
            },
        ];
        let ann = annotate_half_frequency(&ts, 0.0, DEFAULT_HALF_FREQUENCY_SCALE);
        assert_eq!(ann.len(), 2);
        assert_eq!(ann[0].freq_mhz, 183.5);
        assert_eq!(ann[1].freq_mhz, 122.5);
        assert_eq!(ann[0].label.as_deref(), Some("two-photon"));
        assert!((ann[0].intensity - 0.1).abs() < 1e-15);
        assert!(annotate_half_frequency(&[], 0.0, 0.1).is_empty());
    }
}
