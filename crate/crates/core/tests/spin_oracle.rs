//! Oracle-equivalence tests for the Hamiltonian assembly and eigensolver,
//! plus the frozen zero-field/in-field level structure of the main
//! hyperfine family.

mod common;

use common::{oracle_eigenvalues_for, GaussianSampler};
use spin_toolkit::presets;
use spin_toolkit::spectra::{transitions, RfDrive};
use spin_toolkit::spin::{
    build_hamiltonian, degeneracy_census, diagonalize, FieldVector, Spin, SpinSystem,
};

/// Zero-field eigenvalues of the nu1 family (doubly degenerate), frozen
/// from an independent dense-solver run.
const NU1_ZERO_FIELD_LEVELS: [f64; 6] = [
    -380.215140083,
    -376.505058436,
    108.476422102,
    128.194479493,
    252.051969603,
    267.997327322,
];

const NU1_67MT_LEVELS: [f64; 12] = [
    -449.391544705,
    -432.932437604,
    -416.504773403,
    -400.457886332,
    73.283552048,
    99.980399407,
    119.033525760,
    127.614769398,
    282.809633329,
    307.549599721,
    332.043702225,
    356.971460155,
];

#[test]
fn nu1_zero_field_levels_match_oracle_and_frozen() {
    let sys = presets::family_nu1();
    let eig = diagonalize(&build_hamiltonian(&sys, &FieldVector::ZERO)).unwrap();
    let oracle = oracle_eigenvalues_for(&sys, [0.0; 3]);
    for (a, b) in eig.values.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-6, "main {a} vs oracle {b}");
    }
    for (k, &frozen) in NU1_ZERO_FIELD_LEVELS.iter().enumerate() {
        assert!(
            (eig.values[2 * k] - frozen).abs() < 1e-5,
            "level {k}: {} vs {frozen}",
            eig.values[2 * k]
        );
        assert!((eig.values[2 * k + 1] - frozen).abs() < 1e-5);
    }
}

#[test]
fn nu1_field_levels_match_oracle_and_frozen() {
    let sys = presets::family_nu1();
    let b = FieldVector::new([0.0, 0.0, 6.7]).unwrap();
    let eig = diagonalize(&build_hamiltonian(&sys, &b)).unwrap();
    let oracle = oracle_eigenvalues_for(&sys, [0.0, 0.0, 6.7]);
    for ((a, b), frozen) in eig.values.iter().zip(&oracle).zip(&NU1_67MT_LEVELS) {
        assert!((a - b).abs() < 1e-6);
        assert!((a - frozen).abs() < 1e-5, "{a} vs {frozen}");
    }
}

#[test]
fn nu1_degeneracy_census() {
    let sys = presets::family_nu1();
    let eig0 = diagonalize(&build_hamiltonian(&sys, &FieldVector::ZERO)).unwrap();
    assert_eq!(degeneracy_census(&eig0, 1e-6).unwrap(), vec![2; 6]);

    let b = FieldVector::new([0.0, 0.0, 6.7]).unwrap();
    let eig = diagonalize(&build_hamiltonian(&sys, &b)).unwrap();
    assert_eq!(degeneracy_census(&eig, 1e-3).unwrap(), vec![1; 12]);
}

fn random_system(g: &mut GaussianSampler) -> (SpinSystem, [f64; 3]) {
    let d = g.uniform(-1000.0, 1000.0);
    let e = g.uniform(-200.0, 200.0);
    let a = g.uniform(-100.0, 100.0);
    let polar = g.uniform(0.0, 180.0);
    let azimuth = g.uniform(0.0, 360.0);
    let sys = SpinSystem::with_isotropic_hyperfine(
        Spin::ONE,
        Spin::THREE_HALVES,
        d,
        e,
        a,
        polar,
        azimuth,
    )
    .unwrap();
    let b = [
        g.uniform(-10.0, 10.0),
        g.uniform(-10.0, 10.0),
        g.uniform(-10.0, 10.0),
    ];
    (sys, b)
}

#[test]
fn randomized_oracle_equivalence() {
    let mut g = GaussianSampler::new(11);
    for _ in 0..150 {
        let (sys, b) = random_system(&mut g);
        let h = build_hamiltonian(&sys, &FieldVector::new(b).unwrap());
        assert!(h.matrix.hermiticity_defect() <= 1e-12 * h.matrix.max_abs());
        // trace identity
        assert!(h.matrix.trace().norm() < 1e-9 * h.matrix.frobenius_norm());
        let eig = diagonalize(&h).unwrap();
        let oracle = oracle_eigenvalues_for(&sys, b);
        for (a, o) in eig.values.iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-6, "main {a} vs oracle {o}");
        }
    }
}

#[test]
fn eigen_residual_and_orthonormality_randomized() {
    let mut g = GaussianSampler::new(23);
    for _ in 0..25 {
        let (sys, b) = random_system(&mut g);
        let h = build_hamiltonian(&sys, &FieldVector::new(b).unwrap());
        let eig = diagonalize(&h).unwrap();
        let norm = h.matrix.frobenius_norm();
        for k in 0..eig.dim() {
            let v = eig.vector(k);
            let hv = h.matrix.matvec(&v);
            let resid: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - eig.values[k] * x).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-9 * norm);
            for j in 0..eig.dim() {
                let dot: num_complex::Complex64 = eig
                    .vector(j)
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((dot.norm() - expect).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn zero_field_levels_pair_up_for_half_integer_nucleus() {
    let mut g = GaussianSampler::new(37);
    for _ in 0..40 {
        let (sys, _) = random_system(&mut g);
        let h = build_hamiltonian(&sys, &FieldVector::ZERO);
        let eig = diagonalize(&h).unwrap();
        let scale = h.matrix.frobenius_norm().max(1.0);
        let census = degeneracy_census(&eig, 1e-7 * scale).unwrap();
        for m in census {
            assert_eq!(m % 2, 0, "odd multiplicity at zero field");
        }
    }
}

fn rotate_z(v: [f64; 3], alpha_deg: f64) -> [f64; 3] {
    let a = alpha_deg.to_radians();
    [
        v[0] * a.cos() - v[1] * a.sin(),
        v[0] * a.sin() + v[1] * a.cos(),
        v[2],
    ]
}

fn rotate_y(v: [f64; 3], alpha_deg: f64) -> [f64; 3] {
    let a = alpha_deg.to_radians();
    [
        v[0] * a.cos() + v[2] * a.sin(),
        v[1],
        -v[0] * a.sin() + v[2] * a.cos(),
    ]
}

fn axis_direction(polar_deg: f64, azimuth_deg: f64) -> [f64; 3] {
    let th = polar_deg.to_radians();
    let ph = azimuth_deg.to_radians();
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

fn angles_of(d: [f64; 3]) -> (f64, f64) {
    let polar = d[2].clamp(-1.0, 1.0).acos().to_degrees();
    let azimuth = d[1].atan2(d[0]).to_degrees();
    (polar, azimuth)
}

#[test]
fn corotation_invariance() {
    // rotations about the c-axis leave the spectrum invariant for any E;
    // arbitrary co-rotations do for axially symmetric defects (E = 0,
    // isotropic A), where only the field-axis angle matters
    let mut g = GaussianSampler::new(53);
    for trial in 0..20 {
        let (sys, b) = random_system(&mut g);
        let alpha = g.uniform(-180.0, 180.0);

        // z-rotation, arbitrary system
        let mut rot_sys = sys.clone();
        rot_sys.axis_azimuth_deg += alpha;
        let b_rot = rotate_z(b, alpha);
        let e1 = diagonalize(&build_hamiltonian(&sys, &FieldVector::new(b).unwrap())).unwrap();
        let e2 =
            diagonalize(&build_hamiltonian(&rot_sys, &FieldVector::new(b_rot).unwrap())).unwrap();
        for (a, c) in e1.values.iter().zip(&e2.values) {
            assert!((a - c).abs() < 1e-9, "z-rotation trial {trial}: {a} vs {c}");
        }

        // general rotation, axially symmetric system
        let mut axial = sys.clone();
        axial.e_mhz = 0.0;
        let beta = g.uniform(-90.0, 90.0);
        let d_rot = rotate_z(rotate_y(axis_direction(axial.axis_polar_deg, axial.axis_azimuth_deg), beta), alpha);
        let (polar2, azimuth2) = angles_of(d_rot);
        let mut axial_rot = axial.clone();
        axial_rot.axis_polar_deg = polar2;
        axial_rot.axis_azimuth_deg = azimuth2;
        let b2 = rotate_z(rotate_y(b, beta), alpha);
        let e3 = diagonalize(&build_hamiltonian(&axial, &FieldVector::new(b).unwrap())).unwrap();
        let e4 =
            diagonalize(&build_hamiltonian(&axial_rot, &FieldVector::new(b2).unwrap())).unwrap();
        for (a, c) in e3.values.iter().zip(&e4.values) {
            assert!((a - c).abs() < 1e-9, "general rotation trial {trial}: {a} vs {c}");
        }
    }
}

#[test]
fn nu1_transition_pattern() {
    let sys = presets::family_nu1();
    let eig = diagonalize(&build_hamiltonian(&sys, &FieldVector::ZERO)).unwrap();
    let ts = transitions(&eig, &sys, RfDrive::default(), 0.0).unwrap();

    // intensity-weighted groups around the frozen line positions
    let group_sum = |lo: f64, hi: f64| -> f64 {
        ts.iter()
            .filter(|t| t.freq_mhz > lo && t.freq_mhz < hi)
            .map(|t| t.intensity)
            .sum()
    };
    // main resonance group (the two unresolved hyperfine branches)
    let nu1 = group_sum(620.0, 660.0);
    // resolved hyperfine satellites of the lower transition
    let nu1p = group_sum(500.0, 515.0);
    let nu1pp = group_sum(480.0, 495.0);
    // intra-manifold transitions, forbidden for pure electron states
    let nu1ppp = group_sum(100.0, 170.0);

    assert!(nu1p > 1.0, "nu1' group {nu1p}");
    assert!(nu1pp > 1.0, "nu1'' group {nu1pp}");
    assert!(nu1 > 0.2, "nu1 group {nu1}");
    assert!(
        nu1ppp < 0.1 * nu1p,
        "nu1''' ({nu1ppp}) should stay below 10% of nu1' ({nu1p})"
    );

    // frozen strongest line positions within each group
    for (lo, hi, frozen) in [
        (480.0, 495.0, 484.981481),
        (500.0, 515.0, 508.409620),
        (620.0, 641.0, 632.267110),
        (641.0, 660.0, 644.502386),
    ] {
        let strongest = ts
            .iter()
            .filter(|t| t.freq_mhz > lo && t.freq_mhz < hi)
            .max_by(|a, b| a.intensity.total_cmp(&b.intensity))
            .unwrap();
        assert!(
            (strongest.freq_mhz - frozen).abs() < 1e-4,
            "group [{lo},{hi}]: {} vs frozen {frozen}",
            strongest.freq_mhz
        );
    }
}
