//! Brute-force reference implementations used as test oracles.
//!
//! The Hamiltonian is assembled by explicit dense Kronecker products and
//! diagonalized with nalgebra's symmetric eigensolver on the real embedding
//! [[Re H, -Im H], [Im H, Re H]] — a code path fully independent of the
//! crate's matrix-element assembly and Jacobi solver.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use spin_toolkit::spin::SpinSystem;

pub struct OracleMatrices {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn spin_ops(two_s: u32) -> [DMatrix<Complex64>; 3] {
    let dim = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let ms: Vec<f64> = (0..dim).map(|k| s - k as f64).collect();
    let mut sz = DMatrix::<Complex64>::zeros(dim, dim);
    let mut sp = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, &m) in ms.iter().enumerate() {
        sz[(k, k)] = Complex64::new(m, 0.0);
        if k > 0 {
            sp[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * Complex64::new(0.5, 0.0);
    let sy = (&sp - &sm) * Complex64::new(0.0, -0.5);
    [sx, sy, sz]
}

fn rotation(polar_deg: f64, azimuth_deg: f64) -> [[f64; 3]; 3] {
    let th = polar_deg.to_radians();
    let ph = azimuth_deg.to_radians();
    let (ct, st) = (th.cos(), th.sin());
    let (cp, sp) = (ph.cos(), ph.sin());
    // R_y(-th) * R_z(-ph)
    [
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
        [st * cp, st * sp, ct],
    ]
}

/// Kronecker-assembled Hamiltonian for `sys` in lab-frame field `b_mt`.
pub fn oracle_hamiltonian(sys: &SpinSystem, b_mt: [f64; 3]) -> DMatrix<Complex64> {
    let s_ops = spin_ops(sys.s_electron.doubled());
    let i_ops = spin_ops(sys.i_nuclear.doubled());
    let ns = sys.s_electron.multiplicity();
    let ni = sys.i_nuclear.multiplicity();
    let es = DMatrix::<Complex64>::identity(ns, ns);
    let en = DMatrix::<Complex64>::identity(ni, ni);

    let big_s: Vec<DMatrix<Complex64>> = s_ops.iter().map(|op| kron(op, &en)).collect();
    let big_i: Vec<DMatrix<Complex64>> = i_ops.iter().map(|op| kron(&es, op)).collect();

    let r = rotation(sys.axis_polar_deg, sys.axis_azimuth_deg);
    let bd: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|j| r[i][j] * b_mt[j]).sum())
        .collect();

    let dim = ns * ni;
    let sv = sys.s_electron.value();
    let mut h = &big_s[2] * &big_s[2] * Complex64::new(sys.d_mhz, 0.0);
    for k in 0..dim {
        h[(k, k)] -= Complex64::new(sys.d_mhz * sv * (sv + 1.0) / 3.0, 0.0);
    }
    h += (&big_s[0] * &big_s[0] - &big_s[1] * &big_s[1]) * Complex64::new(sys.e_mhz, 0.0);
    for k in 0..3 {
        h += &big_s[k] * Complex64::new(sys.gamma_e_mhz_per_mt * bd[k], 0.0);
        h -= &big_i[k] * Complex64::new(sys.gamma_n_mhz_per_mt * bd[k], 0.0);
        for l in 0..3 {
            let a = sys.a_tensor_mhz[k][l];
            if a != 0.0 {
                h += &big_s[k] * &big_i[l] * Complex64::new(a, 0.0);
            }
        }
    }
    h
}

/// Eigenvalues of a complex Hermitian matrix via the real symmetric
/// embedding, solved with nalgebra. Ascending.
pub fn oracle_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            big[(i, j)] = z.re;
            big[(i + n, j + n)] = z.re;
            big[(i, j + n)] = -z.im;
            big[(i + n, j)] = z.im;
        }
    }
    let eig = big.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    // every eigenvalue of H appears twice in the embedding
    vals.into_iter().step_by(2).collect()
}

pub fn oracle_eigenvalues_for(sys: &SpinSystem, b_mt: [f64; 3]) -> Vec<f64> {
    oracle_eigenvalues(&oracle_hamiltonian(sys, b_mt))
}

/// Deterministic standard-normal sampler (Box-Muller over a seeded
/// ChaCha stream).
pub struct GaussianSampler {
    rng: rand_chacha::ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        GaussianSampler {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn sample(&mut self) -> f64 {
        use rand::Rng;
        if let Some(s) = self.spare.take() {
            return s;
        }
        loop {
            let u: f64 = self.rng.gen_range(-1.0..1.0f64);
            let v: f64 = self.rng.gen_range(-1.0..1.0f64);
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.rng.gen_range(lo..hi)
    }
}
