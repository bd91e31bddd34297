//! Coupled electron-nuclear spin Hamiltonian.
//!
//! The Hamiltonian is the sum of a zero-field term
//! `D (Sz² - S(S+1)/3) + E (Sx² - Sy²)` expressed in the defect frame, the
//! electron Zeeman term `γe B·S`, the nuclear Zeeman term `-γn B·I` and the
//! hyperfine coupling `S·A·I`. Energies are in MHz (h = 1), fields in mT.
//! The product basis |m_S⟩⊗|m_I⟩ is ordered by descending m_S, then
//! descending m_I, so eigenvector components are comparable across runs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_hermitian, CMatrix};

/// Spin quantum number stored as twice its value, so 1/2, 1, 3/2, ... are
/// exactly representable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin {
    doubled: u32,
}

impl Spin {
    pub const ZERO: Spin = Spin { doubled: 0 };
    pub const HALF: Spin = Spin { doubled: 1 };
    pub const ONE: Spin = Spin { doubled: 2 };
    pub const THREE_HALVES: Spin = Spin { doubled: 3 };

    pub fn from_doubled(doubled: u32) -> Self {
        Spin { doubled }
    }

    /// Accepts any value for which 2s is a nonnegative integer.
    pub fn try_from_f64(s: f64) -> Result<Self> {
        let doubled = 2.0 * s;
        if !(s.is_finite() && s >= 0.0 && (doubled - doubled.round()).abs() < 1e-9) {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin {
            doubled: doubled.round() as u32,
        })
    }

    pub fn value(self) -> f64 {
        self.doubled as f64 / 2.0
    }

    pub fn doubled(self) -> u32 {
        self.doubled
    }

    /// Dimension of the spin-s representation, 2s+1.
    pub fn multiplicity(self) -> usize {
        self.doubled as usize + 1
    }

    /// Projections m = s, s-1, ..., -s.
    pub fn projections(self) -> impl Iterator<Item = f64> {
        let s = self.value();
        (0..self.multiplicity()).map(move |k| s - k as f64)
    }
}

/// Sx, Sy, Sz in the |s, m⟩ basis ordered by descending m.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

impl SpinOperators {
    pub fn along(&self, axis: [f64; 3]) -> CMatrix {
        let mut out = self.sx.scale(Complex64::new(axis[0], 0.0));
        out.add_assign_scaled(&self.sy, Complex64::new(axis[1], 0.0));
        out.add_assign_scaled(&self.sz, Complex64::new(axis[2], 0.0));
        out
    }
}

/// Standard angular-momentum matrices from the ladder construction:
/// S± |s,m⟩ = sqrt(s(s+1) - m(m±1)) |s,m±1⟩.
pub fn spin_matrices(s: Spin) -> SpinOperators {
    let dim = s.multiplicity();
    let sv = s.value();
    let ms: Vec<f64> = s.projections().collect();

    let mut sz = CMatrix::zeros(dim, dim);
    let mut sp = CMatrix::zeros(dim, dim);
    for (k, &m) in ms.iter().enumerate() {
        sz[(k, k)] = Complex64::new(m, 0.0);
        if k > 0 {
            // raising m -> m+1 moves one row up in descending-m order
            sp[(k - 1, k)] = Complex64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let mut sx = sp.clone();
    sx.add_assign_scaled(&sm, Complex64::ONE);
    let sx = sx.scale(Complex64::new(0.5, 0.0));
    let mut sy = sp;
    sy.add_assign_scaled(&sm, -Complex64::ONE);
    let sy = sy.scale(Complex64::new(0.0, -0.5));
    SpinOperators { sx, sy, sz }
}

/// Magnetic field vector in the lab frame (mT).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldVector {
    pub b_mt: [f64; 3],
}

impl FieldVector {
    pub const ZERO: FieldVector = FieldVector { b_mt: [0.0; 3] };

    pub fn new(b_mt: [f64; 3]) -> Result<Self> {
        for &v in &b_mt {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    name: "field component",
                    value: v,
                });
            }
        }
        Ok(FieldVector { b_mt })
    }

    pub fn along(axis: [f64; 3], magnitude_mt: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("field axis must be nonzero".into()));
        }
        Self::new([
            axis[0] / n * magnitude_mt,
            axis[1] / n * magnitude_mt,
            axis[2] / n * magnitude_mt,
        ])
    }
}

pub const DEFAULT_GAMMA_E_MHZ_PER_MT: f64 = 28.0;
/// ³⁵Cl nuclear gyromagnetic ratio magnitude.
pub const DEFAULT_GAMMA_N_MHZ_PER_MT: f64 = 0.004176;

/// Physical parameters of one defect family.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    pub s_electron: Spin,
    pub i_nuclear: Spin,
    pub d_mhz: f64,
    pub e_mhz: f64,
    /// 3x3 symmetric hyperfine tensor in the defect frame (MHz).
    pub a_tensor_mhz: [[f64; 3]; 3],
    pub gamma_e_mhz_per_mt: f64,
    pub gamma_n_mhz_per_mt: f64,
    /// Orientation of the defect axis relative to the lab c-axis (degrees).
    pub axis_polar_deg: f64,
    pub axis_azimuth_deg: f64,
}

impl SpinSystem {
    /// Electron-only system (I = 0) with isotropic defaults.
    pub fn electron_only(s_electron: Spin, d_mhz: f64, e_mhz: f64) -> Result<Self> {
        Self::new(
            s_electron,
            Spin::ZERO,
            d_mhz,
            e_mhz,
            [[0.0; 3]; 3],
            DEFAULT_GAMMA_E_MHZ_PER_MT,
            DEFAULT_GAMMA_N_MHZ_PER_MT,
            0.0,
            0.0,
        )
    }

    /// Convenience constructor from a single isotropic hyperfine constant.
    #[allow(clippy::too_many_arguments)]
    pub fn with_isotropic_hyperfine(
        s_electron: Spin,
        i_nuclear: Spin,
        d_mhz: f64,
        e_mhz: f64,
        a_mhz: f64,
        axis_polar_deg: f64,
        axis_azimuth_deg: f64,
    ) -> Result<Self> {
        let mut a = [[0.0; 3]; 3];
        for (k, row) in a.iter_mut().enumerate() {
            row[k] = a_mhz;
        }
        Self::new(
            s_electron,
            i_nuclear,
            d_mhz,
            e_mhz,
            a,
            DEFAULT_GAMMA_E_MHZ_PER_MT,
            DEFAULT_GAMMA_N_MHZ_PER_MT,
            axis_polar_deg,
            axis_azimuth_deg,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s_electron: Spin,
        i_nuclear: Spin,
        d_mhz: f64,
        e_mhz: f64,
        a_tensor_mhz: [[f64; 3]; 3],
        gamma_e_mhz_per_mt: f64,
        gamma_n_mhz_per_mt: f64,
        axis_polar_deg: f64,
        axis_azimuth_deg: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("d_mhz", d_mhz),
            ("e_mhz", e_mhz),
            ("gamma_e_mhz_per_mt", gamma_e_mhz_per_mt),
            ("gamma_n_mhz_per_mt", gamma_n_mhz_per_mt),
            ("axis_polar_deg", axis_polar_deg),
            ("axis_azimuth_deg", axis_azimuth_deg),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFinite { name, value });
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if !a_tensor_mhz[i][j].is_finite() {
                    return Err(Error::NonFinite {
                        name: "a_tensor_mhz",
                        value: a_tensor_mhz[i][j],
                    });
                }
                if a_tensor_mhz[i][j] != a_tensor_mhz[j][i] {
                    return Err(Error::AsymmetricTensor);
                }
            }
        }
        if e_mhz.abs() > d_mhz.abs() {
            log::warn!(
                "transverse zero-field splitting |E|={} exceeds |D|={}",
                e_mhz.abs(),
                d_mhz.abs()
            );
        }
        Ok(SpinSystem {
            s_electron,
            i_nuclear,
            d_mhz,
            e_mhz,
            a_tensor_mhz,
            gamma_e_mhz_per_mt,
            gamma_n_mhz_per_mt,
            axis_polar_deg,
            axis_azimuth_deg,
        })
    }

    pub fn isotropic_hyperfine_mhz(&self) -> f64 {
        (self.a_tensor_mhz[0][0] + self.a_tensor_mhz[1][1] + self.a_tensor_mhz[2][2]) / 3.0
    }

    /// Composite Hilbert-space dimension (2S+1)(2I+1).
    pub fn dim(&self) -> usize {
        self.s_electron.multiplicity() * self.i_nuclear.multiplicity()
    }

    /// Rotation taking lab-frame vectors into the defect frame
    /// (defect axis maps onto +z).
    pub fn lab_to_defect(&self) -> [[f64; 3]; 3] {
        rotation_lab_to_defect(self.axis_polar_deg, self.axis_azimuth_deg)
    }

    /// Lab-frame vector expressed in defect coordinates.
    pub fn to_defect_frame(&self, v: [f64; 3]) -> [f64; 3] {
        mat3_apply(&self.lab_to_defect(), v)
    }
}

/// R = R_y(-polar) · R_z(-azimuth); maps the defect-axis direction
/// (sinθ cosφ, sinθ sinφ, cosθ) to (0, 0, 1).
pub fn rotation_lab_to_defect(polar_deg: f64, azimuth_deg: f64) -> [[f64; 3]; 3] {
    let th = polar_deg.to_radians();
    let ph = azimuth_deg.to_radians();
    let (ct, st) = (th.cos(), th.sin());
    let (cp, sp) = (ph.cos(), ph.sin());
    let rz = [[cp, sp, 0.0], [-sp, cp, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[ct, 0.0, -st], [0.0, 1.0, 0.0], [st, 0.0, ct]];
    mat3_mul(&ry, &rz)
}

pub(crate) fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn mat3_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Hamiltonian matrix in MHz over the |m_S⟩⊗|m_I⟩ product basis.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub matrix: CMatrix,
    pub s_dim: usize,
    pub i_dim: usize,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.s_dim * self.i_dim
    }

    /// Basis indices whose electron projection is m_S = 0, if S is integer.
    fn m_s_zero_indices(&self) -> Option<std::ops::Range<usize>> {
        if self.s_dim % 2 == 1 {
            let block = (self.s_dim - 1) / 2; // descending m_S: block index of m_S = 0
            Some(block * self.i_dim..(block + 1) * self.i_dim)
        } else {
            None
        }
    }

    fn validate_hermitian(&self) -> Result<()> {
        let limit = 1e-12 * self.matrix.max_abs().max(f64::MIN_POSITIVE);
        let defect = self.matrix.hermiticity_defect();
        if defect > limit {
            return Err(Error::NotHermitian { defect, limit });
        }
        Ok(())
    }
}

/// Assemble the full Hamiltonian for `sys` in field `b` (lab frame).
///
/// The field is rotated into the defect frame before contraction with the
/// defect-frame spin operators; entries are accumulated term by term from
/// the small electron and nuclear operator matrices.
pub fn build_hamiltonian(sys: &SpinSystem, b: &FieldVector) -> HamiltonianMatrix {
    let s_ops = spin_matrices(sys.s_electron);
    let i_ops = spin_matrices(sys.i_nuclear);
    let ns = sys.s_electron.multiplicity();
    let ni = sys.i_nuclear.multiplicity();
    let dim = ns * ni;
    let b_defect = sys.to_defect_frame(b.b_mt);

    let mut h = CMatrix::zeros(dim, dim);

    // electron-only part: zero-field splitting + electron Zeeman
    let sv = sys.s_electron.value();
    let mut h_e = sz_squared(&s_ops.sz);
    for k in 0..ns {
        h_e[(k, k)] -= Complex64::new(sv * (sv + 1.0) / 3.0, 0.0);
    }
    let mut h_e = h_e.scale(Complex64::new(sys.d_mhz, 0.0));
    let sx2 = s_ops.sx.matmul(&s_ops.sx);
    let sy2 = s_ops.sy.matmul(&s_ops.sy);
    h_e.add_assign_scaled(&sx2, Complex64::new(sys.e_mhz, 0.0));
    h_e.add_assign_scaled(&sy2, Complex64::new(-sys.e_mhz, 0.0));
    let s_axes = [&s_ops.sx, &s_ops.sy, &s_ops.sz];
    for k in 0..3 {
        h_e.add_assign_scaled(s_axes[k], Complex64::new(sys.gamma_e_mhz_per_mt * b_defect[k], 0.0));
    }
    add_electron_term(&mut h, &h_e, ni);

    // nuclear Zeeman
    let i_axes = [&i_ops.sx, &i_ops.sy, &i_ops.sz];
    if ni > 1 {
        let mut h_n = CMatrix::zeros(ni, ni);
        for k in 0..3 {
            h_n.add_assign_scaled(i_axes[k], Complex64::new(-sys.gamma_n_mhz_per_mt * b_defect[k], 0.0));
        }
        add_nuclear_term(&mut h, &h_n, ns);

        // hyperfine S·A·I
        for a in 0..3 {
            for bx in 0..3 {
                let coeff = sys.a_tensor_mhz[a][bx];
                if coeff != 0.0 {
                    add_kron_scaled(&mut h, s_axes[a], i_axes[bx], coeff);
                }
            }
        }
    }

    HamiltonianMatrix {
        matrix: h,
        s_dim: ns,
        i_dim: ni,
    }
}

fn sz_squared(sz: &CMatrix) -> CMatrix {
    sz.matmul(sz)
}

/// Accumulate `op ⊗ 1` into `h`.
fn add_electron_term(h: &mut CMatrix, op: &CMatrix, ni: usize) {
    for i1 in 0..op.n_rows {
        for j1 in 0..op.n_cols {
            let v = op[(i1, j1)];
            if v != Complex64::ZERO {
                for k in 0..ni {
                    h[(i1 * ni + k, j1 * ni + k)] += v;
                }
            }
        }
    }
}

/// Accumulate `1 ⊗ op` into `h`.
fn add_nuclear_term(h: &mut CMatrix, op: &CMatrix, ns: usize) {
    let ni = op.n_rows;
    for block in 0..ns {
        for i2 in 0..ni {
            for j2 in 0..ni {
                let v = op[(i2, j2)];
                if v != Complex64::ZERO {
                    h[(block * ni + i2, block * ni + j2)] += v;
                }
            }
        }
    }
}

/// Accumulate `coeff · (es_op ⊗ nuc_op)` entrywise.
fn add_kron_scaled(h: &mut CMatrix, es_op: &CMatrix, nuc_op: &CMatrix, coeff: f64) {
    let ni = nuc_op.n_rows;
    let c = Complex64::new(coeff, 0.0);
    for i1 in 0..es_op.n_rows {
        for j1 in 0..es_op.n_cols {
            let a = es_op[(i1, j1)];
            if a == Complex64::ZERO {
                continue;
            }
            for i2 in 0..ni {
                for j2 in 0..ni {
                    let b = nuc_op[(i2, j2)];
                    if b != Complex64::ZERO {
                        h[(i1 * ni + i2, j1 * ni + j2)] += c * a * b;
                    }
                }
            }
        }
    }
}

/// Real eigenvalues (MHz, ascending) with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl EigenSolution {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }
}

/// Diagonalize a Hermitian Hamiltonian with the in-repo Jacobi solver.
///
/// Eigenvalues come back ascending. Within a degenerate cluster, vectors are
/// ordered by descending weight on the m_S = 0 subspace, then by the index
/// of their largest-magnitude component; each vector's global phase is fixed
/// by making that component real positive.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenSolution> {
    h.validate_hermitian()?;
    let eig = jacobi_hermitian(&h.matrix)?;
    let n = eig.values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));

    let mut values: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
    let mut columns: Vec<Vec<Complex64>> = order.iter().map(|&k| eig.vectors.column(k)).collect();

    // deterministic ordering inside degenerate clusters
    let cluster_tol = 1e-8 * h.matrix.frobenius_norm().max(1e-300);
    let zero_range = h.m_s_zero_indices();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let mut keyed: Vec<(usize, f64, usize)> = (start..end)
                .map(|k| {
                    let weight = zero_range
                        .as_ref()
                        .map(|r| r.clone().map(|i| columns[k][i].norm_sqr()).sum::<f64>())
                        .unwrap_or(0.0);
                    (k, weight, dominant_index(&columns[k]))
                })
                .collect();
            keyed.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
            let new_cols: Vec<Vec<Complex64>> = keyed.iter().map(|&(k, _, _)| columns[k].clone()).collect();
            let new_vals: Vec<f64> = keyed.iter().map(|&(k, _, _)| values[k]).collect();
            columns[start..end].clone_from_slice(&new_cols);
            values[start..end].copy_from_slice(&new_vals);
        }
        start = end;
    }

    // phase convention: largest component real positive
    for col in &mut columns {
        let k = dominant_index(col);
        let z = col[k];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for x in col.iter_mut() {
                *x *= phase;
            }
        }
    }

    let mut vectors = CMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            vectors[(i, j)] = z;
        }
    }
    Ok(EigenSolution { values, vectors })
}

fn dominant_index(v: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        let nn = z.norm_sqr();
        if nn > best_norm + 1e-15 {
            best = i;
            best_norm = nn;
        }
    }
    best
}

/// Group ascending eigenvalues into near-degenerate clusters
/// (adjacent gap < `tol_mhz`) and return the multiplicities.
pub fn degeneracy_census(eig: &EigenSolution, tol_mhz: f64) -> Result<Vec<usize>> {
    if !(tol_mhz > 0.0) {
        return Err(Error::NonPositiveTolerance(tol_mhz));
    }
    let mut out = Vec::new();
    let mut count = 0usize;
    for k in 0..eig.values.len() {
        if count == 0 || eig.values[k] - eig.values[k - 1] < tol_mhz {
            count += 1;
        } else {
            out.push(count);
            count = 1;
        }
    }
    if count > 0 {
        out.push(count);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_rejects_non_half_integer() {
        assert!(Spin::try_from_f64(0.3).is_err());
        assert!(Spin::try_from_f64(-0.5).is_err());
        assert!(Spin::try_from_f64(1.5).is_ok());
    }

    #[test]
    fn sz_diagonal_for_half() {
        let ops = spin_matrices(Spin::HALF);
        assert_eq!(ops.sz[(0, 0)].re, 0.5);
        assert_eq!(ops.sz[(1, 1)].re, -0.5);
    }

    #[test]
    fn spin_one_matrices() {
        let ops = spin_matrices(Spin::ONE);
        assert_eq!(ops.sz[(0, 0)].re, 1.0);
        assert_eq!(ops.sz[(1, 1)].re, 0.0);
        assert_eq!(ops.sz[(2, 2)].re, -1.0);
        let expect = 1.0 / 2f64.sqrt();
        assert!((ops.sx[(0, 1)].re - expect).abs() < 1e-15);
        assert!((ops.sx[(1, 2)].re - expect).abs() < 1e-15);
        assert_eq!(ops.sx[(0, 2)], Complex64::ZERO);
    }

    #[test]
    fn casimir_three_halves() {
        let ops = spin_matrices(Spin::THREE_HALVES);
        let mut casimir = ops.sx.matmul(&ops.sx);
        casimir.add_assign_scaled(&ops.sy.matmul(&ops.sy), Complex64::ONE);
        casimir.add_assign_scaled(&ops.sz.matmul(&ops.sz), Complex64::ONE);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 3.75 } else { 0.0 };
                assert!((casimir[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_identity() {
        for doubled in 1..=6u32 {
            let ops = spin_matrices(Spin::from_doubled(doubled));
            let mut comm = ops.sx.matmul(&ops.sy);
            comm.add_assign_scaled(&ops.sy.matmul(&ops.sx), -Complex64::ONE);
            // [Sx, Sy] = i Sz
            let expect = ops.sz.scale(Complex64::new(0.0, 1.0));
            for i in 0..ops.sz.n_rows {
                for j in 0..ops.sz.n_cols {
                    assert!((comm[(i, j)] - expect[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zfs_eigenvalues_analytic() {
        let sys = SpinSystem::electron_only(Spin::ONE, 560.0, 0.0).unwrap();
        let h = build_hamiltonian(&sys, &FieldVector::ZERO);
        let eig = diagonalize(&h).unwrap();
        assert!((eig.values[0] + 2.0 * 560.0 / 3.0).abs() < 1e-9);
        assert!((eig.values[1] - 560.0 / 3.0).abs() < 1e-9);
        assert!((eig.values[2] - 560.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn zfs_with_e_term() {
        let sys = SpinSystem::electron_only(Spin::ONE, 560.0, 60.0).unwrap();
        let h = build_hamiltonian(&sys, &FieldVector::ZERO);
        let eig = diagonalize(&h).unwrap();
        let t1 = eig.values[1] - eig.values[0];
        let t2 = eig.values[2] - eig.values[0];
        assert!((t1 - 500.0).abs() < 1e-9);
        assert!((t2 - 620.0).abs() < 1e-9);
    }

    #[test]
    fn pure_zeeman_splitting() {
        let sys = SpinSystem::electron_only(Spin::ONE, 0.0, 0.0).unwrap();
        let b = FieldVector::new([0.0, 0.0, 10.0]).unwrap();
        let h = build_hamiltonian(&sys, &b);
        let eig = diagonalize(&h).unwrap();
        assert!((eig.values[2] - eig.values[1] - 280.0).abs() < 1e-9);
        assert!((eig.values[1] - eig.values[0] - 280.0).abs() < 1e-9);
    }

    #[test]
    fn hamiltonian_is_traceless() {
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
        let b = FieldVector::new([1.3, -0.4, 6.7]).unwrap();
        let h = build_hamiltonian(&sys, &b);
        let tr = h.matrix.trace();
        assert!(tr.norm() < 1e-9 * h.matrix.frobenius_norm());
    }

    #[test]
    fn census_trivial_cases() {
        let sys = SpinSystem::electron_only(Spin::ONE, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&sys, &FieldVector::ZERO);
        let eig = diagonalize(&h).unwrap();
        assert_eq!(degeneracy_census(&eig, 1e-6).unwrap(), vec![3]);
        assert!(degeneracy_census(&eig, 0.0).is_err());
    }

    #[test]
    fn diagonalize_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let h = HamiltonianMatrix {
            matrix: m,
            s_dim: 2,
            i_dim: 1,
        };
        assert!(matches!(diagonalize(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rotation_sends_axis_to_z() {
        let r = rotation_lab_to_defect(70.53, 37.0);
        let th = 70.53f64.to_radians();
        let ph = 37.0f64.to_radians();
        let axis = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let mapped = mat3_apply(&r, axis);
        assert!(mapped[0].abs() < 1e-12);
        assert!(mapped[1].abs() < 1e-12);
        assert!((mapped[2] - 1.0).abs() < 1e-12);
    }
}
