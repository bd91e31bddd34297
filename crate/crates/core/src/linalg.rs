//! Small dense linear algebra kernels: a complex matrix type, a cyclic
//! Jacobi eigensolver for Hermitian matrices and an LU solver for real
//! systems. Everything here is sized for spin-Hamiltonian work (n ≲ 100),
//! not for large-scale numerics.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![Complex64::ZERO; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols));
        Self {
            n_rows,
            n_cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_cols, rhs.n_rows);
        let mut out = Self::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.n_cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n_cols, v.len());
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= c;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, rhs: &Self, c: Complex64) {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += c * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.n_rows).map(|i| self[(i, i)]).sum()
    }

    /// max entrywise |H - H†|
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            for j in i..self.n_cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n_rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Raw output of the Jacobi sweep: unsorted eigenvalues with the
/// accumulated unitary (columns are eigenvectors).
pub struct JacobiEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation annihilates one off-diagonal pair; sweeps repeat until the
/// off-diagonal Frobenius norm falls below `1e-14 * ||A||_F`. Returns an
/// error carrying the residual if the sweep cap is hit first.
pub fn jacobi_hermitian(a: &CMatrix) -> Result<JacobiEigen> {
    assert!(a.is_square());
    let n = a.n_rows;
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok(JacobiEigen {
            values: vec![0.0; n],
            vectors: CMatrix::identity(n),
            sweeps: 0,
        });
    }

    let mut m = a.clone();
    // work on an exactly Hermitian copy with real diagonal
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let tol = 1e-14 * norm;

    for sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= tol {
            return Ok(JacobiEigen {
                values: (0..n).map(|i| m[(i, i)].re).collect(),
                vectors: v,
                sweeps: sweep,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                let (c, s, phase) = rotation_for(m[(p, p)].re, m[(q, q)].re, apq);
                apply_rotation(&mut m, p, q, c, s, phase);
                apply_rotation_right(&mut v, p, q, c, s, phase);
            }
        }
    }

    if off_diagonal_norm(&m) <= tol {
        return Ok(JacobiEigen {
            values: (0..n).map(|i| m[(i, i)].re).collect(),
            vectors: v,
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    Err(Error::EigenNoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
        residual: off_diagonal_norm(&m) / norm,
    })
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.n_rows;
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += 2.0 * m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Rotation annihilating the (p,q) entry of the Hermitian 2x2 block
/// [[app, apq], [conj(apq), aqq]]. Factors the phase out of apq, then
/// applies the classic real Jacobi angle.
fn rotation_for(app: f64, aqq: f64, apq: Complex64) -> (f64, f64, Complex64) {
    let abs = apq.norm();
    let phase = apq / abs;
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase)
}

/// A <- U† A U with U the (p,q) plane rotation
/// U[p][p]=c, U[p][q]=s, U[q][p]=-s·conj(phase), U[q][q]=c·conj(phase),
/// where `phase` carries the argument of the annihilated entry.
fn apply_rotation(m: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let n = m.n_rows;
    // column update: A <- A U
    for i in 0..n {
        let aip = m[(i, p)];
        let aiq = m[(i, q)];
        m[(i, p)] = c * aip - s * phase.conj() * aiq;
        m[(i, q)] = s * aip + c * phase.conj() * aiq;
    }
    // row update: A <- U† A
    for j in 0..n {
        let apj = m[(p, j)];
        let aqj = m[(q, j)];
        m[(p, j)] = c * apj - s * phase * aqj;
        m[(q, j)] = s * apj + c * phase * aqj;
    }
    // clean up rounding on the annihilated pair and the diagonal
    m[(p, q)] = Complex64::ZERO;
    m[(q, p)] = Complex64::ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// V <- V U (accumulates eigenvectors as columns).
fn apply_rotation_right(v: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let n = v.n_rows;
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = c * vip - s * phase.conj() * viq;
        v[(i, q)] = s * vip + c * phase.conj() * viq;
    }
}

/// Solve A x = b for a real dense system by LU with partial pivoting.
pub fn solve_lu(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (pivot_row, pivot) = (k..n)
            .map(|i| (i, lu[i][k].abs()))
            .max_by(|l, r| l.1.total_cmp(&r.1))
            .unwrap();
        if pivot < f64::EPSILON * n as f64 {
            return Err(Error::SingularMatrix);
        }
        lu.swap(k, pivot_row);
        perm.swap(k, pivot_row);
        x.swap(k, pivot_row);
        for i in k + 1..n {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..n {
                lu[i][j] -= f * lu[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let xj = x[j];
            x[i] -= lu[i][j] * xj;
        }
        x[i] /= lu[i][i];
    }
    Ok(x)
}
