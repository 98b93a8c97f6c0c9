//! Small dense complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Everything here targets the dimensions that show up for a handful of qubits
//! (2 to 64), so storage is a flat row-major `Vec<Complex64>` and the algorithms
//! favour robustness over asymptotic speed.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Off-diagonal Frobenius norm at which the Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Hermiticity tolerance accepted by [`hermitian_eigs`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics unless `data.len()` is a perfect square.
    pub fn from_vec(data: Vec<Complex64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, data.len(), "matrix data length must be a perfect square");
        Self { dim, data }
    }

    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]; N]) -> Self {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        Self { dim: N, data }
    }

    /// Rank-one projector `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let dim = a * b;
        let mut m = Self::zeros(dim);
        for i in 0..a {
            for j in 0..a {
                let s = self[(i, j)];
                if s == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        m[(i * b + k, j * b + l)] = s * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `U self U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Real symmetric matrix function `f(H) = V f(Λ) V†` for Hermitian `self`.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let eig = hermitian_eigs(self)?;
        let dim = self.dim;
        let mut m = Self::zeros(dim);
        for (k, &lambda) in eig.values.iter().enumerate() {
            let fk = f(lambda);
            for i in 0..dim {
                let vik = eig.vectors[(i, k)] * fk;
                for j in 0..dim {
                    m[(i, j)] += vik * eig.vectors[(j, k)].conj();
                }
            }
        }
        Ok(m)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigen-decomposition `H = V diag(values) V†`; `values` descending, eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each pivot `(p, q)` is annihilated by a phase rotation that makes `a_pq` real
/// followed by a real Givens rotation. Sweeps repeat until the off-diagonal
/// Frobenius norm falls below [`JACOBI_TOLERANCE`] (relative to the matrix norm
/// when that exceeds 1).
pub fn hermitian_eigs(h: &CMatrix) -> Result<HermitianEigen> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.dim();
    // symmetrize so that rounding in the input cannot bias the diagonal
    let mut a = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_TOLERANCE * a.frobenius_norm().max(1.0);

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < f64::MIN_POSITIVE.sqrt() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = (apq / mag).conj();

    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta.is_finite() {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = phase * -s;
    let gqq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// Eigenvalues of a real symmetric 3×3 matrix, descending, with unit eigenvectors as columns.
pub fn symmetric3_eigs(m: &Mat3) -> Result<([f64; 3], Mat3)> {
    let eig = hermitian_eigs(&CMatrix::from_real_rows(m))?;
    let mut vecs = [[0.0; 3]; 3];
    for col in 0..3 {
        // a real symmetric matrix has real eigenvectors up to a global phase per column
        let pivot = (0..3)
            .map(|r| eig.vectors[(r, col)])
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ONE);
        let unphase = pivot.conj() / pivot.norm();
        let mut norm = 0.0;
        for row in 0..3 {
            vecs[row][col] = (eig.vectors[(row, col)] * unphase).re;
            norm += vecs[row][col] * vecs[row][col];
        }
        let norm = norm.sqrt();
        for row in vecs.iter_mut() {
            row[col] /= norm;
        }
    }
    Ok(([eig.values[0], eig.values[1], eig.values[2]], vecs))
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn mat3_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose3(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// `Tr(Aᵀ B)`.
pub fn frobenius_inner3(a: &Mat3, b: &Mat3) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| a[i][j] * b[i][j]).sum()
}

pub fn outer3(a: &Vec3, b: &Vec3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i] * b[j];
        }
    }
    out
}
