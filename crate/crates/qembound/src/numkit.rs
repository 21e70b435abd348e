//! Dense complex-matrix primitives and random-instance generators.
//!
//! Everything downstream (channels, divergences, bounds, simulation) is built
//! on the types here: a row-major dense [`Matrix`] over `Complex64`, a cyclic
//! Jacobi eigensolver for Hermitian matrices, matrix functions on the PSD
//! cone, and seeded Haar-random states and unitaries.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for Hermiticity / trace / PSD validation.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Eigenvalues below `SUPPORT_CUTOFF * lambda_max` are treated as exactly
/// zero when taking logarithms or inverting on the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Derive an independent deterministic generator from a master seed and a
/// stream index. Workers never share generator state.
pub fn derive_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self.get(i, j);
                write!(f, "({:+.4}{:+.4}i) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("empty row list".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix("ragged or empty rows".into()));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Diagonal matrix from real entries.
    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| {
            if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: C64) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Matrix {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Kronecker product; the first factor is the most significant index
    /// (big-endian tensor ordering).
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Matrix::zeros(r1 * r2, c1 * c2);
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self.get(i1, j1);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..r2 {
                    for j2 in 0..c2 {
                        out.set(i1 * r2 + i2, j1 * c2 + j2, a * other.get(i2, j2));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max-entry norm of `M - M†`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// Row-major flattening.
    pub fn vec_row_major(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn from_vec_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "vector length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    pub fn expm(&self) -> Matrix {
        assert!(self.is_square(), "expm needs a square matrix");
        let n = self.rows;
        let norm = self.one_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil().max(0.0) as u32 } else { 0 };
        let scaled = self.scale_re(1.0 / f64::powi(2.0, squarings as i32));

        let mut result = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for k in 1..=30 {
            term = term.matmul(&scaled).scale_re(1.0 / k as f64);
            result = &result + &term;
            if term.max_abs_entry() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }

    /// Order-independent content hash (FNV-1a over the IEEE-754 bit patterns,
    /// in row-major order). Used to identify witness states in reports.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100_0000_01b3);
            }
        };
        eat(self.rows as u64);
        eat(self.cols as u64);
        for z in &self.data {
            eat(z.re.to_bits());
            eat(z.im.to_bits());
        }
        h
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

// ---------------------------------------------------------------------------
// Pauli matrices
// ---------------------------------------------------------------------------

pub fn pauli_i() -> Matrix {
    Matrix::identity(2)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_fn(2, 2, |i, j| {
        if i != j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    })
}

pub fn pauli_y() -> Matrix {
    let mut m = Matrix::zeros(2, 2);
    m.set(0, 1, C64::new(0.0, -1.0));
    m.set(1, 0, C64::new(0.0, 1.0));
    m
}

pub fn pauli_z() -> Matrix {
    Matrix::from_diag(&[1.0, -1.0])
}

/// The single-qubit Paulis indexed I, X, Y, Z.
pub fn pauli(k: usize) -> Matrix {
    match k {
        0 => pauli_i(),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index {k} out of range"),
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted ascending and the unitary of column
/// eigenvectors, so that `m = V diag(w) V†`. The input is symmetrized as
/// `(M + M†)/2` before decomposition to wash out round-off asymmetry; inputs
/// whose Hermitian residual exceeds `VALIDATION_TOL * scale` are rejected.
pub fn eig_hermitian(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "eig_hermitian needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs_entry().max(1.0);
    if m.hermitian_residual() > VALIDATION_TOL * scale {
        return Err(Error::InvalidMatrix(format!(
            "matrix is not Hermitian (residual {:.3e})",
            m.hermitian_residual()
        )));
    }
    let n = m.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| (m.get(i, j) + m.get(j, i).conj()).scale(0.5));
    let mut v = Matrix::identity(n);

    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.get(i, j).norm_sqr();
            }
        }
        s.sqrt()
    };

    let fro = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        if off(&a) <= 1e-15 * fro {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a.get(p, q);
                let gn = g.norm();
                if gn <= 1e-300 {
                    continue;
                }
                let phase = g.scale(1.0 / gn);
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let tau = (beta - alpha) / (2.0 * gn);
                let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = -sign / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Update rows/columns p and q of A = U† A U with the
                // plane rotation U zeroing A[p,q].
                let cs = C64::new(c, 0.0);
                let s_phase = phase.scale(s);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    let new_kp = akp.scale(c) + akq * s_phase.conj();
                    let new_kq = akq.scale(c) - akp * s_phase;
                    a.set(k, p, new_kp);
                    a.set(p, k, new_kp.conj());
                    a.set(k, q, new_kq);
                    a.set(q, k, new_kq.conj());
                }
                let app = alpha * c * c + 2.0 * gn * c * s + beta * s * s;
                let aqq = alpha * s * s - 2.0 * gn * c * s + beta * c * c;
                a.set(p, p, C64::new(app, 0.0));
                a.set(q, q, C64::new(aqq, 0.0));
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * cs + vkq * s_phase.conj());
                    v.set(k, q, vkq * cs - vkp * s_phase);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let w: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vs = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((w, vs))
}

/// Functions applicable to a PSD matrix through its spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFn {
    Sqrt,
    /// Base-2 logarithm on the support; eigenvalues at or below
    /// `SUPPORT_CUTOFF * lambda_max` are treated as exactly zero and excluded.
    Log2,
}

/// Apply `f` to the eigenvalues of a PSD matrix, preserving the eigenbasis.
pub fn matrix_fn_psd(p: &Matrix, f: MatrixFn) -> Result<Matrix> {
    let (w, v) = eig_hermitian(p)?;
    let wmax = w.last().copied().unwrap_or(0.0).max(0.0);
    let min = w.first().copied().unwrap_or(0.0);
    if min < -VALIDATION_TOL * wmax.max(1.0) {
        return Err(Error::NotPsd(format!("minimum eigenvalue {min:.3e}")));
    }
    let cutoff = SUPPORT_CUTOFF * wmax;
    let fw: Vec<f64> = w
        .iter()
        .map(|&x| match f {
            MatrixFn::Sqrt => x.max(0.0).sqrt(),
            MatrixFn::Log2 => {
                if x <= cutoff {
                    0.0
                } else {
                    x.log2()
                }
            }
        })
        .collect();
    Ok(v.matmul(&Matrix::from_diag(&fw)).matmul(&v.dagger()))
}

/// Sum of singular values.
pub fn trace_norm(x: &Matrix) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "trace_norm needs a square matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let scale = x.max_abs_entry();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if x.hermitian_residual() <= VALIDATION_TOL * scale.max(1.0) {
        let (w, _) = eig_hermitian(x)?;
        return Ok(w.iter().map(|v| v.abs()).sum());
    }
    // Singular values via the eigenvalues of X†X.
    let gram = x.dagger().matmul(x);
    let (w, _) = eig_hermitian(&gram)?;
    Ok(w.iter().map(|&v| v.max(0.0).sqrt()).sum())
}

/// Kronecker product.
pub fn tensor(a: &Matrix, b: &Matrix) -> Matrix {
    a.kron(b)
}

// ---------------------------------------------------------------------------
// Domain types: density matrices and observables
// ---------------------------------------------------------------------------

/// A d x d complex Hermitian PSD unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: Matrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, positivity, and unit trace at `VALIDATION_TOL`.
    pub fn new(mat: Matrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidMatrix("density matrix must be square".into()));
        }
        let res = mat.hermitian_residual();
        if res > VALIDATION_TOL {
            return Err(Error::InvalidMatrix(format!(
                "density matrix not Hermitian (residual {res:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(Error::InvalidMatrix(format!("trace {tr} is not 1")));
        }
        let (w, _) = eig_hermitian(&mat)?;
        if w[0] < -VALIDATION_TOL {
            return Err(Error::NotPsd(format!("minimum eigenvalue {:.3e}", w[0])));
        }
        Ok(Self { dim: mat.rows(), mat })
    }

    /// Pure state from an (unnormalized) amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let d = amplitudes.len();
        let mat = Matrix::from_fn(d, d, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / C64::new(norm * norm, 0.0)
        });
        Self::new(mat)
    }

    /// `|k><k|` in dimension `d`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidArgument(format!("basis index {k} >= dim {d}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[k] = C64::new(1.0, 0.0);
        Self::pure(&amps)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { dim: d, mat: Matrix::identity(d).scale_re(1.0 / d as f64) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_mat(self) -> Matrix {
        self.mat
    }

    pub fn content_hash(&self) -> u64 {
        self.mat.content_hash()
    }

    /// Convex blend `(1-w)*self + w*other`.
    pub fn blend(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!("blend weight {w} outside [0,1]")));
        }
        if self.dim != other.dim {
            return Err(Error::InvalidArgument("blend dimension mismatch".into()));
        }
        DensityMatrix::new(&self.mat.scale_re(1.0 - w) + &other.mat.scale_re(w))
    }
}

/// A Hermitian matrix whose expectation values are being estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dim: usize,
    mat: Matrix,
}

impl Observable {
    pub fn new(mat: Matrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidMatrix("observable must be square".into()));
        }
        let res = mat.hermitian_residual();
        if res > VALIDATION_TOL * mat.max_abs_entry().max(1.0) {
            return Err(Error::InvalidMatrix(format!(
                "observable not Hermitian (residual {res:.3e})"
            )));
        }
        Ok(Self { dim: mat.rows(), mat })
    }

    pub fn z() -> Self {
        Self { dim: 2, mat: pauli_z() }
    }

    /// `Z` on every qubit of an `m`-qubit register.
    pub fn z_all(m: usize) -> Self {
        let mut mat = pauli_z();
        for _ in 1..m {
            mat = mat.kron(&pauli_z());
        }
        Self { dim: mat.rows(), mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    /// `Tr(A rho)`, real for Hermitian `A`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        self.mat.matmul(rho.mat()).trace().re
    }
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Requested rank structure of a random state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    FullRank,
    RankK(usize),
}

/// Seeded random density matrix: Haar-distributed pure states, or Wishart
/// (`G G† / Tr`) states of full or fixed rank.
pub fn random_state(d: usize, kind: StateKind, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("state dimension {d} < 2")));
    }
    let k = match kind {
        StateKind::Pure => {
            let amps: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
            return DensityMatrix::pure(&amps);
        }
        StateKind::FullRank => d,
        StateKind::RankK(k) => {
            if k == 0 || k > d {
                return Err(Error::InvalidArgument(format!("rank {k} outside 1..={d}")));
            }
            k
        }
    };
    let g = gaussian_matrix(d, k, rng);
    let w = g.matmul(&g.dagger());
    let tr = w.trace().re;
    DensityMatrix::new(w.scale_re(1.0 / tr))
}

/// Haar-random unitary via modified Gram-Schmidt on a complex Ginibre matrix
/// (positive-diagonal normalization makes the distribution Haar).
pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    assert!(d >= 1);
    let g = gaussian_matrix(d, d, rng);
    // Columns of g, orthonormalized twice for stability.
    let mut cols: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                for i in 0..d {
                    let c = cols[k][i];
                    cols[j][i] -= proj * c;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Random Hermitian matrix with Gaussian entries, `(G + G†)/2`.
pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = gaussian_matrix(d, d, rng);
    (&g + &g.dagger()).scale_re(0.5)
}

/// Least-squares straight line `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need matching x/y lists of length >= 2".into()));
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InvalidArgument("degenerate abscissae in linear fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    Ok((slope, (sy - slope * sx) / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reconstruct(w: &[f64], v: &Matrix) -> Matrix {
        v.matmul(&Matrix::from_diag(w)).matmul(&v.dagger())
    }

    #[test]
    fn eig_identity() {
        let (w, _v) = eig_hermitian(&Matrix::identity(2)).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_pauli_z_spectrum() {
        let (w, v) = eig_hermitian(&pauli_z()).unwrap();
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
        let r = (&reconstruct(&w, &v) - &pauli_z()).max_abs_entry();
        assert!(r < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(eig_hermitian(&m), Err(Error::InvalidMatrix(_))));
        assert!(matches!(eig_hermitian(&Matrix::zeros(2, 3)), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn eig_reconstructs_random_8x8() {
        let mut rng = derive_rng(11, 0);
        let m = random_hermitian(8, &mut rng);
        let (w, v) = eig_hermitian(&m).unwrap();
        assert!((&reconstruct(&w, &v) - &m).max_abs_entry() < 1e-9);
        let unitarity = (&v.dagger().matmul(&v) - &Matrix::identity(8)).max_abs_entry();
        assert!(unitarity < 1e-9);
    }

    #[test]
    fn eig_reconstruction_residual_many_dims() {
        // 500 instances across d in {2,4,8,16}.
        for (stream, &d) in [2usize, 4, 8, 16].iter().enumerate() {
            let mut rng = derive_rng(12, stream as u64);
            for _ in 0..125 {
                let m = random_hermitian(d, &mut rng);
                let (w, v) = eig_hermitian(&m).unwrap();
                assert!((&reconstruct(&w, &v) - &m).max_abs_entry() < 1e-9);
            }
        }
    }

    #[test]
    fn sqrt_of_half_identity() {
        let m = matrix_fn_psd(&Matrix::identity(2).scale_re(0.5), MatrixFn::Sqrt).unwrap();
        let expected = Matrix::identity(2).scale_re(1.0 / 2.0_f64.sqrt());
        assert!((&m - &expected).max_abs_entry() < 1e-12);
    }

    #[test]
    fn log2_of_quarter_identity() {
        let m = matrix_fn_psd(&Matrix::identity(4).scale_re(0.25), MatrixFn::Log2).unwrap();
        let expected = Matrix::identity(4).scale_re(-2.0);
        assert!((&m - &expected).max_abs_entry() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        for stream in 0..200u64 {
            let mut rng = derive_rng(13, stream);
            let d = [2, 4, 8][(stream % 3) as usize];
            let p = random_state(d, StateKind::FullRank, &mut rng).unwrap();
            let s = matrix_fn_psd(p.mat(), MatrixFn::Sqrt).unwrap();
            assert!((&s.matmul(&s) - p.mat()).max_abs_entry() < 1e-8);
        }
    }

    #[test]
    fn matrix_fn_rejects_indefinite() {
        assert!(matches!(matrix_fn_psd(&pauli_z(), MatrixFn::Sqrt), Err(Error::NotPsd(_))));
    }

    #[test]
    fn trace_norm_examples() {
        assert_abs_diff_eq!(trace_norm(&pauli_z()).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_norm(&Matrix::zeros(3, 3)).unwrap(), 0.0);
        let m = &DensityMatrix::basis_state(2, 0).unwrap().into_mat()
            - &Matrix::identity(2).scale_re(0.5);
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-12);
        assert!(trace_norm(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn trace_norm_non_hermitian_matches_svd() {
        // Compare against singular values of a matrix with known SVD:
        // diag(3, 4) times a permutation has singular values {3, 4}.
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 1, C64::new(3.0, 0.0));
        m.set(1, 0, C64::new(4.0, 0.0));
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 7.0, epsilon = 1e-9);
    }

    #[test]
    fn tensor_examples() {
        let i4 = tensor(&Matrix::identity(2), &Matrix::identity(2));
        assert!((&i4 - &Matrix::identity(4)).max_abs_entry() < 1e-15);
        let zz = tensor(&pauli_z(), &pauli_z());
        let expected = Matrix::from_diag(&[1.0, -1.0, -1.0, 1.0]);
        assert!((&zz - &expected).max_abs_entry() < 1e-15);
    }

    #[test]
    fn random_state_contracts() {
        let mut rng = derive_rng(1, 0);
        let rho = random_state(2, StateKind::Pure, &mut rng).unwrap();
        let (w, _) = eig_hermitian(rho.mat()).unwrap();
        assert!(w[0].abs() < 1e-10, "pure state has a zero eigenvalue");
        assert_abs_diff_eq!(rho.mat().trace().re, 1.0, epsilon = 1e-10);

        let mut rng = derive_rng(7, 0);
        let rho = random_state(4, StateKind::FullRank, &mut rng).unwrap();
        let (w, _) = eig_hermitian(rho.mat()).unwrap();
        assert!(w[0] > 0.0);

        let mut rng = derive_rng(7, 1);
        let rho = random_state(4, StateKind::RankK(2), &mut rng).unwrap();
        let (w, _) = eig_hermitian(rho.mat()).unwrap();
        assert!(w[0].abs() < 1e-10 && w[1].abs() < 1e-10 && w[2] > 1e-8);

        assert!(random_state(4, StateKind::RankK(5), &mut rng).is_err());
        assert!(random_state(1, StateKind::Pure, &mut rng).is_err());
    }

    #[test]
    fn random_state_deterministic() {
        let a = random_state(4, StateKind::FullRank, &mut derive_rng(99, 3)).unwrap();
        let b = random_state(4, StateKind::FullRank, &mut derive_rng(99, 3)).unwrap();
        assert_eq!(a.mat().data(), b.mat().data());
    }

    #[test]
    fn random_unitary_contracts() {
        let u1 = random_unitary(1, &mut derive_rng(5, 0));
        assert_abs_diff_eq!(u1.get(0, 0).norm(), 1.0, epsilon = 1e-12);

        let u = random_unitary(4, &mut derive_rng(5, 1));
        let r = (&u.dagger().matmul(&u) - &Matrix::identity(4)).max_abs_entry();
        assert!(r < 1e-9);

        let v = random_unitary(4, &mut derive_rng(5, 1));
        assert_eq!(u.data(), v.data());
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        let z = Matrix::zeros(3, 3).expm();
        assert!((&z - &Matrix::identity(3)).max_abs_entry() < 1e-15);
        let d = Matrix::from_diag(&[1.0, -2.0]).expm();
        assert_abs_diff_eq!(d.get(0, 0).re, 1.0_f64.exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.get(1, 1).re, (-2.0_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Matrix::identity(2)).is_err()); // trace 2
        assert!(DensityMatrix::new(pauli_z().scale_re(0.5)).is_err()); // not PSD
        let ok = DensityMatrix::new(Matrix::identity(2).scale_re(0.5)).unwrap();
        assert_eq!(ok.dim(), 2);
    }

    fn small_c64() -> impl Strategy<Value = C64> {
        ((-10i16..=10i16), (-10i16..=10i16))
            .prop_map(|(a, b)| C64::new(f64::from(a) / 4.0, f64::from(b) / 4.0))
    }

    fn mat2() -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(small_c64(), 4)
            .prop_map(|v| Matrix::from_vec_row_major(2, 2, v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kron_mixed_product(a in mat2(), b in mat2(), c in mat2(), d in mat2()) {
            let lhs = a.kron(&b).matmul(&c.kron(&d));
            let rhs = a.matmul(&c).kron(&b.matmul(&d));
            prop_assert!((&lhs - &rhs).max_abs_entry() < 1e-12);
        }

        #[test]
        fn dagger_reverses_products(a in mat2(), b in mat2()) {
            let lhs = a.matmul(&b).dagger();
            let rhs = b.dagger().matmul(&a.dagger());
            prop_assert!((&lhs - &rhs).max_abs_entry() < 1e-12);
        }
    }
}
