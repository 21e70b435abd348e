//! Quantum channels: Kraus representations, superoperators, Choi matrices,
//! and Liouvillian generators with their semigroups.
//!
//! Kraus sets grow multiplicatively under composition, so deep compositions
//! should go through [`Superoperator`] (fixed `d^2 x d^2` size) and convert
//! back to Kraus form only on demand via the Choi eigendecomposition.
//!
//! Tensor factors are big-endian: the first factor is the most significant
//! qubit.

use num_complex::Complex64 as C64;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use crate::numkit::{
    eig_hermitian, pauli, trace_norm, DensityMatrix, Matrix, Observable, SUPPORT_CUTOFF,
};
use crate::{Error, Result};

/// Trace-preservation tolerance for channel constructors.
pub const TP_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// KrausChannel
// ---------------------------------------------------------------------------

/// A CPTP map as a finite list of Kraus operators.
///
/// Complete positivity holds by construction for any Kraus list (the Choi
/// matrix is a sum of outer products); trace preservation is validated at
/// construction.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<Matrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<Matrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus list".into()));
        }
        let d = kraus[0].rows();
        if kraus.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(Error::InvalidMatrix(
                "Kraus operators must be square and equal-dimensional".into(),
            ));
        }
        let ch = Self { dim: d, kraus };
        let res = ch.trace_preservation_residual();
        if res > TP_TOL {
            return Err(Error::InvalidArgument(format!(
                "Kraus set is not trace preserving (residual {res:.3e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self { dim: d, kraus: vec![Matrix::identity(d)] }
    }

    /// Single-qubit depolarizing noise of strength `p`: with probability `p`
    /// the state is replaced by the maximally mixed state.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing strength {p} outside [0,1]"
            )));
        }
        let mut kraus = vec![pauli(0).scale_re((1.0 - 3.0 * p / 4.0).sqrt())];
        if p > 0.0 {
            for k in 1..4 {
                kraus.push(pauli(k).scale_re((p / 4.0).sqrt()));
            }
        }
        Self::new(kraus)
    }

    /// Qubit stochastic Pauli noise with error probabilities `(qx, qy, qz)`.
    pub fn stochastic_pauli(qx: f64, qy: f64, qz: f64) -> Result<Self> {
        let q = [qx, qy, qz];
        if q.iter().any(|&v| v < 0.0) || qx + qy + qz > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "invalid Pauli error probabilities ({qx}, {qy}, {qz})"
            )));
        }
        let mut kraus = Vec::new();
        let q0 = (1.0 - qx - qy - qz).max(0.0);
        if q0 > 0.0 {
            kraus.push(pauli(0).scale_re(q0.sqrt()));
        }
        for (i, &qi) in q.iter().enumerate() {
            if qi > 0.0 {
                kraus.push(pauli(i + 1).scale_re(qi.sqrt()));
            }
        }
        Self::new(kraus)
    }

    /// Depolarizing channel with an arbitrary full-rank fixed point:
    /// `tau -> (1-gamma) tau + gamma * fixed`.
    pub fn global_depolarizing(gamma: f64, fixed: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0,1]")));
        }
        let (w, v) = eig_hermitian(fixed.mat())?;
        if w[0] <= SUPPORT_CUTOFF {
            return Err(Error::InvalidArgument(format!(
                "fixed point must be full rank (minimum eigenvalue {:.3e})",
                w[0]
            )));
        }
        let d = fixed.dim();
        let mut kraus = Vec::new();
        if gamma < 1.0 {
            kraus.push(Matrix::identity(d).scale_re((1.0 - gamma).sqrt()));
        }
        if gamma > 0.0 {
            // Replace-by-fixed part: Kraus set sqrt(gamma * w_i) |v_i><e_j|.
            for i in 0..d {
                let coeff = (gamma * w[i]).sqrt();
                for j in 0..d {
                    let mut k = Matrix::zeros(d, d);
                    for r in 0..d {
                        k.set(r, j, v.get(r, i) * C64::new(coeff, 0.0));
                    }
                    kraus.push(k);
                }
            }
        }
        Self::new(kraus)
    }

    /// Channel `rho -> U rho U†` for a unitary `U`.
    pub fn unitary(u: &Matrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidMatrix("unitary must be square".into()));
        }
        let res = (&u.dagger().matmul(u) - &Matrix::identity(u.rows())).max_abs_entry();
        if res > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary (residual {res:.3e})"
            )));
        }
        Ok(Self { dim: u.rows(), kraus: vec![u.clone()] })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    /// `second ∘ first` with the pairwise-product Kraus set. No truncation is
    /// applied; the Kraus count multiplies.
    pub fn compose(second: &Self, first: &Self) -> Result<Self> {
        if second.dim != first.dim {
            return Err(Error::InvalidArgument(format!(
                "compose dimension mismatch: {} vs {}",
                second.dim, first.dim
            )));
        }
        let mut kraus = Vec::with_capacity(second.kraus.len() * first.kraus.len());
        for k2 in &second.kraus {
            for k1 in &first.kraus {
                kraus.push(k2.matmul(k1));
            }
        }
        Ok(Self { dim: first.dim, kraus })
    }

    /// Tensor product channel acting on the combined register.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(ka.kron(kb));
            }
        }
        Self { dim: a.dim * b.dim, kraus }
    }

    /// Apply without validating the output (hot paths).
    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &k.matmul(m).matmul(&k.dagger());
        }
        out
    }

    /// Apply to a state; the output is re-validated.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "channel dim {} does not match state dim {}",
                self.dim,
                rho.dim()
            )));
        }
        DensityMatrix::new(self.apply_matrix(rho.mat()))
    }

    /// Residual of `sum K† K = I`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            acc = &acc + &k.dagger().matmul(k);
        }
        (&acc - &Matrix::identity(self.dim)).max_abs_entry()
    }

    /// The dual map with Kraus set `{K†}`; trace preserving exactly when the
    /// original channel is unital.
    pub fn adjoint(&self) -> AdjointMap {
        AdjointMap { dim: self.dim, kraus: self.kraus.iter().map(Matrix::dagger).collect() }
    }

    /// Choi matrix `J = sum_k vec(K_k) vec(K_k)†` (row-major vectorization;
    /// equals `d * (E ⊗ id)(|Omega><Omega|)` for the maximally entangled pair).
    pub fn choi(&self) -> Matrix {
        let d2 = self.dim * self.dim;
        let mut j = Matrix::zeros(d2, d2);
        for k in &self.kraus {
            let v = k.vec_row_major();
            for a in 0..d2 {
                if v[a].norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..d2 {
                    let cur = j.get(a, b);
                    j.set(a, b, cur + v[a] * v[b].conj());
                }
            }
        }
        j
    }

    /// Trace-preservation and complete-positivity diagnostics.
    pub fn cptp_report(&self) -> Result<CptpReport> {
        let (w, _) = eig_hermitian(&self.choi())?;
        Ok(CptpReport {
            trace_preservation_residual: self.trace_preservation_residual(),
            min_choi_eigenvalue: w[0],
        })
    }

    /// Does the channel preserve the maximally mixed state?
    pub fn is_unital(&self) -> bool {
        let mixed = Matrix::identity(self.dim).scale_re(1.0 / self.dim as f64);
        let out = self.apply_matrix(&mixed);
        trace_norm(&(&out - &mixed)).map(|t| t <= 1e-9).unwrap_or(false)
    }

    /// `|| E(sigma) - sigma ||_1`.
    pub fn fixed_point_residual(&self, sigma: &DensityMatrix) -> f64 {
        let out = self.apply_matrix(sigma.mat());
        trace_norm(&(&out - sigma.mat())).unwrap_or(f64::INFINITY)
    }

    /// Pauli transfer matrix `R[i][j] = Tr(P_i E(P_j)) / 2` for qubit channels.
    pub fn pauli_transfer_matrix(&self) -> Result<[[f64; 4]; 4]> {
        if self.dim != 2 {
            return Err(Error::InvalidArgument(format!(
                "Pauli transfer matrix needs a qubit channel, dim = {}",
                self.dim
            )));
        }
        let mut r = [[0.0; 4]; 4];
        for j in 0..4 {
            let out = self.apply_matrix(&pauli(j));
            for (i, row) in r.iter_mut().enumerate() {
                row[j] = pauli(i).matmul(&out).trace().re / 2.0;
            }
        }
        Ok(r)
    }
}

/// Diagnostics from [`KrausChannel::cptp_report`].
#[derive(Debug, Clone, Copy)]
pub struct CptpReport {
    pub trace_preservation_residual: f64,
    pub min_choi_eigenvalue: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.trace_preservation_residual <= TP_TOL && self.min_choi_eigenvalue >= -TP_TOL
    }
}

/// The dual of a channel; completely positive but not necessarily trace
/// preserving.
#[derive(Debug, Clone)]
pub struct AdjointMap {
    dim: usize,
    kraus: Vec<Matrix>,
}

impl AdjointMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &k.matmul(m).matmul(&k.dagger());
        }
        out
    }

    /// Residual of `sum K K† = I` for the original channel, i.e. trace
    /// preservation of the dual; zero iff the original channel is unital.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            acc = &acc + &k.dagger().matmul(k);
        }
        (&acc - &Matrix::identity(self.dim)).max_abs_entry()
    }
}

// ---------------------------------------------------------------------------
// NoiseEnsemble
// ---------------------------------------------------------------------------

/// The set of effective noise channels a protocol runs against.
#[derive(Debug, Clone)]
pub struct NoiseEnsemble {
    channels: Vec<KrausChannel>,
}

impl NoiseEnsemble {
    pub fn new(channels: Vec<KrausChannel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidArgument("empty noise ensemble".into()));
        }
        let d = channels[0].dim();
        if channels.iter().any(|c| c.dim() != d) {
            return Err(Error::InvalidArgument("ensemble members must share a dimension".into()));
        }
        Ok(Self { channels })
    }

    pub fn dim(&self) -> usize {
        self.channels[0].dim()
    }

    pub fn members(&self) -> &[KrausChannel] {
        &self.channels
    }
}

// ---------------------------------------------------------------------------
// Superoperator
// ---------------------------------------------------------------------------

/// A linear map on operators stored as a `d^2 x d^2` matrix acting on
/// row-major vectorized matrices. Composition is matrix multiplication, so
/// deep circuits stay at fixed size.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    mat: Matrix,
}

impl Superoperator {
    pub fn identity(d: usize) -> Self {
        Self { dim: d, mat: Matrix::identity(d * d) }
    }

    pub fn from_kraus(ch: &KrausChannel) -> Self {
        let d = ch.dim();
        let mut mat = Matrix::zeros(d * d, d * d);
        for k in ch.kraus() {
            mat = &mat + &k.kron(&k.conj());
        }
        Self { dim: d, mat }
    }

    /// Build column-by-column from an arbitrary linear action on matrices.
    pub fn from_map(d: usize, mut f: impl FnMut(&Matrix) -> Matrix) -> Self {
        let d2 = d * d;
        let mut mat = Matrix::zeros(d2, d2);
        for col in 0..d2 {
            let mut basis = Matrix::zeros(d, d);
            basis.set(col / d, col % d, C64::new(1.0, 0.0));
            let out = f(&basis).vec_row_major();
            for (row, v) in out.into_iter().enumerate() {
                mat.set(row, col, v);
            }
        }
        Self { dim: d, mat }
    }

    pub fn from_matrix(dim: usize, mat: Matrix) -> Result<Self> {
        if mat.rows() != dim * dim || mat.cols() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "superoperator for dim {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(Self { dim, mat })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        let v = self.mat.matvec(&m.vec_row_major());
        Matrix::from_vec_row_major(self.dim, self.dim, v).expect("shape preserved")
    }

    /// `second ∘ first`.
    pub fn compose(second: &Self, first: &Self) -> Result<Self> {
        if second.dim != first.dim {
            return Err(Error::InvalidArgument("superoperator dimension mismatch".into()));
        }
        Ok(Self { dim: first.dim, mat: second.mat.matmul(&first.mat) })
    }

    /// Reshuffle into the Choi matrix: `J[(a,i),(a',j)] = S[(a,a'),(i,j)]`.
    pub fn choi(&self) -> Matrix {
        let d = self.dim;
        Matrix::from_fn(d * d, d * d, |r, c| {
            let (a, i) = (r / d, r % d);
            let (ap, j) = (c / d, c % d);
            self.mat.get(a * d + ap, i * d + j)
        })
    }

    /// Recover a Kraus set through the Choi eigendecomposition. Eigenvalues
    /// below `SUPPORT_CUTOFF` times the largest are discarded; an eigenvalue
    /// below `-cp_tol` means the map is not completely positive.
    pub fn to_kraus(&self, cp_tol: f64) -> Result<KrausChannel> {
        let choi = self.choi();
        let sym = (&choi + &choi.dagger()).scale_re(0.5);
        let (w, v) = eig_hermitian(&sym)?;
        let wmax = w.last().copied().unwrap_or(0.0).max(0.0);
        if w[0] < -cp_tol * wmax.max(1.0) {
            return Err(Error::NotCompletelyPositive(format!(
                "Choi minimum eigenvalue {:.3e}",
                w[0]
            )));
        }
        let d = self.dim;
        let cutoff = SUPPORT_CUTOFF * wmax;
        let mut kraus = Vec::new();
        for (idx, &wi) in w.iter().enumerate() {
            if wi <= cutoff {
                continue;
            }
            let coeff = wi.sqrt();
            let col: Vec<C64> = (0..d * d).map(|r| v.get(r, idx) * C64::new(coeff, 0.0)).collect();
            kraus.push(Matrix::from_vec_row_major(d, d, col)?);
        }
        if kraus.is_empty() {
            return Err(Error::NotCompletelyPositive("Choi matrix is numerically zero".into()));
        }
        KrausChannel::new(kraus)
    }
}

// ---------------------------------------------------------------------------
// Liouvillians and semigroups
// ---------------------------------------------------------------------------

/// A Markovian generator together with the Hamiltonian and inverse
/// temperature declaring its Gibbs fixed point.
#[derive(Debug, Clone)]
pub struct LiouvillianSpec {
    dim: usize,
    superop: Superoperator,
    hamiltonian: Observable,
    beta: f64,
}

impl LiouvillianSpec {
    /// Validates trace annihilation (exactly, via the diagonal-row column
    /// sums of the superoperator) and that the declared Gibbs state is a
    /// fixed point within 1e-8.
    pub fn new(superop: Superoperator, hamiltonian: Observable, beta: f64) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "inverse temperature {beta} must be positive"
            )));
        }
        let d = superop.dim();
        if hamiltonian.dim() != d {
            return Err(Error::InvalidArgument("Hamiltonian dimension mismatch".into()));
        }
        // Tr(L(tau)) = 0 for all tau iff each column's diagonal entries sum to 0.
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..d {
                s += superop.mat().get(a * d + a, col);
            }
            worst = worst.max(s.norm());
        }
        if worst > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "generator does not annihilate the trace (residual {worst:.3e})"
            )));
        }
        let spec = Self { dim: d, superop, hamiltonian, beta };
        let gibbs = spec.gibbs_state()?;
        let residual = spec.apply_matrix(gibbs.mat()).max_abs_entry();
        if residual > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "declared Gibbs state is not a fixed point (residual {residual:.3e})"
            )));
        }
        Ok(spec)
    }

    /// Assemble the generator from a Hamiltonian and jump operators:
    /// `L(rho) = -i[H, rho] + sum_j (L_j rho L_j† - {L_j† L_j, rho}/2)`.
    pub fn from_gkls(hamiltonian: &Observable, jumps: &[Matrix], beta: f64) -> Result<Self> {
        let d = hamiltonian.dim();
        let h = hamiltonian.mat().clone();
        let sop = Superoperator::from_map(d, |m| {
            let mut out = (&h.matmul(m) - &m.matmul(&h)).scale(C64::new(0.0, -1.0));
            for l in jumps {
                let ldl = l.dagger().matmul(l);
                out = &out + &l.matmul(m).matmul(&l.dagger());
                out = &out - &(&ldl.matmul(m) + &m.matmul(&ldl)).scale_re(0.5);
            }
            out
        });
        Self::new(sop, hamiltonian.clone(), beta)
    }

    /// Detailed-balance thermal qubit generator for `H = Z`: decay toward
    /// the Gibbs ground state at `rate_down`, excitation suppressed by the
    /// Boltzmann factor, plus optional pure dephasing.
    pub fn thermal_qubit(beta: f64, rate_down: f64, rate_dephase: f64) -> Result<Self> {
        if rate_down <= 0.0 || rate_dephase < 0.0 {
            return Err(Error::InvalidArgument("thermal rates must be positive".into()));
        }
        // H = Z has energies +1 (|0>) and -1 (|1>): |1> is the ground state.
        let mut lower = Matrix::zeros(2, 2);
        lower.set(1, 0, C64::new(1.0, 0.0));
        let mut raise = Matrix::zeros(2, 2);
        raise.set(0, 1, C64::new(1.0, 0.0));
        let rate_up = rate_down * (-2.0 * beta).exp();
        let mut jumps = vec![lower.scale_re(rate_down.sqrt()), raise.scale_re(rate_up.sqrt())];
        if rate_dephase > 0.0 {
            jumps.push(pauli(3).scale_re(rate_dephase.sqrt()));
        }
        Self::from_gkls(&Observable::z(), &jumps, beta)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &Observable {
        &self.hamiltonian
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    /// Action of the generator on a matrix.
    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        self.superop.apply_matrix(m)
    }

    /// The Gibbs state `exp(-beta H) / Z`.
    pub fn gibbs_state(&self) -> Result<DensityMatrix> {
        gibbs_state(&self.hamiltonian, self.beta)
    }

    /// The channel `exp(t L)` recovered in Kraus form.
    pub fn semigroup_step(&self, t: f64) -> Result<KrausChannel> {
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative evolution time {t}")));
        }
        let step = self.superop.mat().scale_re(t).expm();
        Superoperator::from_matrix(self.dim, step)?.to_kraus(1e-7)
    }
}

/// `exp(-beta H) / Tr exp(-beta H)`.
pub fn gibbs_state(hamiltonian: &Observable, beta: f64) -> Result<DensityMatrix> {
    let (w, v) = eig_hermitian(hamiltonian.mat())?;
    // Shift by the minimum energy so the exponentials stay in range.
    let w0 = w[0];
    let boltzmann: Vec<f64> = w.iter().map(|&e| (-beta * (e - w0)).exp()).collect();
    let z: f64 = boltzmann.iter().sum();
    let probs: Vec<f64> = boltzmann.iter().map(|b| b / z).collect();
    DensityMatrix::new(v.matmul(&Matrix::from_diag(&probs)).matmul(&v.dagger()))
}

// ---------------------------------------------------------------------------
// Random channels
// ---------------------------------------------------------------------------

/// Haar-random CPTP channel with `kraus_count` Kraus operators, obtained by
/// slicing a Haar isometry.
pub fn random_channel(d: usize, kraus_count: usize, rng: &mut ChaCha8Rng) -> Result<KrausChannel> {
    if kraus_count == 0 {
        return Err(Error::InvalidArgument("kraus_count must be positive".into()));
    }
    let big = crate::numkit::random_unitary(d * kraus_count, rng);
    // Columns 0..d of the big unitary form an isometry C^d -> C^{dk};
    // its d x d blocks are a Kraus set.
    let mut kraus = Vec::with_capacity(kraus_count);
    for b in 0..kraus_count {
        kraus.push(Matrix::from_fn(d, d, |i, j| big.get(b * d + i, j)));
    }
    KrausChannel::new(kraus)
}

/// Random mixture of Haar unitaries; always unital.
pub fn random_mixed_unitary(d: usize, terms: usize, rng: &mut ChaCha8Rng) -> Result<KrausChannel> {
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be positive".into()));
    }
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let kraus = weights
        .iter()
        .map(|&w| crate::numkit::random_unitary(d, rng).scale_re(w.sqrt()))
        .collect();
    KrausChannel::new(kraus)
}
