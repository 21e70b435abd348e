//! Concrete error-mitigation protocols and the Monte Carlo harness measuring
//! empirical sample requirements, bias, and standard deviation.
//!
//! The simulation backend is exact density-matrix evolution (registers up to
//! six qubits); randomness enters only at the terminal measurement and at the
//! Pauli insertions of probabilistic error cancellation. This isolates the
//! statistical behavior of the estimators from simulation error.

use num_complex::Complex64 as C64;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{AccuracyTarget, Flag, LayeredSpec};
use crate::channels::{KrausChannel, Superoperator};
use crate::numkit::{
    derive_rng, eig_hermitian, linear_fit, pauli, random_unitary, DensityMatrix, Matrix,
    Observable,
};
use crate::{Error, Result};

/// 95% normal quantile used by the Wilson lower confidence bound.
const WILSON_Z: f64 = 1.959963984540054;

// ---------------------------------------------------------------------------
// Layered circuits
// ---------------------------------------------------------------------------

/// A resolved noisy layered circuit: unitaries fixed, per-site depolarizing
/// strengths fixed (each at least the floor declared by the [`LayeredSpec`]).
#[derive(Debug, Clone)]
pub struct LayeredCircuit {
    qubits: usize,
    layers: usize,
    dim: usize,
    gamma_floor: f64,
    unitaries: Vec<Matrix>,
    noise_strengths: Vec<Vec<f64>>,
    sandwiches: Option<Vec<(KrausChannel, KrausChannel)>>,
    /// Lifted single-qubit Paulis, indexed [qubit][pauli].
    site_paulis: Vec<[Matrix; 4]>,
    /// Layers whose unitary is the identity are skipped during evolution.
    identity_layers: Vec<bool>,
}

impl LayeredCircuit {
    /// Resolve a spec: missing unitaries are drawn Haar-randomly from
    /// `unitary_seed`; noise strengths default to the floor everywhere.
    pub fn from_spec(spec: &LayeredSpec, unitary_seed: u64) -> Result<Self> {
        let d = spec.dim();
        let unitaries = match &spec.unitaries {
            Some(us) => us.clone(),
            None => (0..spec.layers)
                .map(|l| random_unitary(d, &mut derive_rng(unitary_seed, l as u64)))
                .collect(),
        };
        let noise = vec![vec![spec.gamma; spec.qubits]; spec.layers];
        let mut site_paulis = Vec::with_capacity(spec.qubits);
        for m in 0..spec.qubits {
            let lift = |p: usize| -> Matrix {
                let mut acc = Matrix::identity(1);
                for q in 0..spec.qubits {
                    let factor = if q == m { pauli(p) } else { Matrix::identity(2) };
                    acc = acc.kron(&factor);
                }
                acc
            };
            site_paulis.push([lift(0), lift(1), lift(2), lift(3)]);
        }
        let identity_layers = unitaries
            .iter()
            .map(|u| (u - &Matrix::identity(d)).max_abs_entry() == 0.0)
            .collect();
        Ok(Self {
            qubits: spec.qubits,
            layers: spec.layers,
            dim: d,
            gamma_floor: spec.gamma,
            unitaries,
            noise_strengths: noise,
            sandwiches: spec.sandwiches.clone(),
            site_paulis,
            identity_layers,
        })
    }

    /// Override the per-site noise strengths; each must be at least the floor.
    pub fn with_noise_strengths(mut self, strengths: Vec<Vec<f64>>) -> Result<Self> {
        if strengths.len() != self.layers
            || strengths.iter().any(|row| row.len() != self.qubits)
        {
            return Err(Error::InvalidArgument("noise strength matrix must be layers x qubits".into()));
        }
        for row in &strengths {
            for &g in row {
                if g < self.gamma_floor - 1e-15 || g > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "site strength {g} outside [{}, 1]",
                        self.gamma_floor
                    )));
                }
            }
        }
        self.noise_strengths = strengths;
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma_floor(&self) -> f64 {
        self.gamma_floor
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    pub fn noise_strengths(&self) -> &[Vec<f64>] {
        &self.noise_strengths
    }

    fn conjugate(u: &Matrix, rho: &Matrix) -> Matrix {
        u.matmul(rho).matmul(&u.dagger())
    }

    /// Exact per-site depolarizing update
    /// `rho <- (1-g) rho + g (I_m/2 (x) Tr_m rho)`, done with index
    /// arithmetic: entries mixing different values of the site bit shrink by
    /// `(1-g)`, matching entries average with their bit-flipped partner.
    fn apply_depolarizing_site(&self, rho: &Matrix, site: usize, gamma: f64) -> Matrix {
        if gamma == 0.0 {
            return rho.clone();
        }
        let d = self.dim;
        let mask = 1usize << (self.qubits - 1 - site);
        Matrix::from_fn(d, d, |i, j| {
            let keep = rho.get(i, j).scale(1.0 - gamma);
            if (i & mask) != (j & mask) {
                keep
            } else {
                let partner = rho.get(i ^ mask, j ^ mask);
                keep + (rho.get(i, j) + partner).scale(gamma / 2.0)
            }
        })
    }

    /// `Tr[A U_L ... U_1 rho U_1† ... U_L†]`.
    pub fn ideal_expectation(&self, rho_in: &DensityMatrix, a: &Observable) -> Result<f64> {
        if rho_in.dim() != self.dim || a.dim() != self.dim {
            return Err(Error::InvalidArgument("circuit/state/observable dimension mismatch".into()));
        }
        let mut rho = rho_in.mat().clone();
        for u in &self.unitaries {
            rho = Self::conjugate(u, &rho);
        }
        Ok(a.mat().matmul(&rho).trace().re)
    }

    /// The ideal-circuit image of an input state.
    pub fn ideal_state(&self, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
        if rho_in.dim() != self.dim {
            return Err(Error::InvalidArgument("circuit/state dimension mismatch".into()));
        }
        let mut rho = rho_in.mat().clone();
        for u in &self.unitaries {
            rho = Self::conjugate(u, &rho);
        }
        DensityMatrix::new(rho)
    }

    fn noisy_evolve_matrix(&self, rho_in: &Matrix, scale: f64) -> Matrix {
        let mut rho = rho_in.clone();
        for l in 0..self.layers {
            if let Some(sw) = &self.sandwiches {
                rho = sw[l].0.apply_matrix(&rho);
            }
            if !self.identity_layers[l] {
                rho = Self::conjugate(&self.unitaries[l], &rho);
            }
            if let Some(sw) = &self.sandwiches {
                rho = sw[l].1.apply_matrix(&rho);
            }
            for m in 0..self.qubits {
                let g = (self.noise_strengths[l][m] * scale).min(1.0);
                rho = self.apply_depolarizing_site(&rho, m, g);
            }
        }
        rho
    }

    /// Exact noisy output state, with every per-site strength multiplied by
    /// `scale` (clamped at 1) for noise-amplified runs.
    pub fn noisy_state(&self, rho_in: &DensityMatrix, scale: f64) -> Result<DensityMatrix> {
        if rho_in.dim() != self.dim {
            return Err(Error::InvalidArgument("circuit/state dimension mismatch".into()));
        }
        if scale < 1.0 {
            return Err(Error::InvalidArgument(format!("noise scale {scale} below 1")));
        }
        DensityMatrix::new(self.noisy_evolve_matrix(rho_in.mat(), scale))
    }

    /// The effective noise channel relating the noisy output to the ideal
    /// state (noisy circuit composed with the inverse ideal circuit), as a
    /// superoperator.
    pub fn effective_noise_superop(&self) -> Superoperator {
        let mut u_total = Matrix::identity(self.dim);
        for u in &self.unitaries {
            u_total = u.matmul(&u_total);
        }
        let u_dag = u_total.dagger();
        Superoperator::from_map(self.dim, |basis| {
            let undone = Self::conjugate(&u_dag, basis);
            self.noisy_evolve_matrix(&undone, 1.0)
        })
    }

    /// Kraus form of the effective noise channel (small registers only).
    pub fn effective_noise_channel(&self) -> Result<KrausChannel> {
        self.effective_noise_superop().to_kraus(1e-7)
    }
}

// ---------------------------------------------------------------------------
// Measurement sampling
// ---------------------------------------------------------------------------

/// Precomputed eigenbasis of an observable for repeated measurement sampling.
#[derive(Debug, Clone)]
pub struct MeasurementSampler {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl MeasurementSampler {
    pub fn new(a: &Observable) -> Result<Self> {
        let (w, v) = eig_hermitian(a.mat())?;
        Ok(Self { eigenvalues: w, eigenvectors: v })
    }

    /// Outcome probabilities `<v_i| rho |v_i>`, clamped and renormalized.
    pub fn probabilities(&self, rho: &Matrix) -> Vec<f64> {
        let d = self.eigenvalues.len();
        let mut probs = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                let mut inner = C64::new(0.0, 0.0);
                for c in 0..d {
                    inner += rho.get(r, c) * self.eigenvectors.get(c, i);
                }
                acc += self.eigenvectors.get(r, i).conj() * inner;
            }
            probs.push(acc.re.max(0.0));
        }
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in &mut probs {
                *p /= total;
            }
        }
        probs
    }

    pub fn draw(&self, probs: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.eigenvalues[i];
            }
        }
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

/// IID draws of eigenvalues of `a` with the Born probabilities of `rho`.
pub fn sample_measurement(
    rho: &DensityMatrix,
    a: &Observable,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    if rho.dim() != a.dim() {
        return Err(Error::InvalidArgument("state/observable dimension mismatch".into()));
    }
    let sampler = MeasurementSampler::new(a)?;
    let probs = sampler.probabilities(rho.mat());
    Ok((0..shots).map(|_| sampler.draw(&probs, rng)).collect())
}

// ---------------------------------------------------------------------------
// Probabilistic error cancellation
// ---------------------------------------------------------------------------

/// Quasiprobability decomposition of the inverse single-qubit depolarizing
/// channel over Pauli conjugations.
#[derive(Debug, Clone, Copy)]
pub struct PecDecomposition {
    /// Coefficients for I, X, Y, Z conjugation.
    pub coefficients: [f64; 4],
    /// One-norm of the coefficients (the sampling-overhead base).
    pub one_norm: f64,
}

impl PecDecomposition {
    /// Sampling probabilities `|c_P| / one_norm` and signs.
    fn sampling_table(&self) -> ([f64; 4], [f64; 4]) {
        let mut probs = [0.0; 4];
        let mut signs = [1.0; 4];
        for k in 0..4 {
            probs[k] = self.coefficients[k].abs() / self.one_norm;
            signs[k] = if self.coefficients[k] < 0.0 { -1.0 } else { 1.0 };
        }
        (probs, signs)
    }
}

/// Solve the inverse-depolarizing linear system in the Pauli transfer
/// representation: `c_I = (4-g)/(4(1-g))`, `c_X = c_Y = c_Z = -g/(4(1-g))`,
/// one-norm `(2+g)/(2(1-g))`.
pub fn pec_decomposition(gamma: f64) -> Result<PecDecomposition> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Noninvertible(format!(
            "depolarizing channel with strength {gamma} has no bounded inverse"
        )));
    }
    let c_i = (4.0 - gamma) / (4.0 * (1.0 - gamma));
    let c_p = -gamma / (4.0 * (1.0 - gamma));
    Ok(PecDecomposition {
        coefficients: [c_i, c_p, c_p, c_p],
        one_norm: (2.0 + gamma) / (2.0 * (1.0 - gamma)),
    })
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

/// Zero-noise-extrapolation fit models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Polynomial (Lagrange) extrapolation through all points.
    Richardson,
    /// Least-squares straight line.
    Linear,
    /// Two-parameter exponential `a * exp(b s)`.
    Exponential,
}

/// Zero-noise-extrapolation settings.
#[derive(Debug, Clone)]
pub struct ZneSpec {
    pub scale_factors: Vec<f64>,
    pub fit: FitModel,
}

impl ZneSpec {
    pub fn new(scale_factors: Vec<f64>, fit: FitModel) -> Result<Self> {
        if scale_factors.len() < 2 {
            return Err(Error::InvalidArgument("need at least two scale factors".into()));
        }
        if (scale_factors[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("first scale factor must be 1".into()));
        }
        if scale_factors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("scale factors must be strictly increasing".into()));
        }
        Ok(Self { scale_factors, fit })
    }
}

/// Mitigation protocol selector.
#[derive(Debug, Clone)]
pub enum Protocol {
    /// Unmitigated sampling of the noisy state.
    None,
    /// Probabilistic error cancellation; `assumed_gamma` overrides the
    /// circuit's true strengths (mismatch yields a biased estimator and is
    /// flagged).
    Pec { assumed_gamma: Option<f64> },
    Zne(ZneSpec),
}

/// Extrapolate measured expectations to zero noise scale. Exposed separately
/// so exact (noise-free-statistics) inputs can be fed straight in.
pub fn zne_extrapolate(
    scales: &[f64],
    values: &[f64],
    fit: FitModel,
) -> Result<(f64, Vec<Flag>)> {
    if scales.len() != values.len() || scales.len() < 2 {
        return Err(Error::FitDegenerate("need matching scale/value lists of length >= 2".into()));
    }
    match fit {
        FitModel::Richardson => {
            let mut est = 0.0;
            for i in 0..scales.len() {
                let mut weight = 1.0;
                for j in 0..scales.len() {
                    if i != j {
                        weight *= scales[j] / (scales[j] - scales[i]);
                    }
                }
                est += weight * values[i];
            }
            Ok((est, vec![]))
        }
        FitModel::Linear => {
            let (_, intercept) = linear_fit(scales, values)?;
            Ok((intercept, vec![]))
        }
        FitModel::Exponential => {
            let sign = values[0].signum();
            let magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            let same_sign = values.iter().all(|v| v.signum() == sign && *v != 0.0);
            let monotone = magnitudes.windows(2).all(|w| w[1] < w[0]);
            if !same_sign || !monotone {
                let (_, intercept) = linear_fit(scales, values)?;
                return Ok((intercept, vec![Flag::FitDegenerate]));
            }
            let logs: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
            let (_, log_intercept) = linear_fit(scales, &logs)?;
            Ok((sign * log_intercept.exp(), vec![]))
        }
    }
}

/// A protocol bound to a fixed (circuit, input, observable) configuration
/// with all per-run invariants precomputed.
pub struct ProtocolRunner<'a> {
    circuit: &'a LayeredCircuit,
    rho_in: &'a DensityMatrix,
    sampler: MeasurementSampler,
    kind: RunnerKind,
    flags: Vec<Flag>,
}

enum RunnerKind {
    Baseline {
        probs: Vec<f64>,
    },
    Pec {
        /// Per-site sampling tables [layer][qubit].
        tables: Vec<Vec<([f64; 4], [f64; 4])>>,
        /// Product of one-norms over all sites.
        weight: f64,
    },
    Zne {
        spec: ZneSpec,
        probs_per_scale: Vec<Vec<f64>>,
    },
}

impl<'a> ProtocolRunner<'a> {
    pub fn new(
        circuit: &'a LayeredCircuit,
        rho_in: &'a DensityMatrix,
        a: &Observable,
        protocol: &Protocol,
    ) -> Result<Self> {
        if rho_in.dim() != circuit.dim() || a.dim() != circuit.dim() {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let sampler = MeasurementSampler::new(a)?;
        let mut flags = Vec::new();
        let kind = match protocol {
            Protocol::None => {
                let state = circuit.noisy_evolve_matrix(rho_in.mat(), 1.0);
                RunnerKind::Baseline { probs: sampler.probabilities(&state) }
            }
            Protocol::Pec { assumed_gamma } => {
                let mut tables = Vec::with_capacity(circuit.layers());
                let mut weight = 1.0;
                for l in 0..circuit.layers() {
                    let mut row = Vec::with_capacity(circuit.qubits());
                    for m in 0..circuit.qubits() {
                        let true_gamma = circuit.noise_strengths()[l][m];
                        let g = assumed_gamma.unwrap_or(true_gamma);
                        if (g - true_gamma).abs() > 1e-12 && !flags.contains(&Flag::AssumedNoiseMismatch) {
                            flags.push(Flag::AssumedNoiseMismatch);
                        }
                        let dec = pec_decomposition(g)?;
                        weight *= dec.one_norm;
                        row.push(dec.sampling_table());
                    }
                    tables.push(row);
                }
                RunnerKind::Pec { tables, weight }
            }
            Protocol::Zne(spec) => {
                let probs_per_scale = spec
                    .scale_factors
                    .iter()
                    .map(|&s| {
                        let state = circuit.noisy_evolve_matrix(rho_in.mat(), s);
                        sampler.probabilities(&state)
                    })
                    .collect();
                RunnerKind::Zne { spec: spec.clone(), probs_per_scale }
            }
        };
        Ok(Self { circuit, rho_in, sampler, kind, flags })
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    /// One estimate from `n` samples of the noisy device.
    pub fn run(&self, n: u64, rng: &mut ChaCha8Rng) -> Result<(f64, Vec<Flag>)> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        match &self.kind {
            RunnerKind::Baseline { probs } => {
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += self.sampler.draw(probs, rng);
                }
                Ok((acc / n as f64, self.flags.clone()))
            }
            RunnerKind::Pec { tables, weight } => {
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += self.pec_trajectory(tables, *weight, rng);
                }
                Ok((acc / n as f64, self.flags.clone()))
            }
            RunnerKind::Zne { spec, probs_per_scale } => {
                let k = spec.scale_factors.len() as u64;
                let base = n / k;
                let remainder = n % k;
                let mut means = Vec::with_capacity(spec.scale_factors.len());
                for (idx, probs) in probs_per_scale.iter().enumerate() {
                    let shots = base + if idx == 0 { remainder } else { 0 };
                    if shots == 0 {
                        return Err(Error::InvalidArgument(format!(
                            "{n} samples cannot cover {k} noise scales"
                        )));
                    }
                    let mut acc = 0.0;
                    for _ in 0..shots {
                        acc += self.sampler.draw(probs, rng);
                    }
                    means.push(acc / shots as f64);
                }
                let (est, mut fl) = zne_extrapolate(&spec.scale_factors, &means, spec.fit)?;
                let mut all = self.flags.clone();
                all.append(&mut fl);
                Ok((est, all))
            }
        }
    }

    /// One PEC trajectory: exact noise, sampled Pauli corrections, one
    /// terminal shot, sign-and-norm weighting.
    fn pec_trajectory(
        &self,
        tables: &[Vec<([f64; 4], [f64; 4])>],
        weight: f64,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let c = self.circuit;
        let mut rho = self.rho_in.mat().clone();
        let mut sign = 1.0;
        for l in 0..c.layers() {
            if let Some(sw) = &c.sandwiches {
                rho = sw[l].0.apply_matrix(&rho);
            }
            if !c.identity_layers[l] {
                rho = LayeredCircuit::conjugate(&c.unitaries[l], &rho);
            }
            if let Some(sw) = &c.sandwiches {
                rho = sw[l].1.apply_matrix(&rho);
            }
            for m in 0..c.qubits() {
                rho = c.apply_depolarizing_site(&rho, m, c.noise_strengths()[l][m]);
                let (probs, signs) = &tables[l][m];
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = 3;
                for k in 0..4 {
                    acc += probs[k];
                    if u < acc {
                        chosen = k;
                        break;
                    }
                }
                if chosen != 0 {
                    rho = LayeredCircuit::conjugate(&c.site_paulis[m][chosen], &rho);
                }
                sign *= signs[chosen];
            }
        }
        let probs = self.sampler.probabilities(&rho);
        sign * weight * self.sampler.draw(&probs, rng)
    }
}

/// Unbiased PEC estimate from `n` weighted single-shot trajectories.
pub fn run_pec(
    circuit: &LayeredCircuit,
    rho_in: &DensityMatrix,
    a: &Observable,
    n: u64,
    assumed_gamma: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let runner = ProtocolRunner::new(circuit, rho_in, a, &Protocol::Pec { assumed_gamma })?;
    Ok(runner.run(n, rng)?.0)
}

/// ZNE estimate: split `n` over the scale factors, extrapolate to zero.
pub fn run_zne(
    circuit: &LayeredCircuit,
    rho_in: &DensityMatrix,
    a: &Observable,
    n: u64,
    spec: &ZneSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<Flag>)> {
    let runner = ProtocolRunner::new(circuit, rho_in, a, &Protocol::Zne(spec.clone()))?;
    runner.run(n, rng)
}

// ---------------------------------------------------------------------------
// Estimator statistics
// ---------------------------------------------------------------------------

/// Empirical behavior of a protocol at fixed sample count.
#[derive(Debug, Clone)]
pub struct EstimatorStats {
    pub mean: f64,
    pub bias: f64,
    pub std_dev: f64,
    pub success_prob: f64,
    pub trials: u64,
    pub n_per_trial: u64,
    pub ideal_value: f64,
    pub flags: Vec<Flag>,
}

impl EstimatorStats {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mean": crate::bounds::json_f64(self.mean),
            "bias": crate::bounds::json_f64(self.bias),
            "std_dev": crate::bounds::json_f64(self.std_dev),
            "success_prob": self.success_prob,
            "trials": self.trials,
            "n_per_trial": self.n_per_trial,
            "ideal_value": self.ideal_value,
            "flags": self.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>(),
        })
    }
}

/// Run the protocol `trials` times with `n` samples each; report mean, bias
/// against the exact ideal expectation, sample standard deviation, and the
/// fraction of trials within `delta` of the truth.
///
/// Trials use independent derived streams `stream_base + t` and fan out in
/// parallel; results are merged in trial order, so output is deterministic.
pub fn estimator_stats(
    circuit: &LayeredCircuit,
    rho_in: &DensityMatrix,
    a: &Observable,
    protocol: &Protocol,
    n: u64,
    trials: u64,
    delta: f64,
    master_seed: u64,
    stream_base: u64,
) -> Result<EstimatorStats> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let ideal = circuit.ideal_expectation(rho_in, a)?;
    let runner = ProtocolRunner::new(circuit, rho_in, a, protocol)?;
    let estimates: Result<Vec<(f64, Vec<Flag>)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = derive_rng(master_seed, stream_base + t);
            runner.run(n, &mut rng)
        })
        .collect();
    let estimates = estimates?;
    let mean = estimates.iter().map(|(e, _)| e).sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        estimates.iter().map(|(e, _)| (e - mean) * (e - mean)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let successes = estimates.iter().filter(|(e, _)| (e - ideal).abs() <= delta).count();
    let mut flags: Vec<Flag> = Vec::new();
    for (_, fl) in &estimates {
        for f in fl {
            if !flags.contains(f) {
                flags.push(*f);
            }
        }
    }
    if trials < 30 {
        flags.push(Flag::LowTrials);
    }
    Ok(EstimatorStats {
        mean,
        bias: mean - ideal,
        std_dev: var.sqrt(),
        success_prob: successes as f64 / trials as f64,
        trials,
        n_per_trial: n,
        ideal_value: ideal,
        flags,
    })
}

// ---------------------------------------------------------------------------
// Empirical sample requirement
// ---------------------------------------------------------------------------

/// 95% Wilson lower confidence bound on a binomial success probability.
pub fn wilson_lower_bound(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let center = p + z2 / (2.0 * n);
    let margin = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - margin) / (1.0 + z2 / n)).max(0.0)
}

/// One probed sample count on the search curve.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub n: u64,
    pub success_prob: f64,
    pub wilson_lb: f64,
    pub bias: f64,
    pub std_dev: f64,
}

impl CurvePoint {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "success_prob": self.success_prob,
            "wilson_lb": self.wilson_lb,
            "bias": crate::bounds::json_f64(self.bias),
            "std_dev": crate::bounds::json_f64(self.std_dev),
        })
    }
}

/// How the sample-requirement search ended.
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    /// Minimal certified sample count.
    Certified { n_hat: u64 },
    /// Success probability stuck below target up to the ceiling.
    Plateau { best_success: f64, n_max: u64 },
}

/// Result of [`empirical_sample_requirement`].
#[derive(Debug, Clone)]
pub struct SampleRequirement {
    pub outcome: SearchOutcome,
    pub curve: Vec<CurvePoint>,
}

impl SampleRequirement {
    /// The certified count, or the search-failure error.
    pub fn require_certified(&self) -> Result<u64> {
        match &self.outcome {
            SearchOutcome::Certified { n_hat } => Ok(*n_hat),
            SearchOutcome::Plateau { best_success, n_max } => {
                Err(Error::Unachievable { plateau: *best_success, n_max: *n_max })
            }
        }
    }
}

/// Doubling-then-bisection search for the smallest per-run sample count
/// whose success probability is certified at `1 - epsilon` via the Wilson
/// 95% lower bound over `trials` repetitions.
pub fn empirical_sample_requirement(
    circuit: &LayeredCircuit,
    rho_in: &DensityMatrix,
    a: &Observable,
    protocol: &Protocol,
    target: &AccuracyTarget,
    trials: u64,
    n_max: u64,
    master_seed: u64,
) -> Result<SampleRequirement> {
    if trials == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("trials and n_max must be positive".into()));
    }
    // ZNE cannot run with fewer samples than noise scales.
    let min_n = match protocol {
        Protocol::Zne(spec) => spec.scale_factors.len() as u64,
        _ => 1,
    };
    if min_n > n_max {
        return Err(Error::InvalidArgument(format!(
            "n_max {n_max} below the protocol minimum {min_n}"
        )));
    }
    let mut curve = Vec::new();
    let mut probe_index: u64 = 0;
    let mut probe = |n: u64, curve: &mut Vec<CurvePoint>| -> Result<bool> {
        let stats = estimator_stats(
            circuit,
            rho_in,
            a,
            protocol,
            n,
            trials,
            target.delta,
            master_seed,
            probe_index * trials,
        )?;
        probe_index += 1;
        let successes = (stats.success_prob * trials as f64).round() as u64;
        let wlb = wilson_lower_bound(successes, trials);
        curve.push(CurvePoint {
            n,
            success_prob: stats.success_prob,
            wilson_lb: wlb,
            bias: stats.bias,
            std_dev: stats.std_dev,
        });
        Ok(wlb >= 1.0 - target.epsilon)
    };

    // Doubling phase.
    let mut n = min_n;
    let mut last_failed = min_n - 1;
    let mut first_certified = None;
    loop {
        if probe(n, &mut curve)? {
            first_certified = Some(n);
            break;
        }
        last_failed = n;
        if n >= n_max {
            break;
        }
        n = (n * 2).min(n_max);
    }
    let Some(hi) = first_certified else {
        let best = curve.iter().map(|c| c.success_prob).fold(0.0, f64::max);
        return Ok(SampleRequirement {
            outcome: SearchOutcome::Plateau { best_success: best, n_max },
            curve,
        });
    };

    // Bisection phase between the last failure and the first certification.
    let mut lo = last_failed;
    let mut hi = hi;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut curve)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SampleRequirement { outcome: SearchOutcome::Certified { n_hat: hi }, curve })
}

/// Max of the per-entry requirements over a grid of (input state,
/// observable) targets; each entry must certify.
pub fn empirical_sample_requirement_grid(
    circuit: &LayeredCircuit,
    grid: &[(DensityMatrix, Observable)],
    protocol: &Protocol,
    target: &AccuracyTarget,
    trials: u64,
    n_max: u64,
    master_seed: u64,
) -> Result<(u64, Vec<SampleRequirement>)> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty target grid".into()));
    }
    let mut results = Vec::with_capacity(grid.len());
    let mut n_hat = 0u64;
    for (idx, (rho_in, a)) in grid.iter().enumerate() {
        let req = empirical_sample_requirement(
            circuit,
            rho_in,
            a,
            protocol,
            target,
            trials,
            n_max,
            master_seed.wrapping_add(idx as u64 * 0x9e37_79b9_7f4a_7c15),
        )?;
        n_hat = n_hat.max(req.require_certified()?);
        results.push(req);
    }
    Ok((n_hat, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::LayeredSpec;
    use approx::assert_abs_diff_eq;

    fn identity_circuit(qubits: usize, layers: usize, gamma: f64) -> LayeredCircuit {
        let d = 1usize << qubits;
        let spec = LayeredSpec::new(qubits, layers, gamma)
            .unwrap()
            .with_unitaries(vec![Matrix::identity(d); layers])
            .unwrap();
        LayeredCircuit::from_spec(&spec, 0).unwrap()
    }

    fn zero_state(qubits: usize) -> DensityMatrix {
        DensityMatrix::basis_state(1 << qubits, 0).unwrap()
    }

    #[test]
    fn ideal_expectation_examples() {
        let c = identity_circuit(1, 3, 0.2);
        assert_abs_diff_eq!(
            c.ideal_expectation(&zero_state(1), &Observable::z()).unwrap(),
            1.0,
            epsilon = 1e-12
        );

        let spec = LayeredSpec::new(1, 1, 0.2).unwrap().with_unitaries(vec![pauli(1)]).unwrap();
        let x_circ = LayeredCircuit::from_spec(&spec, 0).unwrap();
        assert_abs_diff_eq!(
            x_circ.ideal_expectation(&zero_state(1), &Observable::z()).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ideal_expectation_matches_dense_oracle() {
        let spec = LayeredSpec::new(2, 3, 0.1).unwrap();
        let c = LayeredCircuit::from_spec(&spec, 42).unwrap();
        let rho = zero_state(2);
        let a = Observable::z_all(2);
        // Independent oracle: accumulate the full circuit unitary first.
        let mut total = Matrix::identity(4);
        for u in c.unitaries() {
            total = u.matmul(&total);
        }
        let evolved = total.matmul(rho.mat()).matmul(&total.dagger());
        let expected = a.mat().matmul(&evolved).trace().re;
        assert_abs_diff_eq!(
            c.ideal_expectation(&rho, &a).unwrap(),
            expected,
            epsilon = 1e-10
        );
    }

    #[test]
    fn noisy_state_single_layer_example() {
        let c = identity_circuit(1, 1, 0.4);
        let out = c.noisy_state(&zero_state(1), 1.0).unwrap();
        assert_abs_diff_eq!(out.mat().get(0, 0).re, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(out.mat().get(1, 1).re, 0.2, epsilon = 1e-12);
        assert!(c.noisy_state(&zero_state(1), 0.5).is_err());
    }

    #[test]
    fn noisy_state_relative_entropy_decays_with_depth() {
        let m = 2usize;
        let gamma = 0.2;
        let mixed = DensityMatrix::maximally_mixed(1 << m);
        for layers in [1usize, 3, 5] {
            let spec = LayeredSpec::new(m, layers, gamma).unwrap();
            let c = LayeredCircuit::from_spec(&spec, 7).unwrap();
            let out = c.noisy_state(&zero_state(m), 1.0).unwrap();
            let s = crate::divergences::relative_entropy(&out, &mixed).unwrap();
            let cap = (1.0 - gamma).powi(2 * layers as i32) * m as f64;
            assert!(s <= cap + 1e-9, "S = {s} exceeds {cap} at {layers} layers");
        }
    }

    #[test]
    fn effective_channel_matches_direct_evolution() {
        let spec = LayeredSpec::new(1, 2, 0.3).unwrap();
        let c = LayeredCircuit::from_spec(&spec, 9).unwrap();
        let eff = c.effective_noise_channel().unwrap();
        let mut rng = derive_rng(10, 0);
        let rho = crate::numkit::random_state(2, crate::numkit::StateKind::Pure, &mut rng).unwrap();
        // Effective channel applied to the ideal output equals the noisy output.
        let ideal_out = c.ideal_state(&rho).unwrap();
        let via_channel = eff.apply(&ideal_out).unwrap();
        let direct = c.noisy_state(&rho, 1.0).unwrap();
        assert!(
            (via_channel.mat() - direct.mat()).max_abs_entry() < 1e-8,
            "effective channel disagrees with direct evolution"
        );
    }

    #[test]
    fn sample_measurement_examples() {
        let mut rng = derive_rng(11, 0);
        let outs =
            sample_measurement(&zero_state(1), &Observable::z(), 100, &mut rng).unwrap();
        assert!(outs.iter().all(|&x| (x - 1.0).abs() < 1e-12));

        let mixed = DensityMatrix::maximally_mixed(2);
        let outs = sample_measurement(&mixed, &Observable::z(), 100_000, &mut rng).unwrap();
        let mean = outs.iter().sum::<f64>() / outs.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean} too far from 0");

        let identity_obs = Observable::new(Matrix::identity(2)).unwrap();
        let outs = sample_measurement(&mixed, &identity_obs, 50, &mut rng).unwrap();
        assert!(outs.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pec_decomposition_values() {
        let dec = pec_decomposition(0.0).unwrap();
        assert_abs_diff_eq!(dec.coefficients[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dec.one_norm, 1.0, epsilon = 1e-15);

        let dec = pec_decomposition(0.1).unwrap();
        assert_abs_diff_eq!(dec.one_norm, 2.1 / 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.coefficients[0], 3.9 / 3.6, epsilon = 1e-12);

        assert!(matches!(pec_decomposition(1.0), Err(Error::Noninvertible(_))));
    }

    #[test]
    fn pec_signed_mixture_inverts_depolarizing() {
        for gamma in [0.1, 0.3, 0.6] {
            let dec = pec_decomposition(gamma).unwrap();
            let dep = KrausChannel::depolarizing(gamma).unwrap();
            let mut rng = derive_rng(12, 0);
            for _ in 0..5 {
                let rho =
                    crate::numkit::random_state(2, crate::numkit::StateKind::FullRank, &mut rng)
                        .unwrap();
                let noisy = dep.apply_matrix(rho.mat());
                let mut recovered = Matrix::zeros(2, 2);
                for k in 0..4 {
                    let conj = pauli(k).matmul(&noisy).matmul(&pauli(k).dagger());
                    recovered = &recovered + &conj.scale_re(dec.coefficients[k]);
                }
                assert!((&recovered - rho.mat()).max_abs_entry() < 1e-10);
            }
        }
    }

    #[test]
    fn pec_unbiased_on_identity_circuit() {
        let c = identity_circuit(1, 2, 0.2);
        let rho = zero_state(1);
        let z = Observable::z();
        let ideal = c.ideal_expectation(&rho, &z).unwrap();
        let reps = 200u64;
        let n = 2_000u64;
        let mut estimates = Vec::new();
        for t in 0..reps {
            let mut rng = derive_rng(13, t);
            estimates.push(run_pec(&c, &rho, &z, n, None, &mut rng).unwrap());
        }
        let mean = estimates.iter().sum::<f64>() / reps as f64;
        let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - ideal).abs() <= 3.0 * se + 1e-9,
            "PEC bias {} exceeds 3 standard errors {}",
            mean - ideal,
            se
        );
    }

    #[test]
    fn pec_estimates_ideal_value_through_strong_noise() {
        let spec = LayeredSpec::new(1, 1, 0.5)
            .unwrap()
            .with_unitaries(vec![Matrix::identity(2)])
            .unwrap();
        let c = LayeredCircuit::from_spec(&spec, 0).unwrap();
        // Each trajectory outcome is +-1 weighted by the one-norm; the mean
        // still lands on the ideal value despite 50% depolarizing noise.
        let mut rng = derive_rng(14, 0);
        let est = run_pec(&c, &zero_state(1), &Observable::z(), 20_000, None, &mut rng).unwrap();
        assert!((est - 1.0).abs() < 0.1, "estimate {est}");
    }

    #[test]
    fn pec_weight_envelope() {
        let gamma = 0.2;
        let layers = 3usize;
        let c = identity_circuit(1, layers, gamma);
        let rho = zero_state(1);
        let z = Observable::z();
        let runner =
            ProtocolRunner::new(&c, &rho, &z, &Protocol::Pec { assumed_gamma: None }).unwrap();
        let envelope = pec_decomposition(gamma).unwrap().one_norm.powi(layers as i32);
        let mut rng = derive_rng(15, 0);
        for _ in 0..200 {
            let (est, _) = runner.run(1, &mut rng).unwrap();
            assert!(est.abs() <= envelope + 1e-9, "trajectory weight {est} outside envelope");
        }
        // The per-sample standard deviation stays inside the one-norm
        // envelope (up to sampling error of the variance estimate).
        let n = 64u64;
        let stats =
            estimator_stats(&c, &rho, &z, &Protocol::Pec { assumed_gamma: None }, n, 300, 0.2, 15, 0)
                .unwrap();
        let per_sample = stats.std_dev * (n as f64).sqrt();
        assert!(
            per_sample <= envelope * 1.2,
            "per-sample deviation {per_sample} above envelope {envelope}"
        );
        // Bias is recomputable from the echoed mean and ideal value.
        assert_eq!(stats.bias, stats.mean - stats.ideal_value);
    }

    #[test]
    fn zne_extrapolation_forms() {
        // Richardson with scales (1, 2) is 2 E(1) - E(2).
        let (est, fl) = zne_extrapolate(&[1.0, 2.0], &[0.8, 0.65], FitModel::Richardson).unwrap();
        assert_abs_diff_eq!(est, 2.0 * 0.8 - 0.65, epsilon = 1e-12);
        assert!(fl.is_empty());

        // Exponential fit is exact for exactly exponential data.
        let truth = 0.9;
        let rate: f64 = 0.3;
        let scales = [1.0, 1.5, 2.0, 3.0];
        let values: Vec<f64> = scales.iter().map(|s| truth * (-rate * s).exp()).collect();
        let (est, fl) = zne_extrapolate(&scales, &values, FitModel::Exponential).unwrap();
        assert_abs_diff_eq!(est, truth, epsilon = 1e-8);
        assert!(fl.is_empty());

        // Non-monotone data degrades to the linear fallback.
        let (_, fl) =
            zne_extrapolate(&[1.0, 2.0, 3.0], &[0.5, 0.7, 0.4], FitModel::Exponential).unwrap();
        assert_eq!(fl, vec![Flag::FitDegenerate]);
    }

    #[test]
    fn zne_exact_expectations_recover_ideal() {
        // Under strength-times-scale noise amplification the Z expectation of
        // an identity circuit is (1 - s*gamma)^L: a degree-L polynomial in
        // the scale. Richardson extrapolation through L+1 exact nodes is
        // therefore exact, and an exponential fit carries model bias.
        let layers = 4usize;
        let c = identity_circuit(1, layers, 0.1);
        let rho = zero_state(1);
        let z = Observable::z();
        let scales: Vec<f64> = (1..=layers as u64 + 1).map(|k| k as f64).collect();
        let exact: Vec<f64> = scales
            .iter()
            .map(|&s| z.expectation(&c.noisy_state(&rho, s).unwrap()))
            .collect();
        let (est, fl) = zne_extrapolate(&scales, &exact, FitModel::Richardson).unwrap();
        assert!(fl.is_empty());
        assert_abs_diff_eq!(est, 1.0, epsilon = 1e-8);

        // The exponential fit applied to the same exact data lands closer to
        // the ideal value than the unmitigated expectation but not exactly on it.
        let (exp_est, _) = zne_extrapolate(&scales, &exact, FitModel::Exponential).unwrap();
        assert!((exp_est - 1.0).abs() < (exact[0] - 1.0).abs());
    }

    #[test]
    fn zne_run_reduces_noise_bias() {
        let c = identity_circuit(1, 3, 0.15);
        let rho = zero_state(1);
        let z = Observable::z();
        let noisy_bias = (z.expectation(&c.noisy_state(&rho, 1.0).unwrap()) - 1.0).abs();
        let spec = ZneSpec::new(vec![1.0, 2.0, 3.0, 4.0], FitModel::Richardson).unwrap();
        let mut rng = derive_rng(16, 0);
        let (est, _) = run_zne(&c, &rho, &z, 400_000, &spec, &mut rng).unwrap();
        assert!(
            (est - 1.0).abs() < noisy_bias / 2.0,
            "ZNE estimate {est} no better than unmitigated bias {noisy_bias}"
        );
    }

    #[test]
    fn zne_spec_validation() {
        assert!(ZneSpec::new(vec![1.0], FitModel::Linear).is_err());
        assert!(ZneSpec::new(vec![2.0, 3.0], FitModel::Linear).is_err());
        assert!(ZneSpec::new(vec![1.0, 1.0], FitModel::Linear).is_err());
        assert!(ZneSpec::new(vec![1.0, 1.5, 2.0], FitModel::Richardson).is_ok());
    }

    #[test]
    fn estimator_stats_baseline() {
        // Noise floor gamma must exceed 0; measure the exact bias of the
        // unmitigated protocol against the known noisy expectation.
        let c = identity_circuit(1, 2, 0.3);
        let rho = zero_state(1);
        let z = Observable::z();
        let noisy_expect = z.expectation(&c.noisy_state(&rho, 1.0).unwrap());
        let stats = estimator_stats(&c, &rho, &z, &Protocol::None, 4_000, 200, 0.05, 17, 0)
            .unwrap();
        let exact_bias = noisy_expect - 1.0;
        let se = stats.std_dev / (stats.trials as f64).sqrt();
        assert!(
            (stats.bias - exact_bias).abs() <= 4.0 * se + 1e-9,
            "measured bias {} too far from exact {}",
            stats.bias,
            exact_bias
        );
    }

    #[test]
    fn estimator_stats_deterministic_and_flagged() {
        let c = identity_circuit(1, 1, 0.2);
        let rho = zero_state(1);
        let z = Observable::z();
        let a = estimator_stats(&c, &rho, &z, &Protocol::None, 100, 20, 0.1, 3, 0).unwrap();
        let b = estimator_stats(&c, &rho, &z, &Protocol::None, 100, 20, 0.1, 3, 0).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.success_prob, b.success_prob);
        assert!(a.flags.contains(&Flag::LowTrials));

        let mismatch = estimator_stats(
            &c,
            &rho,
            &z,
            &Protocol::Pec { assumed_gamma: Some(0.3) },
            100,
            40,
            0.1,
            3,
            0,
        )
        .unwrap();
        assert!(mismatch.flags.contains(&Flag::AssumedNoiseMismatch));
    }

    #[test]
    fn wilson_bound_behaves() {
        assert!(wilson_lower_bound(400, 400) > 0.99);
        assert!(wilson_lower_bound(360, 400) < 0.9);
        assert!(wilson_lower_bound(0, 400) < 0.01);
        assert_eq!(wilson_lower_bound(0, 0), 0.0);
        // 380/400 = 0.95 certifies a 0.9 target.
        assert!(wilson_lower_bound(380, 400) >= 0.9);
    }

    #[test]
    fn sample_requirement_deterministic_noiseless() {
        // Zero effective noise via scale floor: use a tiny gamma so the
        // baseline on an eigenstate is deterministic anyway.
        let spec = LayeredSpec::new(1, 1, 0.5)
            .unwrap()
            .with_unitaries(vec![Matrix::identity(2)])
            .unwrap();
        let c = LayeredCircuit::from_spec(&spec, 0)
            .unwrap()
            .with_noise_strengths(vec![vec![0.5]])
            .unwrap();
        // Observable I has a deterministic outcome regardless of noise.
        let identity_obs = Observable::new(Matrix::identity(2)).unwrap();
        let req = empirical_sample_requirement(
            &c,
            &zero_state(1),
            &identity_obs,
            &Protocol::None,
            &AccuracyTarget::new(0.1, 0.1).unwrap(),
            400,
            1 << 12,
            19,
        )
        .unwrap();
        assert_eq!(req.require_certified().unwrap(), 1);
    }

    #[test]
    fn sample_requirement_unachievable_for_biased_baseline() {
        let c = identity_circuit(1, 2, 0.3);
        // Noisy expectation 0.49 vs ideal 1.0; delta 0.2 unreachable.
        let req = empirical_sample_requirement(
            &c,
            &zero_state(1),
            &Observable::z(),
            &Protocol::None,
            &AccuracyTarget::new(0.2, 0.1).unwrap(),
            100,
            256,
            20,
        )
        .unwrap();
        assert!(matches!(req.outcome, SearchOutcome::Plateau { .. }));
        assert!(req.require_certified().is_err());
    }

    #[test]
    fn sample_requirement_certifies_pec_and_dominates_failure_point() {
        let c = identity_circuit(1, 2, 0.2);
        let req = empirical_sample_requirement(
            &c,
            &zero_state(1),
            &Observable::z(),
            &Protocol::Pec { assumed_gamma: None },
            &AccuracyTarget::new(0.3, 0.1).unwrap(),
            200,
            1 << 14,
            21,
        )
        .unwrap();
        let n_hat = req.require_certified().unwrap();
        assert!(n_hat > 1, "PEC with nontrivial noise cannot certify at n = 1");
        // Determinism of the whole search.
        let req2 = empirical_sample_requirement(
            &c,
            &zero_state(1),
            &Observable::z(),
            &Protocol::Pec { assumed_gamma: None },
            &AccuracyTarget::new(0.3, 0.1).unwrap(),
            200,
            1 << 14,
            21,
        )
        .unwrap();
        assert_eq!(n_hat, req2.require_certified().unwrap());
        assert_eq!(req.curve.len(), req2.curve.len());
    }
}
