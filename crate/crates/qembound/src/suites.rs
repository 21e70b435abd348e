//! Randomized verification suites: information-theoretic inequalities,
//! contraction claims for named noise families, and the minimum-eigenvalue
//! floor of noisy layered circuits.
//!
//! Each suite runs a deterministic number of seeded random instances and
//! reports the check count, the violation count, and the worst signed excess
//! (positive means the inequality was broken by that much beyond its slack).
//! Samples fan out in parallel over derived streams; merging is a pure
//! sum/max, so reports are reproducible bit for bit.

use rayon::prelude::*;
use serde_json::json;
use std::f64::consts::LN_2;

use crate::bounds::LayeredSpec;
use crate::channels::{random_channel, random_mixed_unitary, KrausChannel};
use crate::contraction::{depolarizing_rel_ent_contraction, pauli_renyi2_contraction};
use crate::divergences::{
    fidelity, min_eigenvalue, observable_std_dev, purified_distance, relative_entropy,
    renyi2_sandwiched, trace_distance,
};
use crate::mitigation::LayeredCircuit;
use crate::numkit::{
    derive_rng, random_hermitian, random_state, random_unitary, DensityMatrix, Observable,
    StateKind,
};
use crate::{Error, Result};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

/// Outcome of one randomized suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub violations: u64,
    /// Worst signed excess over the slack across all checks; negative when
    /// every check held with margin.
    pub max_excess: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "suite": self.name,
            "checks": self.checks,
            "violations": self.violations,
            "max_excess": crate::bounds::json_f64(self.max_excess),
        })
    }
}

/// Signed excesses from one instance: `lhs - rhs - slack` per check.
type InstanceFn = dyn Fn(u64) -> Result<Vec<f64>> + Sync;

fn run_suite(name: &str, instances: u64, f: &InstanceFn) -> Result<SuiteReport> {
    let results: Result<Vec<Vec<f64>>> = (0..instances).into_par_iter().map(f).collect();
    let mut checks = 0u64;
    let mut violations = 0u64;
    let mut max_excess = f64::NEG_INFINITY;
    for inst in results? {
        for excess in inst {
            checks += 1;
            if excess > 0.0 {
                violations += 1;
            }
            if excess > max_excess {
                max_excess = excess;
            }
        }
    }
    Ok(SuiteReport { name: name.to_string(), checks, violations, max_excess })
}

fn state_of_kind(d: usize, which: u64, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    match which % 3 {
        0 => random_state(d, StateKind::Pure, rng),
        1 => random_state(d, StateKind::FullRank, rng),
        _ => random_state(d, StateKind::RankK(1 + (d / 2)), rng),
    }
}

const DIMS: [usize; 3] = [2, 4, 8];

fn dim_for(i: u64, dims: &[usize]) -> usize {
    dims[(i % dims.len() as u64) as usize]
}

// ---------------------------------------------------------------------------
// Inequality suites
// ---------------------------------------------------------------------------

/// Both sides of the trace-distance/fidelity sandwich:
/// `1 - sqrt(F) <= D_tr <= sqrt(1 - F)`.
pub fn fuchs_van_de_graaf_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("fuchs_van_de_graaf", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let rho = state_of_kind(d, i, &mut rng)?;
        let sigma = state_of_kind(d, i + 1, &mut rng)?;
        let dt = trace_distance(&rho, &sigma)?;
        let f = fidelity(&rho, &sigma)?;
        Ok(vec![
            (1.0 - f.sqrt()) - dt - 1e-9,
            dt - (1.0 - f).max(0.0).sqrt() - 1e-9,
        ])
    })
}

/// `D_tr <= sqrt(ln2 / 2) sqrt(S)` whenever the relative entropy is finite.
pub fn pinsker_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("pinsker", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let rho = state_of_kind(d, i, &mut rng)?;
        let sigma = random_state(d, StateKind::FullRank, &mut rng)?;
        let dt = trace_distance(&rho, &sigma)?;
        let s = relative_entropy(&rho, &sigma)?;
        if s.is_infinite() {
            return Ok(vec![f64::NEG_INFINITY]);
        }
        Ok(vec![dt - (LN_2 / 2.0 * s).sqrt() - 1e-9])
    })
}

/// `F(rho1 (x) rho2, sigma1 (x) sigma2) = F1 * F2` within 1e-8.
pub fn fidelity_multiplicativity_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    const PAIRS: [(usize, usize); 6] = [(2, 2), (2, 4), (4, 2), (4, 4), (2, 8), (8, 2)];
    run_suite("fidelity_multiplicativity", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let (d1, d2) = PAIRS[(i % PAIRS.len() as u64) as usize];
        let rho1 = state_of_kind(d1, i, &mut rng)?;
        let sig1 = state_of_kind(d1, i + 1, &mut rng)?;
        let rho2 = state_of_kind(d2, i + 2, &mut rng)?;
        let sig2 = state_of_kind(d2, i + 3, &mut rng)?;
        let product = fidelity(
            &DensityMatrix::new(rho1.mat().kron(rho2.mat()))?,
            &DensityMatrix::new(sig1.mat().kron(sig2.mat()))?,
        )?;
        let separate = fidelity(&rho1, &sig1)? * fidelity(&rho2, &sig2)?;
        Ok(vec![(product - separate).abs() - 1e-8])
    })
}

/// `S(rho1 (x) rho2 || sigma1 (x) sigma2) = S1 + S2` within 1e-8.
pub fn relative_entropy_additivity_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    const PAIRS: [(usize, usize); 6] = [(2, 2), (2, 4), (4, 2), (4, 4), (2, 8), (8, 2)];
    run_suite("relative_entropy_additivity", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let (d1, d2) = PAIRS[(i % PAIRS.len() as u64) as usize];
        let rho1 = state_of_kind(d1, i, &mut rng)?;
        let sig1 = random_state(d1, StateKind::FullRank, &mut rng)?;
        let rho2 = state_of_kind(d2, i + 1, &mut rng)?;
        let sig2 = random_state(d2, StateKind::FullRank, &mut rng)?;
        let joint = relative_entropy(
            &DensityMatrix::new(rho1.mat().kron(rho2.mat()))?,
            &DensityMatrix::new(sig1.mat().kron(sig2.mat()))?,
        )?;
        let separate = relative_entropy(&rho1, &sig1)? + relative_entropy(&rho2, &sig2)?;
        Ok(vec![(joint - separate).abs() - 1e-8])
    })
}

/// Channels never increase trace distance or relative entropy, and never
/// decrease fidelity.
pub fn data_processing_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("data_processing", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let rho = state_of_kind(d, i, &mut rng)?;
        let sigma = state_of_kind(d, i + 1, &mut rng)?;
        let kraus_count = 1 + (rng.random_range(0..3u32) as usize);
        let ch = random_channel(d, kraus_count, &mut rng)?;
        let out_rho = ch.apply(&rho)?;
        let out_sigma = ch.apply(&sigma)?;

        let mut excesses = vec![
            trace_distance(&out_rho, &out_sigma)? - trace_distance(&rho, &sigma)? - 1e-9,
            fidelity(&rho, &sigma)? - fidelity(&out_rho, &out_sigma)? - 1e-9,
        ];
        let s_in = relative_entropy(&rho, &sigma)?;
        if s_in.is_finite() {
            let s_out = relative_entropy(&out_rho, &out_sigma)?;
            excesses.push(s_out - s_in - 1e-9);
        }
        Ok(excesses)
    })
}

/// `|Tr O (eta - tau)| <= D_F(eta, tau) (sd_O(eta) + sd_O(tau) + |Tr O (eta - tau)|)`.
pub fn distance_fluctuation_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("distance_fluctuation", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let eta = state_of_kind(d, i, &mut rng)?;
        let tau = state_of_kind(d, i + 1, &mut rng)?;
        let obs = Observable::new(random_hermitian(d, &mut rng))?;
        let gap = (obs.expectation(&eta) - obs.expectation(&tau)).abs();
        let df = purified_distance(&eta, &tau)?;
        let rhs = df * (observable_std_dev(&obs, &eta)? + observable_std_dev(&obs, &tau)? + gap);
        Ok(vec![gap - rhs - 1e-9])
    })
}

/// `F >= (1 - D_tr)^2`.
pub fn fidelity_trace_lower_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("fidelity_vs_trace_distance", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let rho = state_of_kind(d, i, &mut rng)?;
        let sigma = state_of_kind(d, i + 1, &mut rng)?;
        let dt = trace_distance(&rho, &sigma)?;
        let f = fidelity(&rho, &sigma)?;
        Ok(vec![(1.0 - dt) * (1.0 - dt) - f - 1e-9])
    })
}

/// `D_F <= sqrt(S)` whenever the relative entropy is finite.
pub fn purified_vs_relative_entropy_suite(instances: u64, seed: u64) -> Result<SuiteReport> {
    run_suite("purified_vs_relative_entropy", instances, &move |i| {
        let mut rng = derive_rng(seed, i);
        let d = dim_for(i, &DIMS);
        let rho = state_of_kind(d, i, &mut rng)?;
        let sigma = random_state(d, StateKind::FullRank, &mut rng)?;
        let s = relative_entropy(&rho, &sigma)?;
        if s.is_infinite() {
            return Ok(vec![f64::NEG_INFINITY]);
        }
        Ok(vec![purified_distance(&rho, &sigma)? - s.sqrt() - 1e-8])
    })
}

/// The eight inequality suites at a shared instance budget.
pub fn all_inequality_suites(instances: u64, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        fuchs_van_de_graaf_suite(instances, seed)?,
        pinsker_suite(instances, seed.wrapping_add(1))?,
        fidelity_multiplicativity_suite(instances, seed.wrapping_add(2))?,
        relative_entropy_additivity_suite(instances, seed.wrapping_add(3))?,
        data_processing_suite(instances, seed.wrapping_add(4))?,
        distance_fluctuation_suite(instances, seed.wrapping_add(5))?,
        fidelity_trace_lower_suite(instances, seed.wrapping_add(6))?,
        purified_vs_relative_entropy_suite(instances, seed.wrapping_add(7))?,
    ])
}

// ---------------------------------------------------------------------------
// Contraction suites
// ---------------------------------------------------------------------------

fn mixed_state(d: usize) -> DensityMatrix {
    DensityMatrix::maximally_mixed(d)
}

/// Per-qubit depolarizing contraction of the relative entropy toward the
/// maximally mixed state: ratio at most `(1-gamma)^2`, both bare and with
/// random unital channels and a random unitary inserted before the noise.
pub fn depolarizing_contraction_suite(
    qubit_counts: &[usize],
    gammas: &[f64],
    samples_per_config: u64,
    seed: u64,
) -> Result<Vec<SuiteReport>> {
    let mut reports = Vec::new();
    for (ci, &m) in qubit_counts.iter().enumerate() {
        for (gi, &gamma) in gammas.iter().enumerate() {
            let d = 1usize << m;
            let xi = depolarizing_rel_ent_contraction(gamma)?;
            let dep = {
                let single = KrausChannel::depolarizing(gamma)?;
                let mut acc = single.clone();
                for _ in 1..m {
                    acc = KrausChannel::tensor(&acc, &single);
                }
                acc
            };
            let config_seed = seed
                .wrapping_add(ci as u64 * 1000)
                .wrapping_add(gi as u64 * 10);
            let dep_bare = dep.clone();
            let bare = run_suite(
                &format!("depolarizing_contraction_m{m}_g{gamma}"),
                samples_per_config,
                &move |i| {
                    let mut rng = derive_rng(config_seed, i);
                    let tau = state_of_kind(d, i, &mut rng)?;
                    let den = relative_entropy(&tau, &mixed_state(d))?;
                    if !den.is_finite() || den < 1e-10 {
                        return Ok(vec![f64::NEG_INFINITY]);
                    }
                    let num = relative_entropy(&dep_bare.apply(&tau)?, &mixed_state(d))?;
                    Ok(vec![num / den - xi - 1e-9])
                },
            )?;
            reports.push(bare);

            let dep_sandwich = dep.clone();
            let sandwiched = run_suite(
                &format!("depolarizing_contraction_sandwiched_m{m}_g{gamma}"),
                samples_per_config,
                &move |i| {
                    let mut rng = derive_rng(config_seed.wrapping_add(777), i);
                    let tau = state_of_kind(d, i, &mut rng)?;
                    let den = relative_entropy(&tau, &mixed_state(d))?;
                    if !den.is_finite() || den < 1e-10 {
                        return Ok(vec![f64::NEG_INFINITY]);
                    }
                    let before = random_mixed_unitary(d, 2, &mut rng)?;
                    let after = random_mixed_unitary(d, 2, &mut rng)?;
                    let u = KrausChannel::unitary(&random_unitary(d, &mut rng))?;
                    let inner = after.apply(&u.apply(&before.apply(&tau)?)?)?;
                    let num = relative_entropy(&dep_sandwich.apply(&inner)?, &mixed_state(d))?;
                    Ok(vec![num / den - xi - 1e-7])
                },
            )?;
            reports.push(sandwiched);
        }
    }
    Ok(reports)
}

/// Sandwiched Renyi-2 contraction toward the maximally mixed state under
/// tensor powers of stochastic Pauli noise.
pub fn pauli_renyi2_suite(
    qubit_counts: &[usize],
    q_vectors: &[(f64, f64, f64)],
    samples_per_config: u64,
    seed: u64,
) -> Result<Vec<SuiteReport>> {
    let mut reports = Vec::new();
    for (ci, &n) in qubit_counts.iter().enumerate() {
        for (qi, &(qx, qy, qz)) in q_vectors.iter().enumerate() {
            let d = 1usize << n;
            let xi = pauli_renyi2_contraction(qx, qy, qz)?;
            let single = KrausChannel::stochastic_pauli(qx, qy, qz)?;
            let mut channel = single.clone();
            for _ in 1..n {
                channel = KrausChannel::tensor(&channel, &single);
            }
            let config_seed = seed.wrapping_add(ci as u64 * 1000).wrapping_add(qi as u64 * 10);
            let report = run_suite(
                &format!("pauli_renyi2_n{n}_q{qi}"),
                samples_per_config,
                &move |i| {
                    let mut rng = derive_rng(config_seed, i);
                    let rho = state_of_kind(d, i, &mut rng)?;
                    let den = renyi2_sandwiched(&rho, &mixed_state(d))?;
                    if den < 1e-10 {
                        return Ok(vec![f64::NEG_INFINITY]);
                    }
                    let num = renyi2_sandwiched(&channel.apply(&rho)?, &mixed_state(d))?;
                    Ok(vec![num - xi * den - 1e-9])
                },
            )?;
            reports.push(report);
        }
    }
    Ok(reports)
}

/// Minimum-eigenvalue floor of the effective noise channel of random layered
/// circuits: every output eigenvalue is at least `(gamma/2)^M`.
pub fn min_eigenvalue_suite(
    qubit_counts: &[usize],
    max_layers: usize,
    gamma: f64,
    samples_per_config: u64,
    seed: u64,
) -> Result<Vec<SuiteReport>> {
    let mut reports = Vec::new();
    for (ci, &m) in qubit_counts.iter().enumerate() {
        let d = 1usize << m;
        let floor = (gamma / 2.0).powi(m as i32);
        let config_seed = seed.wrapping_add(ci as u64 * 1000);
        let report = run_suite(
            &format!("min_eigenvalue_floor_m{m}"),
            samples_per_config,
            &move |i| {
                let mut rng = derive_rng(config_seed, i);
                let layers = 1 + (i as usize % max_layers);
                let spec = LayeredSpec::new(m, layers, gamma)?;
                let circuit = LayeredCircuit::from_spec(&spec, config_seed.wrapping_add(i))?;
                // Random per-site strengths at or above the floor.
                let strengths: Vec<Vec<f64>> = (0..layers)
                    .map(|_| {
                        (0..m)
                            .map(|_| rng.random_range(gamma..(2.0 * gamma).min(1.0)))
                            .collect()
                    })
                    .collect();
                let circuit = circuit.with_noise_strengths(strengths)?;
                let sigma = state_of_kind(d, i, &mut rng)?;
                // Effective channel output = noisy evolution of the
                // ideal-circuit preimage.
                let mut u_total = crate::numkit::Matrix::identity(d);
                for u in circuit.unitaries() {
                    u_total = u.matmul(&u_total);
                }
                let preimage = DensityMatrix::new(
                    u_total.dagger().matmul(sigma.mat()).matmul(&u_total),
                )?;
                let out = circuit.noisy_state(&preimage, 1.0)?;
                Ok(vec![floor - min_eigenvalue(&out) - 1e-9])
            },
        )?;
        reports.push(report);
    }
    Ok(reports)
}

/// Assert that every report in a batch is clean.
pub fn require_all_passed(reports: &[SuiteReport]) -> Result<()> {
    for r in reports {
        if !r.passed() {
            return Err(Error::InvalidArgument(format!(
                "suite {} failed: {} violations (max excess {:.3e})",
                r.name, r.violations, r.max_excess
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inequality_suites_clean_smoke() {
        let reports = all_inequality_suites(60, 1234).unwrap();
        assert_eq!(reports.len(), 8);
        for r in &reports {
            assert!(r.passed(), "{} violated: {:?}", r.name, r);
            assert!(r.checks >= 60);
        }
    }

    #[test]
    fn inequality_suites_deterministic() {
        let a = all_inequality_suites(30, 55).unwrap();
        let b = all_inequality_suites(30, 55).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.max_excess, y.max_excess);
            assert_eq!(x.checks, y.checks);
        }
    }

    #[test]
    fn depolarizing_contraction_smoke() {
        let reports = depolarizing_contraction_suite(&[1, 2], &[0.1, 0.3], 40, 77).unwrap();
        for r in &reports {
            assert!(r.passed(), "{} violated (max excess {:.3e})", r.name, r.max_excess);
        }
    }

    #[test]
    fn pauli_renyi2_smoke() {
        let reports =
            pauli_renyi2_suite(&[1, 2], &[(0.1, 0.1, 0.1), (0.15, 0.05, 0.05)], 40, 78).unwrap();
        for r in &reports {
            assert!(r.passed(), "{} violated (max excess {:.3e})", r.name, r.max_excess);
        }
    }

    #[test]
    fn min_eigenvalue_smoke() {
        let reports = min_eigenvalue_suite(&[1, 2], 3, 0.2, 30, 79).unwrap();
        for r in &reports {
            assert!(r.passed(), "{} violated (max excess {:.3e})", r.name, r.max_excess);
        }
    }
}
