//! Contraction coefficients and constants.
//!
//! The generalized coefficient (how much an ensemble of channels can shrink
//! the trace distance relative to an observable-restricted
//! distinguishability) is estimated from below by randomized search with
//! local refinement. Analytic constants are provided for the named noise
//! families, and [`verify_contraction`] checks claimed constants against
//! random states.

use num_complex::Complex64 as C64;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use crate::channels::{KrausChannel, NoiseEnsemble};
use crate::divergences::{
    binary_relative_entropy, observable_distinguishability, relative_entropy, renyi2_sandwiched,
    trace_distance, ObservableSet,
};
use crate::numkit::{derive_rng, random_state, DensityMatrix, StateKind};
use crate::{Error, Result};

/// Ratios with denominators below this are skipped (0/0 regularization).
const DENOMINATOR_FLOOR: f64 = 1e-10;

/// How the reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Analytic,
    Search,
}

/// A certified-from-below contraction estimate with the state pair achieving
/// the reported ratio.
#[derive(Debug, Clone)]
pub struct ContractionEstimate {
    pub value: f64,
    pub witness: (DensityMatrix, DensityMatrix),
    pub channel_index: usize,
    pub method: EstimateMethod,
    pub iterations: u64,
}

/// Search effort for [`estimate_eta`].
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub restarts: u64,
    pub refine_steps: u64,
}

fn pure_from_amps(amps: &[C64]) -> Result<DensityMatrix> {
    DensityMatrix::pure(amps)
}

fn perturb_amps(amps: &[C64], step: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    use rand_distr::{Distribution, StandardNormal};
    amps.iter()
        .map(|a| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            a + C64::new(re * step, im * step)
        })
        .collect()
}

/// Ratio of output trace distance to input distinguishability, maximized
/// over the ensemble members. Returns the ratio and the achieving member.
fn eta_ratio(
    ensemble: &NoiseEnsemble,
    oset: &ObservableSet,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<Option<(f64, usize)>> {
    let denom = observable_distinguishability(rho, sigma, oset)?;
    if denom < 1e-9 {
        return Ok(None);
    }
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (idx, ch) in ensemble.members().iter().enumerate() {
        let out_rho = ch.apply(rho)?;
        let out_sigma = ch.apply(sigma)?;
        let num = trace_distance(&out_rho, &out_sigma)?;
        let ratio = num / denom;
        if ratio > best.0 {
            best = (ratio, idx);
        }
    }
    Ok(Some(best))
}

/// Lower-bound estimate of the generalized contraction coefficient by random
/// pure-state pairs plus local refinement. The value is certified from below
/// by its stored witness; it is never claimed tight.
pub fn estimate_eta(
    ensemble: &NoiseEnsemble,
    oset: &ObservableSet,
    budget: &SearchBudget,
    master_seed: u64,
) -> Result<ContractionEstimate> {
    if budget.restarts == 0 {
        return Err(Error::InvalidArgument("search budget must have at least one restart".into()));
    }
    let d = ensemble.dim();
    if oset.dim() != d {
        return Err(Error::InvalidArgument("observable set dimension mismatch".into()));
    }
    let mut best: Option<(f64, usize, Vec<C64>, Vec<C64>)> = None;
    for restart in 0..budget.restarts {
        let mut rng = derive_rng(master_seed, restart);
        let mut a: Vec<C64> = (0..d)
            .map(|_| {
                use rand_distr::{Distribution, StandardNormal};
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let mut b: Vec<C64> = (0..d)
            .map(|_| {
                use rand_distr::{Distribution, StandardNormal};
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let rho = pure_from_amps(&a)?;
        let sigma = pure_from_amps(&b)?;
        let Some((mut ratio, mut member)) = eta_ratio(ensemble, oset, &rho, &sigma)? else {
            continue;
        };
        let mut step = 0.3;
        for refine in 0..budget.refine_steps {
            let target_first = refine % 2 == 0;
            let cand = if target_first {
                (perturb_amps(&a, step, &mut rng), b.clone())
            } else {
                (a.clone(), perturb_amps(&b, step, &mut rng))
            };
            let c_rho = pure_from_amps(&cand.0)?;
            let c_sigma = pure_from_amps(&cand.1)?;
            if let Some((c_ratio, c_member)) = eta_ratio(ensemble, oset, &c_rho, &c_sigma)? {
                if c_ratio > ratio {
                    ratio = c_ratio;
                    member = c_member;
                    a = cand.0;
                    b = cand.1;
                }
            }
            step *= 0.97;
        }
        if best.as_ref().map(|(v, ..)| ratio > *v).unwrap_or(true) {
            best = Some((ratio, member, a, b));
        }
    }
    let (value, channel_index, a, b) =
        best.ok_or_else(|| Error::InvalidArgument("no admissible pure pair found".into()))?;
    Ok(ContractionEstimate {
        value,
        witness: (pure_from_amps(&a)?, pure_from_amps(&b)?),
        channel_index,
        method: EstimateMethod::Search,
        iterations: budget.restarts * (1 + budget.refine_steps),
    })
}

/// Relative-entropy contraction constant of per-qubit depolarizing noise
/// toward the maximally mixed state: `(1 - gamma)^2`.
pub fn depolarizing_rel_ent_contraction(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0,1]")));
    }
    Ok((1.0 - gamma) * (1.0 - gamma))
}

fn binary_ratio(lambda: f64, x: f64) -> f64 {
    if (x - lambda).abs() < 1e-15 {
        return 1.0;
    }
    let num = binary_relative_entropy(lambda, x).expect("arguments in (0,1)");
    let den = binary_relative_entropy(x, lambda).expect("arguments in (0,1)");
    num / den
}

/// Exponent `alpha_1` entering the contraction constant `(1-gamma)^{2 alpha_1}`
/// of the full-rank-fixed-point depolarizing channel, as a function of the
/// fixed point's minimum eigenvalue. One-dimensional minimization of
/// `(1 + D2(lam||x)/D2(x||lam))/2` over a dense grid with ternary refinement.
pub fn global_depolarizing_alpha1(lambda_min: f64) -> Result<f64> {
    if !(lambda_min > 0.0 && lambda_min <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "minimum eigenvalue {lambda_min} outside (0, 1/2]"
        )));
    }
    let objective = |x: f64| 0.5 * (1.0 + binary_ratio(lambda_min, x));
    let n = 20_000usize;
    let mut best_x = lambda_min;
    let mut best = objective(lambda_min);
    for i in 1..n {
        let x = i as f64 / n as f64;
        let v = objective(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // Ternary refinement around the best grid point.
    let width = 2.0 / n as f64;
    let mut lo = (best_x - width).max(1e-12);
    let mut hi = (best_x + width).min(1.0 - 1e-12);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(best.min(objective(0.5 * (lo + hi))))
}

/// Contraction factor of the sandwiched Renyi-2 entropy toward the maximally
/// mixed state under qubit stochastic Pauli noise:
/// `q^{1/ln 2}` with `q = |1 - 2 min(qx+qy, qy+qz, qx+qz)|`.
pub fn pauli_renyi2_contraction(qx: f64, qy: f64, qz: f64) -> Result<f64> {
    if qx < 0.0 || qy < 0.0 || qz < 0.0 || qx + qy + qz > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "invalid Pauli error probabilities ({qx}, {qy}, {qz})"
        )));
    }
    let min_pair = (qx + qy).min(qy + qz).min(qx + qz);
    let q = (1.0 - 2.0 * min_pair).abs();
    Ok(q.powf(std::f64::consts::LOG2_E))
}

/// Divergence used by [`verify_contraction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionDivergence {
    RelativeEntropy,
    Renyi2,
}

/// Outcome of a randomized contraction check.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub violation_count: u64,
    pub evaluated: u64,
    pub skipped: u64,
}

/// Check `S(N(rho) || fixed) <= xi * S(rho || fixed)` on random states.
///
/// The sample mix is 50% Haar pure, 25% full-rank Wishart, 25% convex blends
/// biased toward the fixed point. States indistinguishable from the fixed
/// point and ratios with near-zero denominators are skipped.
pub fn verify_contraction(
    channel: &KrausChannel,
    fixed: &DensityMatrix,
    xi_claimed: f64,
    divergence: ContractionDivergence,
    samples: u64,
    master_seed: u64,
) -> Result<ContractionReport> {
    let residual = channel.fixed_point_residual(fixed);
    if residual > 1e-8 {
        return Err(Error::NotAFixedPoint(residual));
    }
    let d = channel.dim();
    let div = |a: &DensityMatrix, b: &DensityMatrix| -> Result<f64> {
        match divergence {
            ContractionDivergence::RelativeEntropy => relative_entropy(a, b),
            ContractionDivergence::Renyi2 => renyi2_sandwiched(a, b),
        }
    };
    let mut max_ratio = f64::NEG_INFINITY;
    let mut violations = 0u64;
    let mut evaluated = 0u64;
    let mut skipped = 0u64;
    for i in 0..samples {
        let mut rng = derive_rng(master_seed, i);
        let tau = match i % 4 {
            0 | 1 => random_state(d, StateKind::Pure, &mut rng)?,
            2 => random_state(d, StateKind::FullRank, &mut rng)?,
            _ => {
                let base = random_state(d, StateKind::Pure, &mut rng)?;
                let w = rng.random_range(0.2..0.95);
                base.blend(fixed, w)?
            }
        };
        if trace_distance(&tau, fixed)? < 1e-8 {
            skipped += 1;
            continue;
        }
        let denom = div(&tau, fixed)?;
        if !denom.is_finite() || denom < DENOMINATOR_FLOOR {
            skipped += 1;
            continue;
        }
        let out = channel.apply(&tau)?;
        let num = div(&out, fixed)?;
        let ratio = num / denom;
        evaluated += 1;
        if ratio > max_ratio {
            max_ratio = ratio;
        }
        if ratio > xi_claimed + 1e-7 {
            violations += 1;
        }
    }
    Ok(ContractionReport { max_ratio, violation_count: violations, evaluated, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_mixed_unitary;
    use crate::numkit::random_unitary;
    use approx::assert_abs_diff_eq;

    fn all_effects(d: usize) -> ObservableSet {
        ObservableSet::AllEffects { dim: d }
    }

    #[test]
    fn eta_identity_channel_is_one() {
        let ens = NoiseEnsemble::new(vec![KrausChannel::identity(2)]).unwrap();
        let est = estimate_eta(
            &ens,
            &all_effects(2),
            &SearchBudget { restarts: 20, refine_steps: 0 },
            77,
        )
        .unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn eta_completely_depolarizing_is_zero() {
        let ens = NoiseEnsemble::new(vec![KrausChannel::depolarizing(1.0).unwrap()]).unwrap();
        let est = estimate_eta(
            &ens,
            &all_effects(2),
            &SearchBudget { restarts: 10, refine_steps: 5 },
            78,
        )
        .unwrap();
        assert!(est.value.abs() < 1e-9);
    }

    #[test]
    fn eta_depolarizing_matches_one_minus_p() {
        let p = 0.35;
        let ens = NoiseEnsemble::new(vec![KrausChannel::depolarizing(p).unwrap()]).unwrap();
        let est = estimate_eta(
            &ens,
            &all_effects(2),
            &SearchBudget { restarts: 40, refine_steps: 30 },
            79,
        )
        .unwrap();
        assert_abs_diff_eq!(est.value, 1.0 - p, epsilon = 2e-3);
    }

    #[test]
    fn eta_witness_reproduces_value() {
        let ens = NoiseEnsemble::new(vec![
            KrausChannel::depolarizing(0.25).unwrap(),
            KrausChannel::depolarizing(0.5).unwrap(),
        ])
        .unwrap();
        let oset = all_effects(2);
        let est =
            estimate_eta(&ens, &oset, &SearchBudget { restarts: 15, refine_steps: 10 }, 80)
                .unwrap();
        let (rho, sigma) = &est.witness;
        let denom = observable_distinguishability(rho, sigma, &oset).unwrap();
        let ch = &ens.members()[est.channel_index];
        let num =
            trace_distance(&ch.apply(rho).unwrap(), &ch.apply(sigma).unwrap()).unwrap();
        assert_abs_diff_eq!(num / denom, est.value, epsilon = 1e-8);
        // The milder channel dominates the max over the ensemble.
        assert_eq!(est.channel_index, 0);
    }

    #[test]
    fn eta_never_exceeds_one_for_all_effects() {
        let mut rng = derive_rng(81, 0);
        for k in 0..5 {
            let ch = crate::channels::random_channel(2, 2, &mut rng).unwrap();
            let ens = NoiseEnsemble::new(vec![ch]).unwrap();
            let est = estimate_eta(
                &ens,
                &all_effects(2),
                &SearchBudget { restarts: 25, refine_steps: 15 },
                82 + k,
            )
            .unwrap();
            assert!(est.value <= 1.0 + 1e-8, "eta {} > 1", est.value);
        }
    }

    #[test]
    fn eta_monotone_in_restarts() {
        let ens = NoiseEnsemble::new(vec![KrausChannel::depolarizing(0.3).unwrap()]).unwrap();
        let oset = all_effects(2);
        let mut last = 0.0;
        for restarts in [1u64, 5, 20] {
            let est =
                estimate_eta(&ens, &oset, &SearchBudget { restarts, refine_steps: 5 }, 83)
                    .unwrap();
            assert!(est.value >= last - 1e-12);
            last = est.value;
        }
    }

    #[test]
    fn eta_rejects_zero_budget() {
        let ens = NoiseEnsemble::new(vec![KrausChannel::identity(2)]).unwrap();
        assert!(estimate_eta(
            &ens,
            &all_effects(2),
            &SearchBudget { restarts: 0, refine_steps: 0 },
            1
        )
        .is_err());
    }

    #[test]
    fn depolarizing_contraction_values() {
        assert_abs_diff_eq!(depolarizing_rel_ent_contraction(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(depolarizing_rel_ent_contraction(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(depolarizing_rel_ent_contraction(0.1).unwrap(), 0.81, epsilon = 1e-15);
        assert!(depolarizing_rel_ent_contraction(1.2).is_err());
    }

    #[test]
    fn alpha1_limits_and_frozen_value() {
        // Approaches 1 as the minimum eigenvalue approaches 1/2.
        assert!(global_depolarizing_alpha1(0.499).unwrap() > 0.999);
        assert_abs_diff_eq!(global_depolarizing_alpha1(0.5).unwrap(), 1.0, epsilon = 1e-9);
        // Decreases toward 1/2 as the minimum eigenvalue shrinks.
        let seq: Vec<f64> = [0.4, 0.25, 0.1, 1e-2, 1e-4, 1e-6, 1e-10]
            .iter()
            .map(|&l| global_depolarizing_alpha1(l).unwrap())
            .collect();
        for w in seq.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(*seq.last().unwrap() < 0.53);
        assert!(seq.iter().all(|&a| a > 0.5));
        // Frozen against an independent brute-force scan.
        assert_abs_diff_eq!(
            global_depolarizing_alpha1(0.25).unwrap(),
            0.954706390023,
            epsilon = 1e-6
        );
        assert!(global_depolarizing_alpha1(0.0).is_err());
        assert!(global_depolarizing_alpha1(0.6).is_err());
    }

    #[test]
    fn alpha1_matches_independent_grid_scan() {
        // Coarser independent scan with golden-section polish.
        let lambda = 0.25;
        let obj = |x: f64| 0.5 * (1.0 + binary_ratio(lambda, x));
        let mut best = f64::INFINITY;
        let mut best_x = 0.5;
        for i in 1..100_000 {
            let x = i as f64 / 100_000.0;
            let v = obj(x);
            if v < best {
                best = v;
                best_x = x;
            }
        }
        let (mut lo, mut hi) = (best_x - 1e-4, best_x + 1e-4);
        for _ in 0..120 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if obj(m1) < obj(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let oracle = obj(0.5 * (lo + hi)).min(best);
        assert_abs_diff_eq!(global_depolarizing_alpha1(lambda).unwrap(), oracle, epsilon = 1e-6);
    }

    #[test]
    fn pauli_contraction_values() {
        assert_abs_diff_eq!(pauli_renyi2_contraction(0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(pauli_renyi2_contraction(0.25, 0.25, 0.25).unwrap(), 0.0);
        // (0.1, 0.1, 0): min pair sum is qy + qz = 0.1, so q = 0.8.
        assert_abs_diff_eq!(
            pauli_renyi2_contraction(0.1, 0.1, 0.0).unwrap(),
            0.724750301708422,
            epsilon = 1e-12
        );
        // (0.1, 0.1, 0.1): all pair sums 0.2, q = 0.6.
        assert_abs_diff_eq!(
            pauli_renyi2_contraction(0.1, 0.1, 0.1).unwrap(),
            0.478563871534615,
            epsilon = 1e-12
        );
        assert!(pauli_renyi2_contraction(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn verify_contraction_depolarizing_pair() {
        let gamma = 0.2;
        let d1 = KrausChannel::depolarizing(gamma).unwrap();
        let dd = KrausChannel::tensor(&d1, &d1);
        let fixed = DensityMatrix::maximally_mixed(4);
        let report = verify_contraction(
            &dd,
            &fixed,
            depolarizing_rel_ent_contraction(gamma).unwrap(),
            ContractionDivergence::RelativeEntropy,
            200,
            90,
        )
        .unwrap();
        assert_eq!(report.violation_count, 0, "max ratio {}", report.max_ratio);
        assert!(report.evaluated > 150);
    }

    #[test]
    fn verify_contraction_identity_saturates() {
        let report = verify_contraction(
            &KrausChannel::identity(2),
            &DensityMatrix::maximally_mixed(2),
            1.0,
            ContractionDivergence::RelativeEntropy,
            100,
            91,
        )
        .unwrap();
        assert_eq!(report.violation_count, 0);
        assert_abs_diff_eq!(report.max_ratio, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn verify_contraction_pauli_renyi2() {
        let t = KrausChannel::stochastic_pauli(0.1, 0.1, 0.1).unwrap();
        let tt = KrausChannel::tensor(&t, &t);
        let xi = pauli_renyi2_contraction(0.1, 0.1, 0.1).unwrap();
        let report = verify_contraction(
            &tt,
            &DensityMatrix::maximally_mixed(4),
            xi,
            ContractionDivergence::Renyi2,
            200,
            92,
        )
        .unwrap();
        assert_eq!(report.violation_count, 0, "max ratio {}", report.max_ratio);
    }

    #[test]
    fn verify_contraction_rejects_non_fixed_point() {
        let dep = KrausChannel::depolarizing(0.3).unwrap();
        let not_fixed = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(matches!(
            verify_contraction(
                &dep,
                &not_fixed,
                0.5,
                ContractionDivergence::RelativeEntropy,
                10,
                93
            ),
            Err(Error::NotAFixedPoint(_))
        ));
    }

    #[test]
    fn sandwiched_unital_maps_do_not_increase_relative_entropy() {
        let mut rng = derive_rng(94, 0);
        let mixed = DensityMatrix::maximally_mixed(2);
        for _ in 0..30 {
            let before = random_mixed_unitary(2, 2, &mut rng).unwrap();
            let after = random_mixed_unitary(2, 3, &mut rng).unwrap();
            let u = KrausChannel::unitary(&random_unitary(2, &mut rng)).unwrap();
            let tau = random_state(2, StateKind::FullRank, &mut rng).unwrap();
            let den = relative_entropy(&tau, &mixed).unwrap();
            if den < 1e-10 {
                continue;
            }
            let out = after
                .apply(&u.apply(&before.apply(&tau).unwrap()).unwrap())
                .unwrap();
            let num = relative_entropy(&out, &mixed).unwrap();
            assert!(num / den <= 1.0 + 1e-8);
        }
    }
}
