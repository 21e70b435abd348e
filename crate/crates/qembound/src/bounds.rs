//! Evaluators for the sampling lower bounds, from scalar formula level up to
//! state-set searches, plus the thermodynamic bounds.
//!
//! Every displayed formula has a scalar evaluator, and the max/min searches
//! over states and noise ensembles are thin wrappers around those scalars,
//! so each level is independently testable. Divergence sentinels
//! (`f64::INFINITY`) propagate; an infinitely distinguishable pair
//! contributes a vacuous zero bound rather than a spurious constraint.

use serde_json::{json, Value};
use std::f64::consts::LN_2;

use crate::channels::{KrausChannel, LiouvillianSpec, NoiseEnsemble};
use crate::divergences::{
    fidelity, observable_distinguishability, relative_entropy, ObservableSet,
};
use crate::numkit::{
    derive_rng, eig_hermitian, random_state, DensityMatrix, Matrix, Observable, StateKind,
    SUPPORT_CUTOFF,
};
use crate::{Error, Result};
use rand::RngExt;

// ---------------------------------------------------------------------------
// Targets and reports
// ---------------------------------------------------------------------------

/// Accuracy / success-probability target: estimates within `delta` of the
/// truth with probability at least `1 - epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct AccuracyTarget {
    pub delta: f64,
    pub epsilon: f64,
}

impl AccuracyTarget {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta {delta} must be finite and >= 0")));
        }
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 1/2]")));
        }
        Ok(Self { delta, epsilon })
    }
}

/// Standard-deviation / bias target for the moment-based bounds.
#[derive(Debug, Clone, Copy)]
pub struct MomentTarget {
    pub sigma_max: f64,
    pub b_max: f64,
}

impl MomentTarget {
    pub fn new(sigma_max: f64, b_max: f64) -> Result<Self> {
        if !(sigma_max >= 0.0 && sigma_max.is_finite() && b_max >= 0.0 && b_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "moment targets must be finite and >= 0, got ({sigma_max}, {b_max})"
            )));
        }
        Ok(Self { sigma_max, b_max })
    }
}

/// Which performance criterion a layered bound is evaluated against.
#[derive(Debug, Clone, Copy)]
pub enum PerformanceMode {
    Probability(AccuracyTarget),
    Moment { moments: MomentTarget, d_o: f64 },
}

/// Geometry of a noisy layered circuit: `qubits` wires, `layers` unitaries,
/// each followed by per-qubit depolarizing noise of strength at least
/// `gamma`.
#[derive(Debug, Clone)]
pub struct LayeredSpec {
    pub qubits: usize,
    pub layers: usize,
    pub gamma: f64,
    pub unitaries: Option<Vec<Matrix>>,
    pub sandwiches: Option<Vec<(KrausChannel, KrausChannel)>>,
}

impl LayeredSpec {
    pub fn new(qubits: usize, layers: usize, gamma: f64) -> Result<Self> {
        if qubits == 0 || layers == 0 {
            return Err(Error::InvalidArgument("need at least one qubit and one layer".into()));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} outside (0,1)")));
        }
        Ok(Self { qubits, layers, gamma, unitaries: None, sandwiches: None })
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn with_unitaries(mut self, unitaries: Vec<Matrix>) -> Result<Self> {
        if unitaries.len() != self.layers {
            return Err(Error::InvalidArgument(format!(
                "expected {} unitaries, got {}",
                self.layers,
                unitaries.len()
            )));
        }
        let d = self.dim();
        for u in &unitaries {
            if u.rows() != d || u.cols() != d {
                return Err(Error::InvalidArgument("unitary dimension mismatch".into()));
            }
            let res = (&u.dagger().matmul(u) - &Matrix::identity(d)).max_abs_entry();
            if res > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "layer matrix is not unitary (residual {res:.3e})"
                )));
            }
        }
        self.unitaries = Some(unitaries);
        Ok(self)
    }

    pub fn with_sandwiches(mut self, sandwiches: Vec<(KrausChannel, KrausChannel)>) -> Result<Self> {
        if sandwiches.len() != self.layers {
            return Err(Error::InvalidArgument(format!(
                "expected {} sandwich pairs, got {}",
                self.layers,
                sandwiches.len()
            )));
        }
        let d = self.dim();
        for (before, after) in &sandwiches {
            if before.dim() != d || after.dim() != d {
                return Err(Error::InvalidArgument("sandwich channel dimension mismatch".into()));
            }
            if !before.is_unital() || !after.is_unital() {
                return Err(Error::InvalidArgument("sandwich channels must be unital".into()));
            }
        }
        self.sandwiches = Some(sandwiches);
        Ok(self)
    }
}

/// The set of ideal states a bound searches over.
#[derive(Debug, Clone)]
pub enum StateSet {
    Explicit(Vec<DensityMatrix>),
    /// All pure states; searched by sampling `pair_samples` random pairs.
    AllPure { dim: usize, pair_samples: u64 },
}

impl StateSet {
    pub fn explicit(members: Vec<DensityMatrix>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidArgument("state set needs at least two members".into()));
        }
        let d = members[0].dim();
        if members.iter().any(|s| s.dim() != d) {
            return Err(Error::InvalidArgument("state set dimension mismatch".into()));
        }
        Ok(Self::Explicit(members))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Explicit(v) => v[0].dim(),
            Self::AllPure { dim, .. } => *dim,
        }
    }
}

/// Identifier of the evaluated bound formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaId {
    Thm1Fid,
    Thm1Rel,
    Prop2,
    Thm3,
    Thm4,
    Thm5,
    AppE1,
    AppE2,
    AppE3,
    AppE4,
    Thm6Prob,
    Thm6Moment,
    Thermal,
}

impl FormulaId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Thm1Fid => "thm1_fid",
            Self::Thm1Rel => "thm1_rel",
            Self::Prop2 => "prop2",
            Self::Thm3 => "thm3",
            Self::Thm4 => "thm4",
            Self::Thm5 => "thm5",
            Self::AppE1 => "appE1",
            Self::AppE2 => "appE2",
            Self::AppE3 => "appE3",
            Self::AppE4 => "appE4",
            Self::Thm6Prob => "thm6_prob",
            Self::Thm6Moment => "thm6_moment",
            Self::Thermal => "thermal",
        }
    }

    pub fn all() -> &'static [FormulaId] {
        &[
            Self::Thm1Fid,
            Self::Thm1Rel,
            Self::Prop2,
            Self::Thm3,
            Self::Thm4,
            Self::Thm5,
            Self::AppE1,
            Self::AppE2,
            Self::AppE3,
            Self::AppE4,
            Self::Thm6Prob,
            Self::Thm6Moment,
            Self::Thermal,
        ]
    }
}

/// Qualitative annotations attached to reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    /// A divergence sentinel made the route vacuous (zero bound).
    PerfectlyDistinguishable,
    /// No state pair met the distinguishability premise.
    EmptyFeasibleSet,
    /// The formula's validity condition failed; no value emitted.
    DomainViolated,
    /// A regression fell back to a simpler model.
    FitDegenerate,
    /// Too few trials for the reported standard deviation to be meaningful.
    LowTrials,
    /// Protocol assumed a noise strength different from the circuit's.
    AssumedNoiseMismatch,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PerfectlyDistinguishable => "PerfectlyDistinguishable",
            Self::EmptyFeasibleSet => "EmptyFeasibleSet",
            Self::DomainViolated => "DomainViolated",
            Self::FitDegenerate => "FitDegenerate",
            Self::LowTrials => "LowTrials",
            Self::AssumedNoiseMismatch => "AssumedNoiseMismatch",
        }
    }
}

/// Identifies the states/channel achieving a searched bound.
#[derive(Debug, Clone, Copy)]
pub struct Witness {
    pub state_hashes: (u64, u64),
    pub channel_index: usize,
}

/// An evaluated lower bound on the sample number, with the inputs echoed so
/// the value is reproducible.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    /// The bound value; `INFINITY` is a divergence sentinel and `NAN` means
    /// "no value" (see [`Flag::DomainViolated`]).
    pub value: f64,
    pub inputs: Vec<(String, f64)>,
    pub witness: Option<Witness>,
    pub flags: Vec<Flag>,
    pub extra: Vec<(String, f64)>,
}

/// Encode a float as JSON, keeping the sentinels textual rather than null.
pub fn json_f64(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x == f64::INFINITY {
        Value::String("inf".into())
    } else if x == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        json!(x)
    }
}

impl BoundReport {
    fn new(formula_id: FormulaId, value: f64) -> Self {
        Self { formula_id, value, inputs: Vec::new(), witness: None, flags: Vec::new(), extra: Vec::new() }
    }

    fn input(mut self, key: &str, v: f64) -> Self {
        self.inputs.push((key.to_string(), v));
        self
    }

    fn with_extra(mut self, key: &str, v: f64) -> Self {
        self.extra.push((key.to_string(), v));
        self
    }

    pub fn to_json(&self) -> Value {
        let inputs: serde_json::Map<String, Value> =
            self.inputs.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        let extra: serde_json::Map<String, Value> =
            self.extra.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        let witness = match &self.witness {
            None => Value::Null,
            Some(w) => json!({
                "state_hashes": [format!("{:016x}", w.state_hashes.0), format!("{:016x}", w.state_hashes.1)],
                "channel_index": w.channel_index,
            }),
        };
        json!({
            "formula_id": self.formula_id.as_str(),
            "value": json_f64(self.value),
            "inputs": inputs,
            "witness": witness,
            "flags": self.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "extra": extra,
        })
    }
}

// ---------------------------------------------------------------------------
// Scalar formulas
// ---------------------------------------------------------------------------

/// `log2(1 / (4 eps (1 - eps)))`; infinite at eps = 0, zero at eps = 1/2.
fn probability_numerator(epsilon: f64) -> f64 {
    let p = 4.0 * epsilon * (1.0 - epsilon);
    if p <= 0.0 {
        f64::INFINITY
    } else if p >= 1.0 {
        0.0
    } else {
        -p.log2()
    }
}

/// `-log2(1 - 1/(1+r)^2)` with `r = 2 sigma / d_eff`; infinite at sigma = 0,
/// vanishing as sigma grows.
fn moment_numerator(sigma_max: f64, d_eff: f64) -> f64 {
    debug_assert!(d_eff > 0.0);
    let r = 2.0 * sigma_max / d_eff;
    let inv = 1.0 / ((1.0 + r) * (1.0 + r));
    let arg = 1.0 - inv;
    if arg <= 0.0 {
        f64::INFINITY
    } else {
        -arg.log2()
    }
}

/// The divergence value feeding the per-copy scalar bound.
#[derive(Debug, Clone, Copy)]
pub enum DivergenceValue {
    /// Squared fidelity of the two noisy outputs, in (0, 1]; exactly zero is
    /// allowed and yields a vacuous bound.
    Fidelity(f64),
    /// Relative entropy of the two noisy outputs in bits; `INFINITY` yields a
    /// vacuous bound.
    RelativeEntropy(f64),
}

/// Per-copy scalar bounds on the sample number from the accuracy/probability
/// criterion: `log2[1/(4e(1-e))] / log2(1/F)` on the fidelity route and
/// `2 (1-2e)^2 / (ln 2 * S)` on the relative-entropy route.
pub fn thm1_scalar(value: DivergenceValue, epsilon: f64) -> Result<(f64, Vec<Flag>)> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 1/2]")));
    }
    match value {
        DivergenceValue::Fidelity(f) => {
            if !(0.0..=1.0 + 1e-12).contains(&f) {
                return Err(Error::InvalidArgument(format!("fidelity {f} outside [0, 1]")));
            }
            let num = probability_numerator(epsilon);
            if num == 0.0 {
                return Ok((0.0, vec![]));
            }
            if f == 0.0 {
                return Ok((0.0, vec![Flag::PerfectlyDistinguishable]));
            }
            let denom = -(f.min(1.0)).log2();
            if denom <= 0.0 {
                return Ok((f64::INFINITY, vec![]));
            }
            Ok((num / denom, vec![]))
        }
        DivergenceValue::RelativeEntropy(s) => {
            if s < 0.0 {
                return Err(Error::InvalidArgument(format!("relative entropy {s} negative")));
            }
            let num = 2.0 * (1.0 - 2.0 * epsilon) * (1.0 - 2.0 * epsilon);
            if num == 0.0 {
                return Ok((0.0, vec![]));
            }
            if s.is_infinite() {
                return Ok((0.0, vec![Flag::PerfectlyDistinguishable]));
            }
            if s == 0.0 {
                return Ok((f64::INFINITY, vec![]));
            }
            Ok((num / (LN_2 * s), vec![]))
        }
    }
}

/// Per-copy scalar bound from the standard-deviation/bias criterion.
pub fn thm3_scalar(
    fid: f64,
    sigma_max: f64,
    b_max: f64,
    d_o: f64,
) -> Result<(f64, Vec<Flag>)> {
    if !(0.0..=1.0 + 1e-12).contains(&fid) {
        return Err(Error::InvalidArgument(format!("fidelity {fid} outside [0, 1]")));
    }
    let d_eff = d_o - 2.0 * b_max;
    if d_eff <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "distinguishability {d_o} does not exceed twice the bias {b_max}"
        )));
    }
    if fid == 0.0 {
        return Ok((0.0, vec![Flag::PerfectlyDistinguishable]));
    }
    let num = moment_numerator(sigma_max, d_eff);
    if num == 0.0 {
        return Ok((0.0, vec![]));
    }
    let denom = -(fid.min(1.0)).log2();
    if denom <= 0.0 {
        return Ok((f64::INFINITY, vec![]));
    }
    Ok((num / denom, vec![]))
}

// ---------------------------------------------------------------------------
// State-set searches
// ---------------------------------------------------------------------------

struct CandidatePairs {
    pairs: Vec<(DensityMatrix, DensityMatrix)>,
}

fn candidate_pairs(states: &StateSet, seed: u64) -> Result<CandidatePairs> {
    match states {
        StateSet::Explicit(members) => {
            let mut pairs = Vec::new();
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    pairs.push((members[i].clone(), members[j].clone()));
                }
            }
            Ok(CandidatePairs { pairs })
        }
        StateSet::AllPure { dim, pair_samples } => {
            if *pair_samples == 0 {
                return Err(Error::InvalidArgument(
                    "all-pure state set needs a positive sampling budget".into(),
                ));
            }
            let pairs = (0..*pair_samples)
                .map(|k| {
                    let mut rng = derive_rng(seed, k);
                    Ok((
                        random_state(*dim, StateKind::Pure, &mut rng)?,
                        random_state(*dim, StateKind::Pure, &mut rng)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CandidatePairs { pairs })
        }
    }
}

/// Both reports (fidelity route and relative-entropy route) of the
/// accuracy/probability bound, searched over admissible state pairs and
/// minimized over the noise ensemble.
pub fn thm1_bound(
    states: &StateSet,
    ensemble: &NoiseEnsemble,
    oset: &ObservableSet,
    target: &AccuracyTarget,
    seed: u64,
) -> Result<(BoundReport, BoundReport)> {
    if states.dim() != ensemble.dim() || oset.dim() != ensemble.dim() {
        return Err(Error::InvalidArgument("state/ensemble/observable dimension mismatch".into()));
    }
    let candidates = candidate_pairs(states, seed)?;
    let mut admissible = 0u64;

    struct Best {
        value: f64,
        witness: Witness,
        flags: Vec<Flag>,
        divergence: f64,
    }
    let mut best_fid: Option<Best> = None;
    let mut best_rel: Option<Best> = None;

    for (rho, sigma) in &candidates.pairs {
        let d_o = observable_distinguishability(rho, sigma, oset)?;
        if d_o < 2.0 * target.delta - 1e-12 {
            continue;
        }
        admissible += 1;

        // Fidelity route: the least-constraining member has the largest
        // fidelity, i.e. the smallest scalar bound.
        let mut pair_fid: Option<(f64, usize, Vec<Flag>, f64)> = None;
        let mut pair_rel: Option<(f64, usize, Vec<Flag>, f64)> = None;
        for (idx, ch) in ensemble.members().iter().enumerate() {
            let out_rho = ch.apply(rho)?;
            let out_sigma = ch.apply(sigma)?;
            let f = fidelity(&out_rho, &out_sigma)?;
            let (vf, flf) = thm1_scalar(DivergenceValue::Fidelity(f), target.epsilon)?;
            if pair_fid.as_ref().map(|(v, ..)| vf < *v).unwrap_or(true) {
                pair_fid = Some((vf, idx, flf, f));
            }
            let s = relative_entropy(&out_rho, &out_sigma)?;
            let (vs, fls) = thm1_scalar(DivergenceValue::RelativeEntropy(s), target.epsilon)?;
            if pair_rel.as_ref().map(|(v, ..)| vs < *v).unwrap_or(true) {
                pair_rel = Some((vs, idx, fls, s));
            }
        }
        let hashes = (rho.content_hash(), sigma.content_hash());
        if let Some((v, idx, fl, f)) = pair_fid {
            if best_fid.as_ref().map(|b| v > b.value).unwrap_or(true) {
                best_fid = Some(Best {
                    value: v,
                    witness: Witness { state_hashes: hashes, channel_index: idx },
                    flags: fl,
                    divergence: f,
                });
            }
        }
        if let Some((v, idx, fl, s)) = pair_rel {
            if best_rel.as_ref().map(|b| v > b.value).unwrap_or(true) {
                best_rel = Some(Best {
                    value: v,
                    witness: Witness { state_hashes: hashes, channel_index: idx },
                    flags: fl,
                    divergence: s,
                });
            }
        }
    }

    let finish = |formula: FormulaId, best: Option<Best>, key: &str| -> BoundReport {
        match best {
            None => {
                let mut rep = BoundReport::new(formula, 0.0)
                    .input("delta", target.delta)
                    .input("epsilon", target.epsilon)
                    .input("admissible_pairs", 0.0);
                rep.flags.push(Flag::EmptyFeasibleSet);
                rep
            }
            Some(b) => {
                let mut rep = BoundReport::new(formula, b.value)
                    .input("delta", target.delta)
                    .input("epsilon", target.epsilon)
                    .input("admissible_pairs", admissible as f64)
                    .input(key, b.divergence);
                rep.witness = Some(b.witness);
                rep.flags = b.flags;
                rep
            }
        }
    };

    Ok((
        finish(FormulaId::Thm1Fid, best_fid, "fidelity"),
        finish(FormulaId::Thm1Rel, best_rel, "relative_entropy"),
    ))
}

/// Accuracy/probability bound through the generalized contraction
/// coefficient, valid when the target set contains all pure states.
pub fn prop2_bound(eta: f64, target: &AccuracyTarget) -> Result<BoundReport> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta {eta} must be finite and >= 0")));
    }
    let shrink = 2.0 * eta * target.delta;
    if shrink >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "formula domain needs 2 * eta * delta < 1, got {shrink}"
        )));
    }
    let num = probability_numerator(target.epsilon);
    let value = if num == 0.0 {
        0.0
    } else {
        let base = 1.0 - shrink;
        let denom = -2.0 * base.log2();
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            num / denom
        }
    };
    let mut rep = BoundReport::new(FormulaId::Prop2, value)
        .input("eta", eta)
        .input("delta", target.delta)
        .input("epsilon", target.epsilon);
    // Small-epsilon, small-delta approximation, reported alongside.
    if target.epsilon > 0.0 && eta > 0.0 && target.delta > 0.0 {
        let approx = -(4.0 * target.epsilon).log2() / (4.0 * eta * target.delta);
        rep = rep.with_extra("small_eps_delta_approx", approx);
    }
    Ok(rep)
}

/// Standard-deviation/bias bound searched over admissible state pairs and
/// minimized over the noise ensemble.
pub fn thm3_bound(
    states: &StateSet,
    ensemble: &NoiseEnsemble,
    oset: &ObservableSet,
    moments: &MomentTarget,
    seed: u64,
) -> Result<BoundReport> {
    if states.dim() != ensemble.dim() || oset.dim() != ensemble.dim() {
        return Err(Error::InvalidArgument("state/ensemble/observable dimension mismatch".into()));
    }
    let candidates = candidate_pairs(states, seed)?;
    let mut admissible = 0u64;
    let mut best: Option<(f64, Witness, Vec<Flag>, f64, f64)> = None;
    for (rho, sigma) in &candidates.pairs {
        let d_o = observable_distinguishability(rho, sigma, oset)?;
        if d_o - 2.0 * moments.b_max <= 1e-15 {
            continue;
        }
        admissible += 1;
        let mut pair: Option<(f64, usize, Vec<Flag>, f64)> = None;
        for (idx, ch) in ensemble.members().iter().enumerate() {
            let f = fidelity(&ch.apply(rho)?, &ch.apply(sigma)?)?;
            let (v, fl) = thm3_scalar(f, moments.sigma_max, moments.b_max, d_o)?;
            if pair.as_ref().map(|(pv, ..)| v < *pv).unwrap_or(true) {
                pair = Some((v, idx, fl, f));
            }
        }
        if let Some((v, idx, fl, f)) = pair {
            if best.as_ref().map(|(bv, ..)| v > *bv).unwrap_or(true) {
                let w = Witness {
                    state_hashes: (rho.content_hash(), sigma.content_hash()),
                    channel_index: idx,
                };
                best = Some((v, w, fl, f, d_o));
            }
        }
    }
    match best {
        None => {
            let mut rep = BoundReport::new(FormulaId::Thm3, 0.0)
                .input("sigma_max", moments.sigma_max)
                .input("b_max", moments.b_max)
                .input("admissible_pairs", 0.0);
            rep.flags.push(Flag::EmptyFeasibleSet);
            Ok(rep)
        }
        Some((v, w, fl, f, d_o)) => {
            let mut rep = BoundReport::new(FormulaId::Thm3, v)
                .input("sigma_max", moments.sigma_max)
                .input("b_max", moments.b_max)
                .input("admissible_pairs", admissible as f64)
                .input("fidelity", f)
                .input("distinguishability", d_o);
            rep.witness = Some(w);
            rep.flags = fl;
            Ok(rep)
        }
    }
}

// ---------------------------------------------------------------------------
// Layered-circuit bounds
// ---------------------------------------------------------------------------

fn layered_decay(spec: &LayeredSpec) -> f64 {
    (1.0 - spec.gamma).powi(2 * spec.layers as i32)
}

/// Layered-circuit bound for the accuracy/probability criterion:
/// `(1-2e)^2 / (2 ln2 * M * (1-gamma)^{2L})`.
pub fn thm4_bound(spec: &LayeredSpec, target: &AccuracyTarget) -> BoundReport {
    let m = spec.qubits as f64;
    let num = (1.0 - 2.0 * target.epsilon) * (1.0 - 2.0 * target.epsilon);
    let value = num / (2.0 * LN_2 * m * layered_decay(spec));
    BoundReport::new(FormulaId::Thm4, value)
        .input("qubits", m)
        .input("layers", spec.layers as f64)
        .input("gamma", spec.gamma)
        .input("epsilon", target.epsilon)
}

/// Layered-circuit bound for the standard-deviation/bias criterion.
pub fn thm5_bound(spec: &LayeredSpec, moments: &MomentTarget, d_o: f64) -> Result<BoundReport> {
    if d_o < 2.0 * moments.b_max {
        return Err(Error::InvalidArgument(format!(
            "distinguishability {d_o} below twice the bias {}",
            moments.b_max
        )));
    }
    let m = spec.qubits as f64;
    let d_eff = d_o - 2.0 * moments.b_max;
    let bracket = if d_eff <= 0.0 {
        0.0
    } else {
        let r = 2.0 * moments.sigma_max / d_eff;
        1.0 / ((r + 1.0) * (r + 1.0))
    };
    let value = bracket / (4.0 * m * layered_decay(spec));
    Ok(BoundReport::new(FormulaId::Thm5, value)
        .input("qubits", m)
        .input("layers", spec.layers as f64)
        .input("gamma", spec.gamma)
        .input("sigma_max", moments.sigma_max)
        .input("b_max", moments.b_max)
        .input("d_o", d_o))
}

/// The four alternative layered bounds that stay divergent in the
/// zero-failure / zero-deviation limits. Emits two reports per mode; the
/// second carries [`Flag::DomainViolated`] (and no value) when its validity
/// condition fails.
pub fn alternative_layered_bounds(spec: &LayeredSpec, mode: &PerformanceMode) -> Result<Vec<BoundReport>> {
    let m = spec.qubits as f64;
    let l = spec.layers as f64;
    let gamma = spec.gamma;
    let (numerator, ids, echo): (f64, (FormulaId, FormulaId), Vec<(String, f64)>) = match mode {
        PerformanceMode::Probability(t) => (
            probability_numerator(t.epsilon),
            (FormulaId::AppE1, FormulaId::AppE2),
            vec![("epsilon".into(), t.epsilon)],
        ),
        PerformanceMode::Moment { moments, d_o } => {
            let d_eff = d_o - 2.0 * moments.b_max;
            if d_eff <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "distinguishability {d_o} does not exceed twice the bias {}",
                    moments.b_max
                )));
            }
            (
                moment_numerator(moments.sigma_max, d_eff),
                (FormulaId::AppE3, FormulaId::AppE4),
                vec![
                    ("sigma_max".into(), moments.sigma_max),
                    ("b_max".into(), moments.b_max),
                    ("d_o".into(), *d_o),
                ],
            )
        }
    };

    let decay_2l = layered_decay(spec);
    let min_eig_floor = (gamma / 2.0).powi(spec.qubits as i32);
    let first_value = numerator * min_eig_floor / (8.0 * LN_2 * m * decay_2l);

    let mut first = BoundReport::new(ids.0, first_value)
        .input("qubits", m)
        .input("layers", l)
        .input("gamma", gamma);
    for (k, v) in &echo {
        first = first.input(k, *v);
    }

    // Validity: sqrt(2 ln2) sqrt(M) (1-gamma)^L <= 1/2.
    let decay_l = (1.0 - gamma).powi(spec.layers as i32);
    let validity = (2.0 * LN_2).sqrt() * m.sqrt() * decay_l;
    let mut second = BoundReport::new(ids.1, f64::NAN)
        .input("qubits", m)
        .input("layers", l)
        .input("gamma", gamma)
        .input("validity_lhs", validity);
    for (k, v) in &echo {
        second = second.input(k, *v);
    }
    if validity <= 0.5 {
        let bracket = l * (2.0 / (1.0 - gamma)).log2() + m - 0.5 * (m * LN_2 / 2.0).log2()
            + (m / 2.0) * (2.0 / gamma).log2();
        second.value = numerator * LN_2.sqrt() / ((8.0 * m).sqrt() * decay_l) / bracket;
    } else {
        second.flags.push(Flag::DomainViolated);
    }
    Ok(vec![first, second])
}

/// General layered bound in terms of a per-layer relative-entropy contraction
/// constant `xi`; reproduces the depolarizing bounds at `xi = (1-gamma)^2`.
pub fn thm6_bound(qubits: usize, layers: usize, xi: f64, mode: &PerformanceMode) -> Result<BoundReport> {
    if qubits == 0 || layers == 0 {
        return Err(Error::InvalidArgument("need at least one qubit and one layer".into()));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidArgument(format!("contraction constant {xi} outside (0, 1]")));
    }
    let m = qubits as f64;
    let decay = xi.powi(layers as i32);
    match mode {
        PerformanceMode::Probability(t) => {
            let num = (1.0 - 2.0 * t.epsilon) * (1.0 - 2.0 * t.epsilon);
            let value = num / (2.0 * LN_2 * m * decay);
            Ok(BoundReport::new(FormulaId::Thm6Prob, value)
                .input("qubits", m)
                .input("layers", layers as f64)
                .input("xi", xi)
                .input("epsilon", t.epsilon))
        }
        PerformanceMode::Moment { moments, d_o } => {
            if *d_o < 2.0 * moments.b_max {
                return Err(Error::InvalidArgument(format!(
                    "distinguishability {d_o} below twice the bias {}",
                    moments.b_max
                )));
            }
            let d_eff = d_o - 2.0 * moments.b_max;
            let bracket = if d_eff <= 0.0 {
                0.0
            } else {
                let r = 2.0 * moments.sigma_max / d_eff;
                1.0 / ((r + 1.0) * (r + 1.0))
            };
            let value = bracket / (4.0 * m * decay);
            Ok(BoundReport::new(FormulaId::Thm6Moment, value)
                .input("qubits", m)
                .input("layers", layers as f64)
                .input("xi", xi)
                .input("sigma_max", moments.sigma_max)
                .input("b_max", moments.b_max)
                .input("d_o", *d_o))
        }
    }
}

// ---------------------------------------------------------------------------
// Thermodynamic bounds
// ---------------------------------------------------------------------------

/// Von Neumann entropy in nats.
fn entropy_nats(rho: &DensityMatrix) -> Result<f64> {
    let (w, _) = eig_hermitian(rho.mat())?;
    let cutoff = SUPPORT_CUTOFF * w.last().copied().unwrap_or(0.0).max(0.0);
    Ok(-w.iter().filter(|&&p| p > cutoff).map(|&p| p * p.ln()).sum::<f64>())
}

/// Nonequilibrium free energy `F(rho) = Tr(rho H) - S(rho)/beta` (natural-log
/// entropy; energy units).
pub fn free_energy(rho: &DensityMatrix, hamiltonian: &Observable, beta: f64) -> Result<f64> {
    if rho.dim() != hamiltonian.dim() {
        return Err(Error::InvalidArgument("state/Hamiltonian dimension mismatch".into()));
    }
    if beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("beta {beta} must be positive")));
    }
    Ok(hamiltonian.expectation(rho) - entropy_nats(rho)? / beta)
}

/// Equilibrium free energy `-(1/beta) ln Tr exp(-beta H)`.
pub fn equilibrium_free_energy(hamiltonian: &Observable, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("beta {beta} must be positive")));
    }
    let (w, _) = eig_hermitian(hamiltonian.mat())?;
    let e0 = w[0];
    let log_z: f64 = w.iter().map(|&e| (-beta * (e - e0)).exp()).sum::<f64>().ln();
    Ok(e0 - log_z / beta)
}

/// Entropy production rate (nats per unit time) of a full-rank state under
/// the generator: `-Tr[L(tau) ln tau] - beta Tr[L(tau) H]`.
pub fn entropy_production_rate(tau: &DensityMatrix, l: &LiouvillianSpec) -> Result<f64> {
    if tau.dim() != l.dim() {
        return Err(Error::InvalidArgument("state/generator dimension mismatch".into()));
    }
    let (w, v) = eig_hermitian(tau.mat())?;
    if w[0] <= 1e-12 {
        return Err(Error::SingularState(format!("minimum eigenvalue {:.3e}", w[0])));
    }
    let ln_w: Vec<f64> = w.iter().map(|&x| x.ln()).collect();
    let ln_tau = v.matmul(&Matrix::from_diag(&ln_w)).matmul(&v.dagger());
    let flow = l.apply_matrix(tau.mat());
    let entropy_rate = -flow.matmul(&ln_tau).trace().re;
    let energy_rate = flow.matmul(l.hamiltonian().mat()).trace().re;
    Ok(entropy_rate - l.beta() * energy_rate)
}

/// Result of the entropy-production-to-free-energy-gap minimization.
#[derive(Debug, Clone)]
pub struct AlphaEntEstimate {
    /// Upper-bound estimate of the minimum ratio (a sampled minimum can only
    /// overestimate the true one).
    pub value: f64,
    pub witness: DensityMatrix,
    pub samples: u64,
}

fn ratio_for(l: &LiouvillianSpec, gibbs: &DensityMatrix, tau: &DensityMatrix) -> Result<Option<f64>> {
    let denom = relative_entropy(tau, gibbs)? * LN_2; // nats
    if !denom.is_finite() || denom < 1e-10 {
        return Ok(None);
    }
    let (w, _) = eig_hermitian(tau.mat())?;
    if w[0] <= 1e-9 {
        return Ok(None);
    }
    let num = entropy_production_rate(tau, l)?;
    Ok(Some(num / denom))
}

/// Estimate the exponential free-energy decay rate by minimizing the
/// entropy-production ratio over random full-rank states, refining each
/// sample with a fixed-length local descent so larger budgets always explore
/// a superset.
pub fn alpha_ent_estimate(l: &LiouvillianSpec, samples: u64, seed: u64) -> Result<AlphaEntEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let gibbs = l.gibbs_state()?;
    let d = l.dim();
    let mut best: Option<(f64, DensityMatrix)> = None;
    for i in 0..samples {
        let mut rng = derive_rng(seed, i);
        let base = match i % 2 {
            0 => random_state(d, StateKind::FullRank, &mut rng)?,
            _ => {
                let p = random_state(d, StateKind::Pure, &mut rng)?;
                let w = rng.random_range(0.3..0.95);
                p.blend(&gibbs, w)?
            }
        };
        let Some(mut ratio) = ratio_for(l, &gibbs, &base)? else { continue };
        let mut tau = base;
        let mut step = 0.08;
        for _ in 0..60 {
            let dir = crate::numkit::random_hermitian(d, &mut rng);
            let shift = &dir - &Matrix::identity(d).scale_re(dir.trace().re / d as f64);
            let cand_mat = tau.mat() + &shift.scale_re(step);
            let (w, v) = eig_hermitian(&cand_mat)?;
            let clamped: Vec<f64> = w.iter().map(|&x| x.max(1e-8)).collect();
            let total: f64 = clamped.iter().sum();
            let norm: Vec<f64> = clamped.iter().map(|x| x / total).collect();
            let cand = DensityMatrix::new(
                v.matmul(&Matrix::from_diag(&norm)).matmul(&v.dagger()),
            )?;
            if let Some(r) = ratio_for(l, &gibbs, &cand)? {
                if r < ratio {
                    ratio = r;
                    tau = cand;
                }
            }
            step *= 0.95;
        }
        if best.as_ref().map(|(b, _)| ratio < *b).unwrap_or(true) {
            best = Some((ratio, tau));
        }
    }
    let (value, witness) = best
        .ok_or_else(|| Error::InvalidArgument("no usable sample (all ratios degenerate)".into()))?;
    Ok(AlphaEntEstimate { value, witness, samples })
}

/// Sampling lower bound for mitigating thermal noise after time `t`: evolve
/// the state along the semigroup and feed its relative entropy to the Gibbs
/// state into the relative-entropy route. Also reports the free-energy gap.
pub fn thermal_sample_bound(
    rho0: &DensityMatrix,
    l: &LiouvillianSpec,
    t: f64,
    target: &AccuracyTarget,
) -> Result<BoundReport> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative evolution time {t}")));
    }
    let step = l.semigroup_step(t)?;
    let rho_t = step.apply(rho0)?;
    let gibbs = l.gibbs_state()?;
    let s_bits = relative_entropy(&rho_t, &gibbs)?;
    let (value, flags) = thm1_scalar(DivergenceValue::RelativeEntropy(s_bits), target.epsilon)?;
    let gap = s_bits * LN_2 / l.beta();
    let mut rep = BoundReport::new(FormulaId::Thermal, value)
        .input("t", t)
        .input("epsilon", target.epsilon)
        .input("beta", l.beta())
        .with_extra("relative_entropy_bits", s_bits)
        .with_extra("free_energy_gap", gap);
    rep.flags = flags;
    Ok(rep)
}
