//! Distance and entropy functionals between quantum states, plus observable
//! statistics.
//!
//! Entropic quantities are in bits (base-2 logarithms) throughout; the
//! thermodynamic operations in [`crate::bounds`] convert to nats explicitly.
//! A relative entropy whose support condition fails is reported as the
//! `f64::INFINITY` sentinel, never as a large float.

use crate::numkit::{
    eig_hermitian, matrix_fn_psd, trace_norm, DensityMatrix, Matrix, MatrixFn, Observable,
    SUPPORT_CUTOFF,
};
use crate::{Error, Result};
use num_complex::Complex64 as C64;

/// Weight of a state eigenvector outside the reference support above which
/// the relative entropy is declared infinite.
const SUPPORT_LEAK_TOL: f64 = 1e-9;

/// The target set of observables for distinguishability.
#[derive(Debug, Clone)]
pub enum ObservableSet {
    /// An explicit, nonempty list of Hermitian observables.
    Explicit(Vec<Observable>),
    /// All effects `0 <= A <= I`; distinguishability then equals the trace
    /// distance.
    AllEffects { dim: usize },
}

impl ObservableSet {
    pub fn explicit(members: Vec<Observable>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("empty observable set".into()));
        }
        let d = members[0].dim();
        if members.iter().any(|a| a.dim() != d) {
            return Err(Error::InvalidArgument("observable set dimension mismatch".into()));
        }
        Ok(Self::Explicit(members))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Explicit(v) => v[0].dim(),
            Self::AllEffects { dim } => *dim,
        }
    }
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidArgument(format!(
            "state dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// `D_tr(rho, sigma) = ||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(0.5 * trace_norm(&(rho.mat() - sigma.mat()))?)
}

/// Squared fidelity `F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2`, computed
/// through the eigenvalues of `sqrt(rho) sigma sqrt(rho)` with tiny negative
/// eigenvalues clamped to zero.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let sq = matrix_fn_psd(rho.mat(), MatrixFn::Sqrt)?;
    let inner = sq.matmul(sigma.mat()).matmul(&sq);
    let sym = (&inner + &inner.dagger()).scale_re(0.5);
    let (w, _) = eig_hermitian(&sym)?;
    let wmax = w.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-14 * wmax;
    let root_sum: f64 = w.iter().filter(|&&x| x > cutoff).map(|&x| x.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Purified distance `sqrt(1 - F)`.
pub fn purified_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - fidelity(rho, sigma)?).max(0.0).sqrt().clamp(0.0, 1.0))
}

/// Relative entropy `S(rho || sigma)` in bits, evaluated on the joint
/// eigenbases. Returns `f64::INFINITY` when the support of `rho` leaks
/// outside the support of `sigma` by more than 1e-9 in weight.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let (p, u) = eig_hermitian(rho.mat())?;
    let (q, v) = eig_hermitian(sigma.mat())?;
    let p_cut = SUPPORT_CUTOFF * p.last().copied().unwrap_or(0.0).max(0.0);
    let q_cut = SUPPORT_CUTOFF * q.last().copied().unwrap_or(0.0).max(0.0);
    let d = rho.dim();

    let cross = u.dagger().matmul(&v);
    let mut entropy_term = 0.0;
    let mut cross_term = 0.0;
    let mut leak = 0.0;
    for i in 0..d {
        if p[i] <= p_cut {
            continue;
        }
        entropy_term += p[i] * p[i].log2();
        for j in 0..d {
            let w = cross.get(i, j).norm_sqr();
            if q[j] <= q_cut {
                leak += p[i] * w;
            } else {
                cross_term += p[i] * w * q[j].log2();
            }
        }
    }
    if leak > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    Ok((entropy_term - cross_term).max(0.0))
}

/// Sandwiched Renyi-2 relative entropy
/// `S2(rho || sigma) = log2 Tr[(sigma^{-1/2} rho sigma^{-1/2}) rho]`,
/// defined here for full-rank `sigma`.
pub fn renyi2_sandwiched(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let (q, v) = eig_hermitian(sigma.mat())?;
    if q[0] <= 1e-12 {
        return Err(Error::SingularReference(format!(
            "reference state minimum eigenvalue {:.3e}",
            q[0]
        )));
    }
    let inv_sqrt: Vec<f64> = q.iter().map(|&x| 1.0 / x.sqrt()).collect();
    let w = v.matmul(&Matrix::from_diag(&inv_sqrt)).matmul(&v.dagger());
    let t = w.matmul(rho.mat()).matmul(&w);
    let val = t.matmul(rho.mat()).trace().re;
    Ok(val.max(f64::MIN_POSITIVE).log2().max(0.0))
}

/// Binary relative entropy `D2(x || y)` in bits, for `x, y` strictly inside
/// (0, 1). Evaluated through `ln_1p` of the exact difference so results near
/// the diagonal keep full relative accuracy.
pub fn binary_relative_entropy(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "binary relative entropy needs open-interval arguments, got ({x}, {y})"
        )));
    }
    let delta = x - y;
    let nats = x * (delta / y).ln_1p() + (1.0 - x) * (-delta / (1.0 - y)).ln_1p();
    Ok(nats / std::f64::consts::LN_2)
}

/// `D_O(rho, sigma) = max_{A in O} |Tr[A (rho - sigma)]|`; equals the trace
/// distance for the all-effects set.
pub fn observable_distinguishability(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    oset: &ObservableSet,
) -> Result<f64> {
    check_dims(rho, sigma)?;
    if oset.dim() != rho.dim() {
        return Err(Error::InvalidArgument("observable set dimension mismatch".into()));
    }
    match oset {
        ObservableSet::AllEffects { .. } => trace_distance(rho, sigma),
        ObservableSet::Explicit(members) => {
            let diff = rho.mat() - sigma.mat();
            Ok(members
                .iter()
                .map(|a| a.mat().matmul(&diff).trace().re.abs())
                .fold(0.0, f64::max))
        }
    }
}

/// Standard deviation of the measurement distribution of `a` on `rho`:
/// `sqrt(Tr[(A - <A>)^2 rho])`.
pub fn observable_std_dev(a: &Observable, rho: &DensityMatrix) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::InvalidArgument("observable/state dimension mismatch".into()));
    }
    let mean = a.expectation(rho);
    let centered = a.mat() - &Matrix::identity(a.dim()).scale(C64::new(mean, 0.0));
    let second = centered.matmul(&centered).matmul(rho.mat()).trace().re;
    Ok(second.max(0.0).sqrt())
}

/// Smallest eigenvalue of a state.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let (w, _) = eig_hermitian(rho.mat()).expect("valid density matrix is Hermitian");
    w[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::KrausChannel;
    use crate::numkit::{derive_rng, random_state, StateKind};
    use approx::assert_abs_diff_eq;

    fn zero() -> DensityMatrix {
        DensityMatrix::basis_state(2, 0).unwrap()
    }

    fn one() -> DensityMatrix {
        DensityMatrix::basis_state(2, 1).unwrap()
    }

    fn mixed() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    #[test]
    fn trace_distance_examples() {
        assert_abs_diff_eq!(trace_distance(&zero(), &one()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&zero(), &zero()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&zero(), &mixed()).unwrap(), 0.5, epsilon = 1e-12);
        assert!(trace_distance(&zero(), &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = derive_rng(21, 0);
        let rho = random_state(4, StateKind::FullRank, &mut rng).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fidelity(&zero(), &one()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero(), &mixed()).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric() {
        let mut rng = derive_rng(21, 1);
        for _ in 0..20 {
            let a = random_state(4, StateKind::FullRank, &mut rng).unwrap();
            let b = random_state(4, StateKind::RankK(2), &mut rng).unwrap();
            let f1 = fidelity(&a, &b).unwrap();
            let f2 = fidelity(&b, &a).unwrap();
            assert_abs_diff_eq!(f1, f2, epsilon = 1e-9);
        }
    }

    #[test]
    fn purified_distance_examples() {
        assert_abs_diff_eq!(purified_distance(&zero(), &zero()).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(purified_distance(&zero(), &one()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            purified_distance(&zero(), &mixed()).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = derive_rng(22, 0);
        let rho = random_state(4, StateKind::FullRank, &mut rng).unwrap();
        assert_abs_diff_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(relative_entropy(&zero(), &mixed()).unwrap(), 1.0, epsilon = 1e-10);
        assert!(relative_entropy(&mixed(), &zero()).unwrap().is_infinite());
    }

    #[test]
    fn renyi2_examples() {
        let mut rng = derive_rng(23, 0);
        let rho = random_state(4, StateKind::FullRank, &mut rng).unwrap();
        assert_abs_diff_eq!(renyi2_sandwiched(&rho, &rho).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(renyi2_sandwiched(&zero(), &mixed()).unwrap(), 1.0, epsilon = 1e-10);
        assert!(renyi2_sandwiched(&mixed(), &zero()).is_err());
    }

    #[test]
    fn renyi2_dominates_relative_entropy() {
        let mut rng = derive_rng(23, 1);
        for _ in 0..50 {
            let rho = random_state(4, StateKind::FullRank, &mut rng).unwrap();
            let sig = random_state(4, StateKind::FullRank, &mut rng).unwrap();
            let s = relative_entropy(&rho, &sig).unwrap();
            let s2 = renyi2_sandwiched(&rho, &sig).unwrap();
            assert!(s2 >= s - 1e-8, "s2 {s2} < s {s}");
        }
    }

    #[test]
    fn binary_relative_entropy_examples() {
        assert_abs_diff_eq!(binary_relative_entropy(0.5, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        // Frozen oracle: 0.5*log2(2) + 0.5*log2(2/3).
        assert_abs_diff_eq!(
            binary_relative_entropy(0.5, 0.25).unwrap(),
            0.207518749639422,
            epsilon = 1e-12
        );
        for x in [0.1, 0.35, 0.6, 0.9] {
            for y in [0.2, 0.45, 0.7, 0.85] {
                let d = binary_relative_entropy(x, y).unwrap();
                assert!(d > 0.0 || (x - y).abs() < 1e-12);
            }
        }
        assert!(binary_relative_entropy(0.0, 0.5).is_err());
        assert!(binary_relative_entropy(0.5, 1.0).is_err());
    }

    #[test]
    fn distinguishability_examples() {
        let z_set = ObservableSet::explicit(vec![Observable::z()]).unwrap();
        assert_abs_diff_eq!(
            observable_distinguishability(&zero(), &one(), &z_set).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            observable_distinguishability(&zero(), &zero(), &z_set).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let all = ObservableSet::AllEffects { dim: 2 };
        assert_abs_diff_eq!(
            observable_distinguishability(&zero(), &mixed(), &all).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn std_dev_examples() {
        let z = Observable::z();
        assert_abs_diff_eq!(observable_std_dev(&z, &zero()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(observable_std_dev(&z, &mixed()).unwrap(), 1.0, epsilon = 1e-12);
        let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(observable_std_dev(&z, &plus).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_abs_diff_eq!(min_eigenvalue(&mixed()), 0.5, epsilon = 1e-12);
        assert!(min_eigenvalue(&zero()).abs() < 1e-10);
        let dep = KrausChannel::depolarizing(0.4).unwrap();
        let out = dep.apply(&zero()).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&out), 0.2, epsilon = 1e-12);
    }
}
