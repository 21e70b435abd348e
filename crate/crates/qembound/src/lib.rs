//! Numerical toolkit for sample-complexity lower bounds on quantum error
//! mitigation.
//!
//! The crate evaluates universal lower bounds on the number of noisy-circuit
//! runs any error-mitigation protocol needs to reach a target accuracy, and
//! validates them at desk scale by simulating layered circuits under local
//! depolarizing (and related) noise with concrete protocols: probabilistic
//! error cancellation, zero-noise extrapolation, and an unmitigated baseline.
//!
//! Modules:
//!
//! - [`numkit`] — dense complex matrices, Hermitian eigendecomposition,
//!   matrix functions, random states and unitaries.
//! - [`channels`] — Kraus channels, superoperators, Choi matrices,
//!   Liouvillians and their semigroups.
//! - [`divergences`] — trace distance, fidelity, relative entropies, and
//!   observable statistics.
//! - [`contraction`] — contraction coefficients and constants for named
//!   noise families, plus numerical verification of contraction claims.
//! - [`bounds`] — evaluators for every sampling lower bound, from scalar
//!   formulas up to state-set searches and thermodynamic bounds.
//! - [`mitigation`] — exact noisy-circuit simulation, PEC/ZNE estimators,
//!   and the Monte Carlo harness measuring empirical sample requirements.
//! - [`suites`] — randomized inequality and contraction verification suites.

pub mod bounds;
pub mod channels;
pub mod contraction;
pub mod divergences;
mod error;
pub mod mitigation;
pub mod numkit;
pub mod suites;

pub use error::{Error, Result};
