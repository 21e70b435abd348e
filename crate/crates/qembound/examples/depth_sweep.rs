//! Minimal end-to-end demo: lower bounds vs the certified PEC sample
//! requirement as a single-qubit circuit gets deeper.
//!
//! Run with `cargo run --release --example depth_sweep`.

use qembound::bounds::{thm4_bound, AccuracyTarget, LayeredSpec};
use qembound::mitigation::{empirical_sample_requirement, LayeredCircuit, Protocol};
use qembound::numkit::{DensityMatrix, Matrix, Observable};

fn main() -> qembound::Result<()> {
    let gamma = 0.2;
    let target = AccuracyTarget::new(0.2, 0.1)?;
    let rho_in = DensityMatrix::basis_state(2, 0)?;
    let z = Observable::z();

    println!("{:>2}  {:>12}  {:>8}", "L", "lower bound", "PEC n");
    for layers in 1..=5 {
        let spec = LayeredSpec::new(1, layers, gamma)?
            .with_unitaries(vec![Matrix::identity(2); layers])?;
        let circuit = LayeredCircuit::from_spec(&spec, 7)?;
        let bound = thm4_bound(&spec, &target);
        let req = empirical_sample_requirement(
            &circuit,
            &rho_in,
            &z,
            &Protocol::Pec { assumed_gamma: None },
            &target,
            200,
            1 << 18,
            layers as u64,
        )?;
        println!("{layers:>2}  {:>12.4}  {:>8}", bound.value, req.require_certified()?);
    }
    Ok(())
}
