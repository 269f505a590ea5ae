//! Trace of Toeplitz multicommutators against the volume integral of the
//! antisymmetrized cochain, on the circle and on the three-sphere, and the
//! vanishing of longer multicommutators.

use ncindex::aspanier::FunctionRep;
use ncindex::index::{cohomological_oracle, toeplitz_multicommutator_trace};
use ncindex::{ASCochain, Model, Parity, Result, C64};

fn main() -> Result<()> {
    let circle = Model::circle(64, 16)?;
    let f0 = FunctionRep::circle([(-1, C64::new(1.0, 0.0)), (2, C64::new(0.0, 0.5))]);
    let f1 = FunctionRep::circle([(1, C64::new(1.0, 0.0)), (-2, C64::new(0.3, 0.0))]);
    let fs = vec![f0.clone(), f1.clone()];
    let lhs = toeplitz_multicommutator_trace(&fs, &circle)?;
    let rhs = cohomological_oracle(Parity::Odd, &ASCochain::tensor(fs)?, &circle)?;
    println!("S¹:  Tr[T_f0, T_f1] = {lhs:.10}, volume side = {rhs:.10}");

    let four = vec![f0.clone(), f1.clone(), f1, f0];
    println!("S¹:  |Tr[T_f0, T_f1, T_f1, T_f0]| = {:.2e}", toeplitz_multicommutator_trace(&four, &circle)?.norm());

    // convergence is slow on S³; the gap shrinks as the degree cutoff grows
    let e = FunctionRep::sphere_monomial;
    let fs = vec![e([0, 0, 1, 0]), e([1, 0, 0, 0]), e([0, 0, 0, 1]), e([0, 1, 0, 0])];
    for n in [4, 6, 8] {
        let sphere = Model::sphere(n, 2)?;
        let lhs = toeplitz_multicommutator_trace(&fs, &sphere)?;
        let rhs = cohomological_oracle(Parity::Odd, &ASCochain::tensor(fs.clone())?, &sphere)?;
        println!("S³ degree < {n}: trace {:.6}, volume side {:.6}", lhs.re, rhs.re);
    }
    Ok(())
}
