//! Suspended index of a Dirac-type operator on L²(S¹) against the Toeplitz index
//! of its positive spectral projection, over a few truncations. The gap closes
//! only like the inverse square of the phase width.

use ncindex::aspanier::{antisymmetrize, FunctionRep};
use ncindex::index::suspended_index;
use ncindex::{Model, Result, C64};

fn main() -> Result<()> {
    let potential = FunctionRep::circle([(0, C64::new(0.1, 0.0)), (1, C64::new(0.1, 0.05)), (-1, C64::new(0.1, -0.05))]);
    let phi = antisymmetrize(vec![(C64::new(1.0, 0.0), vec![FunctionRep::zbar(), FunctionRep::z()])])?;
    for n in [16, 32, 64] {
        let model = Model::circle_full(n, n / 4)?;
        let d = model.dirac(0.1, &potential)?;
        let r = suspended_index(&d, &phi, &model, 1, None)?;
        println!("N = {n:>3}: suspended {:.6}, Toeplitz {:.6}, residual {:.3e}", r.value, r.oracle.unwrap(), r.residual.unwrap());
    }
    Ok(())
}
