//! Index of the heat lift of tD for a weighted shift: constant in t, and equal to
//! the kernel-projection limit for large t.

use ncindex::index::{ind_even_heat, ind_even_limit};
use ncindex::{ASCochain, Manifold, Model, Result};

fn main() -> Result<()> {
    let model = Model::circle(32, 8)?;
    let one = ASCochain::unit(Manifold::S1);
    for k in [1, -2] {
        let d = model.weighted_shift(k)?;
        let limit = ind_even_limit(&d, &one, &model, 0)?.value.re;
        print!("shift {k:+}: limit {limit:.6};");
        for t in [0.5, 1.0, 2.0, 4.0, 50.0] {
            print!(" t={t}: {:.10}", ind_even_heat(&d, t, &one, &model, 0)?.value.re);
        }
        println!();
    }
    Ok(())
}
