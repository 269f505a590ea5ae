//! Chern characters of an idempotent and of an invertible are (b + B)-cycles, and
//! along a path the endpoint difference is the boundary of the transgressed chain.

use ncindex::chern::{ch_idempotent, ch_invertible, exp_path, transgress, transgression_residual, unit_path};
use ncindex::{Op, Result, C64};

fn main() -> Result<()> {
    // oblique rank-one idempotent
    let e = Op::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]])?;
    let u = Op::from_real_rows(&[&[1.0, 0.3], &[-0.2, 0.9]])?;
    println!("(b+B) ch(E) residual: {:.2e}", ch_idempotent(&e, 4)?.boundary()?.residual());
    println!("(b+B) ch(U) residual: {:.2e}", ch_invertible(&u, 3)?.boundary()?.residual());

    // t ↦ diag(U, U⁻¹) rotated into 1, and t ↦ exp(2πi t P)
    for (name, path, cutoff) in [("unit path", unit_path(&u)?, 3), ("exponential path", exp_path(&e)?, 4)] {
        let tch = transgress(&path, cutoff)?;
        println!("{name}: ch(end) − ch(start) − (b+B)Tch = {:.2e}", transgression_residual(&path, &tch, 1)?);
    }

    // for the exponential loop the transgression is 2πi ch(P)
    let tch = transgress(&exp_path(&e)?, 2)?;
    let expected = ch_idempotent(&e, 2)?.scale(C64::new(0.0, 2.0 * std::f64::consts::PI));
    println!("Tch vs 2πi ch(P): {:.2e}", tch.sub(&expected)?.residual());
    Ok(())
}
