//! Checks b² = 0, B² = 0 and bB + Bb = 0 on a small hand-built chain, and shows
//! how normalization drops tensors with a scalar factor.

use ncindex::{Chain, Op, Result, C64};

fn main() -> Result<()> {
    let a = Op::from_real_rows(&[&[1.0, 2.0], &[0.0, -1.0]])?;
    let b = Op::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    let c = Op::from_real_rows(&[&[2.0, 0.0], &[1.0, 3.0]])?;

    let mut chain = Chain::zero(2, 2);
    chain.push(C64::new(1.0, 0.0), vec![a.clone(), b.clone(), c.clone()])?;
    chain.push(C64::new(0.0, 0.5), vec![c.clone(), a.clone(), b.clone()])?;
    // a ⊗ 1 ⊗ b is zero in the normalized complex
    chain.push(C64::new(3.0, 0.0), vec![a.clone(), Op::identity(2), b.clone()])?;
    let chain = chain.normalized();
    println!("normalized chain keeps {} of 3 terms", chain.len());

    println!("|b b c|      = {:.2e}", chain.b()?.b()?.residual());
    println!("|B B c|      = {:.2e}", chain.big_b().big_b().residual());
    println!("|(bB + Bb)c| = {:.2e}", chain.b()?.big_b().add(&chain.big_b().b()?)?.residual());
    Ok(())
}
