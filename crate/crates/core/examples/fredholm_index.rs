//! Index of truncated Toeplitz operators T_{z^k} from their parametrix, against
//! minus the winding number of the symbol, and additivity under products.

use ncindex::aspanier::FunctionRep;
use ncindex::index::fredholm_index;
use ncindex::{Model, Result};

fn main() -> Result<()> {
    let model = Model::circle(32, 8)?;
    println!("{:>4} {:>10} {:>10}", "k", "index", "-winding");
    for k in -3..=3 {
        let u = FunctionRep::circle_mode(k);
        let r = fredholm_index(&model.toeplitz(&u)?, &model.toeplitz(&u.conj())?, &model, Some(&u))?;
        println!("{k:>4} {:>10.6} {:>10.6}", r.value.re, r.oracle.unwrap().re);
    }

    // additivity: T_{z^a} T_{z^b} with parametrix T_{z̄^b} T_{z̄^a}, checked against kernel dimensions
    for (a, b) in [(2, -1), (-3, 1), (2, 2)] {
        let t = |k: i64| model.toeplitz(&FunctionRep::circle_mode(k));
        let r = fredholm_index(&(&t(a)? * &t(b)?), &(&t(-b)? * &t(-a)?), &model, None)?;
        println!("T_z^{a} T_z^{b}: index {:.6}, dim ker D − dim ker D* = {:.6}", r.value.re, r.oracle.unwrap().re);
    }
    Ok(())
}
