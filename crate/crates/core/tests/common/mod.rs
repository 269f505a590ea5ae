#![allow(dead_code)]

use ncindex::aspanier::FunctionRep;
use ncindex::{Op, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_op(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Op {
    Op::from_fn(n, |_, _| gaussian(rng) * scale)
}

/// `I + small` — well conditioned.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Op {
    random_op(rng, n, 0.4 / (n as f64).sqrt()).shift(c(1.0))
}

/// `S diag(1,…,1,0,…,0) S⁻¹` with a well-conditioned `S` and rank in `1..n`.
pub fn random_idempotent(rng: &mut ChaCha8Rng, n: usize) -> Op {
    let rank = rng.gen_range(1..n.max(2));
    let d: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let s = random_invertible(rng, n);
    &(&s * &Op::diag_real(&d)) * &s.inverse().unwrap()
}

/// Orthogonal projection onto a random subspace.
pub fn random_projection(rng: &mut ChaCha8Rng, n: usize) -> Op {
    let h = random_op(rng, n, 1.0);
    let h = &h + &h.adjoint();
    h.hermitian_fn(|x| if x > 0.0 { 1.0 } else { 0.0 })
}

/// Trigonometric polynomial with modes in `−bw..=bw`.
pub fn random_trig(rng: &mut ChaCha8Rng, bw: i64) -> FunctionRep {
    FunctionRep::circle((-bw..=bw).map(|k| (k, gaussian(rng))))
}

/// Real trigonometric polynomial with modes in `−bw..=bw`.
pub fn random_real_trig(rng: &mut ChaCha8Rng, bw: i64, scale: f64) -> FunctionRep {
    let mut modes = vec![(0, c(scale * rng.gen_range(-1.0..1.0)))];
    for k in 1..=bw {
        let a = gaussian(rng) * scale;
        modes.push((k, a));
        modes.push((-k, a.conj()));
    }
    FunctionRep::circle(modes)
}

/// [`random_trig`] with a bandwidth drawn from `bws`.
pub fn random_trig_upto(rng: &mut ChaCha8Rng, bws: std::ops::RangeInclusive<i64>) -> FunctionRep {
    let bw = rng.gen_range(bws);
    random_trig(rng, bw)
}
