//! Every combinatorial and 2πi prefactor used by the Chern characters, the index
//! evaluators and the cohomological oracles, kept in one place.

use std::f64::consts::PI;

use crate::op::C64;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn alternating(q: usize) -> f64 {
    if q.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient of `(E − ½) ⊗ E^{⊗2q}` in the Chern character of an idempotent.
pub fn ch_even(q: usize) -> f64 {
    alternating(q) * factorial(2 * q) / factorial(q)
}

/// Coefficient of `(U⁻¹ ⊗ U)^{⊗(q+1)}` in the Chern character of an invertible.
pub fn ch_odd(q: usize) -> f64 {
    alternating(q) * factorial(q)
}

/// Coefficient of the degree `2q+2` terms in the slant chain of an invertible path.
pub fn slant_odd(q: usize) -> f64 {
    -ch_odd(q)
}

/// Prefactor of the trace formula for an invertible lift: `(−1)^q q!`.
pub fn even_trace_formula(q: usize) -> f64 {
    alternating(q) * factorial(q)
}

/// Prefactor of the Toeplitz trace formula in degree `2q − 1`: `(−1)^q (2q)!/q!`.
/// This is also the factor relating the analytic index of the symbol to the
/// classical index pairing, `ind_φ(σ) = (−1)^q (2q)!/q! · Ind_φ(D)`.
pub fn odd_trace_formula(q: usize) -> f64 {
    alternating(q) * factorial(2 * q) / factorial(q)
}

/// `1/((2πi)^q q!)`: even-dimensional (`dim M = 2q`) volume prefactor, to be
/// multiplied by κ. Calibrated at the level of the antisymmetrized trace form.
pub fn even_volume(q: usize) -> C64 {
    two_pi_i(q).inv() / factorial(q)
}

/// `q!/((2πi)^q (2q)!)`: odd-dimensional (`dim M = 2q − 1`) volume prefactor, to
/// be multiplied by κ. On the circle it gives `Tr[T_z̄, T_z] = ½` with the
/// normalized bracket `½(AB − BA)`, which the two-mode computation confirms.
pub fn odd_volume(q: usize) -> C64 {
    two_pi_i(q).inv() * (factorial(q) / factorial(2 * q))
}

/// `(2πi)^q`.
pub fn two_pi_i(q: usize) -> C64 {
    C64::new(0.0, 2.0 * PI).powu(q as u32)
}

/// `∫_0^{π/2} (sin t cos t)^{2q+1} dt = ½ (q!)² / (2q+1)!`, the weight picked up by
/// the degree `2q+1` part of the transgression along the tautological path.
pub fn beta_weight(q: usize) -> f64 {
    0.5 * factorial(q) * factorial(q) / factorial(2 * q + 1)
}
