//! Polynomials on C² restricted to the unit sphere S³, and the monomial
//! integrals needed by the S³ Hardy model.
//!
//! A monomial `z₁^{a₁} z₂^{a₂} z̄₁^{b₁} z̄₂^{b₂}` is keyed by `[a₁, a₂, b₁, b₂]`.
//! Sphere integrals use the normalized surface measure (total mass 1).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::op::{C64, ZERO};

pub type Exponent = [u32; 4];
pub type SpherePoly = BTreeMap<Exponent, C64>;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn total_degree(e: &Exponent) -> u32 {
    e.iter().sum()
}

/// `∫_{S³} z^α z̄^β dσ` for the normalized measure: `δ_{αβ} α! / (1+|α|)!`.
pub fn sphere_monomial_integral(e: &Exponent) -> f64 {
    if e[0] != e[2] || e[1] != e[3] {
        return 0.0;
    }
    factorial(e[0]) * factorial(e[1]) / factorial(1 + e[0] + e[1])
}

/// `∫_{B⁴} z^α z̄^β dV` for Lebesgue measure: `δ_{αβ} π² α! / (2+|α|)!`.
pub fn ball_monomial_integral(e: &Exponent) -> f64 {
    if e[0] != e[2] || e[1] != e[3] {
        return 0.0;
    }
    PI * PI * factorial(e[0]) * factorial(e[1]) / factorial(2 + e[0] + e[1])
}

pub fn poly_mul(a: &SpherePoly, b: &SpherePoly) -> SpherePoly {
    let mut out = SpherePoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
            *out.entry(e).or_insert(ZERO) += ca * cb;
        }
    }
    out.retain(|_, c| *c != ZERO);
    out
}

pub fn poly_add(a: &SpherePoly, b: &SpherePoly, scale_b: C64) -> SpherePoly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(*e).or_insert(ZERO) += c * scale_b;
    }
    out.retain(|_, c| *c != ZERO);
    out
}

/// Wirtinger derivative with respect to variable `var` (0: z₁, 1: z₂, 2: z̄₁, 3: z̄₂).
pub fn poly_diff(a: &SpherePoly, var: usize) -> SpherePoly {
    let mut out = SpherePoly::new();
    for (e, c) in a {
        if e[var] == 0 {
            continue;
        }
        let mut d = *e;
        d[var] -= 1;
        *out.entry(d).or_insert(ZERO) += c * e[var] as f64;
    }
    out.retain(|_, c| *c != ZERO);
    out
}

pub fn poly_conj(a: &SpherePoly) -> SpherePoly {
    a.iter().map(|(e, c)| ([e[2], e[3], e[0], e[1]], c.conj())).collect()
}

pub fn poly_eval(a: &SpherePoly, z: [C64; 2]) -> C64 {
    let w = [z[0], z[1], z[0].conj(), z[1].conj()];
    a.iter()
        .map(|(e, c)| {
            let mut v = *c;
            for (k, &p) in e.iter().enumerate() {
                v *= w[k].powu(p);
            }
            v
        })
        .sum()
}

pub fn sphere_integral(a: &SpherePoly) -> C64 {
    a.iter().map(|(e, c)| c * sphere_monomial_integral(e)).sum()
}

pub fn ball_integral(a: &SpherePoly) -> C64 {
    a.iter().map(|(e, c)| c * ball_monomial_integral(e)).sum()
}

/// `∫_{S³} f₀ df₁ ∧ df₂ ∧ df₃` (surface orientation induced from the unit ball),
/// evaluated through Stokes: `∫_{B⁴} df₀ ∧ df₁ ∧ df₂ ∧ df₃`. In the coordinates
/// `(z₁, z₂, z̄₁, z̄₂)` the 4-form is the Jacobian determinant times
/// `dz₁ ∧ dz₂ ∧ dz̄₁ ∧ dz̄₂ = 4 dV`.
pub fn top_form_integral(fs: &[&SpherePoly; 4]) -> C64 {
    let grads: Vec<Vec<SpherePoly>> = fs.iter().map(|f| (0..4).map(|v| poly_diff(f, v)).collect()).collect();
    let mut det = SpherePoly::new();
    for perm in permutations(4) {
        let mut term: SpherePoly = [([0, 0, 0, 0], C64::new(perm_sign(&perm), 0.0))].into_iter().collect();
        for (i, &j) in perm.iter().enumerate() {
            term = poly_mul(&term, &grads[i][j]);
            if term.is_empty() {
                break;
            }
        }
        det = poly_add(&det, &term, C64::new(1.0, 0.0));
    }
    ball_integral(&det) * 4.0
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

pub fn perm_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Holomorphic monomial basis `z₁^{a} z₂^{b}` of total degree `< n`, ordered by
/// degree and then by decreasing power of `z₁`, with squared norms `a! b! / (1+a+b)!`.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub exponents: Vec<[u32; 2]>,
    pub norms_sq: Vec<f64>,
}

impl MonomialBasis {
    pub fn new(n: u32) -> Self {
        let mut exponents = Vec::new();
        for d in 0..n {
            for a in (0..=d).rev() {
                exponents.push([a, d - a]);
            }
        }
        let norms_sq = exponents.iter().map(|&[a, b]| sphere_monomial_integral(&[a, b, a, b])).collect();
        MonomialBasis { exponents, norms_sq }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn index_of(&self, e: [u32; 2]) -> Option<usize> {
        let d = e[0] + e[1];
        let start = (d * (d + 1) / 2) as usize;
        let idx = start + (d - e[0]) as usize;
        (idx < self.len()).then_some(idx)
    }

    /// Inner products `⟨z^α, z^β⟩` of the basis monomials (diagonal in this basis).
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut g = vec![vec![0.0; n]; n];
        for (i, a) in self.exponents.iter().enumerate() {
            for (j, b) in self.exponents.iter().enumerate() {
                g[i][j] = sphere_monomial_integral(&[a[0], a[1], b[0], b[1]]);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_measure() {
        assert_eq!(sphere_monomial_integral(&[0, 0, 0, 0]), 1.0);
        assert!((sphere_monomial_integral(&[1, 0, 1, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(sphere_monomial_integral(&[1, 0, 0, 1]), 0.0);
    }

    #[test]
    fn ball_volume() {
        assert!((ball_monomial_integral(&[0, 0, 0, 0]) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn basis_indexing() {
        let b = MonomialBasis::new(4);
        assert_eq!(b.len(), 10);
        for (i, e) in b.exponents.iter().enumerate() {
            assert_eq!(b.index_of(*e), Some(i));
        }
    }

    #[test]
    fn permutation_count_and_signs() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p.iter().map(|q| perm_sign(q)).sum::<f64>(), 0.0);
    }
}
