//! Gauss–Legendre rules and trapezoid sums.

use std::f64::consts::PI;

/// Default number of Gauss–Legendre nodes per smooth piece.
pub const DEFAULT_NODES: usize = 32;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0, "quadrature needs at least one node");
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n).into_iter().map(|(x, w)| (mid + half * x, half * w)).collect()
}

/// Integrates a real function over `[a, b]` with `n` nodes.
pub fn integrate(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    gauss_legendre_on(a, b, n).into_iter().map(|(t, w)| w * f(t)).sum()
}

/// Equispaced angles `2πj/n`, the nodes of the periodic trapezoid rule.
pub fn circle_nodes(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        for n in [1, 2, 5, 32, 64] {
            let s: f64 = gauss_legendre_on(0.3, 2.0, n).iter().map(|p| p.1).sum();
            assert!((s - 1.7).abs() < 1e-14, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // a 32-point rule is exact up to degree 63
        let v = integrate(-1.0, 1.0, 32, |x| x.powi(62));
        assert!((v - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn beta_integrals() {
        // ∫_0^{π/2} sin^{2q+1} cos^{2q+1} = ½ (q!)² / (2q+1)!
        let q0 = integrate(0.0, PI / 2.0, 32, |t| t.sin() * t.cos());
        let q1 = integrate(0.0, PI / 2.0, 32, |t| (t.sin() * t.cos()).powi(3));
        assert!((q0 - 0.5).abs() < 1e-12);
        assert!((q1 - 1.0 / 12.0).abs() < 1e-12);
    }
}
