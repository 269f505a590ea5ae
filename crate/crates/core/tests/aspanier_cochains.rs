mod common;

use std::f64::consts::PI;

use common::*;
use ncindex::aspanier::{antisymmetrize, antisymmetrize_cochain, ASCochain, FunctionRep, Manifold, Point};
use ncindex::s3::Exponent;
use ncindex::{Model, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn points(manifold: Manifold, n: usize, r: &mut ChaCha8Rng) -> Vec<Point> {
    (0..n).map(|_| Point::random(manifold, r)).collect()
}

/// Random polynomial in `z, z̄` of total degree at most `deg`.
fn random_sphere_poly(r: &mut ChaCha8Rng, deg: u32) -> FunctionRep {
    let mut terms: Vec<(Exponent, C64)> = Vec::new();
    for a in 0..=deg {
        for b in 0..=deg - a {
            for cc in 0..=deg - a - b {
                for d in 0..=deg - a - b - cc {
                    if r.gen_bool(0.5) {
                        terms.push(([a, b, cc, d], gaussian(r)));
                    }
                }
            }
        }
    }
    terms.push(([1, 0, 0, 0], gaussian(r)));
    FunctionRep::sphere(terms)
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

#[test]
fn antisymmetrized_pair_and_repeated_slot() {
    let f = FunctionRep::z();
    let g = FunctionRep::circle([(2, c(1.0)), (0, c(0.5))]);
    let phi = antisymmetrize(vec![(c(1.0), vec![f.clone(), g.clone()])]).unwrap();
    let expect = ASCochain::from_terms(vec![(c(0.5), vec![f.clone(), g.clone()]), (c(-0.5), vec![g, f.clone()])]).unwrap();
    let mut r = rng(21);
    for _ in 0..10 {
        let p = points(Manifold::S1, 2, &mut r);
        assert!((phi.evaluate(&p).unwrap() - expect.evaluate(&p).unwrap()).norm() < 1e-14);
    }
    assert!(antisymmetrize(vec![(c(1.0), vec![f.clone(), f])]).unwrap().is_empty());
}

#[test]
fn antisymmetrization_is_a_signed_average() {
    let mut r = rng(22);
    let fs: Vec<FunctionRep> = (0..3).map(|_| random_trig(&mut r, 2)).collect();
    let raw = ASCochain::tensor(fs.clone()).unwrap();
    let phi = antisymmetrize(vec![(c(1.0), fs)]).unwrap();
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for _ in 0..5 {
        let p = points(Manifold::S1, 3, &mut r);
        // (1/6) Σ sgn(ν) f₀(x_{ν⁻¹0}) … equals the signed average of permuted evaluations
        let avg: C64 = perms
            .iter()
            .map(|nu| {
                let q: Vec<Point> = nu.iter().map(|&i| p[i]).collect();
                raw.evaluate(&q).unwrap() * permutation_sign(nu)
            })
            .sum::<C64>()
            / 6.0;
        assert!((phi.evaluate(&p).unwrap() - avg).norm() < 1e-12);
    }
}

#[test]
fn antisymmetry_and_projection() {
    let mut r = rng(23);
    let fs: Vec<FunctionRep> = (0..4).map(|_| random_sphere_poly(&mut r, 1)).collect();
    let phi = antisymmetrize(vec![(c(1.0), fs)]).unwrap();
    let twice = antisymmetrize_cochain(&phi).unwrap();
    for _ in 0..10 {
        let p = points(Manifold::S3, 4, &mut r);
        let v = phi.evaluate(&p).unwrap();
        for (i, j) in [(0, 1), (1, 3), (0, 2)] {
            let mut q = p.clone();
            q.swap(i, j);
            assert!((phi.evaluate(&q).unwrap() + v).norm() < 1e-12);
        }
        assert!((twice.evaluate(&p).unwrap() - v).norm() < 1e-12);
    }
}

#[test]
fn coboundary_of_a_function() {
    let mut r = rng(24);
    let g = random_trig(&mut r, 3);
    let dg = ASCochain::tensor(vec![g.clone()]).unwrap().coboundary();
    for _ in 0..10 {
        let p = points(Manifold::S1, 2, &mut r);
        let expect = g.eval(&p[1]).unwrap() - g.eval(&p[0]).unwrap();
        assert!((dg.evaluate(&p).unwrap() - expect).norm() < 1e-13);
    }
}

#[test]
fn coboundary_pointwise_in_degree_one() {
    let mut r = rng(25);
    let phi = ASCochain::tensor(vec![random_trig(&mut r, 2), random_trig(&mut r, 1)]).unwrap();
    let d = phi.coboundary();
    for _ in 0..10 {
        let p = points(Manifold::S1, 3, &mut r);
        let at = |i: usize, j: usize| phi.evaluate(&[p[i], p[j]]).unwrap();
        let expect = at(1, 2) - at(0, 2) + at(0, 1);
        assert!((d.evaluate(&p).unwrap() - expect).norm() < 1e-12);
    }
}

#[test]
fn coboundary_squares_to_zero() {
    let mut r = rng(26);
    let phi = ASCochain::tensor(vec![random_trig(&mut r, 2), random_trig(&mut r, 2)]).unwrap();
    let dd = phi.coboundary().coboundary();
    let psi = ASCochain::tensor(vec![random_sphere_poly(&mut r, 2), random_sphere_poly(&mut r, 1)]).unwrap();
    let ee = psi.coboundary().coboundary();
    for _ in 0..10 {
        assert!(dd.evaluate(&points(Manifold::S1, 4, &mut r)).unwrap().norm() < 1e-12);
        assert!(ee.evaluate(&points(Manifold::S3, 4, &mut r)).unwrap().norm() < 1e-12);
    }
}

#[test]
fn lambda_of_zbar_dz() {
    let m = Model::circle(8, 2).unwrap();
    let phi = ASCochain::tensor(vec![FunctionRep::zbar(), FunctionRep::z()]).unwrap();
    let v = phi.lambda_integral(&m).unwrap();
    assert!((v - C64::new(0.0, 2.0 * PI)).norm() < 1e-13);
}

/// `∫ f₀ f₁' dθ` by the trapezoidal rule, with `f₁'` taken termwise from the Fourier modes.
fn trapezoid_form(f0: &FunctionRep, f1: &FunctionRep, samples: usize) -> C64 {
    let modes = f1.circle_modes().unwrap();
    let h = 2.0 * PI / samples as f64;
    (0..samples)
        .map(|j| {
            let th = j as f64 * h;
            let d: C64 = modes.iter().map(|(k, a)| a * C64::new(0.0, *k as f64) * C64::new(0.0, *k as f64 * th).exp()).sum();
            f0.eval(&Point::Circle(th)).unwrap() * d * h
        })
        .sum()
}

#[test]
fn lambda_matches_trapezoidal_oracle() {
    let m = Model::circle(16, 8).unwrap();
    let mut r = rng(27);
    for _ in 0..5 {
        let (f0, f1) = (random_trig(&mut r, 3), random_trig(&mut r, 3));
        let v = ASCochain::tensor(vec![f0.clone(), f1.clone()]).unwrap().lambda_integral(&m).unwrap();
        assert!((v - trapezoid_form(&f0, &f1, 64)).norm() < 1e-12);
    }
}

#[test]
fn lambda_vanishes_on_coboundaries_and_constants() {
    let mut r = rng(28);
    let m = Model::circle(16, 8).unwrap();
    let dg = ASCochain::tensor(vec![random_trig(&mut r, 3)]).unwrap().coboundary();
    assert!(dg.lambda_integral(&m).unwrap().norm() < 1e-12);
    let k = FunctionRep::constant(Manifold::S1, c(2.0));
    let constant = ASCochain::tensor(vec![k.clone(), k]).unwrap();
    assert!(constant.lambda_integral(&m).unwrap().norm() < 1e-14);
    // below the top degree the integral is zero by convention
    assert_eq!(ASCochain::unit(Manifold::S1).lambda_integral(&m).unwrap(), C64::new(0.0, 0.0));

    let s = Model::sphere(4, 2).unwrap();
    let fs: Vec<FunctionRep> = (0..3).map(|_| random_sphere_poly(&mut r, 1)).collect();
    let d = ASCochain::tensor(fs).unwrap().coboundary();
    assert!(d.lambda_integral(&s).unwrap().norm() < 1e-9);
}

#[test]
fn lambda_rejects_other_manifolds() {
    let m = Model::sphere(3, 1).unwrap();
    let phi = ASCochain::tensor(vec![FunctionRep::zbar(), FunctionRep::z()]).unwrap();
    assert!(phi.lambda_integral(&m).is_err());
}

/// Point of S³ in Hopf coordinates `z₁ = cos η e^{iξ₁}`, `z₂ = sin η e^{iξ₂}`.
fn hopf(eta: f64, x1: f64, x2: f64) -> Point {
    Point::Sphere([C64::from_polar(eta.cos(), x1), C64::from_polar(eta.sin(), x2)])
}

fn det3(m: [[C64; 3]; 3]) -> C64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    (0..4)
        .map(|j| {
            let minor: Vec<Vec<f64>> = (1..4).map(|i| (0..4).filter(|&k| k != j).map(|k| m[i][k]).collect()).collect();
            let d = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
                - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
                + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
            if j % 2 == 0 { m[0][j] * d } else { -m[0][j] * d }
        })
        .sum()
}

/// Sign of the Hopf chart `(η, ξ₁, ξ₂)` against the boundary orientation of the
/// unit ball (outward normal first, then the chart frame, in `(x₁, y₁, x₂, y₂)`).
fn hopf_orientation() -> f64 {
    let (eta, x1, x2) = (0.6, 0.4, 1.1);
    let pos = |e: f64, a: f64, b: f64| [e.cos() * a.cos(), e.cos() * a.sin(), e.sin() * b.cos(), e.sin() * b.sin()];
    let h = 1e-6;
    let diff = |k: usize| -> [f64; 4] {
        let mut p = [eta, x1, x2];
        let mut m = p;
        p[k] += h;
        m[k] -= h;
        let (a, b) = (pos(p[0], p[1], p[2]), pos(m[0], m[1], m[2]));
        [0, 1, 2, 3].map(|i| (a[i] - b[i]) / (2.0 * h))
    };
    det4([pos(eta, x1, x2), diff(0), diff(1), diff(2)]).signum()
}

/// `∫_{S³} f₀ df₁ ∧ df₂ ∧ df₃` as the pullback to Hopf coordinates, with
/// finite-difference derivatives, Simpson's rule in η and the trapezoidal rule in ξ.
fn hopf_top_form(fs: &[FunctionRep]) -> C64 {
    let (n_eta, n_xi) = (240, 24);
    let h = 1e-5;
    let eval = |f: &FunctionRep, c: [f64; 3]| f.eval(&hopf(c[0], c[1], c[2])).unwrap();
    let deta = PI / 2.0 / n_eta as f64;
    let dxi = 2.0 * PI / n_xi as f64;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=n_eta {
        let eta = i as f64 * deta;
        let w = if i == 0 || i == n_eta { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        for a in 0..n_xi {
            for b in 0..n_xi {
                let at = [eta, a as f64 * dxi, b as f64 * dxi];
                let mut jac = [[C64::new(0.0, 0.0); 3]; 3];
                for (row, f) in fs[1..].iter().enumerate() {
                    for k in 0..3 {
                        let (mut p, mut m) = (at, at);
                        p[k] += h;
                        m[k] -= h;
                        jac[row][k] = (eval(f, p) - eval(f, m)) / (2.0 * h);
                    }
                }
                acc += eval(&fs[0], at) * det3(jac) * (w * deta / 3.0 * dxi * dxi);
            }
        }
    }
    acc * hopf_orientation()
}

#[test]
fn sphere_top_form_matches_hopf_quadrature() {
    let m = Model::sphere(3, 1).unwrap();
    let mut r = rng(29);
    let z1 = FunctionRep::sphere_monomial([1, 0, 0, 0]);
    let z2 = FunctionRep::sphere_monomial([0, 1, 0, 0]);
    let cases = vec![
        vec![z1.conj(), z1.clone(), z2.conj(), z2.clone()],
        (0..4).map(|_| random_sphere_poly(&mut r, 2)).collect::<Vec<_>>(),
    ];
    for fs in cases {
        let v = ASCochain::tensor(fs.clone()).unwrap().lambda_integral(&m).unwrap();
        let oracle = hopf_top_form(&fs);
        assert!((v - oracle).norm() < 1e-6 * oracle.norm().max(1.0), "{v} vs {oracle}");
    }
}

#[test]
fn top_cocycle_detection() {
    let mut r = rng(30);
    let phi = ASCochain::tensor(vec![random_trig(&mut r, 2), random_trig(&mut r, 2)]).unwrap();
    assert!(phi.is_top_cocycle(Manifold::S1));
    let dg = ASCochain::tensor(vec![random_trig(&mut r, 2)]).unwrap().coboundary();
    assert!(dg.is_top_cocycle(Manifold::S1));
    let psi = ASCochain::tensor(vec![random_sphere_poly(&mut r, 1), random_sphere_poly(&mut r, 1)]).unwrap();
    assert!(!psi.is_top_cocycle(Manifold::S3));
    let closed = ASCochain::tensor(vec![FunctionRep::one(Manifold::S3)]).unwrap().coboundary();
    assert!(closed.is_top_cocycle(Manifold::S3));
}

#[test]
fn json_round_trip_on_the_sphere() {
    let mut r = rng(31);
    let phi = ASCochain::tensor(vec![random_sphere_poly(&mut r, 2), random_sphere_poly(&mut r, 1)]).unwrap();
    let back = ASCochain::from_json(&phi.to_json()).unwrap();
    for _ in 0..5 {
        let p = points(Manifold::S3, 2, &mut r);
        assert!((phi.evaluate(&p).unwrap() - back.evaluate(&p).unwrap()).norm() < 1e-14);
    }
}
