mod common;

use common::*;
use ncindex::aspanier::{antisymmetrize, ASCochain, FunctionRep, Manifold};
use ncindex::index::{
    cohomological_oracle, fredholm_index, ind_even, ind_even_heat, ind_even_invertible, ind_even_limit,
    ind_odd_relative, ind_odd_toeplitz, multicommutator, suspended_index_for_phase, toeplitz_multicommutator_trace,
    winding_number, IndexReport,
};
use ncindex::models::positive_spectral_projection;
use ncindex::{Error, Method, Model, Op, Parity, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn monomial(k: i64) -> FunctionRep {
    FunctionRep::circle_mode(k)
}

fn toeplitz_pair(m: &Model, u: &FunctionRep) -> (Op, Op) {
    let d = m.toeplitz(u).unwrap();
    let q = m.toeplitz(&u.conj()).unwrap();
    (d, q)
}

fn zbar_z() -> ASCochain {
    antisymmetrize(vec![(c(1.0), vec![FunctionRep::zbar(), FunctionRep::z()])]).unwrap()
}

fn unit() -> ASCochain {
    ASCochain::unit(Manifold::S1)
}

#[test]
fn fredholm_examples() {
    let m = Model::circle(16, 4).unwrap();
    for (k, expect) in [(1, -1.0), (0, 0.0), (3, -3.0), (-2, 2.0)] {
        let u = monomial(k);
        let (d, q) = toeplitz_pair(&m, &u);
        let r = fredholm_index(&d, &q, &m, Some(&u)).unwrap();
        assert!((r.value - expect).norm() < 1e-10, "z^{k}: {}", r.value);
        assert!(r.residual.unwrap() < 1e-10);
        // without a symbol the oracle comes from the kernels
        let r = fredholm_index(&d, &q, &m, None).unwrap();
        assert!(r.residual.unwrap() < 1e-10);
    }
    let u = FunctionRep::circle([(0, c(2.0)), (1, c(1.0))]);
    let d = m.toeplitz(&u).unwrap();
    let r = fredholm_index(&d, &d.inverse().unwrap(), &m, Some(&u)).unwrap();
    assert!(r.value.norm() < 1e-10 && r.residual.unwrap() < 1e-10);
}

#[test]
fn fredholm_rejects_short_pads() {
    let m = Model::circle(8, 1).unwrap();
    let u = monomial(3);
    let (d, q) = toeplitz_pair(&m, &u);
    assert!(matches!(fredholm_index(&d, &q, &m, Some(&u)), Err(Error::Window(_))));
}

#[test]
fn winding_numbers() {
    assert!((winding_number(&monomial(-4)).unwrap() + 4.0).abs() < 1e-9);
    let u = FunctionRep::circle([(0, c(2.0)), (1, c(1.0))]);
    assert!(winding_number(&u).unwrap().abs() < 1e-9);
    let u = FunctionRep::circle([(0, c(0.5)), (1, c(1.0))]);
    assert!((winding_number(&u).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn degree_zero_index_reproduces_fredholm() {
    let m = Model::circle(16, 4).unwrap();
    for k in [-2, 1, 3] {
        let u = monomial(k);
        let (d, q) = toeplitz_pair(&m, &u);
        let r = ind_even(&d, &q, &unit(), &m, 0).unwrap();
        let f = fredholm_index(&d, &q, &m, Some(&u)).unwrap();
        assert!((r.value + k as f64).norm() < 1e-10);
        assert!((r.value - f.value).norm() < 1e-10);
        assert_eq!(r.method, "hii");
    }
}

#[test]
fn additivity_over_products() {
    let m = Model::circle(24, 8).unwrap();
    let index = |u: &FunctionRep| {
        let (d, q) = toeplitz_pair(&m, u);
        ind_even(&d, &q, &unit(), &m, 0).unwrap().value
    };
    for (a, b) in [(2, 3), (-1, 4), (-3, -2), (4, -4)] {
        let (u, v) = (monomial(a), monomial(b));
        let uv = u.mul(&v).unwrap();
        assert!((index(&uv) - index(&u) - index(&v)).norm() < 1e-10);
        assert!((index(&uv) + (a + b) as f64).norm() < 1e-10);
    }
}

#[test]
fn coboundaries_have_zero_index() {
    let m = Model::circle(16, 4).unwrap();
    let psi = ASCochain::tensor(vec![FunctionRep::zbar(), FunctionRep::z()]).unwrap();
    let phi = psi.coboundary();
    assert_eq!(phi.degree(), 2);
    let (d, q) = toeplitz_pair(&m, &monomial(1));
    let r = ind_even(&d, &q, &phi, &m, 2).unwrap();
    assert!(r.value.norm() < 1e-8, "{}", r.value);
}

#[test]
fn odd_index_is_a_class_invariant() {
    let m = Model::circle_full(12, 4).unwrap();
    let p = m.hardy_projection();
    let mut r = rng(51);
    let phi = antisymmetrize(vec![(c(1.0), vec![random_trig(&mut r, 2), random_trig(&mut r, 2)])]).unwrap();
    let g = ASCochain::tensor(vec![random_trig(&mut r, 2)]).unwrap();
    let shifted = phi.add(&g.coboundary()).unwrap();
    let a = ind_odd_toeplitz(&p, &phi, &m).unwrap().value;
    let b = ind_odd_toeplitz(&p, &shifted, &m).unwrap().value;
    assert!((a - b).norm() < 1e-8);
    let a = ind_odd_relative(&p, &phi, &m, 1).unwrap().value;
    let b = ind_odd_relative(&p, &shifted, &m, 1).unwrap().value;
    assert!((a - b).norm() < 1e-8);
}

#[test]
fn heat_index_is_independent_of_time() {
    let m = Model::circle(16, 4).unwrap();
    let d = m.weighted_shift(1).unwrap();
    let values: Vec<C64> = [0.5, 1.0, 2.0, 4.0].iter().map(|&t| ind_even_heat(&d, t, &unit(), &m, 0).unwrap().value).collect();
    for v in &values {
        assert!((v - values[0]).norm() < 1e-8);
        assert!((v + 1.0).norm() < 1e-8);
    }
    let late = ind_even_heat(&d, 50.0, &unit(), &m, 0).unwrap();
    let limit = ind_even_limit(&d, &unit(), &m, 0).unwrap();
    assert!((late.value - limit.value).norm() < 1e-6);
    assert_eq!(late.method, "heat(50)");
}

#[test]
fn invertible_trace_formula_in_degree_zero() {
    let m = Model::circle(16, 4).unwrap();
    let d = m.toeplitz(&FunctionRep::circle([(0, c(2.0)), (1, c(1.0))])).unwrap();
    let f = FunctionRep::circle([(1, c(0.3)), (-1, c(1.0)), (0, c(0.5))]);
    let r = ind_even_invertible(&d, &ASCochain::tensor(vec![f.clone()]).unwrap(), &m).unwrap();
    // direct assembly of S_f = f − D⁻¹ f D
    let mf = m.multiplication(&f).unwrap();
    let s = &mf - &(&(&d.inverse().unwrap() * &mf) * &d);
    assert!((r.resolvent.value - m.interior_trace(&s).unwrap()).norm() < 1e-12);

    let k = ASCochain::tensor(vec![FunctionRep::constant(Manifold::S1, c(3.0))]).unwrap();
    assert!(ind_even_invertible(&d, &k, &m).unwrap().resolvent.value.norm() < 1e-12);
}

#[test]
fn invertible_trace_formula_vanishes_above_top_degree() {
    let m = Model::circle_full(32, 8).unwrap();
    let d = m.toeplitz(&FunctionRep::circle([(0, c(2.0)), (1, c(1.0))])).unwrap();
    let d = &d + &(&Op::identity(64) - &m.hardy_projection());
    let mut r = rng(52);
    let phi = antisymmetrize(vec![(c(1.0), (0..3).map(|_| random_trig(&mut r, 1)).collect())]).unwrap();
    let out = ind_even_invertible(&d, &phi, &m).unwrap();
    assert!(out.resolvent.value.norm() < 1e-8, "{}", out.resolvent.value);
    assert_eq!(out.resolvent.oracle, Some(C64::new(0.0, 0.0)));
}

#[test]
fn toeplitz_index_of_the_hardy_projection() {
    let m = Model::circle_full(8, 2).unwrap();
    let p = m.hardy_projection();
    let r = ind_odd_toeplitz(&p, &zbar_z(), &m).unwrap();
    // ½ Tr[T_z̄, T_z] = ½ Tr P₀ = ½, times (−1)·2!/1!
    assert!((r.value + 1.0).norm() < 1e-12);
    assert!(r.residual.unwrap() < 1e-12);
    assert_eq!(r.method, "hiidem2");

    let f = FunctionRep::z();
    let repeated = antisymmetrize(vec![(c(1.0), vec![f.clone(), f])]).unwrap();
    assert_eq!(ind_odd_toeplitz(&p, &repeated, &m).unwrap().value, C64::new(0.0, 0.0));
    // with P = I all compressions commute
    let all = ind_odd_toeplitz(&Op::identity(16), &zbar_z(), &m).unwrap();
    assert!(all.value.norm() < 1e-12 && all.oracle.is_none());
    assert!(matches!(ind_odd_toeplitz(&p.scale_real(0.5), &zbar_z(), &m), Err(Error::NotProjection(_))));
}

#[test]
fn relative_index_matches_toeplitz_index() {
    let m = Model::circle_full(8, 2).unwrap();
    let p = m.hardy_projection();
    let r = ind_odd_relative(&p, &zbar_z(), &m, 1).unwrap();
    assert!((r.value + 1.0).norm() < 1e-7, "{}", r.value);
    assert!(r.residual.unwrap() < 1e-7);
    let zero = ind_odd_relative(&Op::zeros(16), &zbar_z(), &m, 1).unwrap();
    assert!(zero.value.norm() < 1e-12);
    // P = I commutes with every multiplication operator
    let r = ind_odd_relative(&Op::identity(16), &zbar_z(), &m, 1).unwrap();
    assert!(r.value.norm() < 1e-10);
}

#[test]
fn suspended_index_of_trivial_phases() {
    let m = Model::circle_full(8, 2).unwrap();
    let r = suspended_index_for_phase(&Op::identity(16), &zbar_z(), &m, 1).unwrap();
    assert!(r.value.norm() < 1e-12);
    let d = m.dirac(0.0, &FunctionRep::constant(Manifold::S1, c(0.0))).unwrap();
    let f = &positive_spectral_projection(&d).unwrap().scale_real(2.0) - &Op::identity(16);
    let r = suspended_index_for_phase(&f, &zbar_z(), &m, 1).unwrap();
    assert!(r.value.norm() < 1e-12);
    assert_eq!(r.method, "sind");
}

#[test]
fn multicommutator_examples() {
    let mut r = rng(53);
    let (a, b, cc) = (random_op(&mut r, 2, 1.0), random_op(&mut r, 2, 1.0), random_op(&mut r, 2, 1.0));
    let two = multicommutator(&[a.clone(), b.clone()]).unwrap();
    assert!(two.dist(&a.commutator(&b).unwrap().scale_real(0.5)) < 1e-14);
    assert!(multicommutator(&[a.clone(), b.clone(), a.clone()]).unwrap().norm() < 1e-14);
    let p = |x: &Op, y: &Op, z: &Op| &(x * y) * z;
    let six = &(&(&(&(&p(&a, &b, &cc) - &p(&a, &cc, &b)) - &p(&b, &a, &cc)) + &p(&b, &cc, &a)) + &p(&cc, &a, &b)) - &p(&cc, &b, &a);
    let three = multicommutator(&[a.clone(), b.clone(), cc.clone()]).unwrap();
    assert!(three.dist(&six.scale_real(1.0 / 6.0)) < 1e-13);
    let many = vec![a; 9];
    assert!(multicommutator(&many).is_err());
}

#[test]
fn circle_oracle_matches_trace_form() {
    let m = Model::circle(16, 4).unwrap();
    let o = cohomological_oracle(Parity::Odd, &zbar_z(), &m).unwrap();
    assert!((o - 0.5).norm() < 1e-14);
    let t = toeplitz_multicommutator_trace(&[FunctionRep::zbar(), FunctionRep::z()], &m).unwrap();
    assert!((t - o).norm() < 1e-14);
    let half = m.clone().with_kappa(1, 2).unwrap();
    assert!((cohomological_oracle(Parity::Odd, &zbar_z(), &half).unwrap() - 0.25).norm() < 1e-14);
    let k = FunctionRep::constant(Manifold::S1, c(1.5));
    let flat = ASCochain::tensor(vec![k.clone(), k]).unwrap();
    assert!(cohomological_oracle(Parity::Odd, &flat, &m).unwrap().norm() < 1e-14);
    assert!(matches!(cohomological_oracle(Parity::Even, &unit(), &m), Err(Error::NotTopDegree { .. })));
    assert!(cohomological_oracle(Parity::Even, &zbar_z(), &m).is_err());
}

#[test]
fn report_residual_tracks_oracle() {
    let m = Model::circle(4, 1).unwrap();
    let plain = IndexReport::new(C64::new(2.0, 0.0), None, Method::Chi1, &m);
    assert!(plain.residual.is_none());
    let checked = plain.with_oracle(C64::new(2.0, 0.5));
    assert!((checked.residual.unwrap() - 0.5).abs() < 1e-15);
    let v = serde_json::to_value(&checked).unwrap();
    assert_eq!(v["method"], "chi1");
    assert_eq!(v["model"]["N"], 4);
}
