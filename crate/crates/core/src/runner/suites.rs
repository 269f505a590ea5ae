//! Expansion of each suite into named checks. Random inputs are drawn at plan
//! time from a generator keyed by the config seed and the check name.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use super::{CheckResult, CheckSpec, ExperimentConfig, Outcome, Plan, Suite};
use crate::aspanier::{antisymmetrize, ASCochain, FunctionRep, Manifold};
use crate::chern::{
    ch_idempotent, ch_invertible, exp_path, suspension_loop, transgress, transgression_residual, unit_path,
};
use crate::cyclic::{Chain, Parity};
use crate::error::{Error, Result};
use crate::index::{
    cohomological_oracle, fredholm_index, ind_even_heat, ind_even_limit, resolvent_multicommutator_trace,
    suspended_index, toeplitz_multicommutator_trace,
};
use crate::models::{localized_phase, Model, Space};
use crate::op::{Op, C64, ONE, ZERO};

pub(super) const BICOMPLEX_TOL: f64 = 1e-12;
pub(super) const CHERN_TOL: f64 = 1e-10;
pub(super) const TRANSGRESSION_TOL: f64 = 1e-7;
pub(super) const FREDHOLM_TOL: f64 = 1e-10;
pub(super) const PIN_TOL: f64 = 1e-12;
pub(super) const HELTON_HOWE_TOL: f64 = 1e-9;
pub(super) const VANISHING_TOL: f64 = 1e-8;
pub(super) const SPHERE_TOL: f64 = 1e-2;
pub(super) const SUSPENSION_TOL: f64 = 1e-6;
pub(super) const HEAT_TOL: f64 = 1e-8;
pub(super) const HEAT_LIMIT_TOL: f64 = 1e-6;

const MAX_CASES: usize = 1000;
const MAX_DIM: usize = 8;
const MAX_DEGREE: usize = 6;

pub(super) fn plan(suite: Suite, cfg: &ExperimentConfig, model: &Model) -> Result<Plan> {
    let p = Params::new(cfg, suite)?;
    match suite {
        Suite::Identities => identities(cfg, &p),
        Suite::Fredholm => fredholm(cfg, &p, model),
        Suite::HeltonHowe => helton_howe(cfg, &p, model),
        Suite::Suspension => suspension(cfg, &p, model),
        Suite::Heat => heat(cfg, &p, model),
        Suite::Sweep => sweep(cfg, &p, model),
    }
}

struct Params<'a> {
    map: &'a serde_json::Map<String, Value>,
}

impl<'a> Params<'a> {
    fn new(cfg: &'a ExperimentConfig, suite: Suite) -> Result<Self> {
        let known = suite.info().params;
        if let Some(k) = cfg.params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Invalid(format!("unknown parameter '{k}' for suite {} (known: {})", suite.name(), known.join(", "))));
        }
        Ok(Params { map: &cfg.params })
    }

    fn bad(key: &str, want: &str, v: &Value) -> Error {
        Error::Invalid(format!("parameter {key} must be {want}, got {v}"))
    }

    fn count(&self, key: &str, default: usize, range: std::ops::RangeInclusive<usize>) -> Result<usize> {
        let Some(v) = self.map.get(key) else { return Ok(default) };
        let n = v.as_u64().ok_or_else(|| Self::bad(key, "a non-negative integer", v))? as usize;
        if !range.contains(&n) {
            return Err(Error::Invalid(format!("parameter {key} = {n} outside {}..={}", range.start(), range.end())));
        }
        Ok(n)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.map.get(key).map(|v| v.as_f64().ok_or_else(|| Self::bad(key, "a number", v))).transpose()
    }

    fn list<T>(&self, key: &str, default: Vec<T>, get: impl Fn(&Value) -> Option<T>, want: &str) -> Result<Vec<T>> {
        let Some(v) = self.map.get(key) else { return Ok(default) };
        let items = v.as_array().filter(|a| !a.is_empty()).ok_or_else(|| Self::bad(key, want, v))?;
        items.iter().map(|x| get(x).ok_or_else(|| Self::bad(key, want, v))).collect()
    }
}

/// FNV-1a, so that seeds do not depend on the standard hasher.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn rng_for(cfg: &ExperimentConfig, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ name_hash(name))
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_op(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Op {
    Op::from_fn(n, |_, _| gaussian(rng) * scale)
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Op {
    random_op(rng, n, 0.4 / (n as f64).sqrt()).shift(ONE)
}

fn random_idempotent(rng: &mut ChaCha8Rng, n: usize) -> Result<Op> {
    let rank = rng.gen_range(1..n.max(2));
    let d: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let s = random_invertible(rng, n);
    Ok(&(&s * &Op::diag_real(&d)) * &s.inverse()?)
}

fn random_trig(rng: &mut ChaCha8Rng, max_bw: i64) -> FunctionRep {
    let bw = rng.gen_range(1..=max_bw.max(1));
    FunctionRep::circle((-bw..=bw).map(|k| (k, gaussian(rng))))
}

fn random_real_trig(rng: &mut ChaCha8Rng, bw: i64, scale: f64) -> FunctionRep {
    let mut modes = vec![(0, C64::new(scale * rng.gen_range(-1.0..1.0), 0.0))];
    for k in 1..=bw {
        let a = gaussian(rng) * scale;
        modes.push((k, a));
        modes.push((-k, a.conj()));
    }
    FunctionRep::circle(modes)
}

fn require(model: &Model, manifold: Manifold, space: Space, suite: Suite) -> Result<()> {
    if model.manifold() != manifold || model.space() != space {
        return Err(Error::ModelMismatch(format!(
            "suite {} needs a {manifold:?} model on the {space:?} space, got {:?}/{:?}",
            suite.name(),
            model.manifold(),
            model.space()
        )));
    }
    Ok(())
}

fn identities(cfg: &ExperimentConfig, p: &Params) -> Result<Plan> {
    let cases = p.count("cases", 20, 1..=MAX_CASES)?;
    let max_dim = p.count("max_dim", 3, 2..=MAX_DIM)?;
    let max_degree = p.count("max_degree", 4, 0..=MAX_DEGREE)?;
    let mut checks = Vec::new();
    for i in 0..cases {
        let name = format!("bicomplex/case-{i:03}");
        let mut rng = rng_for(cfg, &name);
        let dim = rng.gen_range(1..=max_dim);
        let degree = rng.gen_range(0..=max_degree);
        let mut chain = Chain::zero(degree, dim);
        for _ in 0..rng.gen_range(1..=3) {
            let factors = (0..=degree).map(|_| random_op(&mut rng, dim, 1.0)).collect();
            chain.push(gaussian(&mut rng), factors)?;
        }
        let chain = chain.normalized();
        let tol = cfg.tolerance(&name, BICOMPLEX_TOL);
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let mut worst = chain.big_b().big_b().residual();
            let bb = chain.big_b().b()?;
            let anti = if chain.degree() >= 1 { bb.add(&chain.b()?.big_b())? } else { bb };
            worst = worst.max(anti.residual());
            if chain.degree() >= 2 {
                worst = worst.max(chain.b()?.b()?.residual());
            }
            Ok(Outcome::residual(worst))
        }));
    }
    for i in 0..cases {
        let name = format!("chern/idempotent-{i:03}");
        let mut rng = rng_for(cfg, &name);
        let n = rng.gen_range(2..=max_dim);
        let e = random_idempotent(&mut rng, n)?;
        let tol = cfg.tolerance(&name, CHERN_TOL);
        checks.push(CheckSpec::new(name, Some(tol), move || Ok(Outcome::residual(ch_idempotent(&e, 4)?.boundary()?.residual()))));

        let name = format!("chern/invertible-{i:03}");
        let mut rng = rng_for(cfg, &name);
        let n = rng.gen_range(2..=max_dim);
        let u = random_invertible(&mut rng, n);
        let tol = cfg.tolerance(&name, CHERN_TOL);
        checks.push(CheckSpec::new(name, Some(tol), move || Ok(Outcome::residual(ch_invertible(&u, 3)?.boundary()?.residual()))));
    }
    let paths: [(&str, usize); 3] = [("unit", 3), ("exp", 4), ("loop", 3)];
    for (kind, cutoff) in paths {
        let name = format!("transgression/{kind}");
        let mut rng = rng_for(cfg, &name);
        let path = match kind {
            "unit" => unit_path(&random_invertible(&mut rng, 2))?,
            "exp" => exp_path(&random_idempotent(&mut rng, 3)?)?,
            _ => {
                let small = Model::circle_full(4, 1)?;
                let d = small.dirac(0.2, &random_real_trig(&mut rng, 1, 0.3))?;
                suspension_loop(&localized_phase(&d, 1.5)?)?
            }
        };
        let tol = cfg.tolerance(&name, TRANSGRESSION_TOL);
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let tch = transgress(&path, cutoff)?;
            Ok(Outcome::residual(transgression_residual(&path, &tch, 1)?))
        }));
    }
    Ok(Plan::simple(checks))
}

fn fredholm(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    require(model, Manifold::S1, Space::Hardy, Suite::Fredholm)?;
    let powers = p.list("powers", (-3..=3).collect(), |v| v.as_i64(), "a non-empty list of integers")?;
    let mut checks = Vec::new();
    for k in powers {
        let name = format!("fredholm/z^{k:+}");
        let tol = cfg.tolerance(&name, FREDHOLM_TOL);
        let m = model.clone();
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let u = FunctionRep::circle_mode(k);
            let (d, q) = (m.toeplitz(&u)?, m.toeplitz(&u.conj())?);
            Outcome::from_report(fredholm_index(&d, &q, &m, Some(&u))?)
        }));
    }
    dedupe(checks).map(Plan::simple)
}

fn dedupe(checks: Vec<CheckSpec>) -> Result<Vec<CheckSpec>> {
    let mut names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Invalid(format!("duplicate check {}", w[0])));
    }
    Ok(checks)
}

fn helton_howe(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    if model.manifold() == Manifold::S3 {
        return sphere_trace(cfg, p, model);
    }
    require(model, Manifold::S1, Space::Hardy, Suite::HeltonHowe)?;
    let pairs = p.count("pairs", 25, 0..=MAX_CASES)?;
    let bandwidth = p.count("bandwidth", 4, 1..=model.pad().max(1))? as i64;
    let families = p.count("families", 10, 0..=MAX_CASES)?;
    let mut checks = Vec::new();

    // two interior modes, where [T_z̄, T_z] is the rank-one projection on mode 0
    let tiny = cfg.model.with_size(4, 2)?;
    checks.push(CheckSpec::new("pin", Some(cfg.tolerance("pin", PIN_TOL)), move || {
        let fs = vec![FunctionRep::zbar(), FunctionRep::z()];
        let lhs = toeplitz_multicommutator_trace(&fs, &tiny)?;
        Ok(Outcome::compare(lhs, cohomological_oracle(Parity::Odd, &ASCochain::tensor(fs)?, &tiny)?))
    }));
    for i in 0..pairs {
        let name = format!("pair/{i:03}");
        let mut rng = rng_for(cfg, &name);
        let fs = vec![random_trig(&mut rng, bandwidth), random_trig(&mut rng, bandwidth)];
        let tol = cfg.tolerance(&name, HELTON_HOWE_TOL);
        let m = model.clone();
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let lhs = toeplitz_multicommutator_trace(&fs, &m)?;
            Ok(Outcome::compare(lhs, cohomological_oracle(Parity::Odd, &ASCochain::tensor(fs.clone())?, &m)?))
        }));
    }
    // above the top degree: 2r Toeplitz operators or 2r + 1 resolvent commutators, r ≥ 2
    let d = model.toeplitz(&FunctionRep::circle([(0, C64::new(2.0, 0.0)), (1, ONE), (2, C64::new(0.5, 0.0))]))?;
    for i in 0..families {
        let name = format!("vanishing/{i:03}");
        let mut rng = rng_for(cfg, &name);
        let r = rng.gen_range(2..=3);
        let fs: Vec<FunctionRep> = (0..2 * r + 1).map(|_| random_trig(&mut rng, 2)).collect();
        let tol = cfg.tolerance(&name, VANISHING_TOL);
        let (m, d) = (model.clone(), d.clone());
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let t = toeplitz_multicommutator_trace(&fs[..fs.len() - 1], &m)?;
            let s = resolvent_multicommutator_trace(&d, &fs, &m)?;
            Ok(Outcome::residual(t.norm().max(s.norm())))
        }));
    }
    Ok(Plan::simple(checks))
}

fn sphere_trace(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    if let Some(k) = ["pairs", "bandwidth", "families"].iter().find(|k| p.map.contains_key(**k)) {
        return Err(Error::Invalid(format!("parameter {k} only applies to the S1 model")));
    }
    let m = model.clone();
    let check = CheckSpec::new("sphere", Some(cfg.tolerance("sphere", SPHERE_TOL)), move || {
        let e = FunctionRep::sphere_monomial;
        let fs = vec![e([0, 0, 1, 0]), e([1, 0, 0, 0]), e([0, 0, 0, 1]), e([0, 1, 0, 0])];
        let lhs = toeplitz_multicommutator_trace(&fs, &m)?;
        Ok(Outcome::compare(lhs, cohomological_oracle(Parity::Odd, &ASCochain::tensor(fs)?, &m)?))
    });
    Ok(Plan::simple(vec![check]))
}

/// Random Dirac-type operator data and an antisymmetric degree-1 cochain.
#[derive(Clone)]
struct SuspensionCase {
    shift: f64,
    potential: FunctionRep,
    phi: ASCochain,
}

fn suspension_case(cfg: &ExperimentConfig, name: &str) -> Result<SuspensionCase> {
    let mut rng = rng_for(cfg, name);
    let shift = rng.gen_range(-0.4..0.4);
    let bw = rng.gen_range(0..=2);
    let potential = random_real_trig(&mut rng, bw, 0.3);
    let fs = vec![random_trig(&mut rng, 2), random_trig(&mut rng, 2)];
    let phi = antisymmetrize(vec![(ONE, fs)])?;
    Ok(SuspensionCase { shift, potential, phi })
}

fn suspension_report(case: &SuspensionCase, model: &Model, width: Option<f64>) -> Result<crate::index::IndexReport> {
    let d = model.dirac(case.shift, &case.potential)?;
    suspended_index(&d, &case.phi, model, 1, width)
}

fn width_param(p: &Params) -> Result<Option<f64>> {
    let width = p.float("width")?;
    if let Some(w) = width.filter(|w| !(*w > 0.0)) {
        return Err(Error::Invalid(format!("parameter width must be positive, got {w}")));
    }
    Ok(width)
}

fn suspension(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    require(model, Manifold::S1, Space::Full, Suite::Suspension)?;
    let cases = p.count("cases", 10, 1..=MAX_CASES)?;
    let width = width_param(p)?;
    let mut checks = Vec::new();
    for i in 0..cases {
        let name = format!("suspension/case-{i:03}");
        let case = suspension_case(cfg, &name)?;
        let tol = cfg.tolerance(&name, SUSPENSION_TOL);
        let m = model.clone();
        checks.push(CheckSpec::new(name, Some(tol), move || Outcome::from_report(suspension_report(&case, &m, width)?)));
    }
    Ok(Plan::simple(checks))
}

fn heat(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    require(model, Manifold::S1, Space::Hardy, Suite::Heat)?;
    let times = p.list("t", vec![0.5, 1.0, 2.0, 4.0], |v| v.as_f64().filter(|t| *t > 0.0), "a non-empty list of positive numbers")?;
    let shifts = p.list("shifts", vec![1, -2], |v| v.as_i64().filter(|k| *k != 0), "a non-empty list of non-zero integers")?;
    let limit_t = p.float("limit_t")?.unwrap_or(50.0);
    if !(limit_t > 0.0) {
        return Err(Error::Invalid(format!("parameter limit_t must be positive, got {limit_t}")));
    }
    let unit = ASCochain::unit(Manifold::S1);
    let mut checks = Vec::new();
    for k in shifts {
        let d = model.weighted_shift(k)?;
        for &t in &times {
            let name = format!("heat/shift{k:+}/t={t}");
            let tol = cfg.tolerance(&name, HEAT_TOL);
            let (m, d, phi) = (model.clone(), d.clone(), unit.clone());
            checks.push(CheckSpec::new(name, Some(tol), move || Outcome::from_report(ind_even_heat(&d, t, &phi, &m, 0)?)));
        }
        let name = format!("heat/shift{k:+}/limit");
        let tol = cfg.tolerance(&name, HEAT_LIMIT_TOL);
        let (m, dd, phi) = (model.clone(), d.clone(), unit.clone());
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let late = ind_even_heat(&dd, limit_t, &phi, &m, 0)?.value;
            Ok(Outcome::compare(late, ind_even_limit(&dd, &phi, &m, 0)?.value))
        }));
        let name = format!("heat/shift{k:+}/spread");
        let tol = cfg.tolerance(&name, HEAT_TOL);
        let (m, phi, ts) = (model.clone(), unit.clone(), times.clone());
        checks.push(CheckSpec::new(name, Some(tol), move || {
            let vals: Vec<C64> = ts.iter().map(|&t| ind_even_heat(&d, t, &phi, &m, 0).map(|r| r.value)).collect::<Result<_>>()?;
            Ok(Outcome::residual(vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max)))
        }));
    }
    dedupe(checks).map(Plan::simple)
}

fn sweep(cfg: &ExperimentConfig, p: &Params, model: &Model) -> Result<Plan> {
    require(model, Manifold::S1, Space::Full, Suite::Sweep)?;
    let grid = p.list("N", vec![16, 32, 64], |v| v.as_u64().map(|n| n as usize), "a non-empty list of sizes")?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!("sweep grid {grid:?} must be strictly increasing")));
    }
    let cases = p.count("cases", 1, 1..=MAX_CASES)?;
    let width = width_param(p)?;
    let case_list: Vec<SuspensionCase> =
        (0..cases).map(|i| suspension_case(cfg, &format!("sweep/case-{i:03}"))).collect::<Result<_>>()?;
    let last = *grid.last().expect("non-empty grid");
    let mut checks = Vec::new();
    for &n in &grid {
        // keep the pad fraction of the configured model
        let pad = ((n * model.pad()) as f64 / model.n() as f64).round().max(1.0) as usize;
        let m = cfg.model.with_size(n, pad)?;
        let name = format!("sweep/N={n:05}");
        // only the finest truncation is gated
        let tol = (n == last).then(|| cfg.tolerance(&name, SUSPENSION_TOL));
        let cs = case_list.clone();
        checks.push(CheckSpec::new(name, tol, move || {
            let mut worst = 0.0f64;
            for case in &cs {
                worst = worst.max(suspension_report(case, &m, width)?.residual.unwrap_or(f64::INFINITY));
            }
            Ok(Outcome::residual(worst))
        }));
    }
    let derive = Box::new(|rows: &[CheckResult]| {
        let mut rows: Vec<&CheckResult> = rows.iter().collect();
        rows.sort_by(|a, b| a.check.cmp(&b.check));
        let values: Vec<f64> = rows.iter().map(|r| r.residual.unwrap_or(f64::NAN)).collect();
        // count of grid steps where the residual fails to decrease (NaN counts as a failure)
        let violations = values.windows(2).filter(|w| !(w[1] < w[0])).count() as f64;
        vec![CheckResult {
            suite: Suite::Sweep.name().to_string(),
            check: "sweep/monotone".to_string(),
            value: Some(C64::new(violations, 0.0)),
            oracle: Some(ZERO),
            residual: Some(violations),
            // observational: only the finest truncation gates the run
            tolerance: None,
            pass: true,
            error: None,
            report: None,
        }]
    });
    Ok(Plan { checks, derive })
}
