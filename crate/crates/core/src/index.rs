//! Higher index evaluators in both parities, the Fredholm specialization, the
//! suspended index, multicommutators, and the volume-integral oracles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::aspanier::{ASCochain, FunctionRep, Manifold, Point};
use crate::chern::{
    ch_idempotent, ch_invertible, exp_path, idempotent_path, lift_symbol, suspended_chern, transgress, LiftData,
};
use crate::constants;
use crate::cyclic::{trace_pair, Parity};
use crate::error::{Error, Result};
use crate::models::{
    heat_parametrix, kernel_projections, localized_phase, phase_operator, positive_spectral_projection,
    pseudo_inverse, Model, Space,
};
use crate::op::{Op, C64, ZERO};

/// Samples for the discrete winding number.
pub const WINDING_SAMPLES: usize = 4096;
/// Gate for projections and for the window-support check of `S₀`, `S₁`.
pub const SUPPORT_TOL: f64 = 1e-10;
pub const MULTICOMMUTATOR_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Relative Chern character of a lifted symbol.
    Hii,
    /// Trace formula for an invertible lift.
    Hii2,
    /// Relative Chern character of an idempotent symbol.
    Hiidem,
    /// Toeplitz trace formula.
    Hiidem2,
    /// Fredholm index from a parametrix.
    Chi1,
    /// Suspended index.
    Sind,
    /// Relative Chern character of the heat lift at time `t`.
    Heat(f64),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Hii => write!(f, "hii"),
            Method::Hii2 => write!(f, "hii2"),
            Method::Hiidem => write!(f, "hiidem"),
            Method::Hiidem2 => write!(f, "hiidem2"),
            Method::Chi1 => write!(f, "chi1"),
            Method::Sind => write!(f, "sind"),
            Method::Heat(t) => write!(f, "heat({t})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelEcho {
    pub manifold: Manifold,
    #[serde(rename = "N")]
    pub n: usize,
    pub pad: usize,
    pub kappa: [i64; 2],
    pub space: Space,
}

impl From<&Model> for ModelEcho {
    fn from(m: &Model) -> Self {
        let (a, b) = m.kappa_ratio();
        ModelEcho { manifold: m.manifold(), n: m.n(), pad: m.pad(), kappa: [a, b], space: m.space() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport {
    pub value: C64,
    pub oracle: Option<C64>,
    pub residual: Option<f64>,
    pub method: String,
    pub model: ModelEcho,
}

impl IndexReport {
    pub fn new(value: C64, oracle: Option<C64>, method: Method, model: &Model) -> Self {
        IndexReport {
            value,
            oracle,
            residual: oracle.map(|o| (value - o).norm()),
            method: method.to_string(),
            model: model.into(),
        }
    }

    pub fn with_oracle(mut self, oracle: C64) -> Self {
        self.oracle = Some(oracle);
        self.residual = Some((self.value - oracle).norm());
        self
    }
}

fn check_support(s: &Op, model: &Model, name: &str) -> Result<()> {
    let window = model.window();
    let mut inside = vec![false; model.dim()];
    for &i in &window {
        inside[i] = true;
    }
    let mut worst = 0.0f64;
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            if inside[i] != inside[j] {
                worst = worst.max(s.get(i, j).norm());
            }
        }
    }
    if worst > SUPPORT_TOL * s.norm().max(1.0) {
        return Err(Error::Window(format!(
            "{name} couples interior and pad modes (|entry| up to {worst:.3e}); the pad is too small for the symbol bandwidth"
        )));
    }
    Ok(())
}

/// Largest `|i − j|` over entries above the support tolerance.
fn operator_bandwidth(a: &Op) -> usize {
    let tol = SUPPORT_TOL * a.norm().max(1.0);
    let n = a.dim();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| a.get(i, j).norm() > tol).map(|(i, j)| i.abs_diff(j)).max().unwrap_or(0)
}

/// On circle models the truncation errors of `QD` and `DQ` sit within
/// `bandwidth` modes of the cut, so nonzero remainders need the pad to cover them.
fn check_remainder_reach(d: &Op, q: &Op, lift: &LiftData, model: &Model) -> Result<()> {
    if model.manifold() != Manifold::S1 {
        return Ok(());
    }
    let tol = SUPPORT_TOL * (d.norm() * q.norm()).max(1.0);
    if lift.s0.norm() <= tol && lift.s1.norm() <= tol {
        return Ok(());
    }
    let bw = operator_bandwidth(d).max(operator_bandwidth(q));
    if bw > model.pad() {
        return Err(Error::Window(format!("operator bandwidth {bw} exceeds pad {}; truncation remainders reach the interior window", model.pad())));
    }
    Ok(())
}

/// Discrete winding number of a circle function about 0.
pub fn winding_number(f: &FunctionRep) -> Result<f64> {
    if f.manifold() != Manifold::S1 {
        return Err(Error::ModelMismatch("winding numbers need an S1 symbol".into()));
    }
    let values: Vec<C64> = (0..WINDING_SAMPLES)
        .map(|j| f.eval(&Point::Circle(2.0 * PI * j as f64 / WINDING_SAMPLES as f64)))
        .collect::<Result<_>>()?;
    if let Some(v) = values.iter().find(|v| v.norm() < 1e-12) {
        return Err(Error::Singular(v.norm()));
    }
    let total: f64 = (0..WINDING_SAMPLES).map(|j| (values[(j + 1) % WINDING_SAMPLES] / values[j]).arg()).sum();
    Ok(total / (2.0 * PI))
}

/// `Tr_int(I − QD) − Tr_int(I − DQ)`. The oracle is minus the winding number of
/// `symbol` when one is given, otherwise the interior traces of the kernel
/// projections of `D` and `D*`.
pub fn fredholm_index(d: &Op, q: &Op, model: &Model, symbol: Option<&FunctionRep>) -> Result<IndexReport> {
    d.check_dim(q)?;
    if d.dim() != model.dim() {
        return Err(Error::DimMismatch(format!("operator dim {} on a model of dim {}", d.dim(), model.dim())));
    }
    let lift = lift_symbol(d, q)?;
    check_remainder_reach(d, q, &lift, model)?;
    check_support(&lift.s0, model, "I - QD")?;
    check_support(&lift.s1, model, "I - DQ")?;
    let value = model.interior_trace(&lift.s0)? - model.interior_trace(&lift.s1)?;
    let oracle = match symbol {
        // winding numbers are integers; the sampled value only carries rounding
        Some(u) => C64::new(-winding_number(u)?.round() + 0.0, 0.0),
        None => kernel_index(d, model)?,
    };
    Ok(IndexReport::new(value, Some(oracle), Method::Chi1, model))
}

/// `Tr_int(H₀) − Tr_int(H₁)` for the kernel projections of `D` and `D*`.
pub fn kernel_index(d: &Op, model: &Model) -> Result<C64> {
    let (h0, h1) = kernel_projections(d);
    Ok(model.interior_trace(&h0)? - model.interior_trace(&h1)?)
}

fn even_degree(phi: &ASCochain) -> Result<usize> {
    if !phi.degree().is_multiple_of(2) {
        return Err(Error::Parity(format!("expected an even-degree cochain, got degree {}", phi.degree())));
    }
    Ok(phi.degree() / 2)
}

fn odd_degree(phi: &ASCochain) -> Result<usize> {
    if phi.degree() % 2 != 1 {
        return Err(Error::Parity(format!("expected an odd-degree cochain, got degree {}", phi.degree())));
    }
    Ok(phi.degree().div_ceil(2))
}

fn constant_cochain_value(phi: &ASCochain) -> Option<C64> {
    phi.terms()
        .iter()
        .map(|t| t.functions.iter().map(|f| f.constant_value()).product::<Option<C64>>().map(|v| v * t.coeff))
        .sum()
}

/// `Tr_φ(ch E(V) − ch e) + Tr_{δφ}(Tch(E, Ė))` for the lift built from `(D, Q)`.
pub fn ind_even(d: &Op, q: &Op, phi: &ASCochain, model: &Model, cutoff: usize) -> Result<IndexReport> {
    let lift = lift_symbol(d, q)?;
    ind_even_from_lift(&lift, phi, model, cutoff, Method::Hii)
}

/// [`ind_even`] for precomputed lift data. For a degree-0 constant cochain the
/// report carries the parametrix trace `Tr_int(S₀ − S₁)` as its oracle.
pub fn ind_even_from_lift(lift: &LiftData, phi: &ASCochain, model: &Model, cutoff: usize, method: Method) -> Result<IndexReport> {
    let q = even_degree(phi)?;
    if cutoff < 2 * q || !cutoff.is_multiple_of(2) {
        return Err(Error::Invalid(format!("cutoff {cutoff} must be even and at least {}", 2 * q)));
    }
    let oracle = match (q, constant_cochain_value(phi)) {
        (0, Some(c)) => Some(c * (model.interior_trace(&lift.s0)? - model.interior_trace(&lift.s1)?)),
        _ => None,
    };
    if phi.is_empty() {
        log::warn!("degenerate cochain; index is zero");
        return Ok(IndexReport::new(ZERO, oracle, method, model));
    }
    let ch = |e: &Op| -> Result<_> { Ok(ch_idempotent(e, 2 * q)?.component(2 * q)) };
    let rel = ch(&lift.ev)?.sub(&ch(&lift.e())?)?;
    let mut value = trace_pair(phi, &rel, model)?;
    let dphi = phi.coboundary();
    if !dphi.is_empty() {
        let path = idempotent_path(&lift.v, &lift.vinv)?;
        let tch = transgress(&path, 2 * q + 1)?;
        value += trace_pair(&dphi, &tch.component(2 * q + 1), model)?;
    }
    Ok(IndexReport::new(value, oracle, method, model))
}

/// Index of the heat lift of `tD`.
pub fn ind_even_heat(d: &Op, t: f64, phi: &ASCochain, model: &Model, cutoff: usize) -> Result<IndexReport> {
    let lift = heat_parametrix(d, t)?;
    let mut r = ind_even_from_lift(&lift, phi, model, cutoff, Method::Heat(t))?;
    if let (0, Some(c)) = (phi.degree(), constant_cochain_value(phi)) {
        r = r.with_oracle(c * kernel_index(d, model)?);
    }
    Ok(r)
}

/// Index of the lift built from the partial inverse `Q = D⁺`, for which
/// `E(V) = diag(H₀, I − H₁)`.
pub fn ind_even_limit(d: &Op, phi: &ASCochain, model: &Model, cutoff: usize) -> Result<IndexReport> {
    let lift = lift_symbol(d, &pseudo_inverse(d))?;
    ind_even_from_lift(&lift, phi, model, cutoff, Method::Hii)
}

/// Trace formulas for an invertible lift: `(−1)^q q! Tr_int(Σ S_{f₀} … S_{f_{2q}})` with
/// `S_f = f − D⁻¹ f D`, and the companion `(−1)^q q! Tr_int(Σ F[F, f₀] … [F, f_{2q}])`
/// with `F` the phase of `D`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvertibleIndex {
    pub resolvent: IndexReport,
    pub phase: IndexReport,
}

pub fn ind_even_invertible(d: &Op, phi: &ASCochain, model: &Model) -> Result<InvertibleIndex> {
    let q = even_degree(phi)?;
    model.check_cochain(phi)?;
    let dinv = d.inverse()?;
    let f = phase_operator(d)?;
    let pref = C64::new(constants::even_trace_formula(q), 0.0);
    let oracle = (phi.degree() > model.manifold().dim()).then_some(ZERO);
    let s_ops = operator_family(phi, |g| {
        let m = model.multiplication(g)?;
        Ok(&m - &(&(&dinv * &m) * d))
    })?;
    let value = pref * cochain_trace(phi, &s_ops, model, None)?;
    let c_ops = operator_family(phi, |g| model.multiplication(g)?.commutator(&f).map(|c| -&c))?;
    let companion = pref * cochain_trace(phi, &c_ops, model, Some(&f))?;
    Ok(InvertibleIndex {
        resolvent: IndexReport::new(value, oracle, Method::Hii2, model),
        phase: IndexReport::new(companion, oracle, Method::Hii2, model),
    })
}

/// One operator per distinct function of the cochain.
fn operator_family(phi: &ASCochain, build: impl Fn(&FunctionRep) -> Result<Op>) -> Result<HashMap<FunctionRep, Op>> {
    let mut out = HashMap::new();
    for t in phi.terms() {
        for g in &t.functions {
            if !out.contains_key(g) {
                out.insert(g.clone(), build(g)?);
            }
        }
    }
    Ok(out)
}

/// `Σ_i cᵢ Tr_int(L · A_{f₀ⁱ} ⋯ A_{f_kⁱ})`, with an optional left factor `L`.
fn cochain_trace(phi: &ASCochain, ops: &HashMap<FunctionRep, Op>, model: &Model, left: Option<&Op>) -> Result<C64> {
    let mut acc = ZERO;
    for t in phi.terms() {
        let mut prod = left.cloned().unwrap_or_else(|| Op::identity(model.dim()));
        for g in &t.functions {
            prod = &prod * &ops[g];
        }
        acc += t.coeff * model.interior_trace(&prod)?;
    }
    Ok(acc)
}

fn check_projection(p: &Op) -> Result<()> {
    let defect = p.idempotent_defect() + p.selfadjoint_defect();
    if defect > SUPPORT_TOL * p.norm().max(1.0) {
        return Err(Error::NotProjection(defect));
    }
    Ok(())
}

/// `(−1)^q (2q)!/q! · Tr_int(Σ T_{f₀} ⋯ T_{f_{2q−1}})` with `T_f = P M_f P`. When `P`
/// is the model's Hardy projection the report carries the volume-integral oracle
/// (zero above the top degree).
pub fn ind_odd_toeplitz(p: &Op, phi: &ASCochain, model: &Model) -> Result<IndexReport> {
    check_projection(p)?;
    let q = odd_degree(phi)?;
    model.check_cochain(phi)?;
    let pref = C64::new(constants::odd_trace_formula(q), 0.0);
    let is_hardy = p.dist(&model.hardy_projection()) <= SUPPORT_TOL;
    let dim_m = model.manifold().dim();
    let oracle = if !is_hardy {
        None
    } else if phi.degree() == dim_m {
        Some(pref * cohomological_oracle(Parity::Odd, phi, model)?)
    } else if phi.degree() > dim_m {
        Some(ZERO)
    } else {
        None
    };
    if phi.is_empty() {
        log::warn!("degenerate cochain; index is zero");
        return Ok(IndexReport::new(ZERO, oracle, Method::Hiidem2, model));
    }
    let ops = operator_family(phi, |g| Ok(&(p * &model.multiplication(g)?) * p))?;
    let value = pref * cochain_trace(phi, &ops, model, None)?;
    Ok(IndexReport::new(value, oracle, Method::Hiidem2, model))
}

/// `(1/2πi)(Tr_φ(ch U(0)) − Tr_φ(ch U(1)) + Tr_{δφ}(Tch(U, U̇)))` for `U(t) = exp(2πi t P)`.
/// For an exact projection the Toeplitz trace formula is attached as oracle.
pub fn ind_odd_relative(p: &Op, phi: &ASCochain, model: &Model, cutoff: usize) -> Result<IndexReport> {
    odd_degree(phi)?;
    let deg = phi.degree();
    if cutoff < deg || cutoff % 2 != 1 {
        return Err(Error::Invalid(format!("cutoff {cutoff} must be odd and at least {deg}")));
    }
    let oracle = match ind_odd_toeplitz(p, phi, model) {
        Ok(r) => Some(r.value),
        Err(Error::NotProjection(_)) => None,
        Err(e) => return Err(e),
    };
    let path = exp_path(p)?;
    let (u0, _) = path.evaluate(0.0)?;
    let (u1, _) = path.evaluate(1.0)?;
    let ch = |u: &Op| -> Result<_> { Ok(ch_invertible(u, deg)?.component(deg)) };
    let mut value = trace_pair(phi, &ch(&u0)?.sub(&ch(&u1)?)?, model)?;
    let dphi = phi.coboundary();
    if !dphi.is_empty() {
        let tch = transgress(&path, deg + 1)?;
        value += trace_pair(&dphi, &tch.component(deg + 1), model)?;
    }
    let value = value / C64::new(0.0, 2.0 * PI);
    Ok(IndexReport::new(value, oracle, Method::Hiidem, model))
}

/// Default width of the smooth phase used by [`suspended_index`]: one eighth of
/// the interior window.
pub fn default_phase_width(model: &Model) -> f64 {
    (model.n() - model.pad()) as f64 / 8.0
}

/// `(1/2πi) Tr_φ(Sch)` for the loop built from the phase `F = tanh(D/w)`, with the
/// Toeplitz index of the positive spectral projection of `D` as oracle.
/// `width = None` uses [`default_phase_width`].
pub fn suspended_index(d: &Op, phi: &ASCochain, model: &Model, cutoff: usize, width: Option<f64>) -> Result<IndexReport> {
    let deg = phi.degree();
    odd_degree(phi)?;
    if cutoff < deg || cutoff % 2 != 1 {
        return Err(Error::Invalid(format!("cutoff {cutoff} must be odd and at least {deg}")));
    }
    let p = positive_spectral_projection(d)?;
    let oracle = ind_odd_toeplitz(&p, phi, model)?.value;
    let f = localized_phase(d, width.unwrap_or_else(|| default_phase_width(model)))?;
    suspended_index_for_phase(&f, phi, model, deg).map(|r| r.with_oracle(oracle))
}

/// `(1/2πi) Tr_φ(Sch)` for a given selfadjoint phase `F`, without oracle.
pub fn suspended_index_for_phase(f: &Op, phi: &ASCochain, model: &Model, cutoff: usize) -> Result<IndexReport> {
    let deg = phi.degree();
    if phi.is_empty() {
        log::warn!("degenerate cochain; index is zero");
        return Ok(IndexReport::new(ZERO, None, Method::Sind, model));
    }
    let sch = suspended_chern(f, cutoff.max(deg))?;
    let value = trace_pair(phi, &sch.component(deg), model)? / C64::new(0.0, 2.0 * PI);
    Ok(IndexReport::new(value, None, Method::Sind, model))
}

/// `[A₁, …, A_k] = (1/k!) Σ_τ sgn(τ) A_{τ(1)} ⋯ A_{τ(k)}`.
pub fn multicommutator(ops: &[Op]) -> Result<Op> {
    let k = ops.len();
    if k == 0 {
        return Err(Error::Invalid("empty multicommutator".into()));
    }
    if k > MULTICOMMUTATOR_CAP {
        return Err(Error::MulticommutatorCap(k));
    }
    for a in &ops[1..] {
        ops[0].check_dim(a)?;
    }
    // F(S) = Σ_j (−1)^j A_{s_j} F(S ∖ s_j) over subsets S = {s_0 < s_1 < …}, with
    // F(∅) = I; F(all) is the signed sum over all orderings
    let full = (1usize << k) - 1;
    let mut table: Vec<Option<Op>> = vec![None; full + 1];
    table[0] = Some(Op::identity(ops[0].dim()));
    for mask in 1..=full {
        let mut acc: Option<Op> = None;
        for (j, i) in (0..k).filter(|&i| mask & (1 << i) != 0).enumerate() {
            let rest = table[mask & !(1 << i)].as_ref().expect("subsets filled in increasing order");
            let term = (&ops[i] * rest).scale_real(if j % 2 == 0 { 1.0 } else { -1.0 });
            acc = Some(match acc {
                Some(a) => &a + &term,
                None => term,
            });
        }
        table[mask] = acc;
    }
    let top = table[full].take().expect("full set computed");
    Ok(top.scale_real(1.0 / constants::factorial(k)))
}

/// `Tr_int[T_{f₀}, …, T_{f_k}]` with `T_f` the Toeplitz operators of the model.
pub fn toeplitz_multicommutator_trace(fs: &[FunctionRep], model: &Model) -> Result<C64> {
    let bw: usize = fs.iter().map(|f| f.bandwidth()).max().unwrap_or(0);
    model.check_bandwidth(bw)?;
    let ops: Vec<Op> = fs.iter().map(|f| model.toeplitz(f)).collect::<Result<_>>()?;
    model.interior_trace(&multicommutator(&ops)?)
}

/// `Tr_int[S_{f₀}, …, S_{f_k}]` with `S_f = f − D⁻¹ f D`.
pub fn resolvent_multicommutator_trace(d: &Op, fs: &[FunctionRep], model: &Model) -> Result<C64> {
    let bw: usize = fs.iter().map(|f| f.bandwidth()).max().unwrap_or(0);
    model.check_bandwidth(bw)?;
    let dinv = d.inverse()?;
    let ops: Vec<Op> = fs
        .iter()
        .map(|f| {
            let m = model.multiplication(f)?;
            Ok(&m - &(&(&dinv * &m) * d))
        })
        .collect::<Result<_>>()?;
    model.interior_trace(&multicommutator(&ops)?)
}

/// Volume-integral side of the top-degree trace formulas: `κ/((2πi)^q q!) ∫ φ` when
/// `dim M = 2q`, `κ q!/((2πi)^q (2q)!) ∫ φ` when `dim M = 2q − 1`. For an
/// antisymmetric `φ` this equals the interior trace of `Σ_i [A_{f₀ⁱ}, …]` of the
/// corresponding operator family.
pub fn cohomological_oracle(kind: Parity, phi: &ASCochain, model: &Model) -> Result<C64> {
    let degree = phi.degree();
    let dim = model.manifold().dim();
    if Parity::of(degree) != kind {
        return Err(Error::Parity(format!("{kind:?} oracle for a cochain of degree {degree}")));
    }
    if degree != dim {
        return Err(Error::NotTopDegree { degree, dim });
    }
    let pref = match kind {
        Parity::Even => constants::even_volume(degree / 2),
        Parity::Odd => constants::odd_volume(degree.div_ceil(2)),
    };
    Ok(pref * model.kappa() * phi.lambda_integral(model)?)
}
