//! Decomposable Alexander–Spanier cochains `Σ c · f₀ ⊗ … ⊗ f_q` on S¹ and S³.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::op::{C64, ONE, ZERO};
use crate::quadrature::circle_nodes;
use crate::s3::{self, Exponent, SpherePoly};

/// Largest number of slots accepted by [`antisymmetrize`] (8! permutations).
pub const ANTISYMMETRIZATION_CAP: usize = 8;
const COCYCLE_SAMPLES: usize = 200;
const COCYCLE_TOL: f64 = 1e-10;
const COCYCLE_SEED: u64 = 0xa5_c0c7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manifold {
    S1,
    S3,
}

impl Manifold {
    pub fn dim(self) -> usize {
        match self {
            Manifold::S1 => 1,
            Manifold::S3 => 3,
        }
    }
}

/// A point of S¹ (angle) or S³ (unit vector in C²).
#[derive(Clone, Copy, Debug)]
pub enum Point {
    Circle(f64),
    Sphere([C64; 2]),
}

impl Point {
    pub fn random(manifold: Manifold, rng: &mut impl Rng) -> Point {
        match manifold {
            Manifold::S1 => Point::Circle(rng.gen_range(0.0..2.0 * PI)),
            Manifold::S3 => {
                let g: Vec<f64> = (0..4).map(|_| StandardNormal.sample(rng)).collect();
                let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                Point::Sphere([C64::new(g[0] / r, g[1] / r), C64::new(g[2] / r, g[3] / r)])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Coeffs {
    /// Fourier coefficients: `f(θ) = Σ c_k e^{ikθ}`.
    Circle(BTreeMap<i64, C64>),
    Sphere(SpherePoly),
}

/// A function on the model manifold: a trigonometric polynomial on S¹ or a
/// polynomial in `z, z̄` restricted to S³.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionRep {
    coeffs: Coeffs,
}

impl Eq for FunctionRep {}

impl Hash for FunctionRep {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.coeffs {
            Coeffs::Circle(m) => {
                0u8.hash(state);
                for (k, c) in m {
                    k.hash(state);
                    c.re.to_bits().hash(state);
                    c.im.to_bits().hash(state);
                }
            }
            Coeffs::Sphere(m) => {
                1u8.hash(state);
                for (k, c) in m {
                    k.hash(state);
                    c.re.to_bits().hash(state);
                    c.im.to_bits().hash(state);
                }
            }
        }
    }
}

// −0.0 and 0.0 must hash alike
fn canonical(c: C64) -> C64 {
    C64::new(c.re + 0.0, c.im + 0.0)
}

impl FunctionRep {
    /// Trigonometric polynomial from `(mode, coefficient)` pairs.
    pub fn circle(modes: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut m = BTreeMap::new();
        for (k, c) in modes {
            *m.entry(k).or_insert(ZERO) += c;
        }
        m.retain(|_, c| *c != ZERO);
        for c in m.values_mut() {
            *c = canonical(*c);
        }
        FunctionRep { coeffs: Coeffs::Circle(m) }
    }

    /// `e^{ikθ}`, i.e. `z^k` (`z̄^{|k|}` for negative `k`).
    pub fn circle_mode(k: i64) -> Self {
        Self::circle([(k, ONE)])
    }

    pub fn z() -> Self {
        Self::circle_mode(1)
    }

    pub fn zbar() -> Self {
        Self::circle_mode(-1)
    }

    /// Polynomial on S³ from `([a₁, a₂, b₁, b₂], coefficient)` pairs.
    pub fn sphere(terms: impl IntoIterator<Item = (Exponent, C64)>) -> Self {
        let mut m = SpherePoly::new();
        for (e, c) in terms {
            *m.entry(e).or_insert(ZERO) += c;
        }
        m.retain(|_, c| *c != ZERO);
        for c in m.values_mut() {
            *c = canonical(*c);
        }
        FunctionRep { coeffs: Coeffs::Sphere(m) }
    }

    pub fn sphere_monomial(e: Exponent) -> Self {
        Self::sphere([(e, ONE)])
    }

    pub fn constant(manifold: Manifold, c: C64) -> Self {
        match manifold {
            Manifold::S1 => Self::circle([(0, c)]),
            Manifold::S3 => Self::sphere([([0, 0, 0, 0], c)]),
        }
    }

    pub fn one(manifold: Manifold) -> Self {
        Self::constant(manifold, ONE)
    }

    pub fn manifold(&self) -> Manifold {
        match self.coeffs {
            Coeffs::Circle(_) => Manifold::S1,
            Coeffs::Sphere(_) => Manifold::S3,
        }
    }

    /// S¹: largest `|k|`; S³: largest total degree.
    pub fn bandwidth(&self) -> usize {
        match &self.coeffs {
            Coeffs::Circle(m) => m.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0),
            Coeffs::Sphere(m) => m.keys().map(|e| s3::total_degree(e) as usize).max().unwrap_or(0),
        }
    }

    /// The value when the function is constant (including zero).
    pub fn constant_value(&self) -> Option<C64> {
        match &self.coeffs {
            Coeffs::Circle(m) => match m.len() {
                0 => Some(ZERO),
                1 => m.get(&0).copied(),
                _ => None,
            },
            Coeffs::Sphere(m) => match m.len() {
                0 => Some(ZERO),
                1 => m.get(&[0, 0, 0, 0]).copied(),
                _ => None,
            },
        }
    }

    pub fn is_real(&self) -> bool {
        match &self.coeffs {
            Coeffs::Circle(m) => m.iter().all(|(k, c)| m.get(&-k).is_some_and(|d| (d - c.conj()).norm() <= 1e-15 * c.norm().max(1.0))),
            Coeffs::Sphere(m) => {
                let conj = s3::poly_conj(m);
                m.len() == conj.len() && m.iter().all(|(e, c)| conj.get(e).is_some_and(|d| (d - c).norm() <= 1e-15 * c.norm().max(1.0)))
            }
        }
    }

    pub fn circle_modes(&self) -> Option<&BTreeMap<i64, C64>> {
        match &self.coeffs {
            Coeffs::Circle(m) => Some(m),
            Coeffs::Sphere(_) => None,
        }
    }

    pub fn sphere_poly(&self) -> Option<&SpherePoly> {
        match &self.coeffs {
            Coeffs::Sphere(m) => Some(m),
            Coeffs::Circle(_) => None,
        }
    }

    pub fn eval(&self, p: &Point) -> Result<C64> {
        match (&self.coeffs, p) {
            (Coeffs::Circle(m), Point::Circle(t)) => Ok(m.iter().map(|(k, c)| c * C64::from_polar(1.0, *k as f64 * t)).sum()),
            (Coeffs::Sphere(m), Point::Sphere(z)) => Ok(s3::poly_eval(m, *z)),
            _ => Err(Error::ModelMismatch("point and function live on different manifolds".into())),
        }
    }

    pub fn mul(&self, other: &FunctionRep) -> Result<FunctionRep> {
        match (&self.coeffs, &other.coeffs) {
            (Coeffs::Circle(a), Coeffs::Circle(b)) => {
                Ok(Self::circle(a.iter().flat_map(|(k, c)| b.iter().map(move |(l, d)| (k + l, c * d)))))
            }
            (Coeffs::Sphere(a), Coeffs::Sphere(b)) => Ok(FunctionRep { coeffs: Coeffs::Sphere(s3::poly_mul(a, b)) }),
            _ => Err(Error::ModelMismatch("functions on different manifolds".into())),
        }
    }

    pub fn add(&self, other: &FunctionRep) -> Result<FunctionRep> {
        match (&self.coeffs, &other.coeffs) {
            (Coeffs::Circle(a), Coeffs::Circle(b)) => Ok(Self::circle(a.iter().chain(b.iter()).map(|(k, c)| (*k, *c)))),
            (Coeffs::Sphere(a), Coeffs::Sphere(b)) => Ok(Self::sphere(a.iter().chain(b.iter()).map(|(k, c)| (*k, *c)))),
            _ => Err(Error::ModelMismatch("functions on different manifolds".into())),
        }
    }

    pub fn scale(&self, s: C64) -> FunctionRep {
        match &self.coeffs {
            Coeffs::Circle(a) => Self::circle(a.iter().map(|(k, c)| (*k, c * s))),
            Coeffs::Sphere(a) => Self::sphere(a.iter().map(|(k, c)| (*k, c * s))),
        }
    }

    pub fn conj(&self) -> FunctionRep {
        match &self.coeffs {
            Coeffs::Circle(a) => Self::circle(a.iter().map(|(k, c)| (-k, c.conj()))),
            Coeffs::Sphere(a) => Self::sphere(s3::poly_conj(a)),
        }
    }

    /// `d/dθ` of a function on S¹.
    pub fn circle_derivative(&self) -> Result<FunctionRep> {
        match &self.coeffs {
            Coeffs::Circle(a) => Ok(Self::circle(a.iter().map(|(k, c)| (*k, c * C64::new(0.0, *k as f64))))),
            Coeffs::Sphere(_) => Err(Error::ModelMismatch("θ-derivative needs a function on S1".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ASTerm {
    pub coeff: C64,
    pub functions: Vec<FunctionRep>,
}

/// Finite sum `Σ coeff · f₀ ⊗ … ⊗ f_q` of decomposable cochains on one manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ASCochain {
    manifold: Manifold,
    degree: usize,
    terms: Vec<ASTerm>,
}

impl ASCochain {
    pub fn zero(manifold: Manifold, degree: usize) -> Self {
        ASCochain { manifold, degree, terms: Vec::new() }
    }

    /// The constant 0-cochain `1`.
    pub fn unit(manifold: Manifold) -> Self {
        ASCochain { manifold, degree: 0, terms: vec![ASTerm { coeff: ONE, functions: vec![FunctionRep::one(manifold)] }] }
    }

    /// Cochain from raw terms, kept exactly as given (no antisymmetrization).
    pub fn from_terms(raw: Vec<(C64, Vec<FunctionRep>)>) -> Result<Self> {
        let (manifold, degree) = validate(&raw)?;
        let terms = raw.into_iter().map(|(coeff, functions)| ASTerm { coeff, functions }).collect();
        Ok(ASCochain { manifold, degree, terms })
    }

    /// Single decomposable tensor `f₀ ⊗ … ⊗ f_q`.
    pub fn tensor(functions: Vec<FunctionRep>) -> Result<Self> {
        Self::from_terms(vec![(ONE, functions)])
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[ASTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn bandwidth(&self) -> usize {
        self.terms.iter().flat_map(|t| t.functions.iter()).map(FunctionRep::bandwidth).max().unwrap_or(0)
    }

    /// Largest sum of slot bandwidths over the terms.
    pub fn total_bandwidth(&self) -> usize {
        self.terms.iter().map(|t| t.functions.iter().map(FunctionRep::bandwidth).sum()).max().unwrap_or(0)
    }

    /// Merges identical tuples and drops zero terms, keeping first-occurrence order.
    pub fn simplified(&self) -> ASCochain {
        let mut index: HashMap<&[FunctionRep], usize> = HashMap::new();
        let mut out: Vec<ASTerm> = Vec::new();
        for t in &self.terms {
            if t.coeff == ZERO || t.functions.iter().any(|f| f.constant_value() == Some(ZERO)) {
                continue;
            }
            match index.get(t.functions.as_slice()) {
                Some(&i) => out[i].coeff += t.coeff,
                None => {
                    index.insert(&t.functions, out.len());
                    out.push(t.clone());
                }
            }
        }
        out.retain(|t| t.coeff.norm() > 1e-300);
        ASCochain { manifold: self.manifold, degree: self.degree, terms: out }
    }

    pub fn add(&self, other: &ASCochain) -> Result<ASCochain> {
        if self.manifold != other.manifold || self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(ASCochain { manifold: self.manifold, degree: self.degree, terms }.simplified())
    }

    pub fn scale(&self, c: C64) -> ASCochain {
        let terms = self.terms.iter().map(|t| ASTerm { coeff: t.coeff * c, functions: t.functions.clone() }).collect();
        ASCochain { manifold: self.manifold, degree: self.degree, terms }
    }

    /// `φ(x₀, …, x_q)`.
    pub fn evaluate(&self, points: &[Point]) -> Result<C64> {
        if points.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch { expected: self.degree, found: points.len().saturating_sub(1) });
        }
        let mut acc = ZERO;
        for t in &self.terms {
            let mut v = t.coeff;
            for (f, p) in t.functions.iter().zip(points) {
                v *= f.eval(p)?;
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Alexander–Spanier coboundary: the unit is inserted at every slot with alternating sign.
    pub fn coboundary(&self) -> ASCochain {
        let one = FunctionRep::one(self.manifold);
        let q = self.degree;
        let mut terms = Vec::with_capacity(self.terms.len() * (q + 2));
        for t in &self.terms {
            for i in 0..=q + 1 {
                let mut f = Vec::with_capacity(q + 2);
                f.extend_from_slice(&t.functions[..i]);
                f.push(one.clone());
                f.extend_from_slice(&t.functions[i..]);
                let s = if i % 2 == 0 { ONE } else { -ONE };
                terms.push(ASTerm { coeff: t.coeff * s, functions: f });
            }
        }
        ASCochain { manifold: self.manifold, degree: q + 1, terms }.simplified()
    }

    /// `∫_M Σ f₀ df₁ ∧ … ∧ df_q` when the degree equals `dim M`; zero otherwise.
    pub fn lambda_integral(&self, model: &Model) -> Result<C64> {
        if model.manifold() != self.manifold {
            return Err(Error::ModelMismatch(format!("{:?} cochain on a {:?} model", self.manifold, model.manifold())));
        }
        if self.degree != self.manifold.dim() {
            return Ok(ZERO);
        }
        let mut acc = ZERO;
        for t in &self.terms {
            acc += t.coeff
                * match self.manifold {
                    Manifold::S1 => circle_form_integral(&t.functions[0], &t.functions[1])?,
                    Manifold::S3 => {
                        let p: Vec<&SpherePoly> = t.functions.iter().map(|f| f.sphere_poly().expect("S3 cochain")).collect();
                        s3::top_form_integral(&[p[0], p[1], p[2], p[3]])
                    }
                };
        }
        Ok(acc)
    }

    /// Top-degree cochains are cocycles of the bar complex; other degrees are
    /// tested by sampling `δφ` at random point tuples.
    pub fn is_top_cocycle(&self, manifold: Manifold) -> bool {
        if self.manifold != manifold {
            return false;
        }
        if self.degree == manifold.dim() {
            return true;
        }
        let d = self.coboundary();
        let mut rng = ChaCha8Rng::seed_from_u64(COCYCLE_SEED);
        (0..COCYCLE_SAMPLES).all(|_| {
            let pts: Vec<Point> = (0..d.degree + 1).map(|_| Point::random(manifold, &mut rng)).collect();
            d.evaluate(&pts).map(|v| v.norm() <= COCYCLE_TOL).unwrap_or(false)
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = CochainDoc {
            model: self.manifold,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: [t.coeff.re, t.coeff.im],
                    tuple: t.functions.iter().map(function_doc).collect(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("cochain documents serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: CochainDoc = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(format!("cochain JSON: {e}")))?;
        let mut raw = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let fs = t.tuple.iter().map(|f| parse_function(doc.model, f)).collect::<Result<Vec<_>>>()?;
            raw.push((C64::new(t.coeff[0], t.coeff[1]), fs));
        }
        if raw.is_empty() {
            return Ok(ASCochain::zero(doc.model, doc.degree));
        }
        let c = Self::from_terms(raw)?;
        if c.degree != doc.degree || c.manifold != doc.model {
            return Err(Error::Invalid("cochain JSON: declared degree/model disagree with the tuples".into()));
        }
        Ok(c)
    }
}

fn validate(raw: &[(C64, Vec<FunctionRep>)]) -> Result<(Manifold, usize)> {
    let (_, first) = raw.first().ok_or_else(|| Error::Invalid("empty cochain; use ASCochain::zero".into()))?;
    let f0 = first.first().ok_or_else(|| Error::Invalid("a cochain tuple needs at least one function".into()))?;
    let manifold = f0.manifold();
    let degree = first.len() - 1;
    for (_, t) in raw {
        if t.len() != degree + 1 {
            return Err(Error::DegreeMismatch { expected: degree, found: t.len().saturating_sub(1) });
        }
        if t.iter().any(|f| f.manifold() != manifold) {
            return Err(Error::ModelMismatch("tuple mixes manifolds".into()));
        }
    }
    Ok((manifold, degree))
}

/// Averages over all slot permutations with signs: `(1/(q+1)!) Σ_ν sgn(ν) ν·t`.
pub fn antisymmetrize(raw: Vec<(C64, Vec<FunctionRep>)>) -> Result<ASCochain> {
    let (manifold, degree) = validate(&raw)?;
    let slots = degree + 1;
    if slots > ANTISYMMETRIZATION_CAP {
        return Err(Error::AntisymmetrizationCap(slots));
    }
    let perms = s3::permutations(slots);
    let norm = 1.0 / perms.len() as f64;
    let mut terms = Vec::with_capacity(raw.len() * perms.len());
    for (c, fs) in &raw {
        for p in &perms {
            let s = s3::perm_sign(p) * norm;
            terms.push(ASTerm { coeff: c * s, functions: p.iter().map(|&i| fs[i].clone()).collect() });
        }
    }
    Ok(ASCochain { manifold, degree, terms }.simplified())
}

/// Antisymmetrizes an existing cochain.
pub fn antisymmetrize_cochain(phi: &ASCochain) -> Result<ASCochain> {
    if phi.is_empty() {
        return Ok(phi.clone());
    }
    antisymmetrize(phi.terms.iter().map(|t| (t.coeff, t.functions.clone())).collect())
}

/// `∫_0^{2π} f₀ (df₁/dθ) dθ`, by the trapezoid rule with enough nodes to be exact.
fn circle_form_integral(f0: &FunctionRep, f1: &FunctionRep) -> Result<C64> {
    let df1 = f1.circle_derivative()?;
    let n = 2 * (f0.bandwidth() + f1.bandwidth()) + 1;
    let mut acc = ZERO;
    for t in circle_nodes(n) {
        let p = Point::Circle(t);
        acc += f0.eval(&p)? * df1.eval(&p)?;
    }
    Ok(acc * (2.0 * PI / n as f64))
}

#[derive(Serialize, Deserialize)]
struct CochainDoc {
    model: Manifold,
    degree: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coeff: [f64; 2],
    tuple: Vec<FunctionDoc>,
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    modes: BTreeMap<String, [f64; 2]>,
}

fn function_doc(f: &FunctionRep) -> FunctionDoc {
    let modes = match &f.coeffs {
        Coeffs::Circle(m) => m.iter().map(|(k, c)| (k.to_string(), [c.re, c.im])).collect(),
        Coeffs::Sphere(m) => m.iter().map(|(e, c)| (format!("{},{},{},{}", e[0], e[1], e[2], e[3]), [c.re, c.im])).collect(),
    };
    FunctionDoc { modes }
}

fn parse_function(manifold: Manifold, doc: &FunctionDoc) -> Result<FunctionRep> {
    let bad = |k: &str| Error::Invalid(format!("cochain JSON: bad mode key {k:?}"));
    match manifold {
        Manifold::S1 => {
            let mut v = Vec::new();
            for (k, c) in &doc.modes {
                let k: i64 = k.trim().parse().map_err(|_| bad(k))?;
                v.push((k, C64::new(c[0], c[1])));
            }
            Ok(FunctionRep::circle(v))
        }
        Manifold::S3 => {
            let mut v = Vec::new();
            for (k, c) in &doc.modes {
                let parts: Vec<u32> = k.split(',').map(|p| p.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(k))?;
                let e: Exponent = parts.try_into().map_err(|_| bad(k))?;
                v.push((e, C64::new(c[0], c[1])));
            }
            Ok(FunctionRep::sphere(v))
        }
    }
}
