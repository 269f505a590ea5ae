//! Chains of the normalized cyclic (b, B)-bicomplex over matrix algebras.
//!
//! A [`Chain`] of degree `q` is a formal sum of tensors `A₀ ⊗ A₁ ⊗ … ⊗ A_q`.
//! Chains are kept normalized: a term whose tail factor (position ≥ 1) is a
//! scalar multiple of the identity represents zero in `A ⊗ (A/ℂ)^{⊗q}` and is
//! dropped. Terms keep the order in which they were generated; identical factor
//! lists (same shared `Op`s) are merged at the position of their first occurrence.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::aspanier::{ASCochain, FunctionRep};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::op::{gemm, trace_of_product_on, Op, C64, ONE, ZERO};

/// Dense residuals are used while the normalized tensor has at most this many entries.
const DENSE_RESIDUAL_LIMIT: usize = 1 << 16;
const PROBE_COUNT: usize = 8;
const PROBE_SEED: u64 = 0x7e57_c4a1;

#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: C64,
    pub factors: Vec<Op>,
}

#[derive(Clone, Debug)]
pub struct Chain {
    degree: usize,
    dim: usize,
    terms: Vec<Term>,
}

impl Chain {
    pub fn zero(degree: usize, dim: usize) -> Self {
        Chain { degree, dim, terms: Vec::new() }
    }

    /// A single elementary tensor `coeff · A₀ ⊗ … ⊗ A_q`.
    pub fn elementary(coeff: C64, factors: Vec<Op>) -> Result<Self> {
        let first = factors.first().ok_or_else(|| Error::Invalid("a chain term needs at least one factor".into()))?;
        let mut c = Chain::zero(factors.len() - 1, first.dim());
        c.push(coeff, factors)?;
        Ok(c.normalized())
    }

    /// Appends a term without normalizing.
    pub fn push(&mut self, coeff: C64, factors: Vec<Op>) -> Result<()> {
        if factors.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch { expected: self.degree, found: factors.len().saturating_sub(1) });
        }
        if let Some(bad) = factors.iter().find(|a| a.dim() != self.dim) {
            return Err(Error::DimMismatch(format!("factor of dim {} in chain of dim {}", bad.dim(), self.dim)));
        }
        self.terms.push(Term { coeff, factors });
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops terms that vanish in the normalized complex and merges terms with
    /// identical (shared) factor lists.
    pub fn normalized(&self) -> Chain {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.coeff == ZERO
                || t.factors.iter().any(Op::is_zero)
                || t.factors[1..].iter().any(Op::is_scalar)
            {
                continue;
            }
            let key: Vec<usize> = t.factors.iter().map(Op::id).collect();
            match index.get(&key) {
                Some(&i) => out[i].coeff += t.coeff,
                None => {
                    index.insert(key, out.len());
                    out.push(t.clone());
                }
            }
        }
        out.retain(|t| t.coeff != ZERO);
        Chain { degree: self.degree, dim: self.dim, terms: out }
    }

    fn check_compatible(&self, other: &Chain) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!("chains of dim {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Chain { degree: self.degree, dim: self.dim, terms }.normalized())
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: C64) -> Chain {
        if c == ZERO {
            return Chain::zero(self.degree, self.dim);
        }
        let terms = self.terms.iter().map(|t| Term { coeff: t.coeff * c, factors: t.factors.clone() }).collect();
        Chain { degree: self.degree, dim: self.dim, terms }
    }

    /// Hochschild boundary `b`, lowering the degree by one.
    pub fn b(&self) -> Result<Chain> {
        if self.degree == 0 {
            return Err(Error::NoBoundaryInDegreeZero);
        }
        let q = self.degree - 1;
        let mut products: HashMap<(usize, usize), Op> = HashMap::new();
        let mut product = |x: &Op, y: &Op| -> Op {
            products.entry((x.id(), y.id())).or_insert_with(|| x * y).clone()
        };
        let mut out = Chain::zero(q, self.dim);
        for t in &self.terms {
            let a = &t.factors;
            for j in 0..=q {
                let mut f = Vec::with_capacity(q + 1);
                f.extend_from_slice(&a[..j]);
                f.push(product(&a[j], &a[j + 1]));
                f.extend_from_slice(&a[j + 2..]);
                out.terms.push(Term { coeff: t.coeff * sign(j), factors: f });
            }
            let mut f = Vec::with_capacity(q + 1);
            f.push(product(&a[q + 1], &a[0]));
            f.extend_from_slice(&a[1..=q]);
            out.terms.push(Term { coeff: t.coeff * sign(q + 1), factors: f });
        }
        Ok(out.normalized())
    }

    /// Connes boundary `B`, raising the degree by one:
    /// `B(a₀ ⊗ … ⊗ a_n) = Σ_j (−1)^{nj} 1 ⊗ a_j ⊗ … ⊗ a_n ⊗ a₀ ⊗ … ⊗ a_{j−1}`.
    pub fn big_b(&self) -> Chain {
        let n = self.degree;
        let one = Op::identity(self.dim);
        let mut out = Chain::zero(n + 1, self.dim);
        for t in &self.terms {
            for j in 0..=n {
                let mut f = Vec::with_capacity(n + 2);
                f.push(one.clone());
                f.extend_from_slice(&t.factors[j..]);
                f.extend_from_slice(&t.factors[..j]);
                out.terms.push(Term { coeff: t.coeff * sign(n * j), factors: f });
            }
        }
        out.normalized()
    }

    /// Block trace `tr_⊗`: views each factor as a `k×k` matrix of blocks and sums
    /// the block products over all index cycles, giving a chain of dimension `dim/k`.
    pub fn reduce_blocks(&self, k: usize) -> Result<Chain> {
        if k == 0 || !self.dim.is_multiple_of(k) {
            return Err(Error::DimMismatch(format!("cannot split dim {} into {k} blocks", self.dim)));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let n = self.dim / k;
        let mut blocks: HashMap<(usize, usize, usize), Op> = HashMap::new();
        let mut block = |a: &Op, i: usize, j: usize| -> Op {
            blocks.entry((a.id(), i, j)).or_insert_with(|| a.sub_block(i, j, n)).clone()
        };
        let mut out = Chain::zero(self.degree, n);
        let len = self.degree + 1;
        for t in &self.terms {
            // depth-first over index cycles i₀ → i₁ → … → i_q → i₀, pruning zero blocks
            let mut stack: Vec<(Vec<Op>, usize, usize)> = (0..k).map(|i0| (Vec::with_capacity(len), i0, i0)).collect();
            let mut found: Vec<Vec<Op>> = Vec::new();
            while let Some((prefix, start, cur)) = stack.pop() {
                let pos = prefix.len();
                let a = &t.factors[pos];
                let targets: Vec<usize> = if pos + 1 == len { vec![start] } else { (0..k).collect() };
                for next in targets.into_iter().rev() {
                    let blk = block(a, cur, next);
                    if blk.is_zero() {
                        continue;
                    }
                    let mut p = prefix.clone();
                    p.push(blk);
                    if pos + 1 == len {
                        found.push(p);
                    } else {
                        stack.push((p, start, next));
                    }
                }
            }
            // restore lexicographic order of index cycles
            found.reverse();
            for f in found {
                out.terms.push(Term { coeff: t.coeff, factors: f });
            }
        }
        Ok(out.normalized())
    }

    /// Evaluates the chain against one probe matrix per slot:
    /// `Σ coeff · Π_j Σ_{ab} (A_j)_{ab} (W_j)_{ab}`.
    pub fn evaluate(&self, probes: &[DMatrix<C64>]) -> Result<C64> {
        if probes.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch { expected: self.degree, found: probes.len().saturating_sub(1) });
        }
        let mut cache: HashMap<(usize, usize), C64> = HashMap::new();
        let mut acc = ZERO;
        for t in &self.terms {
            let mut v = t.coeff;
            for (j, a) in t.factors.iter().enumerate() {
                let w = &probes[j];
                v *= *cache
                    .entry((a.id(), j))
                    .or_insert_with(|| a.mat().iter().zip(w.iter()).map(|(x, y)| x * y).sum());
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Size of the chain as an element of `A ⊗ (A/ℂ)^{⊗q}`.
    ///
    /// Small chains are expanded into the dense tensor with tail factors replaced
    /// by their traceless parts and the largest entry is returned. Larger chains are
    /// paired with seeded Gaussian probes (traceless in the tail slots) and the
    /// root-mean-square of the pairings is returned, an estimate of the Frobenius norm.
    pub fn residual(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let d2 = self.dim * self.dim;
        let size = d2.checked_pow(self.degree as u32 + 1).unwrap_or(usize::MAX);
        if size <= DENSE_RESIDUAL_LIMIT {
            return self.dense_tensor().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut sq = 0.0;
        for _ in 0..PROBE_COUNT {
            let probes: Vec<DMatrix<C64>> =
                (0..=self.degree).map(|j| gaussian_probe(self.dim, j > 0, &mut rng)).collect();
            sq += self.evaluate(&probes).expect("probe count matches degree").norm_sqr();
        }
        (sq / PROBE_COUNT as f64).sqrt()
    }

    fn dense_tensor(&self) -> Vec<C64> {
        let d2 = self.dim * self.dim;
        let size = d2.pow(self.degree as u32 + 1);
        let mut acc = vec![ZERO; size];
        let mut cache: HashMap<(usize, bool), Vec<C64>> = HashMap::new();
        for t in &self.terms {
            let flat: Vec<Vec<C64>> = t
                .factors
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    cache
                        .entry((a.id(), j > 0))
                        .or_insert_with(|| if j > 0 { a.traceless().iter().copied().collect() } else { a.mat().iter().copied().collect() })
                        .clone()
                })
                .collect();
            let mut idx = vec![0usize; flat.len()];
            for (pos, slot) in acc.iter_mut().enumerate() {
                let mut rem = pos;
                for i in idx.iter_mut().rev() {
                    *i = rem % d2;
                    rem /= d2;
                }
                let mut v = t.coeff;
                for (f, &i) in flat.iter().zip(&idx) {
                    v *= f[i];
                    if v == ZERO {
                        break;
                    }
                }
                *slot += v;
            }
        }
        acc
    }
}

fn gaussian_probe(dim: usize, traceless: bool, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    });
    if traceless {
        let mean = w.trace() / dim as f64;
        for i in 0..dim {
            w[(i, i)] -= mean;
        }
    }
    w
}

pub(crate) fn sign(k: usize) -> C64 {
    if k.is_multiple_of(2) {
        ONE
    } else {
        -ONE
    }
}

/// Hochschild boundary of a chain.
pub fn chain_b(c: &Chain) -> Result<Chain> {
    c.b()
}

/// Connes boundary of a chain.
pub fn chain_connes_b(c: &Chain) -> Chain {
    c.big_b()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(degree: usize) -> Parity {
        if degree.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Element of the (b+B) total complex: chains of one parity, indexed by degree,
/// truncated at `cutoff`.
#[derive(Clone, Debug)]
pub struct MixedChain {
    parity: Parity,
    cutoff: usize,
    dim: usize,
    components: BTreeMap<usize, Chain>,
}

impl MixedChain {
    pub fn new(parity: Parity, cutoff: usize, dim: usize) -> Self {
        MixedChain { parity, cutoff, dim, components: BTreeMap::new() }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degrees of the stated parity up to the cutoff.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        let start = if self.parity == Parity::Even { 0 } else { 1 };
        (start..=self.cutoff).step_by(2)
    }

    /// Adds a chain into its component; chains above the cutoff are discarded.
    pub fn insert(&mut self, chain: Chain) -> Result<()> {
        if Parity::of(chain.degree()) != self.parity {
            return Err(Error::Parity(format!("degree {} in a {:?} mixed chain", chain.degree(), self.parity)));
        }
        if chain.dim() != self.dim {
            return Err(Error::DimMismatch(format!("chain of dim {} in mixed chain of dim {}", chain.dim(), self.dim)));
        }
        if chain.degree() > self.cutoff {
            return Ok(());
        }
        let merged = match self.components.remove(&chain.degree()) {
            Some(existing) => existing.add(&chain)?,
            None => chain.normalized(),
        };
        self.components.insert(merged.degree(), merged);
        Ok(())
    }

    /// Component of the given degree (zero chain when absent).
    pub fn component(&self, degree: usize) -> Chain {
        self.components.get(&degree).cloned().unwrap_or_else(|| Chain::zero(degree, self.dim))
    }

    pub fn components(&self) -> impl Iterator<Item = (&usize, &Chain)> {
        self.components.iter()
    }

    pub fn scale(&self, c: C64) -> MixedChain {
        let mut out = MixedChain::new(self.parity, self.cutoff, self.dim);
        for (&k, ch) in &self.components {
            out.components.insert(k, ch.scale(c));
        }
        out
    }

    fn check_compatible(&self, other: &MixedChain) -> Result<()> {
        if self.parity != other.parity {
            return Err(Error::Parity("mixed chains of different parity".into()));
        }
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!("mixed chains of dim {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// Sum, truncated at the smaller cutoff.
    pub fn add(&self, other: &MixedChain) -> Result<MixedChain> {
        self.check_compatible(other)?;
        let mut out = MixedChain::new(self.parity, self.cutoff.min(other.cutoff), self.dim);
        for ch in self.components.values().chain(other.components.values()) {
            out.insert(ch.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MixedChain) -> Result<MixedChain> {
        self.add(&other.scale(-ONE))
    }

    /// Total differential `b + B`. The result has the opposite parity and cutoff
    /// one lower, since its top component would need the missing degree `cutoff + 1`.
    pub fn boundary(&self) -> Result<MixedChain> {
        let cutoff = self.cutoff.checked_sub(1).ok_or_else(|| Error::Invalid("boundary of a cutoff-0 chain".into()))?;
        let mut out = MixedChain::new(self.parity.flip(), cutoff, self.dim);
        let parts: Vec<Result<Vec<Chain>>> = self
            .components
            .par_iter()
            .map(|(&k, ch)| {
                let mut v = Vec::new();
                if k >= 1 && k - 1 <= cutoff {
                    v.push(ch.b()?);
                }
                if k < cutoff {
                    v.push(ch.big_b());
                }
                Ok(v)
            })
            .collect();
        for part in parts {
            for ch in part? {
                out.insert(ch)?;
            }
        }
        Ok(out)
    }

    pub fn reduce_blocks(&self, k: usize) -> Result<MixedChain> {
        if k == 0 || !self.dim.is_multiple_of(k) {
            return Err(Error::DimMismatch(format!("cannot split dim {} into {k} blocks", self.dim)));
        }
        let mut out = MixedChain::new(self.parity, self.cutoff, self.dim / k);
        let reduced: Vec<Result<Chain>> = self.components.par_iter().map(|(_, ch)| ch.reduce_blocks(k)).collect();
        for ch in reduced {
            out.insert(ch?)?;
        }
        Ok(out)
    }

    /// Largest component residual (see [`Chain::residual`]).
    pub fn residual(&self) -> f64 {
        self.components.par_iter().map(|(_, c)| c.residual()).collect::<Vec<_>>().into_iter().fold(0.0, f64::max)
    }

    /// Residual per degree, ascending.
    pub fn residuals(&self) -> Vec<(usize, f64)> {
        self.components.iter().map(|(&k, c)| (k, c.residual())).collect()
    }

    /// Restriction to degrees `≤ cutoff`.
    pub fn truncate(&self, cutoff: usize) -> MixedChain {
        let mut out = self.clone();
        out.cutoff = out.cutoff.min(cutoff);
        out.components.retain(|&k, _| k <= cutoff);
        out
    }
}

/// A cocycle in the cone of the inclusion of relative chains: a `relative` chain
/// and an `absolute` chain of opposite parity with `(b+B)·relative = 0` and
/// `relative + (b+B)·absolute = 0` once both are block-traced to `base_dim`.
#[derive(Clone, Debug)]
pub struct ConeCocycle {
    pub relative: MixedChain,
    pub absolute: MixedChain,
    pub base_dim: usize,
}

impl ConeCocycle {
    pub fn new(relative: MixedChain, absolute: MixedChain, base_dim: usize) -> Result<Self> {
        if relative.parity() == absolute.parity() {
            return Err(Error::Parity("cone parts must have opposite parity".into()));
        }
        for d in [relative.dim(), absolute.dim()] {
            if base_dim == 0 || d % base_dim != 0 {
                return Err(Error::DimMismatch(format!("dim {d} is not a multiple of base dim {base_dim}")));
            }
        }
        Ok(ConeCocycle { relative, absolute, base_dim })
    }

    /// Both parts reduced to the base dimension.
    pub fn reduced(&self) -> Result<(MixedChain, MixedChain)> {
        let rel = self.relative.reduce_blocks(self.relative.dim() / self.base_dim)?;
        let abs = self.absolute.reduce_blocks(self.absolute.dim() / self.base_dim)?;
        Ok((rel, abs))
    }

    /// Largest residual of the two cone equations, over degrees both parts determine.
    pub fn residual(&self) -> Result<f64> {
        let (rel, abs) = self.reduced()?;
        let top = rel.cutoff().min(abs.cutoff().saturating_sub(1));
        let rel = rel.truncate(top);
        let closed = if top >= 1 { rel.boundary()?.residual() } else { 0.0 };
        let exact = rel.add(&abs.boundary()?.truncate(top))?.residual();
        Ok(closed.max(exact))
    }
}

/// Pairs an Alexander–Spanier cochain with a chain:
/// `Σ_terms coeff · Σ_i Tr_interior(A₀ M_{f₀ⁱ} A₁ M_{f₁ⁱ} … A_q M_{f_qⁱ})`.
///
/// Chains over `k`-fold amplified matrices are paired through `I_k ⊗ M_f` and the
/// blockwise interior trace, which equals pairing the block-traced chain.
pub fn trace_pair(phi: &ASCochain, c: &Chain, model: &Model) -> Result<C64> {
    if phi.degree() != c.degree() {
        return Err(Error::DegreeMismatch { expected: c.degree(), found: phi.degree() });
    }
    model.check_cochain(phi)?;
    if c.is_empty() || phi.is_empty() {
        return Ok(ZERO);
    }
    let rows = model.window_rows(c.dim())?;
    let k = c.dim() / model.dim();

    // multiplication operator per distinct function; constants become scalars
    let mut funcs: Vec<&FunctionRep> = Vec::new();
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(phi.terms().len());
    for t in phi.terms() {
        let mut ids = Vec::with_capacity(t.functions.len());
        for f in &t.functions {
            let id = match funcs.iter().position(|g| *g == f) {
                Some(i) => i,
                None => {
                    funcs.push(f);
                    funcs.len() - 1
                }
            };
            ids.push(id);
        }
        slots.push(ids);
    }
    let mults: Vec<Multiplier> = funcs
        .iter()
        .map(|f| match f.constant_value() {
            Some(v) => Ok(Multiplier::Scalar(v)),
            None => Ok(Multiplier::Matrix(model.multiplication(f)?.amplify(k))),
        })
        .collect::<Result<_>>()?;

    let values: Vec<C64> = c
        .terms()
        .par_iter()
        .map(|term| {
            let mut total = ZERO;
            for (t, ids) in phi.terms().iter().zip(&slots) {
                if t.coeff == ZERO {
                    continue;
                }
                let v = pair_term(&term.factors, ids, &mults, &rows);
                total += t.coeff * v;
            }
            term.coeff * total
        })
        .collect();
    Ok(values.into_iter().fold(ZERO, |a, b| a + b))
}

enum Multiplier {
    Scalar(C64),
    Matrix(Op),
}

fn pair_term(factors: &[Op], ids: &[usize], mults: &[Multiplier], rows: &[usize]) -> C64 {
    let q = factors.len() - 1;
    let mut scalar = ONE;
    let mut acc: DMatrix<C64> = factors[0].mat().clone();
    for j in 0..q {
        match &mults[ids[j]] {
            Multiplier::Scalar(v) => scalar *= v,
            Multiplier::Matrix(m) => acc = gemm(&acc, m.mat()),
        }
        acc = gemm(&acc, factors[j + 1].mat());
    }
    let last = match &mults[ids[q]] {
        Multiplier::Scalar(v) => {
            scalar *= v;
            rows.iter().map(|&i| acc[(i, i)]).fold(ZERO, |a, b| a + b)
        }
        Multiplier::Matrix(m) => trace_of_product_on(&acc, m.mat(), rows),
    };
    scalar * last
}

/// Degreewise pairing of a family of cochains with a mixed chain; degrees
/// absent from the chain contribute zero.
pub fn pair_mixed(phis: &[ASCochain], m: &MixedChain, model: &Model) -> Result<C64> {
    let mut acc = ZERO;
    for phi in phis {
        if Parity::of(phi.degree()) != m.parity() {
            return Err(Error::Parity(format!("cochain of degree {} against {:?} chain", phi.degree(), m.parity())));
        }
        if let Some(c) = m.components.get(&phi.degree()) {
            acc += trace_pair(phi, c, model)?;
        }
    }
    Ok(acc)
}
