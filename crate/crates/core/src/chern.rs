//! Chern characters of idempotents and invertibles, slant chains and their
//! transgressions along paths, and the relative and suspended characters built
//! from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constants;
use crate::cyclic::{sign, Chain, ConeCocycle, MixedChain, Parity};
use crate::error::{Error, Result};
use crate::op::{Op, C64, ONE, ZERO};
use crate::quadrature::{gauss_legendre_on, DEFAULT_NODES};

/// Uniform gate for idempotency and inverse checks (scaled by the operator size).
pub const IDEMPOTENT_TOL: f64 = 1e-10;
/// Upper limit for node doubling in [`transgress_to_tolerance`].
pub const MAX_NODES_PER_PIECE: usize = 512;

fn check_idempotent(e: &Op) -> Result<()> {
    let defect = e.idempotent_defect();
    if defect > IDEMPOTENT_TOL * e.norm().max(1.0) {
        return Err(Error::NotIdempotent(defect));
    }
    Ok(())
}

fn check_inverse_pair(v: &Op, vinv: &Op) -> Result<()> {
    v.check_dim(vinv)?;
    let defect = (v * vinv).shift(-ONE).norm();
    if defect > IDEMPOTENT_TOL * (v.norm() * vinv.norm()).max(1.0) {
        return Err(Error::NotInverse(defect));
    }
    Ok(())
}

fn require_parity(cutoff: usize, parity: Parity, what: &str) -> Result<()> {
    if Parity::of(cutoff) != parity {
        return Err(Error::Parity(format!("{what} needs an {parity:?} cutoff, got {cutoff}")));
    }
    Ok(())
}

/// `ch(E) = E ⊕ Σ_{q≥1} (−1)^q (2q)!/q! · (E − ½) ⊗ E^{⊗2q}` up to `cutoff`.
pub fn ch_idempotent(e: &Op, cutoff: usize) -> Result<MixedChain> {
    require_parity(cutoff, Parity::Even, "ch of an idempotent")?;
    check_idempotent(e)?;
    let mut out = MixedChain::new(Parity::Even, cutoff, e.dim());
    out.insert(Chain::elementary(ONE, vec![e.clone()])?)?;
    let centered = e.shift(C64::new(-0.5, 0.0));
    for q in 1..=cutoff / 2 {
        let mut f = Vec::with_capacity(2 * q + 1);
        f.push(centered.clone());
        f.extend(std::iter::repeat_n(e.clone(), 2 * q));
        out.insert(Chain::elementary(C64::new(constants::ch_even(q), 0.0), f)?)?;
    }
    Ok(out)
}

/// `ch(U) = Σ_{q≥0} (−1)^q q! · (U⁻¹ ⊗ U)^{⊗(q+1)}` up to `cutoff`.
pub fn ch_invertible(u: &Op, cutoff: usize) -> Result<MixedChain> {
    let uinv = u.inverse()?;
    log::debug!("ch_invertible: dim {}, rcond {:.3e}", u.dim(), u.rcond());
    ch_invertible_with(u, &uinv, cutoff)
}

fn ch_invertible_with(u: &Op, uinv: &Op, cutoff: usize) -> Result<MixedChain> {
    require_parity(cutoff, Parity::Odd, "ch of an invertible")?;
    let mut out = MixedChain::new(Parity::Odd, cutoff, u.dim());
    for q in 0..=(cutoff - 1) / 2 {
        let mut f = Vec::with_capacity(2 * q + 2);
        for _ in 0..=q {
            f.push(uinv.clone());
            f.push(u.clone());
        }
        out.insert(Chain::elementary(C64::new(constants::ch_odd(q), 0.0), f)?)?;
    }
    Ok(out)
}

/// Insertion `ι(X)(A₀ ⊗ … ⊗ A_q) = Σ_j (−1)^j A₀ ⊗ … ⊗ A_j ⊗ X ⊗ A_{j+1} ⊗ … ⊗ A_q`.
pub fn insert_operator(x: &Op, c: &Chain) -> Result<Chain> {
    let q = c.degree();
    let mut out = Chain::zero(q + 1, c.dim());
    for t in c.terms() {
        for j in 0..=q {
            let mut f = Vec::with_capacity(q + 2);
            f.extend_from_slice(&t.factors[..=j]);
            f.push(x.clone());
            f.extend_from_slice(&t.factors[j + 1..]);
            out.push(t.coeff * sign(j), f)?;
        }
    }
    Ok(out.normalized())
}

/// Slant chain of an idempotent path, `ι((2E − 1)Ė)(ch E)`, in odd degrees up to `cutoff`.
pub fn slant_idempotent(e: &Op, edot: &Op, cutoff: usize) -> Result<MixedChain> {
    require_parity(cutoff, Parity::Odd, "slant of an idempotent path")?;
    e.check_dim(edot)?;
    let mut out = MixedChain::new(Parity::Odd, cutoff, e.dim());
    if edot.is_zero() {
        return Ok(out);
    }
    let x = &e.scale_real(2.0).shift(-ONE) * edot;
    let ch = ch_idempotent(e, cutoff - 1)?;
    for (_, c) in ch.components() {
        out.insert(insert_operator(&x, c)?)?;
    }
    Ok(out)
}

/// Slant chain of an invertible path:
/// `U⁻¹U̇ ⊕ Σ_q (−1)^{q+1} q! Σ_j (U⁻¹⊗U)^{⊗(j+1)} ⊗ U⁻¹U̇ ⊗ (U⁻¹⊗U)^{⊗(q−j)}`.
pub fn slant_invertible(u: &Op, udot: &Op, cutoff: usize) -> Result<MixedChain> {
    let uinv = u.inverse()?;
    slant_invertible_with(u, &uinv, udot, cutoff)
}

fn slant_invertible_with(u: &Op, uinv: &Op, udot: &Op, cutoff: usize) -> Result<MixedChain> {
    require_parity(cutoff, Parity::Even, "slant of an invertible path")?;
    u.check_dim(udot)?;
    let mut out = MixedChain::new(Parity::Even, cutoff, u.dim());
    if udot.is_zero() {
        return Ok(out);
    }
    let w = uinv * udot;
    out.insert(Chain::elementary(ONE, vec![w.clone()])?)?;
    for q in 0..cutoff / 2 {
        let coeff = C64::new(constants::slant_odd(q), 0.0);
        let mut c = Chain::zero(2 * q + 2, u.dim());
        for j in 0..=q {
            let mut f = Vec::with_capacity(2 * q + 3);
            for _ in 0..=j {
                f.push(uinv.clone());
                f.push(u.clone());
            }
            f.push(w.clone());
            for _ in 0..q - j {
                f.push(uinv.clone());
                f.push(u.clone());
            }
            c.push(coeff, f)?;
        }
        out.insert(c.normalized())?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    Idempotent,
    Invertible,
}

type Evaluator = Arc<dyn Fn(f64) -> Result<(Op, Op)> + Send + Sync>;

/// A C¹ path of idempotents or invertibles with its velocity, and a composite
/// Gauss–Legendre rule over its smooth pieces.
#[derive(Clone)]
pub struct PathSpec {
    kind: PathKind,
    breakpoints: Vec<f64>,
    nodes_per_piece: usize,
    nodes: Vec<(f64, f64)>,
    evaluator: Evaluator,
}

impl fmt::Debug for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSpec")
            .field("kind", &self.kind)
            .field("breakpoints", &self.breakpoints)
            .field("nodes_per_piece", &self.nodes_per_piece)
            .finish()
    }
}

impl PathSpec {
    /// `breakpoints` split the interval into smooth pieces, each integrated with
    /// `nodes_per_piece` Gauss–Legendre nodes.
    pub fn new(
        kind: PathKind,
        breakpoints: Vec<f64>,
        nodes_per_piece: usize,
        evaluator: impl Fn(f64) -> Result<(Op, Op)> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(kind, breakpoints, nodes_per_piece, Arc::new(evaluator))
    }

    fn build(kind: PathKind, breakpoints: Vec<f64>, nodes_per_piece: usize, evaluator: Evaluator) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("path breakpoints must be strictly increasing".into()));
        }
        if nodes_per_piece == 0 {
            return Err(Error::Invalid("a path needs at least one node per piece".into()));
        }
        let nodes: Vec<(f64, f64)> =
            breakpoints.windows(2).flat_map(|w| gauss_legendre_on(w[0], w[1], nodes_per_piece)).collect();
        Ok(PathSpec { kind, breakpoints, nodes_per_piece, nodes, evaluator })
    }

    /// Same path with a different number of nodes per piece.
    pub fn with_nodes(&self, nodes_per_piece: usize) -> Result<Self> {
        Self::build(self.kind, self.breakpoints.clone(), nodes_per_piece, self.evaluator.clone())
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn t0(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn t1(&self) -> f64 {
        *self.breakpoints.last().expect("at least two breakpoints")
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn nodes_per_piece(&self) -> usize {
        self.nodes_per_piece
    }

    /// Point and velocity at `t`.
    pub fn evaluate(&self, t: f64) -> Result<(Op, Op)> {
        (self.evaluator)(t)
    }

    fn slant(&self, t: f64, cutoff: usize) -> Result<MixedChain> {
        let (p, v) = self.evaluate(t)?;
        match self.kind {
            PathKind::Idempotent => slant_idempotent(&p, &v, cutoff),
            PathKind::Invertible => slant_invertible(&p, &v, cutoff),
        }
    }

    /// Chern character at `t` truncated one degree below `cutoff`.
    pub fn ch_at(&self, t: f64, cutoff: usize) -> Result<MixedChain> {
        let (p, _) = self.evaluate(t)?;
        match self.kind {
            PathKind::Idempotent => ch_idempotent(&p, cutoff),
            PathKind::Invertible => ch_invertible(&p, cutoff),
        }
    }
}

/// `Tch = ∫ slant(path(t), path'(t)) dt` by the path's quadrature rule, in degrees
/// up to `cutoff` (odd for idempotent paths, even for invertible paths).
/// Nodes are evaluated in parallel and accumulated in node order.
pub fn transgress(path: &PathSpec, cutoff: usize) -> Result<MixedChain> {
    let parity = match path.kind {
        PathKind::Idempotent => Parity::Odd,
        PathKind::Invertible => Parity::Even,
    };
    require_parity(cutoff, parity, "transgression")?;
    let slants: Vec<Result<MixedChain>> = path.nodes.par_iter().map(|&(t, _)| path.slant(t, cutoff)).collect();
    let (_, first) = path.evaluate(path.t0())?;
    let mut out = MixedChain::new(parity, cutoff, first.dim());
    for (s, &(_, w)) in slants.into_iter().zip(&path.nodes) {
        for (_, c) in s?.scale(C64::new(w, 0.0)).components() {
            out.insert(c.clone())?;
        }
    }
    Ok(out)
}

/// `ch(end) − ch(start) − (b+B)·Tch` over the degrees below `cutoff`, returned
/// before block reduction. `k` is the block factor applied before measuring.
pub fn transgression_defect(path: &PathSpec, tch: &MixedChain, block_factor: usize) -> Result<MixedChain> {
    let ch_cutoff = tch.cutoff() - 1;
    let end = path.ch_at(path.t1(), ch_cutoff)?;
    let start = path.ch_at(path.t0(), ch_cutoff)?;
    let defect = end.sub(&start)?.sub(&tch.boundary()?)?;
    defect.reduce_blocks(block_factor)
}

/// Residual of the transgression identity (see [`transgression_defect`]).
pub fn transgression_residual(path: &PathSpec, tch: &MixedChain, block_factor: usize) -> Result<f64> {
    Ok(transgression_defect(path, tch, block_factor)?.residual())
}

/// Transgression with node doubling until the residual is at most `target`.
pub fn transgress_to_tolerance(path: &PathSpec, cutoff: usize, block_factor: usize, target: f64) -> Result<(MixedChain, f64, PathSpec)> {
    let mut p = path.clone();
    loop {
        let tch = transgress(&p, cutoff)?;
        let r = transgression_residual(&p, &tch, block_factor)?;
        if r <= target {
            return Ok((tch, r, p));
        }
        if p.nodes_per_piece * 2 > MAX_NODES_PER_PIECE {
            return Err(Error::Quadrature { target, residual: r, nodes: p.nodes_per_piece });
        }
        p = p.with_nodes(p.nodes_per_piece * 2)?;
    }
}

/// Lift of `v = [[0, −u⁻¹], [u, 0]]` from a symbol lift `D` and parametrix `Q`.
#[derive(Clone, Debug)]
pub struct LiftData {
    pub d: Op,
    pub q: Op,
    pub s0: Op,
    pub s1: Op,
    pub v: Op,
    pub vinv: Op,
    pub ev: Op,
}

impl LiftData {
    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    /// `e = diag(I, 0)` in the doubled space.
    pub fn e(&self) -> Op {
        block_unit(self.dim())
    }

    /// Largest defect among `V V⁻¹ = I`, `V⁻¹ V = I` and `E(V)² = E(V)`.
    pub fn defect(&self) -> f64 {
        let n = self.v.dim();
        let a = (&(&self.v * &self.vinv) - &Op::identity(n)).norm();
        let b = (&(&self.vinv * &self.v) - &Op::identity(n)).norm();
        a.max(b).max(self.ev.idempotent_defect())
    }

    /// `[[S₀², S₀(1+S₀)Q], [S₁D, 1 − S₁²]]`.
    pub fn ev_blocks(&self) -> Op {
        let one = Op::identity(self.dim());
        let s0sq = &self.s0 * &self.s0;
        let s1sq = &self.s1 * &self.s1;
        let top_right = &(&self.s0 * &(&one + &self.s0)) * &self.q;
        let bottom_left = &self.s1 * &self.d;
        Op::block(&[&[&s0sq, &top_right], &[&bottom_left, &(&one - &s1sq)]]).expect("equal block sizes")
    }
}

/// `diag(I_n, 0_n)`.
pub fn block_unit(n: usize) -> Op {
    Op::diag_blocks(&Op::identity(n), &Op::zeros(n)).expect("equal block sizes")
}

/// `S₀ = I − QD`, `S₁ = I − DQ`, `V = [[S₀, −(1+S₀)Q], [D, S₁]]`,
/// `V⁻¹ = [[S₀, (1+S₀)Q], [−D, S₁]]`, `E(V) = V e V⁻¹`.
pub fn lift_symbol(d: &Op, q: &Op) -> Result<LiftData> {
    d.check_dim(q)?;
    let n = d.dim();
    let one = Op::identity(n);
    let s0 = &one - &(q * d);
    let s1 = &one - &(d * q);
    let tr = &(&one + &s0) * q;
    let v = Op::block(&[&[&s0, &(-&tr)], &[d, &s1]])?;
    let vinv = Op::block(&[&[&s0, &tr], &[&(-d), &s1]])?;
    let e = block_unit(n);
    let ev = &(&v * &e) * &vinv;
    let lift = LiftData { d: d.clone(), q: q.clone(), s0, s1, v, vinv, ev };
    log::debug!("lift_symbol: dim {n}, defect {:.3e}", lift.defect());
    Ok(lift)
}

/// `E(t) = [[VeV⁻¹ cos²t, Ve sin t cos t], [eV⁻¹ sin t cos t, e sin²t]]` on `[0, π/2]`,
/// running from `diag(VeV⁻¹, 0)` to `diag(0, e)`.
pub fn idempotent_path(v: &Op, vinv: &Op) -> Result<PathSpec> {
    check_inverse_pair(v, vinv)?;
    let n2 = v.dim();
    if !n2.is_multiple_of(2) {
        return Err(Error::DimMismatch(format!("V must have even dimension, got {n2}")));
    }
    let e = block_unit(n2 / 2);
    let ve = v * &e;
    let ev = &e * vinv;
    let vev = &ve * vinv;
    let eval = move |t: f64| -> Result<(Op, Op)> {
        let (s, c) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        let p = Op::block(&[
            &[&vev.scale_real(c * c), &ve.scale_real(s * c)],
            &[&ev.scale_real(s * c), &e.scale_real(s * s)],
        ])?;
        let dp = Op::block(&[
            &[&vev.scale_real(-s2), &ve.scale_real(c2)],
            &[&ev.scale_real(c2), &e.scale_real(s2)],
        ])?;
        Ok((p, dp))
    };
    PathSpec::new(PathKind::Idempotent, vec![0.0, PI / 2.0], DEFAULT_NODES, eval)
}

/// The path `e(t)` for the tautological lift `v = [[0, −u⁻¹], [u, 0]]` of an invertible `u`.
pub fn unit_path(u: &Op) -> Result<PathSpec> {
    let uinv = u.inverse()?;
    let z = Op::zeros(u.dim());
    let v = Op::block(&[&[&z, &(-&uinv)], &[u, &z]])?;
    let vinv = Op::block(&[&[&z, &uinv], &[&(-u), &z]])?;
    idempotent_path(&v, &vinv)
}

/// `U(t) = exp(2πi t P)` on `[0, 1]` with `U̇ = 2πi P U`.
pub fn exp_path(p: &Op) -> Result<PathSpec> {
    let gen = p.scale(C64::new(0.0, 2.0 * PI));
    let eval = move |t: f64| -> Result<(Op, Op)> {
        let u = gen.scale_real(t).exp();
        let du = &gen * &u;
        Ok((u, du))
    };
    PathSpec::new(PathKind::Invertible, vec![0.0, 1.0], DEFAULT_NODES, eval)
}

/// Relative Chern character `(ch E(V) − ch e, Tch(E, Ė))` of the symbol lifted by `(D, Q)`.
/// `cutoff` is the top (even) degree of the relative part.
pub fn chr_odd(d: &Op, q: &Op, cutoff: usize) -> Result<ConeCocycle> {
    let lift = lift_symbol(d, q)?;
    chr_odd_from_lift(&lift, cutoff)
}

pub fn chr_odd_from_lift(lift: &LiftData, cutoff: usize) -> Result<ConeCocycle> {
    require_parity(cutoff, Parity::Even, "relative part of chr_odd")?;
    let rel = ch_idempotent(&lift.ev, cutoff)?.sub(&ch_idempotent(&lift.e(), cutoff)?)?;
    let path = idempotent_path(&lift.v, &lift.vinv)?;
    let tch = transgress(&path, cutoff + 1)?;
    ConeCocycle::new(rel, tch, lift.dim())
}

/// `(1/2πi)·(−ch U(1), Tch(U, U̇))` for `U(t) = exp(2πi t P)`; `cutoff` is the top
/// (odd) degree of the relative part.
pub fn chr_even(p: &Op, cutoff: usize) -> Result<ConeCocycle> {
    require_parity(cutoff, Parity::Odd, "relative part of chr_even")?;
    let path = exp_path(p)?;
    let (u1, _) = path.evaluate(1.0)?;
    let inv2pii = C64::new(0.0, -1.0 / (2.0 * PI));
    let rel = ch_invertible(&u1, cutoff)?.scale(-inv2pii);
    let tch = transgress(&path, cutoff + 1)?.scale(inv2pii);
    ConeCocycle::new(rel, tch, p.dim())
}

/// The loop of idempotents attached to a selfadjoint `F`: with
/// `Φ(θ) = cos θ + i sin θ F` on `[0, π]`, `e^{iθ}` on `[π, 2π]`, `Ψ = Φ*`,
/// `S = 1 − ΦΨ` and `V_θ` the lift of `(Φ, Ψ)`, the loop is
/// `E_θ = V_θ (1 − e) V_θ⁻¹ = 1 − E(V_θ)`, which starts and ends at `e`.
pub fn suspension_loop(f: &Op) -> Result<PathSpec> {
    let defect = f.selfadjoint_defect();
    if defect > IDEMPOTENT_TOL * f.norm().max(1.0) {
        return Err(Error::NotSelfAdjoint(defect));
    }
    let n = f.dim();
    let f = f.clone();
    let eval = move |theta: f64| -> Result<(Op, Op)> {
        let one = Op::identity(n);
        let (s, c) = theta.sin_cos();
        let (phi, dphi) = if theta <= PI {
            (f.scale(C64::new(0.0, s)).shift(C64::new(c, 0.0)), f.scale(C64::new(0.0, c)).shift(C64::new(-s, 0.0)))
        } else {
            (Op::scalar(n, C64::new(c, s)), Op::scalar(n, C64::new(-s, c)))
        };
        let psi = phi.adjoint();
        let dpsi = dphi.adjoint();
        let sm = &one - &(&phi * &psi);
        let dsm = -&(&(&dphi * &psi) + &(&phi * &dpsi));
        let one_s = &one + &sm;
        // E(V) = [[S², S(1+S)Ψ], [SΦ, 1 − S²]]
        let s2 = &sm * &sm;
        let ds2 = &(&dsm * &sm) + &(&sm * &dsm);
        let tr = &(&sm * &one_s) * &psi;
        let dtr = &(&(&(&dsm * &one_s) + &(&sm * &dsm)) * &psi) + &(&(&sm * &one_s) * &dpsi);
        let bl = &sm * &phi;
        let dbl = &(&dsm * &phi) + &(&sm * &dphi);
        // complement: 1 − E(V)
        let p = Op::block(&[&[&(&one - &s2), &(-&tr)], &[&(-&bl), &s2]])?;
        let dp = Op::block(&[&[&(-&ds2), &(-&dtr)], &[&(-&dbl), &ds2]])?;
        Ok((p, dp))
    };
    PathSpec::new(PathKind::Idempotent, vec![0.0, PI, 2.0 * PI], DEFAULT_NODES, eval)
}

/// `Sch(E) = ∫_0^{2π} slant(E_θ, dE/dθ) dθ` for the loop of [`suspension_loop`], in odd
/// degrees up to `cutoff`.
pub fn suspended_chern(f: &Op, cutoff: usize) -> Result<MixedChain> {
    transgress(&suspension_loop(f)?, cutoff)
}

/// Degree-1 pairing with the cyclic cocycle `Φ(u^k, u^l) = l·δ_{k+l,0}` on the
/// circulant algebra generated by the cyclic shift of `ℂ^n`: factors are expanded
/// as `Σ_k a_k C^k` with signed exponents `k ∈ (−n/2, n/2]`.
pub fn circulant_winding_pairing(c: &Chain) -> Result<C64> {
    if c.degree() != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: c.degree() });
    }
    let n = c.dim();
    let shift = cyclic_shift(n);
    let mut powers = vec![Op::identity(n)];
    for k in 1..n {
        powers.push(&powers[k - 1] * &shift);
    }
    let signed = |k: usize| -> i64 {
        let k = k as i64;
        if 2 * k > n as i64 {
            k - n as i64
        } else {
            k
        }
    };
    // a_k = tr(a C^{−k}) / n, with C^{−k} = C^{n−k}
    let coeffs = |a: &Op| -> Vec<C64> {
        (0..n).map(|k| (a * &powers[(n - k) % n]).trace() / n as f64).collect()
    };
    let mut acc = ZERO;
    for t in c.terms() {
        let a = coeffs(&t.factors[0]);
        let b = coeffs(&t.factors[1]);
        for (k, ak) in a.iter().enumerate() {
            let l = (n - k) % n;
            acc += t.coeff * ak * b[l] * signed(l) as f64;
        }
    }
    Ok(acc)
}

/// Cyclic shift `e_j ↦ e_{j+1 mod n}`.
pub fn cyclic_shift(n: usize) -> Op {
    Op::from_fn(n, |i, j| if i == (j + 1) % n { ONE } else { ZERO })
}
