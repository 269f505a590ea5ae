//! Truncated operator models on S¹ and S³, the interior-trace policy, and
//! spectral constructions (positive projection, phase, heat parametrix).
//!
//! On S¹ two spaces are available:
//! * `Hardy` — modes `0..N`; multiplication by `f` is the Toeplitz compression
//!   `(T_f)_{mn} = f̂(m−n)`. The interior window is modes `< N − pad`.
//! * `Full` — modes `−N..N` of `L²(S¹)`; multiplication is the Laurent matrix and
//!   Toeplitz operators are `P M_f P` with the Hardy projection `P`. The interior
//!   window drops `pad` modes at both ends.
//!
//! Truncation produces spurious boundary terms near the cut-off; traces that
//! skip the last `pad ≥ 2·bandwidth` modes see the infinite-dimensional values
//! for banded symbols.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aspanier::{ASCochain, FunctionRep, Manifold};
use crate::chern::{lift_symbol, LiftData};
use crate::error::{Error, Result};
use crate::op::{Op, C64, ZERO};
use crate::s3::{self, MonomialBasis};

/// Spectral gap required of selfadjoint operators at zero.
pub const GAP_TOL: f64 = 1e-8;
/// Singular values below this count as kernel.
pub const KERNEL_TOL: f64 = 1e-10;
/// Largest S³ degree cutoff accepted.
pub const S3_MAX_DEGREE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Hardy,
    Full,
}

#[derive(Clone, Debug)]
pub struct Model {
    manifold: Manifold,
    n: usize,
    pad: usize,
    kappa: (i64, i64),
    space: Space,
    basis: Option<Arc<MonomialBasis>>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        (self.manifold, self.n, self.pad, self.kappa, self.space) == (other.manifold, other.n, other.pad, other.kappa, other.space)
    }
}

impl Model {
    pub fn new(manifold: Manifold, n: usize, pad: usize, space: Space) -> Result<Self> {
        if manifold == Manifold::S3 && space == Space::Full {
            return Err(Error::Invalid("the S3 model only has a Hardy space".into()));
        }
        let interior = match space {
            Space::Hardy => n.checked_sub(pad),
            Space::Full => (2 * n).checked_sub(2 * pad),
        };
        if interior.unwrap_or(0) < 1 {
            return Err(Error::Window(format!("N = {n} leaves no interior modes with pad = {pad}")));
        }
        let basis = match manifold {
            Manifold::S1 => None,
            Manifold::S3 => Some(Arc::new(s3_monomial_gram(n)?)),
        };
        Ok(Model { manifold, n, pad, kappa: (1, 1), space, basis })
    }

    /// Hardy space on S¹, modes `0..n`.
    pub fn circle(n: usize, pad: usize) -> Result<Self> {
        Self::new(Manifold::S1, n, pad, Space::Hardy)
    }

    /// `L²(S¹)`, modes `−n..n`.
    pub fn circle_full(n: usize, pad: usize) -> Result<Self> {
        Self::new(Manifold::S1, n, pad, Space::Full)
    }

    /// Hardy space on S³, holomorphic monomials of degree `< n`.
    pub fn sphere(n: usize, pad: usize) -> Result<Self> {
        Self::new(Manifold::S3, n, pad, Space::Hardy)
    }

    pub fn with_kappa(mut self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("kappa denominator is zero".into()));
        }
        self.kappa = (num, den);
        Ok(self)
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.0 as f64 / self.kappa.1 as f64
    }

    pub fn kappa_ratio(&self) -> (i64, i64) {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        match (self.manifold, self.space) {
            (Manifold::S1, Space::Hardy) => self.n,
            (Manifold::S1, Space::Full) => 2 * self.n,
            (Manifold::S3, _) => self.basis.as_ref().expect("S3 basis").len(),
        }
    }

    /// Fourier mode of each basis index (S¹ only).
    pub fn modes(&self) -> Vec<i64> {
        let n = self.n as i64;
        match self.space {
            Space::Hardy => (0..n).collect(),
            Space::Full => (-n..n).collect(),
        }
    }

    /// Basis indices inside the interior-trace window.
    pub fn window(&self) -> Vec<usize> {
        match (self.manifold, self.space) {
            (Manifold::S1, Space::Hardy) => (0..self.n - self.pad).collect(),
            (Manifold::S1, Space::Full) => (self.pad..2 * self.n - self.pad).collect(),
            (Manifold::S3, _) => {
                let b = self.basis.as_ref().expect("S3 basis");
                let top = (self.n - self.pad) as u32;
                (0..b.len()).filter(|&i| b.exponents[i][0] + b.exponents[i][1] < top).collect()
            }
        }
    }

    /// Window rows for an operator of dimension `dim`, which must be a multiple
    /// of the model dimension (block amplification).
    pub fn window_rows(&self, dim: usize) -> Result<Vec<usize>> {
        let base = self.dim();
        if dim == 0 || !dim.is_multiple_of(base) {
            return Err(Error::DimMismatch(format!("operator dim {dim} is not a multiple of model dim {base}")));
        }
        let w = self.window();
        Ok((0..dim / base).flat_map(|b| w.iter().map(move |&i| b * base + i)).collect())
    }

    /// Enforces `pad ≥ 2·bandwidth`.
    pub fn check_bandwidth(&self, bandwidth: usize) -> Result<()> {
        if self.pad < 2 * bandwidth {
            return Err(Error::Window(format!("pad {} is smaller than twice the symbol bandwidth {}", self.pad, bandwidth)));
        }
        Ok(())
    }

    pub(crate) fn check_cochain(&self, phi: &ASCochain) -> Result<()> {
        if phi.manifold() != self.manifold {
            return Err(Error::ModelMismatch(format!("{:?} cochain on a {:?} model", phi.manifold(), self.manifold)));
        }
        self.check_bandwidth(phi.bandwidth())
    }

    fn check_function(&self, f: &FunctionRep) -> Result<()> {
        if f.manifold() != self.manifold {
            return Err(Error::ModelMismatch(format!("{:?} function on a {:?} model", f.manifold(), self.manifold)));
        }
        if f.bandwidth() > self.n {
            return Err(Error::Bandwidth { bandwidth: f.bandwidth(), n: self.n });
        }
        Ok(())
    }

    /// Compressed multiplication operator `M_f` on the model space.
    pub fn multiplication(&self, f: &FunctionRep) -> Result<Op> {
        self.check_function(f)?;
        match self.manifold {
            Manifold::S1 => {
                let coeffs = f.circle_modes().expect("S1 function");
                let modes = self.modes();
                Ok(Op::from_fn(modes.len(), |m, n| coeffs.get(&(modes[m] - modes[n])).copied().unwrap_or(ZERO)))
            }
            Manifold::S3 => Ok(self.sphere_compression(f)),
        }
    }

    /// Toeplitz operator `P M_f P`.
    pub fn toeplitz(&self, f: &FunctionRep) -> Result<Op> {
        let m = self.multiplication(f)?;
        match self.space {
            Space::Hardy => Ok(m),
            Space::Full => {
                let p = self.hardy_projection();
                Ok(&(&p * &m) * &p)
            }
        }
    }

    /// Orthogonal projection onto the nonnegative modes (identity on Hardy models).
    pub fn hardy_projection(&self) -> Op {
        match self.space {
            Space::Hardy => Op::identity(self.dim()),
            Space::Full => {
                let d: Vec<f64> = self.modes().iter().map(|&k| if k >= 0 { 1.0 } else { 0.0 }).collect();
                Op::diag_real(&d)
            }
        }
    }

    /// `Σ_{i ∈ window} A_ii` (blockwise for amplified operators).
    pub fn interior_trace(&self, a: &Op) -> Result<C64> {
        let rows = self.window_rows(a.dim())?;
        Ok(rows.iter().map(|&i| a.get(i, i)).sum())
    }

    /// `D = T_f + shift·I` for real `f`, together with its spectral gap at zero.
    pub fn selfadjoint_toeplitz(&self, f: &FunctionRep, shift: f64) -> Result<(Op, f64)> {
        if !f.is_real() {
            return Err(Error::NotSelfAdjoint(f64::NAN));
        }
        let d = self.toeplitz(f)?.shift(C64::new(shift, 0.0));
        let gap = spectral_gap(&d)?;
        Ok((d, gap))
    }

    /// Order-one weighted shift `T_{z^k} Λ` with `Λ = diag(|mode| + 1)` on S¹.
    /// Its heat parametrix has exponentially small remainders inside the window.
    pub fn weighted_shift(&self, k: i64) -> Result<Op> {
        if self.manifold != Manifold::S1 {
            return Err(Error::ModelMismatch("weighted shifts live on S1".into()));
        }
        let shift = self.toeplitz(&FunctionRep::circle_mode(k))?;
        let lambda: Vec<f64> = self.modes().iter().map(|&m| m.abs() as f64 + 1.0).collect();
        Ok(&shift * &Op::diag_real(&lambda))
    }

    /// Selfadjoint first-order operator `diag(mode + ½ + shift) + M_a` on `L²(S¹)`,
    /// with `a` a real potential. Its positive spectral projection differs from the
    /// Hardy projection by a finite-rank operator when `a` is small.
    pub fn dirac(&self, shift: f64, potential: &FunctionRep) -> Result<Op> {
        if self.manifold != Manifold::S1 || self.space != Space::Full {
            return Err(Error::ModelMismatch("the Dirac model needs the full L2(S1) space".into()));
        }
        if !potential.is_real() {
            return Err(Error::NotSelfAdjoint(f64::NAN));
        }
        let diag: Vec<f64> = self.modes().iter().map(|&k| k as f64 + 0.5 + shift).collect();
        let m = self.multiplication(potential)?;
        Ok(&Op::diag_real(&diag) + &m)
    }

    fn sphere_compression(&self, f: &FunctionRep) -> Op {
        let b = self.basis.as_ref().expect("S3 basis");
        let poly = f.sphere_poly().expect("S3 function");
        let n = b.len();
        let norms: Vec<f64> = b.norms_sq.iter().map(|x| x.sqrt()).collect();
        let mut entries = vec![ZERO; n * n];
        for (col, d) in b.exponents.iter().enumerate() {
            for (e, c) in poly {
                // z^α z̄^β z^δ projects onto z^γ with α + δ = β + γ
                let g0 = (e[0] + d[0]).checked_sub(e[2]);
                let g1 = (e[1] + d[1]).checked_sub(e[3]);
                let (Some(g0), Some(g1)) = (g0, g1) else { continue };
                let Some(row) = b.index_of([g0, g1]) else { continue };
                let a = [e[0] + d[0], e[1] + d[1]];
                let ip = s3::sphere_monomial_integral(&[a[0], a[1], a[0], a[1]]);
                entries[row + n * col] += c * (ip / (norms[row] * norms[col]));
            }
        }
        Op::from_matrix(nalgebra::DMatrix::from_vec(n, n, entries))
    }
}

/// Orthonormal holomorphic monomial basis of `H²(S³)` up to degree `< d`.
pub fn s3_monomial_gram(d: usize) -> Result<MonomialBasis> {
    if d > S3_MAX_DEGREE {
        return Err(Error::SizeGuard(format!("S3 degree cutoff {d} exceeds {S3_MAX_DEGREE}")));
    }
    Ok(MonomialBasis::new(d as u32))
}

fn check_selfadjoint(d: &Op) -> Result<()> {
    let defect = d.selfadjoint_defect();
    if defect > 1e-10 * d.norm().max(1.0) {
        return Err(Error::NotSelfAdjoint(defect));
    }
    Ok(())
}

/// Smallest `|λ|` over the spectrum of a selfadjoint operator.
pub fn spectral_gap(d: &Op) -> Result<f64> {
    check_selfadjoint(d)?;
    let (vals, _) = d.hermitian_eigen();
    let gap = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if gap < GAP_TOL {
        return Err(Error::SpectrallyDegenerate(gap));
    }
    Ok(gap)
}

/// Projection onto the span of eigenvectors with positive eigenvalue.
pub fn positive_spectral_projection(d: &Op) -> Result<Op> {
    spectral_gap(d)?;
    Ok(d.hermitian_fn(|x| if x > 0.0 { 1.0 } else { 0.0 }))
}

/// `F = D |D|⁻¹` from the polar decomposition `D = U Σ V*`, `F = U V*`.
pub fn phase_operator(d: &Op) -> Result<Op> {
    let (s, u, v) = d.svd();
    let smin = s.last().copied().unwrap_or(0.0);
    if smin < GAP_TOL * s[0].max(1.0) {
        return Err(Error::Singular(smin / s[0].max(f64::MIN_POSITIVE)));
    }
    Ok(Op::from_matrix(crate::op::gemm(&u, &v.adjoint())))
}

/// Smooth selfadjoint approximation `tanh(D / width)` of the phase of `D`.
/// It agrees with the phase up to terms decaying in `|λ|/width` and, unlike the
/// exact phase, `1 − F²` does not vanish.
pub fn localized_phase(d: &Op, width: f64) -> Result<Op> {
    check_selfadjoint(d)?;
    if !(width > 0.0) {
        return Err(Error::Invalid(format!("phase width must be positive, got {width}")));
    }
    Ok(d.hermitian_fn(|x| (x / width).tanh()))
}

/// Heat parametrix of `tD`: `Q = t·g(D*D)·D*` with `g(λ) = (1 − e^{−t²λ/2})/(t²λ)`
/// (limit ½ at λ = 0), so that `S₀ = e^{−t²D*D/2}` and `S₁ = e^{−t²DD*/2}`.
pub fn heat_parametrix(d: &Op, t: f64) -> Result<LiftData> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("heat time must be positive, got {t}")));
    }
    let dsd = &d.adjoint() * d;
    let t2 = t * t;
    let g = dsd.hermitian_fn(|lam| {
        let x = t2 * lam.max(0.0);
        if x < 1e-8 {
            0.5 - x / 8.0
        } else {
            -(-0.5 * x).exp_m1() / x
        }
    });
    let q = (&g * &d.adjoint()).scale_real(t);
    lift_symbol(&d.scale_real(t), &q)
}

/// Projections onto `ker D` and `ker D*` from the singular value decomposition.
pub fn kernel_projections(d: &Op) -> (Op, Op) {
    let (s, u, v) = d.svd();
    let n = d.dim();
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    let kernel: Vec<usize> = (0..n).filter(|&i| s[i] <= KERNEL_TOL * scale).collect();
    let proj = |m: &nalgebra::DMatrix<C64>| {
        Op::from_fn(n, |a, b| kernel.iter().map(|&k| m[(a, k)] * m[(b, k)].conj()).sum())
    };
    (proj(&v), proj(&u))
}

/// Moore–Penrose inverse `D⁺ = V Σ⁺ U*`, singular values below the kernel threshold inverted to zero.
pub fn pseudo_inverse(d: &Op) -> Op {
    let (s, u, v) = d.svd();
    let n = d.dim();
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    let inv: Vec<f64> = s.iter().map(|&x| if x <= KERNEL_TOL * scale { 0.0 } else { 1.0 / x }).collect();
    Op::from_fn(n, |a, b| (0..n).map(|k| v[(a, k)] * u[(b, k)].conj() * inv[k]).sum())
}

/// Limit idempotent `diag(I − H₁, H₀)` of the heat construction, with `H₀`, `H₁`
/// the projections onto `ker D`, `ker D*`.
pub fn limit_idempotent(d: &Op) -> Result<Op> {
    let (h0, h1) = kernel_projections(d);
    let i = Op::identity(d.dim());
    Op::diag_blocks(&(&i - &h1), &h0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_is_subdiagonal() {
        let m = Model::circle(4, 1).unwrap();
        let t = m.toeplitz(&FunctionRep::z()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(t.get(i, j), C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn interior_trace_of_identity() {
        let m = Model::circle(8, 2).unwrap();
        assert_eq!(m.interior_trace(&Op::identity(8)).unwrap(), C64::new(6.0, 0.0));
    }

    #[test]
    fn truncated_commutator_sees_one_mode() {
        let m = Model::circle(8, 1).unwrap();
        let s = m.toeplitz(&FunctionRep::z()).unwrap();
        let sb = m.toeplitz(&FunctionRep::zbar()).unwrap();
        let c = sb.commutator(&s).unwrap();
        assert!((m.interior_trace(&c).unwrap() - 1.0).norm() < 1e-14);
        // the naive full trace of a commutator is zero
        assert!(c.trace().norm() < 1e-14);
    }

    #[test]
    fn degenerate_shift_rejected() {
        let m = Model::circle(4, 1).unwrap();
        let r = m.selfadjoint_toeplitz(&FunctionRep::constant(Manifold::S1, ZERO), 0.0);
        assert!(matches!(r, Err(Error::SpectrallyDegenerate(_))));
    }

    #[test]
    fn phase_of_diagonal() {
        let f = phase_operator(&Op::diag_real(&[2.0, -3.0])).unwrap();
        assert!(f.dist(&Op::diag_real(&[1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn heat_parametrix_scalar() {
        let l = heat_parametrix(&Op::identity(1), 1.0).unwrap();
        assert!((l.q.get(0, 0).re - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let z = heat_parametrix(&Op::zeros(2), 1.0).unwrap();
        assert!(z.q.is_zero() || z.q.max_abs() < 1e-300);
        assert!(z.s0.dist(&Op::identity(2)) < 1e-15);
    }

    #[test]
    fn limit_idempotent_extremes() {
        let inv = limit_idempotent(&Op::diag_real(&[1.0, 2.0])).unwrap();
        assert!(inv.dist(&Op::diag_real(&[1.0, 1.0, 0.0, 0.0])) < 1e-14);
        let zero = limit_idempotent(&Op::zeros(2)).unwrap();
        assert!(zero.dist(&Op::diag_real(&[0.0, 0.0, 1.0, 1.0])) < 1e-14);
    }

    #[test]
    fn s3_guard() {
        assert!(matches!(s3_monomial_gram(13), Err(Error::SizeGuard(_))));
    }
}
