//! Dense complex square matrices standing in for truncated operators.
//!
//! An [`Op`] is an immutable, reference-counted matrix. Chains hold many
//! copies of the same factor (`E ⊗ E ⊗ E ...`), so cloning is a pointer copy.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Threshold below which a tail factor counts as a scalar multiple of the identity.
pub const SCALAR_TOL: f64 = 1e-13;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

struct Inner {
    mat: DMatrix<C64>,
    label: Option<Arc<str>>,
    scalar: OnceLock<bool>,
    zero: OnceLock<bool>,
}

/// Dense complex square matrix with an optional diagnostic label.
#[derive(Clone)]
pub struct Op(Arc<Inner>);

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Op");
        s.field("dim", &self.dim());
        if let Some(l) = &self.0.label {
            s.field("label", l);
        }
        if self.dim() <= 4 {
            s.field("entries", &self.0.mat);
        }
        s.finish()
    }
}

impl PartialEq for Op {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.mat == other.0.mat
    }
}

impl Op {
    /// Wraps a matrix, rejecting non-square input and non-finite entries.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::DimMismatch(format!(
                "operator must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("operator has non-finite entries".into()));
        }
        Ok(Self::from_matrix(mat))
    }

    // Internal constructor for matrices produced by arithmetic on valid Ops.
    pub(crate) fn from_matrix(mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Op(Arc::new(Inner { mat, label: None, scalar: OnceLock::new(), zero: OnceLock::new() }))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds an operator from row-major real entries (convenient in tests).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimMismatch("rows of unequal length".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn scalar(dim: usize, c: C64) -> Self {
        Self::from_matrix(DMatrix::from_diagonal_element(dim, dim, c))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn with_label(&self, label: &str) -> Self {
        Op(Arc::new(Inner {
            mat: self.0.mat.clone(),
            label: Some(Arc::from(label)),
            scalar: OnceLock::new(),
            zero: OnceLock::new(),
        }))
    }

    pub fn label(&self) -> Option<&str> {
        self.0.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.0.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<C64> {
        &self.0.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0.mat[(i, j)]
    }

    /// Identity of the shared allocation; equal ids imply equal contents.
    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Op) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.mat.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖A − (tr A / dim)·I‖ ≤ SCALAR_TOL`.
    pub fn is_scalar(&self) -> bool {
        *self.0.scalar.get_or_init(|| {
            let n = self.dim();
            let mean = self.trace() / n as f64;
            let mut acc = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let z = if i == j { self.0.mat[(i, j)] - mean } else { self.0.mat[(i, j)] };
                    acc += z.norm_sqr();
                }
            }
            acc.sqrt() <= SCALAR_TOL
        })
    }

    pub fn is_zero(&self) -> bool {
        *self.0.zero.get_or_init(|| self.0.mat.iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }

    /// Traceless part `A − (tr A / dim)·I`: the canonical representative of `A` in `A/ℂ`.
    pub fn traceless(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mean = self.trace() / n as f64;
        let mut m = self.0.mat.clone();
        for i in 0..n {
            m[(i, i)] -= mean;
        }
        m
    }

    pub fn adjoint(&self) -> Op {
        Op::from_matrix(self.0.mat.adjoint())
    }

    pub fn scale(&self, c: C64) -> Op {
        Op::from_matrix(&self.0.mat * c)
    }

    pub fn scale_real(&self, c: f64) -> Op {
        self.scale(C64::new(c, 0.0))
    }

    pub fn check_dim(&self, other: &Op) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Op) -> Result<Op> {
        self.check_dim(other)?;
        Ok(Op::from_matrix(gemm(&self.0.mat, &other.0.mat)))
    }

    pub fn try_add(&self, other: &Op) -> Result<Op> {
        self.check_dim(other)?;
        Ok(Op::from_matrix(&self.0.mat + &other.0.mat))
    }

    pub fn try_sub(&self, other: &Op) -> Result<Op> {
        self.check_dim(other)?;
        Ok(Op::from_matrix(&self.0.mat - &other.0.mat))
    }

    /// `A + c·I`.
    pub fn shift(&self, c: C64) -> Op {
        let mut m = self.0.mat.clone();
        for i in 0..self.dim() {
            m[(i, i)] += c;
        }
        Op::from_matrix(m)
    }

    pub fn commutator(&self, other: &Op) -> Result<Op> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// Distance from being selfadjoint, `‖A − A*‖`.
    pub fn selfadjoint_defect(&self) -> f64 {
        (&self.0.mat - self.0.mat.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖A² − A‖`.
    pub fn idempotent_defect(&self) -> f64 {
        (gemm(&self.0.mat, &self.0.mat) - &self.0.mat).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inverse via LU with partial pivoting. Fails when the reciprocal condition
    /// estimate `1/(‖A‖‖A⁻¹‖)` (Frobenius) drops below `1e-14`.
    pub fn inverse(&self) -> Result<Op> {
        let lu = self.0.mat.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::Singular(0.0))?;
        let rcond = 1.0 / (self.norm() * frob(&inv));
        if !rcond.is_finite() || rcond < 1e-14 {
            return Err(Error::Singular(if rcond.is_finite() { rcond } else { 0.0 }));
        }
        Ok(Op::from_matrix(inv))
    }

    /// Reciprocal condition estimate `1/(‖A‖‖A⁻¹‖)`; zero for singular input.
    pub fn rcond(&self) -> f64 {
        match self.0.mat.clone().lu().try_inverse() {
            Some(inv) => {
                let r = 1.0 / (self.norm() * frob(&inv));
                if r.is_finite() {
                    r
                } else {
                    0.0
                }
            }
            None => 0.0,
        }
    }

    /// Matrix exponential (scaling and squaring with a Padé approximant).
    pub fn exp(&self) -> Op {
        Op::from_matrix(self.0.mat.clone().exp())
    }

    /// Applies a real function to a selfadjoint operator through its eigendecomposition.
    pub fn hermitian_fn(&self, f: impl Fn(f64) -> f64) -> Op {
        let (vals, vecs) = self.hermitian_eigen();
        let n = self.dim();
        let mut scaled = vecs.clone();
        for j in 0..n {
            let w = f(vals[j]);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        Op::from_matrix(gemm(&scaled, &vecs.adjoint()))
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors of the selfadjoint part.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let h = (&self.0.mat + self.0.mat.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    /// Singular values (descending) with left and right singular vectors.
    pub fn svd(&self) -> (Vec<f64>, DMatrix<C64>, DMatrix<C64>) {
        let svd = self.0.mat.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let vt = svd.v_t.expect("right singular vectors requested");
        let n = self.dim();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let s = idx.iter().map(|&i| svd.singular_values[i]).collect();
        let u = DMatrix::from_fn(n, n, |r, c| u[(r, idx[c])]);
        let v = DMatrix::from_fn(n, n, |r, c| vt[(idx[c], r)].conj());
        (s, u, v)
    }

    /// Assembles a `k×k` block operator from row-major blocks of equal size.
    pub fn block(blocks: &[&[&Op]]) -> Result<Op> {
        let k = blocks.len();
        if k == 0 || blocks.iter().any(|r| r.len() != k) {
            return Err(Error::DimMismatch("block layout must be square".into()));
        }
        let n = blocks[0][0].dim();
        if blocks.iter().flat_map(|r| r.iter()).any(|b| b.dim() != n) {
            return Err(Error::DimMismatch("blocks must share a dimension".into()));
        }
        let mut m = DMatrix::zeros(k * n, k * n);
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, b) in row.iter().enumerate() {
                m.view_mut((bi * n, bj * n), (n, n)).copy_from(b.mat());
            }
        }
        Ok(Op::from_matrix(m))
    }

    /// Block-diagonal embedding `diag(a, b)`.
    pub fn diag_blocks(a: &Op, b: &Op) -> Result<Op> {
        let z = Op::zeros(a.dim());
        Op::block(&[&[a, &z], &[&z, b]])
    }

    /// The `(i, j)` block of size `n`.
    pub fn sub_block(&self, i: usize, j: usize, n: usize) -> Op {
        Op::from_matrix(self.0.mat.view((i * n, j * n), (n, n)).into_owned())
    }

    /// `I_k ⊗ A`: block-diagonal amplification with `k` copies.
    pub fn amplify(&self, k: usize) -> Op {
        if k == 1 {
            return self.clone();
        }
        let n = self.dim();
        let mut m = DMatrix::zeros(k * n, k * n);
        for b in 0..k {
            m.view_mut((b * n, b * n), (n, n)).copy_from(self.mat());
        }
        Op::from_matrix(m)
    }

    /// Largest entrywise distance to another operator.
    pub fn dist(&self, other: &Op) -> f64 {
        self.0.mat.iter().zip(other.0.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex matrix product through the packed `zgemm` kernel.
pub(crate) fn gemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "inner dimensions differ");
    let mut c = DMatrix::<C64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) {re, im}, layout-compatible with [f64; 2];
    // nalgebra storage is contiguous column-major, so element (i, j) sits at
    // offset i + j*nrows, matching row stride 1 and column stride nrows.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `Σ_{i ∈ rows} (A B)_{ii}` without forming the full product.
pub(crate) fn trace_of_product_on(a: &DMatrix<C64>, b: &DMatrix<C64>, rows: &[usize]) -> C64 {
    let n = a.ncols();
    let mut acc = ZERO;
    for &i in rows {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

impl Mul for &Op {
    type Output = Op;
    fn mul(self, rhs: &Op) -> Op {
        self.try_mul(rhs).expect("operator dimensions differ")
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        self.try_add(rhs).expect("operator dimensions differ")
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        self.try_sub(rhs).expect("operator dimensions differ")
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        Op::from_matrix(-self.0.mat.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_naive_product() {
        let a = Op::from_fn(5, |i, j| C64::new(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.1));
        let b = Op::from_fn(5, |i, j| C64::new((i + 2 * j) as f64, -(i as f64)));
        let naive = a.mat() * b.mat();
        assert!((&a * &b).dist(&Op::from_matrix(naive)) < 1e-12);
    }

    #[test]
    fn scalar_detection() {
        assert!(Op::scalar(3, C64::new(2.0, -1.0)).is_scalar());
        assert!(!Op::diag_real(&[1.0, 0.0]).is_scalar());
        assert!(Op::zeros(2).is_zero());
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_element(2, 2, C64::new(f64::NAN, 0.0));
        assert!(Op::new(m).is_err());
    }

    #[test]
    fn singular_inverse_fails() {
        let a = Op::diag_real(&[1.0, 0.0]);
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn blocks_round_trip() {
        let a = Op::diag_real(&[1.0, 2.0]);
        let b = Op::identity(2);
        let m = Op::diag_blocks(&a, &b).unwrap();
        assert_eq!(m.sub_block(0, 0, 2), a);
        assert_eq!(m.sub_block(1, 1, 2), b);
        assert!(m.sub_block(0, 1, 2).is_zero());
    }

    #[test]
    fn exp_of_projection() {
        // exp(2πi P) = I for an orthogonal projection P
        let p = Op::diag_real(&[1.0, 0.0, 1.0]);
        let u = p.scale(C64::new(0.0, 2.0 * std::f64::consts::PI)).exp();
        assert!(u.dist(&Op::identity(3)) < 1e-13);
    }
}
