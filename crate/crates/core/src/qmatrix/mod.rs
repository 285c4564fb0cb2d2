//! Dense complex linear algebra for small operator spaces.
//!
//! Everything in this crate lives on Hilbert spaces of dimension ≤ ~16, so the
//! kernel favors exactness and simplicity: dense row-major storage, Jacobi
//! eigensolves for Hermitian matrices, Hessenberg + shifted QR for general
//! complex spectra, and matrix functions through eigendecomposition.
//!
//! Vectorization uses the column-stacking convention `vec(M)[i + d*j] = M[i,j]`
//! throughout, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Superoperator matrices built
//! elsewhere in the crate depend on this choice; it is fixed once here.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{hermiticity_tol, positivity_tol, trace_tol, Cx, Scalar};

mod geig;
mod herm_eig;

pub use geig::{complex_eig, exp_general, ComplexEig, Lu};
pub use herm_eig::{gibbs_with_log_z, HermEig};

/// Dense square complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![Cx::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Cx::one();
        }
        m
    }

    /// Build from row-major data, validating length and finiteness.
    pub fn new(dim: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from rows of `f64` pairs `(re, im)`; test and model convenience.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "ragged row in matrix literal");
            for (j, &(re, im)) in row.iter().enumerate() {
                m[(i, j)] = crate::scalar::cx(re, im);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Cx::new(e, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.dim)
            .map(|i| self[(i, i)])
            .fold(Cx::zero(), |a, b| a + b)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Cx<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: T) -> Self {
        self.scale(Cx::new(factor, T::zero()))
    }

    /// Max-norm: largest entry magnitude.
    pub fn max_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn fro_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Max row sum of entry magnitudes (operator ∞-norm).
    pub fn inf_norm(&self) -> T {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self[(i, j)].norm())
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest magnitude among off-diagonal deviations from hermiticity,
    /// `max |M[i,j] - conj(M[j,i])|`.
    pub fn hermiticity_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let mut out = vec![Cx::zero(); self.dim];
        for i in 0..self.dim {
            let mut acc = Cx::zero();
            for j in 0..self.dim {
                acc = acc + self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `A + c B`.
    pub fn add_scaled(&self, other: &Self, c: Cx<T>) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| *a + *b * c)
                .collect(),
        }
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let half = T::fl(0.5);
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + adj[(i, j)]).scale(half))
    }
}

impl<T: Scalar> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.add_scaled(rhs, Cx::one())
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.add_scaled(rhs, -Cx::<T>::one())
    }
}

impl<T: Scalar> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.scale(-Cx::<T>::one())
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Kronecker product with the first (system) factor leftmost:
/// `(A ⊗ B)[i*dB + k, j*dB + l] = A[i,j] B[k,l]`.
pub fn tensor<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (da, db) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Which tensor factor `partial_trace` keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    /// Keep the first (system) factor, trace out the second.
    System,
    /// Keep the second (reservoir) factor, trace out the first.
    Reservoir,
}

/// Partial trace of a `d_s * d_r` dimensional operator over the discarded
/// factor. Trace-preserving: `Tr[result] = Tr[input]`.
pub fn partial_trace<T: Scalar>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    keep: Keep,
) -> Result<ComplexMatrix<T>> {
    let (ds, dr) = dims;
    if m.dim() != ds * dr {
        return Err(Error::Shape(format!(
            "partial trace: operator dimension {} != {ds} * {dr}",
            m.dim()
        )));
    }
    match keep {
        Keep::System => {
            let mut out = ComplexMatrix::zeros(ds);
            for i in 0..ds {
                for j in 0..ds {
                    let mut acc = Cx::zero();
                    for r in 0..dr {
                        acc = acc + m[(i * dr + r, j * dr + r)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        Keep::Reservoir => {
            let mut out = ComplexMatrix::zeros(dr);
            for k in 0..dr {
                for l in 0..dr {
                    let mut acc = Cx::zero();
                    for s in 0..ds {
                        acc = acc + m[(s * dr + k, s * dr + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Column-stacking vectorization: `v[i + d*j] = M[i,j]`.
pub fn vectorize<T: Scalar>(m: &ComplexMatrix<T>) -> Vec<Cx<T>> {
    let d = m.dim();
    let mut v = vec![Cx::zero(); d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = m[(i, j)];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn devectorize<T: Scalar>(v: &[Cx<T>], dim: usize) -> Result<ComplexMatrix<T>> {
    if v.len() != dim * dim {
        return Err(Error::Shape(format!(
            "devectorize: vector length {} != {dim}^2",
            v.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        for i in 0..dim {
            m[(i, j)] = v[i + dim * j];
        }
    }
    Ok(m)
}

/// Hermitian matrix: stored symmetrized as `(M + M†)/2` after the
/// construction check `max|M - M†| <= tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    inner: ComplexMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Construct with the default tolerance, scaled by `(1 + ‖M‖_max)` so
    /// that operators far from unit norm are judged relatively.
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        let tol = hermiticity_tol::<T>() * (T::one() + m.max_norm());
        Self::with_tolerance(m, tol)
    }

    pub fn with_tolerance(m: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let dev = m.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
            });
        }
        Ok(Self {
            inner: m.hermitian_part(),
        })
    }

    /// Wrap a matrix that is Hermitian by construction (spectral assemblies,
    /// sums of Hermitian terms). Symmetrizes to scrub rounding noise.
    pub(crate) fn from_exact(m: ComplexMatrix<T>) -> Self {
        Self {
            inner: m.hermitian_part(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag(entries: &[T]) -> Self {
        Self {
            inner: ComplexMatrix::diag(entries),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn trace_re(&self) -> T {
        self.inner.trace().re
    }

    pub fn max_norm(&self) -> T {
        self.inner.max_norm()
    }

    /// `A + c B` for real `c`; the result is Hermitian exactly.
    pub fn add_scaled(&self, other: &Self, c: T) -> Self {
        Self {
            inner: self.inner.add_scaled(&other.inner, Cx::new(c, T::zero())),
        }
    }

    pub fn scale_re(&self, c: T) -> Self {
        Self {
            inner: self.inner.scale_re(c),
        }
    }

    /// Shift by a real multiple of the identity.
    pub fn shift(&self, c: T) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.dim() {
            inner[(i, i)] = inner[(i, i)] + Cx::new(c, T::zero());
        }
        Self { inner }
    }

    /// Real expectation value `Tr[self · rho]` for Hermitian `rho`.
    pub fn expectation(&self, rho: &ComplexMatrix<T>) -> T {
        (self.matrix() * rho).trace().re
    }
}

impl<T: Scalar> std::ops::Deref for HermitianMatrix<T> {
    type Target = ComplexMatrix<T>;
    fn deref(&self) -> &ComplexMatrix<T> {
        &self.inner
    }
}

/// Density matrix: Hermitian, unit trace within `trace_tol`, minimum
/// eigenvalue above `-positivity_tol`. Eigenvalues are clamped to zero on
/// spectral reads.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    inner: HermitianMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn new(h: HermitianMatrix<T>) -> Result<Self> {
        Self::with_tolerances(h, trace_tol::<T>(), positivity_tol::<T>())
    }

    pub fn with_tolerances(h: HermitianMatrix<T>, tr_tol: T, psd_tol: T) -> Result<Self> {
        let tr = h.trace_re();
        if (tr - T::one()).abs() > tr_tol {
            return Err(Error::InvalidState(format!(
                "trace deviates from 1 by {:.3e}",
                (tr - T::one()).abs().to_f64_lossy()
            )));
        }
        let eig = h.eig()?;
        let min = eig.eigenvalues[0];
        if min < -psd_tol {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:.3e} below -{:.1e}",
                min.to_f64_lossy(),
                psd_tol.to_f64_lossy()
            )));
        }
        Ok(Self { inner: h })
    }

    /// Pure state `|v⟩⟨v|` from an unnormalized vector.
    pub fn pure(v: &[Cx<T>]) -> Result<Self> {
        let norm_sq = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let d = v.len();
        let scale = Cx::new(T::one() / norm_sq, T::zero());
        let m = ComplexMatrix::from_fn(d, |i, j| v[i] * v[j].conj() * scale);
        Self::new(HermitianMatrix::from_exact(m))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale_re(T::one() / T::from_usize(dim).unwrap());
        Self {
            inner: HermitianMatrix::from_exact(m),
        }
    }

    pub fn hermitian(&self) -> &HermitianMatrix<T> {
        &self.inner
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.inner.matrix()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Spectrum with negative rounding noise clamped to zero, ascending.
    pub fn clamped_spectrum(&self) -> Result<Vec<T>> {
        let eig = self.inner.eig()?;
        Ok(eig.eigenvalues.iter().map(|&l| l.max(T::zero())).collect())
    }

    /// Von Neumann entropy `-Σ λ log λ` with eigenvalues below 1e-15 treated
    /// as exact zeros (`0·log 0 = 0`).
    pub fn von_neumann_entropy(&self) -> Result<T> {
        let floor = T::fl(1e-15);
        let mut s = T::zero();
        for l in self.clamped_spectrum()? {
            if l > floor {
                s = s - l * l.ln();
            }
        }
        Ok(s)
    }

    /// Purity `Tr[ρ²]`.
    pub fn purity(&self) -> T {
        (self.matrix() * self.matrix()).trace().re
    }
}

impl<T: Scalar> std::ops::Deref for DensityMatrix<T> {
    type Target = HermitianMatrix<T>;
    fn deref(&self) -> &HermitianMatrix<T> {
        &self.inner
    }
}

/// Quantum relative entropy `D(ρ1 ‖ ρ2) = Tr[ρ1 log ρ1] - Tr[ρ1 log ρ2]`.
///
/// Eigenvalues of either state below 1e-15 are clamped; a clamped eigenvalue
/// of `ρ2` carrying weight from `ρ1` makes the divergence numerically huge
/// rather than infinite, which is adequate for the full-rank states used here.
pub fn relative_entropy<T: Scalar>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    let floor = T::fl(1e-15);
    let e1 = rho1.hermitian().eig()?;
    let e2 = rho2.hermitian().eig()?;
    // Tr[ρ1 log ρ1]
    let mut t1 = T::zero();
    for &l in &e1.eigenvalues {
        let l = l.max(T::zero());
        if l > floor {
            t1 = t1 + l * l.ln();
        }
    }
    // log ρ2 assembled spectrally, clamped at the floor
    let d = rho2.dim();
    let mut log2 = ComplexMatrix::zeros(d);
    for k in 0..d {
        let l = e2.eigenvalues[k].max(floor);
        let ln_l = Cx::new(l.ln(), T::zero());
        for i in 0..d {
            for j in 0..d {
                log2[(i, j)] =
                    log2[(i, j)] + e2.eigenvectors[(i, k)] * e2.eigenvectors[(j, k)].conj() * ln_l;
            }
        }
    }
    let t2 = (rho1.matrix() * &log2).trace().re;
    Ok(t1 - t2)
}
