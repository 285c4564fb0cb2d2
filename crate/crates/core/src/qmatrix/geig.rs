//! General complex eigendecomposition and LU solves for small dense matrices.
//!
//! The eigensolver reduces to Hessenberg form with Householder reflections,
//! iterates a Wilkinson-shifted QR to triangular Schur form, then extracts
//! eigenvectors by back-substitution. Liouvillians of GKLS generators are the
//! main customers; they are diagonalizable in practice, and callers check the
//! reconstruction residual and fall back to scaling-and-squaring when not.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Scalar};

use super::ComplexMatrix;

/// Eigendecomposition of a general complex matrix: `A V ≈ V diag(values)`.
#[derive(Debug, Clone)]
pub struct ComplexEig<T: Scalar> {
    pub values: Vec<Cx<T>>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Scalar> ComplexEig<T> {
    /// Max-norm residual `‖A V - V D‖`, for judging decomposition quality.
    pub fn residual(&self, a: &ComplexMatrix<T>) -> T {
        let av = a * &self.vectors;
        let n = a.dim();
        let mut vd = self.vectors.clone();
        for j in 0..n {
            let d = self.values[j];
            for i in 0..n {
                vd[(i, j)] = vd[(i, j)] * d;
            }
        }
        (&av - &vd).max_norm()
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` (c real) zeroing `b` in
/// `G · (a, b)ᵀ = (r, 0)ᵀ`.
fn givens<T: Scalar>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>, Cx<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb.is_zero() {
        return (T::one(), Cx::zero(), a);
    }
    if na.is_zero() {
        // c = 0, s = conj(b)/|b|, r = |b|
        return (
            T::zero(),
            b.conj() / Complex::new(nb, T::zero()),
            Complex::new(nb, T::zero()),
        );
    }
    let r = (na * na + nb * nb).sqrt();
    let c = na / r;
    let phase_a = a / Complex::new(na, T::zero());
    let s = phase_a * b.conj() / Complex::new(r, T::zero());
    let rho = phase_a.scale(r);
    (c, s, rho)
}

/// Reduce `a` to upper Hessenberg form `H = Q† A Q`, returning `(H, Q)`.
fn hessenberg<T: Scalar>(a: &ComplexMatrix<T>) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    if n <= 2 {
        return (h, q);
    }
    for k in 0..n - 2 {
        // Householder vector for column k below the subdiagonal.
        let mut v: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let sigma = v
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |x, y| x + y)
            .sqrt();
        if sigma <= T::min_positive_value() {
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() > T::zero() {
            alpha / Complex::new(alpha.norm(), T::zero())
        } else {
            Cx::one()
        };
        v[0] = v[0] + phase.scale(sigma);
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |x, y| x + y);
        if vnorm2 <= T::min_positive_value() {
            continue;
        }
        let two_over = T::fl(2.0) / vnorm2;
        // Left: rows k+1..n, H ← P H with P = I - 2vv†/v†v.
        for j in 0..n {
            let mut dot = Cx::zero();
            for (r, vi) in v.iter().enumerate() {
                dot = dot + vi.conj() * h[(k + 1 + r, j)];
            }
            let dot = dot.scale(two_over);
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] = h[(k + 1 + r, j)] - *vi * dot;
            }
        }
        // Right: columns k+1..n, H ← H P.
        for i in 0..n {
            let mut dot = Cx::zero();
            for (r, vi) in v.iter().enumerate() {
                dot = dot + h[(i, k + 1 + r)] * *vi;
            }
            let dot = dot.scale(two_over);
            for (r, vi) in v.iter().enumerate() {
                h[(i, k + 1 + r)] = h[(i, k + 1 + r)] - dot * vi.conj();
            }
        }
        // Accumulate Q ← Q P.
        for i in 0..n {
            let mut dot = Cx::zero();
            for (r, vi) in v.iter().enumerate() {
                dot = dot + q[(i, k + 1 + r)] * *vi;
            }
            let dot = dot.scale(two_over);
            for (r, vi) in v.iter().enumerate() {
                q[(i, k + 1 + r)] = q[(i, k + 1 + r)] - dot * vi.conj();
            }
        }
    }
    // Scrub sub-Hessenberg rounding noise.
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = Cx::zero();
        }
    }
    (h, q)
}

/// Wilkinson shift: the eigenvalue of the trailing 2x2 closer to `d`.
fn wilkinson_shift<T: Scalar>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Cx<T> {
    let half = T::fl(0.5);
    let tr_half = (a + d).scale(half);
    let diff_half = (a - d).scale(half);
    let disc = (diff_half * diff_half + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Schur triangularization of a Hessenberg matrix by explicit single-shift QR
/// with Givens rotations; `z` accumulates the similarity transform.
fn hessenberg_qr<T: Scalar>(
    h: &mut ComplexMatrix<T>,
    z: &mut ComplexMatrix<T>,
    scale: T,
) -> Result<()> {
    let n = h.dim();
    let eps = T::epsilon();
    let floor = eps * scale.max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iters_at_hi = 0usize;
    let max_iters = 40usize;

    loop {
        // Deflate converged subdiagonals.
        while hi > 0 {
            let sub = h[(hi, hi - 1)].norm();
            let local = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            if sub <= eps * local + floor {
                h[(hi, hi - 1)] = Cx::zero();
                hi -= 1;
                iters_at_hi = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok(());
        }
        // Active block [lo..=hi]: walk up until a negligible subdiagonal.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local + floor {
                h[(lo, lo - 1)] = Cx::zero();
                break;
            }
            lo -= 1;
        }

        iters_at_hi += 1;
        if iters_at_hi > max_iters {
            return Err(Error::Numerical(format!(
                "QR iteration stalled at block ending {hi} after {max_iters} steps"
            )));
        }

        let mu = if iters_at_hi.is_multiple_of(12) {
            // Exceptional shift to break symmetric cycles.
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * T::fl(1.5), T::zero())
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Explicit shifted QR sweep on the block.
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] - mu;
        }
        let mut rots: Vec<(T, Cx<T>)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s, r) = givens(h[(i, i)], h[(i + 1, i)]);
            h[(i, i)] = r;
            h[(i + 1, i)] = Cx::zero();
            for j in i + 1..n {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = x.scale(c) + s * y;
                h[(i + 1, j)] = y.scale(c) - s.conj() * x;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            // Right-multiply by G† on columns i, i+1.
            let row_max = (i + 2).min(hi + 1);
            for r in 0..row_max {
                let x = h[(r, i)];
                let y = h[(r, i + 1)];
                h[(r, i)] = x.scale(c) + y * s.conj();
                h[(r, i + 1)] = y.scale(c) - x * s;
            }
            for r in 0..n {
                let x = z[(r, i)];
                let y = z[(r, i + 1)];
                z[(r, i)] = x.scale(c) + y * s.conj();
                z[(r, i + 1)] = y.scale(c) - x * s;
            }
        }
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] + mu;
        }
    }
}

/// Eigendecomposition of a general complex matrix.
pub fn complex_eig<T: Scalar>(a: &ComplexMatrix<T>) -> Result<ComplexEig<T>> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::Numerical("eigensolver input not finite".into()));
    }
    if n == 1 {
        return Ok(ComplexEig {
            values: vec![a[(0, 0)]],
            vectors: ComplexMatrix::identity(1),
        });
    }
    let scale = a.max_norm();
    let (mut t, mut q) = hessenberg(a);
    hessenberg_qr(&mut t, &mut q, scale)?;

    // Eigenvectors of the triangular factor by back-substitution.
    let eps = T::epsilon();
    let smallden = eps * scale.max(T::min_positive_value());
    let mut x = ComplexMatrix::<T>::zeros(n);
    for k in 0..n {
        let lk = t[(k, k)];
        let mut y = vec![Cx::<T>::zero(); k + 1];
        y[k] = Cx::one();
        for i in (0..k).rev() {
            let mut num = Cx::<T>::zero();
            for (j, yj) in y.iter().enumerate().take(k + 1).skip(i + 1) {
                num = num + t[(i, j)] * *yj;
            }
            let mut den = t[(i, i)] - lk;
            if den.norm() < smallden {
                den = Complex::new(smallden, T::zero());
            }
            y[i] = -num / den;
        }
        let norm = y
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |u, v| u + v)
            .sqrt();
        for (i, yi) in y.iter().enumerate() {
            x[(i, k)] = *yi / Complex::new(norm, T::zero());
        }
    }
    let vectors = &q * &x;
    let values = (0..n).map(|i| t[(i, i)]).collect();
    Ok(ComplexEig { values, vectors })
}

/// LU decomposition with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T: Scalar> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &ComplexMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = T::epsilon() * a.max_norm().max(T::min_positive_value()) * T::fl(1e-3);
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let mag = lu[(i, k)].norm();
                if mag > best {
                    best = mag;
                    pivot = i;
                }
            }
            if best <= floor {
                return Err(Error::IllConditioned {
                    cond: f64::INFINITY,
                    limit: 1e12,
                });
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                perm.swap(k, pivot);
            }
            let inv_piv = Cx::<T>::one() / lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv_piv;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    lu[(i, j)] = lu[(i, j)] - factor * lu[(k, j)];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut y: Vec<Cx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let lij = self.lu[(i, j)];
                y[i] = y[i] - lij * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let uij = self.lu[(i, j)];
                y[i] = y[i] - uij * y[j];
            }
            y[i] = y[i] / self.lu[(i, i)];
        }
        y
    }

    pub fn solve_mat(&self, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let n = self.lu.dim();
        assert_eq!(b.dim(), n, "rhs dimension mismatch");
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col: Vec<Cx<T>> = (0..n).map(|i| b[(i, j)]).collect();
            let sol = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = sol[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix<T> {
        self.solve_mat(&ComplexMatrix::identity(self.lu.dim()))
    }
}

/// Matrix exponential by scaling and squaring with a Taylor core; fallback
/// path for matrices whose eigendecomposition is unreliable.
pub fn exp_general<T: Scalar>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::Numerical("exponential input not finite".into()));
    }
    let norm = a.inf_norm();
    let mut squarings = 0usize;
    let mut scaled = a.clone();
    if norm > T::fl(0.25) {
        let ratio = (norm / T::fl(0.25)).ln() / T::fl(2.0).ln();
        squarings = ratio.ceil().to_f64_lossy() as usize;
        squarings = squarings.min(60);
        let factor = T::fl(0.5).powi(squarings as i32);
        scaled = a.scale_re(factor);
    }
    let mut acc = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let tol = T::epsilon();
    for k in 1..=64usize {
        term = (&term * &scaled).scale_re(T::one() / T::from_usize(k).unwrap());
        acc = &acc + &term;
        if term.max_norm() <= tol * acc.max_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    if !acc.is_finite() {
        return Err(Error::Numerical("exponential overflowed".into()));
    }
    Ok(acc)
}
