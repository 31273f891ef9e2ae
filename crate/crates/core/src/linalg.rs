//! Internal dense linear algebra helpers.
//!
//! Thin wrappers over faer's low-level kernels with parallelism pinned to
//! sequential execution, so every solve is bit-reproducible regardless of
//! the host application's global faer configuration.

use crate::{c64, Error, Result};
use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::svd::{self, ComputeSvdVectors};
use faer::{Mat, MatRef, Par, Spec};

/// Hermitian eigendecomposition `A = U diag(w) U^H`.
///
/// Eigenvalues are returned in nondecreasing order. Only the lower triangle
/// of `A` is read.
pub(crate) fn eigh(a: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut s = Diag::<c64>::zeros(n);
    let mut u = Mat::<c64>::zeros(n, n);
    let params = Spec::default();
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<c64>(
        n,
        ComputeEigenvectors::Yes,
        Par::Seq,
        params,
    ));
    evd::self_adjoint_evd(a, s.as_mut(), Some(u.as_mut()), Par::Seq, MemStack::new(&mut buf), params)
        .map_err(|_| Error::EigenFailed)?;
    let w = s.column_vector().iter().map(|z| z.re).collect();
    Ok((w, u))
}

/// Eigenvalues of a Hermitian matrix, nondecreasing.
pub(crate) fn eigh_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut s = Diag::<c64>::zeros(n);
    let params = Spec::default();
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<c64>(
        n,
        ComputeEigenvectors::No,
        Par::Seq,
        params,
    ));
    evd::self_adjoint_evd(a, s.as_mut(), None, Par::Seq, MemStack::new(&mut buf), params)
        .map_err(|_| Error::EigenFailed)?;
    Ok(s.column_vector().iter().map(|z| z.re).collect())
}

/// General complex eigendecomposition `A U = U diag(w)` (right eigenvectors).
pub(crate) fn eig_general(a: MatRef<'_, c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut s = Diag::<c64>::zeros(n);
    let mut u = Mat::<c64>::zeros(n, n);
    let params = Spec::default();
    let mut buf = MemBuffer::new(evd::evd_scratch::<c64>(
        n,
        ComputeEigenvectors::No,
        ComputeEigenvectors::Yes,
        Par::Seq,
        params,
    ));
    evd::evd_cplx::<f64>(
        a,
        s.as_mut(),
        None,
        Some(u.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .map_err(|_| Error::EigenFailed)?;
    Ok((s.column_vector().iter().copied().collect(), u))
}

/// Thin SVD `A = U diag(s) V^H` with `s` nonincreasing.
pub(crate) fn thin_svd(a: MatRef<'_, c64>) -> Result<(Mat<c64>, Vec<f64>, Mat<c64>)> {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut s = Diag::<c64>::zeros(k);
    let mut u = Mat::<c64>::zeros(m, k);
    let mut v = Mat::<c64>::zeros(n, k);
    let params = Spec::default();
    let mut buf = MemBuffer::new(svd::svd_scratch::<c64>(
        m,
        n,
        ComputeSvdVectors::Thin,
        ComputeSvdVectors::Thin,
        Par::Seq,
        params,
    ));
    svd::svd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        Some(v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .map_err(|_| Error::SvdFailed)?;
    let sv = s.column_vector().iter().map(|z| z.re).collect();
    Ok((u, sv, v))
}

/// Moore-Penrose pseudoinverse via thin SVD.
///
/// Singular values below `rel_cutoff · s_max` are dropped. Also returns the
/// condition number `s_max / s_min` over all singular values (infinite when
/// the smallest is zero).
pub(crate) fn pinv(a: MatRef<'_, c64>, rel_cutoff: f64) -> Result<(Mat<c64>, f64)> {
    let (u, s, v) = thin_svd(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let k = s.len();
    let mut vs = Mat::<c64>::zeros(v.nrows(), k);
    for j in 0..k {
        if s[j] > rel_cutoff * smax {
            let inv = c64::new(1.0 / s[j], 0.0);
            for i in 0..v.nrows() {
                vs[(i, j)] = v[(i, j)] * inv;
            }
        }
    }
    Ok((vs * u.adjoint(), cond))
}

/// Solves `A X = B` for small dense `A` by Gaussian elimination with
/// partial pivoting.
pub(crate) fn solve_dense(a: &Mat<c64>, b: &Mat<c64>) -> Result<Mat<c64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    debug_assert_eq!(n, b.nrows());
    let rhs = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[(col, col)].norm();
        for r in col + 1..n {
            let v = lu[(r, col)].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            for j in 0..rhs {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(pivot, j)];
                x[(pivot, j)] = tmp;
            }
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            if f.norm() == 0.0 {
                continue;
            }
            lu[(r, col)] = c64::new(0.0, 0.0);
            for j in col + 1..n {
                let v = lu[(col, j)];
                lu[(r, j)] -= f * v;
            }
            for j in 0..rhs {
                let v = x[(col, j)];
                x[(r, j)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..rhs {
            x[(col, j)] /= d;
            let xv = x[(col, j)];
            for r in 0..col {
                let f = lu[(r, col)];
                x[(r, j)] -= f * xv;
            }
        }
    }
    Ok(x)
}

/// Replaces `A` with its Hermitian part `(A + A^H)/2`.
pub(crate) fn hermitize(a: &mut Mat<c64>) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = c64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

/// Largest absolute deviation of `A` from its adjoint.
pub(crate) fn hermitian_deviation(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Frobenius norm.
pub(crate) fn fro_norm(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}

/// Largest entry magnitude.
pub(crate) fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max(a[(i, j)].norm());
        }
    }
    best
}
