//! Algebra of 2-level Toeplitz (2LT) matrices.
//!
//! An `NM×NM` 2LT matrix is Toeplitz in `M×M` blocks and Toeplitz within
//! each block, so it is fully determined by generating coefficients
//! `u(p, q)` with `p ∈ [-(N-1), N-1]`, `q ∈ [-(M-1), M-1]`: the entry at
//! block row `n`, block column `n'`, inner `(m, m')` is `u(n-n', m-m')`.
//! This module keeps the coefficient array as the primary representation
//! and materializes the dense matrix only when an eigendecomposition or a
//! dense oracle needs it.

use crate::signal_model::{ScattererSet, SceneDims};
use crate::{c64, linalg, Error, Result};
use faer::{Mat, MatRef};

/// A complex array indexed by diagonal offsets `(p, q)`,
/// `p ∈ [-(N-1), N-1]`, `q ∈ [-(M-1), M-1]`, with no symmetry attached.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffGrid {
    dims: SceneDims,
    vals: Vec<c64>,
}

impl CoeffGrid {
    pub fn zeros(dims: SceneDims) -> Self {
        let len = (2 * dims.n() - 1) * (2 * dims.m() - 1);
        Self {
            dims,
            vals: vec![c64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(dims: SceneDims, mut f: impl FnMut(i64, i64) -> c64) -> Self {
        let mut grid = Self::zeros(dims);
        for p in grid.p_range() {
            for q in grid.q_range() {
                let v = f(p, q);
                grid.set(p, q, v);
            }
        }
        grid
    }

    pub fn dims(&self) -> SceneDims {
        self.dims
    }

    pub fn p_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.dims.n() as i64 - 1)..=(self.dims.n() as i64 - 1)
    }

    pub fn q_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.dims.m() as i64 - 1)..=(self.dims.m() as i64 - 1)
    }

    fn idx(&self, p: i64, q: i64) -> usize {
        let (n, m) = (self.dims.n() as i64, self.dims.m() as i64);
        debug_assert!(p.abs() < n && q.abs() < m, "offset ({p},{q}) out of range");
        ((p + n - 1) * (2 * m - 1) + (q + m - 1)) as usize
    }

    pub fn get(&self, p: i64, q: i64) -> c64 {
        self.vals[self.idx(p, q)]
    }

    pub fn set(&mut self, p: i64, q: i64, v: c64) {
        let i = self.idx(p, q);
        self.vals[i] = v;
    }

    pub fn values(&self) -> &[c64] {
        &self.vals
    }

    /// Frobenius norm over the coefficient array.
    pub fn norm(&self) -> f64 {
        self.vals.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Generating coefficients of a Hermitian 2LT matrix.
///
/// Invariant: `u(-p,-q) = conj(u(p,q))` exactly and `u(0,0)` is real, so
/// [`assemble`] always produces a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCoeffs {
    grid: CoeffGrid,
}

impl ToeplitzCoeffs {
    /// Validates the Hermitian generating symmetry, then stores an exactly
    /// symmetrized copy. Deviations above `1e-12` relative to the largest
    /// coefficient are rejected.
    pub fn new(grid: CoeffGrid) -> Result<Self> {
        let scale = grid.vals.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let mut dev: f64 = 0.0;
        for p in grid.p_range() {
            for q in grid.q_range() {
                dev = dev.max((grid.get(p, q) - grid.get(-p, -q).conj()).norm());
            }
        }
        if dev > 1e-12 * scale {
            return Err(Error::CoeffSymmetry(format!(
                "max |u(p,q) - conj(u(-p,-q))| = {dev:.3e} exceeds 1e-12 relative"
            )));
        }
        Ok(Self::symmetrized(grid))
    }

    /// Projects an arbitrary grid onto the Hermitian-symmetric subspace:
    /// `u(p,q) ← (u(p,q) + conj(u(-p,-q)))/2`.
    pub fn symmetrized(grid: CoeffGrid) -> Self {
        let mut out = grid.clone();
        for p in out.p_range() {
            for q in out.q_range() {
                if (p, q) < (-p, -q) {
                    continue;
                }
                let avg = (grid.get(p, q) + grid.get(-p, -q).conj()) * 0.5;
                out.set(p, q, avg);
                out.set(-p, -q, avg.conj());
            }
        }
        let dc = out.get(0, 0);
        out.set(0, 0, c64::new(dc.re, 0.0));
        Self { grid: out }
    }

    pub fn zeros(dims: SceneDims) -> Self {
        Self {
            grid: CoeffGrid::zeros(dims),
        }
    }

    pub fn dims(&self) -> SceneDims {
        self.grid.dims
    }

    pub fn get(&self, p: i64, q: i64) -> c64 {
        self.grid.get(p, q)
    }

    pub fn grid(&self) -> &CoeffGrid {
        &self.grid
    }

    /// Frobenius norm over the coefficient array.
    pub fn norm(&self) -> f64 {
        self.grid.norm()
    }

    /// Frobenius norm of the coefficient difference.
    pub fn diff_norm(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        self.grid
            .vals
            .iter()
            .zip(&other.grid.vals)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-offset position counts: `|D(p,q)| = (N-|p|)(M-|q|)` matrix positions
/// share the diagonal offset `(p, q)`.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalClassTable {
    dims: SceneDims,
}

impl DiagonalClassTable {
    pub fn new(dims: SceneDims) -> Self {
        Self { dims }
    }

    pub fn count(&self, p: i64, q: i64) -> usize {
        let n = self.dims.n() as i64;
        let m = self.dims.m() as i64;
        if p.abs() >= n || q.abs() >= m {
            return 0;
        }
        ((n - p.abs()) * (m - q.abs())) as usize
    }

    /// Sum of all counts; equals `(NM)²`.
    pub fn total(&self) -> usize {
        let mut t = 0;
        let n = self.dims.n() as i64;
        let m = self.dims.m() as i64;
        for p in -(n - 1)..=(n - 1) {
            for q in -(m - 1)..=(m - 1) {
                t += self.count(p, q);
            }
        }
        t
    }
}

/// Materializes the dense Hermitian `NM×NM` 2LT matrix from its
/// generating coefficients.
pub fn assemble(u: &ToeplitzCoeffs) -> Mat<c64> {
    let dims = u.dims();
    let (n, m) = (dims.n(), dims.m());
    let nm = dims.nm();
    Mat::from_fn(nm, nm, |i, j| {
        let (ni, mi) = ((i / m) as i64, (i % m) as i64);
        let (nj, mj) = ((j / m) as i64, (j % m) as i64);
        let _ = n;
        u.get(ni - nj, mi - mj)
    })
}

/// Coefficients of the 2LT matrix `Σ_k σ_k c(f_k) c(f_k)^*` for a scene of
/// real positive powers: `u(p,q) = Σ_k σ_k exp(j2π(fx_k·p + fy_k·q))`.
///
/// Rejects scenes with complex or non-positive amplitudes; the amplitudes
/// here are powers, not RCS coefficients.
pub fn coeffs_from_scene(scene: &ScattererSet, dims: SceneDims) -> Result<ToeplitzCoeffs> {
    for pt in scene.points() {
        if pt.amp().im != 0.0 || pt.amp().re <= 0.0 {
            return Err(Error::NonRealPower(format!(
                "amplitude {} at ({}, {})",
                pt.amp(),
                pt.fx(),
                pt.fy()
            )));
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let grid = CoeffGrid::from_fn(dims, |p, q| {
        let mut acc = c64::new(0.0, 0.0);
        for pt in scene.points() {
            let phase = two_pi * (pt.fx() * p as f64 + pt.fy() * q as f64);
            acc += pt.amp().re * c64::from_polar(1.0, phase);
        }
        acc
    });
    Ok(ToeplitzCoeffs::symmetrized(grid))
}

/// Adjoint of [`assemble`]: sums `A` over each diagonal class,
/// `G(p,q) = Σ_{(i,j) ∈ D(p,q)} A[i,j]`.
///
/// Satisfies `tr(A^H · assemble(u)) = Σ_{p,q} conj(G_A(p,q)) · u(p,q)`.
pub fn adjoint(a: MatRef<'_, c64>, dims: SceneDims) -> Result<CoeffGrid> {
    let nm = dims.nm();
    if a.nrows() != nm || a.ncols() != nm {
        return Err(Error::DimMismatch(format!(
            "expected {nm}x{nm} matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let m = dims.m();
    let mut g = CoeffGrid::zeros(dims);
    let mw = (2 * m - 1) as i64;
    let (n64, m64) = (dims.n() as i64, m as i64);
    for j in 0..nm {
        let (nj, mj) = ((j / m) as i64, (j % m) as i64);
        for i in 0..nm {
            let (ni, mi) = ((i / m) as i64, (i % m) as i64);
            let idx = ((ni - nj + n64 - 1) * mw + (mi - mj + m64 - 1)) as usize;
            g.vals[idx] += a[(i, j)];
        }
    }
    Ok(g)
}

/// Least-squares projection of a Hermitian matrix onto the 2LT subspace:
/// each coefficient is the mean of its diagonal class,
/// `u(p,q) = G_A(p,q) / |D(p,q)|`.
pub fn project_to_2lt(a: MatRef<'_, c64>, dims: SceneDims) -> Result<ToeplitzCoeffs> {
    let g = adjoint(a, dims)?;
    let table = DiagonalClassTable::new(dims);
    let mut grid = CoeffGrid::zeros(dims);
    for p in grid.p_range() {
        for q in grid.q_range() {
            grid.set(p, q, g.get(p, q) / table.count(p, q) as f64);
        }
    }
    Ok(ToeplitzCoeffs::symmetrized(grid))
}

/// Weighted trace `tr(W · assemble(u))` computed through the adjoint
/// identity, without materializing the product.
///
/// `W` must be Hermitian; the result's imaginary part must vanish to
/// `1e-10` relative and is discarded.
pub fn trace_weighted(u: &ToeplitzCoeffs, w: MatRef<'_, c64>) -> Result<f64> {
    let dev = linalg::hermitian_deviation(w);
    let scale = linalg::max_abs(w).max(1.0);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let g = adjoint(w, u.dims())?;
    let mut acc = c64::new(0.0, 0.0);
    for (gv, uv) in g.values().iter().zip(u.grid().values()) {
        acc += gv.conj() * uv;
    }
    let magnitude = acc.norm().max(1e-300);
    if acc.im.abs() > 1e-10 * magnitude.max(1.0) {
        return Err(Error::NotHermitian { deviation: acc.im.abs() });
    }
    Ok(acc.re)
}

/// Convenience: dense identity of the grid's matrix size.
pub fn identity(dims: SceneDims) -> Mat<c64> {
    Mat::from_fn(dims.nm(), dims.nm(), |i, j| {
        if i == j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}
