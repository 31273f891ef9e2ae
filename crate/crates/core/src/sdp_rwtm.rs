//! First-order solver for the weighted trace-minimization semidefinite
//! program over 2-level Toeplitz matrices, and the reweighted iteration
//! built on top of it.
//!
//! The inner problem is
//!
//! ```text
//! minimize   t + tr(Winv · T(u))
//! subject to Q(t, s, u) = [ t    s^H  ]  ⪰ 0,    s_Ω = observations,
//!                         [ s    T(u) ]
//! ```
//!
//! where `T(u)` is the Hermitian 2LT matrix generated by `u`. It is solved
//! by ADMM splitting `Z = Q(t, s, u)`: a PSD projection of `Q - L/ρ` by
//! Hermitian eigendecomposition, closed-form updates of `(t, s, u)` against
//! `B = Z + L/ρ`, and a dual step on `L`. With `Winv = I` this is the
//! atomic-norm (plain trace) baseline; the reweighted outer loop replaces
//! `Winv` by `(T(u_prev) + μI)^{-1}` with a geometrically decaying `μ`,
//! which sharpens the trace surrogate toward minimal rank.
//!
//! Per-iteration cost is one eigendecomposition of size `NM+1`; everything
//! else is closed-form on the generating coefficients.

use crate::multilevel_toeplitz::{
    adjoint, assemble, identity, CoeffGrid, DiagonalClassTable, ToeplitzCoeffs,
};
use crate::signal_model::{DataVector, ObservationMask, SceneDims};
use crate::{c64, linalg, Error, Result};
use faer::{Mat, MatRef, Scale};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

/// Initial weighting matrix `W₀` for the reweighted iteration.
///
/// `Identity` makes the first pass the plain trace-minimization baseline.
/// The other two are regularized before inversion: `Winv₀ = (W₀ + ε I)^{-1}`
/// with `ε = 1e-3·max(1, ‖W₀‖₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightInit {
    /// `W₀ = I`.
    Identity,
    /// `W₀` has ones on a centered `size×size` index block, zeros elsewhere.
    CenterOnes(usize),
    /// `W₀ = A·A^H / ‖A·A^H‖₂` for a seeded complex Gaussian `A`.
    Random(u64),
}

/// Solver configuration; [`SolverConfig::default`] gives the reference
/// values used throughout the tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// ADMM penalty ρ (fixed; no adaptive schedule).
    pub rho: f64,
    /// Inner iteration cap per weighted solve.
    pub max_inner_iter: usize,
    /// Absolute stopping tolerance, scaled by `NM+1`.
    pub eps_abs: f64,
    /// Relative stopping tolerance, scaled by `max(‖Z‖_F, ‖Q‖_F)`.
    pub eps_rel: f64,
    /// Maximum number of reweighted outer passes.
    pub max_outer_iter: usize,
    /// Outer stop: relative change in the generating coefficients.
    pub outer_tol: f64,
    /// μ₀ = `mu0_scale · λ_max(T̂₀)`.
    pub mu0_scale: f64,
    /// Geometric decay factor η of μ per outer pass, in (0, 1).
    pub mu_decay: f64,
    /// Floor: μ never drops below `mu_min_scale · λ_max(T̂₀)`.
    pub mu_min_scale: f64,
    /// Initial weighting matrix.
    pub weight_init: WeightInit,
    /// Record one diagnostics row per inner iteration (disable for sweeps).
    pub record_diagnostics: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_inner_iter: 5000,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            max_outer_iter: 10,
            outer_tol: 1e-4,
            mu0_scale: 1.0,
            mu_decay: 0.1,
            mu_min_scale: 1e-8,
            weight_init: WeightInit::Identity,
            record_diagnostics: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
            ("outer_tol", self.outer_tol),
            ("mu0_scale", self.mu0_scale),
            ("mu_min_scale", self.mu_min_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu_decay > 0.0 && self.mu_decay < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mu_decay must lie in (0, 1), got {}",
                self.mu_decay
            )));
        }
        if self.max_inner_iter == 0 || self.max_outer_iter == 0 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One diagnostics row per inner iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub outer_iter: usize,
    pub inner_iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

/// Full residual/objective history of a solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub rows: Vec<DiagnosticsRow>,
}

impl SolveDiagnostics {
    /// CSV with header `outer_iter,inner_iter,primal_residual,dual_residual,objective`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outer_iter,inner_iter,primal_residual,dual_residual,objective\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.outer_iter, r.inner_iter, r.primal_residual, r.dual_residual, r.objective
            ));
        }
        out
    }
}

/// Output of one weighted trace-minimization solve.
#[derive(Debug, Clone)]
pub struct WeightedTraceSolution {
    /// Scalar `t` of the semidefinite block.
    pub t: f64,
    /// Completed data vector; equals the observations on Ω exactly.
    pub s: DataVector,
    /// Recovered generating coefficients.
    pub u: ToeplitzCoeffs,
    pub converged: bool,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Final `t + tr(Winv · T(u))`.
    pub objective: f64,
    pub diagnostics: SolveDiagnostics,
}

/// Output of a full recovery (baseline or reweighted).
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Completed data vector; matches the observations on Ω exactly.
    pub s_hat: DataVector,
    /// Recovered generating coefficients of the 2LT matrix.
    pub u_hat: ToeplitzCoeffs,
    pub t_hat: f64,
    /// Number of outer passes executed.
    pub outer_iterations: usize,
    /// Inner iteration count of each pass.
    pub inner_iterations: Vec<usize>,
    /// True when every inner pass met its stopping tolerance.
    pub converged: bool,
    pub final_primal: f64,
    pub final_dual: f64,
    /// Final objective `t + tr(Winv_i · T̂_i)` of each pass.
    pub outer_objectives: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

/// Masked observations as produced by [`crate::signal_model::apply_mask`].
pub type MaskedObservations = [((usize, usize), c64)];

struct Problem {
    dims: SceneDims,
    /// Per vector index: `Some(value)` when observed.
    obs: Vec<Option<c64>>,
}

impl Problem {
    fn new(obs: &MaskedObservations, mask: &ObservationMask) -> Result<Self> {
        let dims = mask.dims();
        if obs.len() != mask.len() {
            return Err(Error::DimMismatch(format!(
                "{} observations for a mask of {} entries",
                obs.len(),
                mask.len()
            )));
        }
        let mut by_index = vec![None; dims.nm()];
        for (&(n, m), &(pn, pm)) in obs.iter().map(|(i, _)| i).zip(mask.pairs()) {
            if (n, m) != (pn, pm) {
                return Err(Error::DimMismatch(format!(
                    "observation index ({n},{m}) does not match mask entry ({pn},{pm})"
                )));
            }
        }
        for &((n, m), v) in obs {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite observation at ({n},{m})"
                )));
            }
            by_index[dims.vec_index(n, m)] = Some(v);
        }
        Ok(Self { dims, obs: by_index })
    }
}

/// ADMM iterate: the primal triple, the PSD split variable and multiplier.
struct AdmmState {
    t: f64,
    s: Vec<c64>,
    u: ToeplitzCoeffs,
    z: Mat<c64>,
    l: Mat<c64>,
}

impl AdmmState {
    fn cold(problem: &Problem) -> Self {
        let dims = problem.dims;
        let nm = dims.nm();
        let s = (0..nm)
            .map(|k| problem.obs[k].unwrap_or(c64::new(0.0, 0.0)))
            .collect();
        Self {
            t: 0.0,
            s,
            u: ToeplitzCoeffs::zeros(dims),
            z: Mat::zeros(nm + 1, nm + 1),
            l: Mat::zeros(nm + 1, nm + 1),
        }
    }

    fn build_q(&self, dims: SceneDims) -> Mat<c64> {
        let nm = dims.nm();
        let m = dims.m();
        let mut q = Mat::zeros(nm + 1, nm + 1);
        q[(0, 0)] = c64::new(self.t, 0.0);
        for i in 0..nm {
            q[(1 + i, 0)] = self.s[i];
            q[(0, 1 + i)] = self.s[i].conj();
        }
        for j in 0..nm {
            let (nj, mj) = ((j / m) as i64, (j % m) as i64);
            for i in 0..nm {
                let (ni, mi) = ((i / m) as i64, (i % m) as i64);
                q[(1 + i, 1 + j)] = self.u.get(ni - nj, mi - mj);
            }
        }
        q
    }
}

struct InnerOutcome {
    converged: bool,
    iterations: usize,
    primal: f64,
    dual: f64,
    objective: f64,
}

/// One weighted ADMM solve, mutating `state` in place (warm starts reuse it).
fn admm_inner(
    problem: &Problem,
    winv: MatRef<'_, c64>,
    cfg: &SolverConfig,
    outer_iter: usize,
    state: &mut AdmmState,
    diagnostics: &mut Vec<DiagnosticsRow>,
) -> Result<InnerOutcome> {
    let dims = problem.dims;
    let nm = dims.nm();
    let rho = cfg.rho;
    let inv_rho = Scale(c64::new(1.0 / rho, 0.0));
    let table = DiagonalClassTable::new(dims);

    // Constant across iterations: the adjoint image of the weight, both as
    // the u-update penalty and as the objective functional.
    let g_winv = adjoint(winv, dims)?;

    let mut q = state.build_q(dims);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut objective = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..cfg.max_inner_iter {
        iterations = k + 1;

        // Z-update: PSD projection of Q - L/ρ.
        let mut m0 = &q - &state.l * inv_rho;
        linalg::hermitize(&mut m0);
        let (w, v) = linalg::eigh(m0.as_ref())?;
        let pos: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        let mut vp = Mat::<c64>::zeros(nm + 1, pos.len());
        for (c, &i) in pos.iter().enumerate() {
            let scale = w[i].sqrt();
            for r in 0..nm + 1 {
                vp[(r, c)] = v[(r, i)] * scale;
            }
        }
        state.z = &vp * vp.adjoint();
        linalg::hermitize(&mut state.z);

        // Closed-form primal updates against B = Z + L/ρ.
        let mut b = &state.z + &state.l * inv_rho;
        linalg::hermitize(&mut b);

        state.t = (b[(0, 0)].re - 1.0 / rho).max(0.0);
        for i in 0..nm {
            state.s[i] = match problem.obs[i] {
                Some(v) => v,
                None => b[(1 + i, 0)],
            };
        }
        let b_block = b.as_ref().submatrix(1, 1, nm, nm);
        let g_b = adjoint(b_block, dims)?;
        let mut raw = CoeffGrid::zeros(dims);
        for p in raw.p_range() {
            for qo in raw.q_range() {
                let count = table.count(p, qo) as f64;
                raw.set(p, qo, (g_b.get(p, qo) - g_winv.get(p, qo) * (1.0 / rho)) / count);
            }
        }
        state.u = ToeplitzCoeffs::symmetrized(raw);

        let q_new = state.build_q(dims);

        // Dual update and residuals.
        state.l = &state.l + (&state.z - &q_new) * Scale(c64::new(rho, 0.0));
        primal = linalg::fro_norm((&state.z - &q_new).as_ref());
        dual = rho * linalg::fro_norm((&q_new - &q).as_ref());
        q = q_new;

        let mut tr = c64::new(0.0, 0.0);
        for (gv, uv) in g_winv.values().iter().zip(state.u.grid().values()) {
            tr += gv.conj() * uv;
        }
        objective = state.t + tr.re;

        if cfg.record_diagnostics {
            diagnostics.push(DiagnosticsRow {
                outer_iter,
                inner_iter: k,
                primal_residual: primal,
                dual_residual: dual,
                objective,
            });
        }

        let tol = cfg.eps_abs * (nm + 1) as f64
            + cfg.eps_rel * linalg::fro_norm(state.z.as_ref()).max(linalg::fro_norm(q.as_ref()));
        if primal < tol && dual < tol {
            converged = true;
            break;
        }
    }

    if !converged {
        log::info!(
            "inner solve (outer pass {outer_iter}) hit the iteration cap: primal {primal:.3e}, dual {dual:.3e}"
        );
    }
    Ok(InnerOutcome {
        converged,
        iterations,
        primal,
        dual,
        objective,
    })
}

fn check_weight(winv: MatRef<'_, c64>, nm: usize) -> Result<()> {
    if winv.nrows() != nm || winv.ncols() != nm {
        return Err(Error::DimMismatch(format!(
            "weight must be {nm}x{nm}, got {}x{}",
            winv.nrows(),
            winv.ncols()
        )));
    }
    let dev = linalg::hermitian_deviation(winv);
    let scale = linalg::max_abs(winv).max(1.0);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let w = linalg::eigh_values(winv)?;
    let lam_max = w.iter().cloned().fold(f64::MIN, f64::max);
    let lam_min = w.iter().cloned().fold(f64::MAX, f64::min);
    if lam_min < -1e-8 * lam_max.max(1.0) {
        return Err(Error::NotPsd { min_eig: lam_min });
    }
    Ok(())
}

/// Solves the weighted trace-minimization SDP for a fixed Hermitian PSD
/// weight `Winv`.
///
/// The completed vector equals the observations on Ω at every iterate; when
/// the iteration cap is reached the result carries `converged = false`
/// along with the final residuals.
pub fn solve_weighted_trace(
    obs: &MaskedObservations,
    mask: &ObservationMask,
    winv: MatRef<'_, c64>,
    cfg: &SolverConfig,
) -> Result<WeightedTraceSolution> {
    cfg.validate()?;
    let problem = Problem::new(obs, mask)?;
    check_weight(winv, problem.dims.nm())?;
    let mut state = AdmmState::cold(&problem);
    let mut rows = Vec::new();
    let outcome = admm_inner(&problem, winv, cfg, 0, &mut state, &mut rows)?;
    Ok(WeightedTraceSolution {
        t: state.t,
        s: DataVector::from_entries(problem.dims, state.s)?,
        u: state.u,
        converged: outcome.converged,
        iterations: outcome.iterations,
        primal_residual: outcome.primal,
        dual_residual: outcome.dual,
        objective: outcome.objective,
        diagnostics: SolveDiagnostics { rows },
    })
}

/// Atomic-norm baseline: [`solve_weighted_trace`] with `Winv = I`.
pub fn anm_solve(
    obs: &MaskedObservations,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    let sol = solve_weighted_trace(obs, mask, identity(mask.dims()).as_ref(), cfg)?;
    Ok(RecoveryResult {
        s_hat: sol.s,
        u_hat: sol.u,
        t_hat: sol.t,
        outer_iterations: 1,
        inner_iterations: vec![sol.iterations],
        converged: sol.converged,
        final_primal: sol.primal_residual,
        final_dual: sol.dual_residual,
        outer_objectives: vec![sol.objective],
        diagnostics: sol.diagnostics,
    })
}

/// Builds `(W + floor·I)^{-1}` from a Hermitian PSD-ish matrix by
/// eigendecomposition, flooring eigenvalues at zero before the shift.
fn invert_regularized(w: MatRef<'_, c64>, floor: f64) -> Result<Mat<c64>> {
    let (vals, vecs) = linalg::eigh(w)?;
    let n = w.nrows();
    let mut scaled = Mat::<c64>::zeros(n, vals.len());
    for (j, &lam) in vals.iter().enumerate() {
        let inv_sqrt = 1.0 / (lam.max(0.0) + floor).sqrt();
        for i in 0..n {
            scaled[(i, j)] = vecs[(i, j)] * inv_sqrt;
        }
    }
    let mut out = &scaled * scaled.adjoint();
    linalg::hermitize(&mut out);
    Ok(out)
}

/// Initial inverse weight `Winv₀` for a weighting choice.
pub fn initial_weight(init: WeightInit, dims: SceneDims) -> Result<Mat<c64>> {
    let nm = dims.nm();
    match init {
        WeightInit::Identity => Ok(identity(dims)),
        WeightInit::CenterOnes(size) => {
            if size == 0 || size > nm {
                return Err(Error::InvalidArgument(format!(
                    "center block size must be in 1..={nm}, got {size}"
                )));
            }
            let off = (nm - size) / 2;
            let mut w0 = Mat::<c64>::zeros(nm, nm);
            for i in off..off + size {
                for j in off..off + size {
                    w0[(i, j)] = c64::new(1.0, 0.0);
                }
            }
            // spectral norm of the ones block is exactly `size`
            let eps = 1e-3 * (size as f64).max(1.0);
            invert_regularized(w0.as_ref(), eps)
        }
        WeightInit::Random(seed) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let normal = rand_distr::StandardNormal;
            let a = Mat::<c64>::from_fn(nm, nm, |_, _| {
                c64::new(normal.sample(&mut rng), normal.sample(&mut rng))
            });
            let mut aa = &a * a.adjoint();
            linalg::hermitize(&mut aa);
            let vals = linalg::eigh_values(aa.as_ref())?;
            let lam_max = vals.iter().cloned().fold(f64::MIN, f64::max).max(f64::MIN_POSITIVE);
            let w0 = &aa * Scale(c64::new(1.0 / lam_max, 0.0));
            invert_regularized(w0.as_ref(), 1e-3)
        }
    }
}

/// Reweighted trace minimization.
///
/// Pass 0 uses the configured initial weight (the identity choice makes it
/// the [`anm_solve`] baseline), then each pass rebuilds the weight as
/// `Winv = (T̂_i + μ_i I)^{-1}` with `μ_i = max(ε₀·λ_max(T̂₀)·η^i,
/// μ_min·λ_max(T̂₀))`, warm-starting from the previous iterate. Stops when
/// the generating coefficients change by less than `outer_tol` in relative
/// Frobenius norm, or after `max_outer_iter` passes.
pub fn rwtm_solve(
    obs: &MaskedObservations,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let problem = Problem::new(obs, mask)?;
    let dims = problem.dims;
    let mut winv = initial_weight(cfg.weight_init, dims)?;
    check_weight(winv.as_ref(), dims.nm())?;

    let mut state = AdmmState::cold(&problem);
    let mut rows = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut outer_objectives = Vec::new();
    let mut all_converged = true;
    let mut last = None;
    let mut u_prev: Option<ToeplitzCoeffs> = None;
    let mut lam0_max = 0.0f64;
    let mut outer_done = 0;

    for i in 0..cfg.max_outer_iter {
        let outcome = admm_inner(&problem, winv.as_ref(), cfg, i, &mut state, &mut rows)?;
        all_converged &= outcome.converged;
        inner_iterations.push(outcome.iterations);
        outer_objectives.push(outcome.objective);
        outer_done = i + 1;

        let u_i = state.u.clone();
        if let Some(prev) = &u_prev {
            let denom = prev.norm();
            let change = u_i.diff_norm(prev);
            let rel = if denom > 0.0 {
                change / denom
            } else if change > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            log::debug!("outer pass {i}: relative coefficient change {rel:.3e}");
            if rel < cfg.outer_tol {
                last = Some(outcome);
                break;
            }
        }
        last = Some(outcome);
        if i + 1 == cfg.max_outer_iter {
            break;
        }

        // Rebuild the weight from this pass's solution.
        let t_hat = assemble(&u_i);
        let (vals, vecs) = linalg::eigh(t_hat.as_ref())?;
        let lam_max = vals.iter().cloned().fold(f64::MIN, f64::max).max(0.0);
        if i == 0 {
            lam0_max = lam_max;
        }
        if lam0_max <= 0.0 {
            // zero solution; nothing to reweight
            break;
        }
        let mu = (cfg.mu0_scale * lam0_max * cfg.mu_decay.powi(i as i32))
            .max(cfg.mu_min_scale * lam0_max);
        let n = dims.nm();
        let mut scaled = Mat::<c64>::zeros(n, n);
        for (j, &lam) in vals.iter().enumerate() {
            let inv_sqrt = 1.0 / (lam.max(0.0) + mu).sqrt();
            for r in 0..n {
                scaled[(r, j)] = vecs[(r, j)] * inv_sqrt;
            }
        }
        winv = &scaled * scaled.adjoint();
        linalg::hermitize(&mut winv);
        u_prev = Some(u_i);
    }

    let outcome = last.expect("at least one outer pass runs");
    Ok(RecoveryResult {
        s_hat: DataVector::from_entries(dims, state.s)?,
        u_hat: state.u,
        t_hat: state.t,
        outer_iterations: outer_done,
        inner_iterations,
        converged: all_converged,
        final_primal: outcome.primal,
        final_dual: outcome.dual,
        outer_objectives,
        diagnostics: SolveDiagnostics { rows },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{
        apply_mask, random_mask, synthesize, vectorize, ObservationMask, Scatterer, ScattererSet,
    };

    fn one_point_scene(fx: f64, fy: f64, amp: c64) -> ScattererSet {
        ScattererSet::new(vec![Scatterer::new(fx, fy, amp).unwrap()]).unwrap()
    }

    fn quick_cfg() -> SolverConfig {
        SolverConfig {
            record_diagnostics: false,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let mut cfg = SolverConfig::default();
        cfg.rho = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::default();
        cfg.mu_decay = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn full_mask_pins_the_data_vector() {
        let dims = crate::signal_model::SceneDims::new(4, 4).unwrap();
        let scene = one_point_scene(0.3, 0.7, c64::new(1.0, -0.5));
        let s_true = synthesize(&scene, dims);
        let mask = ObservationMask::full(dims);
        let obs = apply_mask(&s_true, &mask).unwrap();
        let sol = solve_weighted_trace(
            &obs,
            &mask,
            identity(dims).as_ref(),
            &quick_cfg(),
        )
        .unwrap();
        assert!(sol.converged);
        // hard constraint: s equals the data bit-exactly
        assert_eq!(sol.s.entries(), vectorize(&s_true).entries());
        // feasibility of the semidefinite block
        let mut q = Mat::<c64>::zeros(17, 17);
        q[(0, 0)] = c64::new(sol.t, 0.0);
        for i in 0..16 {
            q[(1 + i, 0)] = sol.s.entries()[i];
            q[(0, 1 + i)] = sol.s.entries()[i].conj();
        }
        let t_mat = assemble(&sol.u);
        for i in 0..16 {
            for j in 0..16 {
                q[(1 + i, 1 + j)] = t_mat[(i, j)];
            }
        }
        let vals = crate::linalg::eigh_values(q.as_ref()).unwrap();
        let lam_max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lam_min = vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(lam_min >= -1e-6 * lam_max, "min {lam_min}, max {lam_max}");
    }

    #[test]
    fn single_point_completion_from_partial_samples() {
        let dims = crate::signal_model::SceneDims::new(8, 8).unwrap();
        let scene = one_point_scene(0.3, 0.7, c64::new(1.0, 0.0));
        let s_true = synthesize(&scene, dims);
        let mask = random_mask(dims, 26, 42).unwrap(); // 40% of 64
        let obs = apply_mask(&s_true, &mask).unwrap();
        let sol = solve_weighted_trace(&obs, &mask, identity(dims).as_ref(), &quick_cfg()).unwrap();
        let truth = vectorize(&s_true);
        let err: f64 = truth
            .entries()
            .iter()
            .zip(sol.s.entries())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let rel = err / truth.norm();
        assert!(rel <= 1e-4, "relative completion error {rel:.3e}");
    }

    #[test]
    fn observed_entries_are_bit_exact_at_every_call() {
        let dims = crate::signal_model::SceneDims::new(5, 5).unwrap();
        let scene = one_point_scene(0.21, 0.84, c64::new(0.7, 0.9));
        let s_true = synthesize(&scene, dims);
        let mask = random_mask(dims, 10, 7).unwrap();
        let obs = apply_mask(&s_true, &mask).unwrap();
        let cfg = SolverConfig {
            max_inner_iter: 17, // stop mid-flight on purpose
            record_diagnostics: false,
            ..SolverConfig::default()
        };
        let sol = solve_weighted_trace(&obs, &mask, identity(dims).as_ref(), &cfg).unwrap();
        for &((n, m), v) in obs.iter() {
            assert_eq!(sol.s.get(n, m), v);
        }
    }

    #[test]
    fn rejects_non_psd_weight() {
        let dims = crate::signal_model::SceneDims::new(3, 3).unwrap();
        let scene = one_point_scene(0.2, 0.4, c64::new(1.0, 0.0));
        let s_true = synthesize(&scene, dims);
        let mask = ObservationMask::full(dims);
        let obs = apply_mask(&s_true, &mask).unwrap();
        let mut w = identity(dims);
        w[(0, 0)] = c64::new(-1.0, 0.0);
        assert!(matches!(
            solve_weighted_trace(&obs, &mask, w.as_ref(), &quick_cfg()),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let dims = crate::signal_model::SceneDims::new(4, 4).unwrap();
        let scene = one_point_scene(0.37, 0.11, c64::new(1.0, 0.2));
        let s_true = synthesize(&scene, dims);
        let mask = random_mask(dims, 6, 3).unwrap();
        let obs = apply_mask(&s_true, &mask).unwrap();
        let cfg = SolverConfig {
            max_inner_iter: 3,
            record_diagnostics: false,
            ..SolverConfig::default()
        };
        let sol = solve_weighted_trace(&obs, &mask, identity(dims).as_ref(), &cfg).unwrap();
        assert!(!sol.converged);
        assert!(sol.primal_residual.is_finite() && sol.dual_residual.is_finite());
    }

    #[test]
    fn rwtm_on_trivial_scene_matches_anm() {
        let dims = crate::signal_model::SceneDims::new(4, 4).unwrap();
        let scene = one_point_scene(0.25, 0.5, c64::new(2.0, 0.0));
        let s_true = synthesize(&scene, dims);
        let mask = ObservationMask::full(dims);
        let obs = apply_mask(&s_true, &mask).unwrap();
        let anm = anm_solve(&obs, &mask, &quick_cfg()).unwrap();
        let rwtm = rwtm_solve(&obs, &mask, &quick_cfg()).unwrap();
        let diff: f64 = anm
            .s_hat
            .entries()
            .iter()
            .zip(rwtm.s_hat.entries())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6 * anm.s_hat.norm().max(1.0));
    }

    #[test]
    fn solver_is_deterministic() {
        let dims = crate::signal_model::SceneDims::new(5, 4).unwrap();
        let scene = ScattererSet::new(vec![
            Scatterer::new(0.12, 0.65, c64::new(1.0, 0.3)).unwrap(),
            Scatterer::new(0.58, 0.21, c64::new(-0.4, 0.8)).unwrap(),
        ])
        .unwrap();
        let s_true = synthesize(&scene, dims);
        let mask = random_mask(dims, 12, 5).unwrap();
        let obs = apply_mask(&s_true, &mask).unwrap();
        let cfg = SolverConfig {
            max_inner_iter: 200,
            ..SolverConfig::default()
        };
        let a = solve_weighted_trace(&obs, &mask, identity(dims).as_ref(), &cfg).unwrap();
        let b = solve_weighted_trace(&obs, &mask, identity(dims).as_ref(), &cfg).unwrap();
        assert_eq!(a.s.entries(), b.s.entries());
        assert_eq!(a.u.grid().values(), b.u.grid().values());
        assert_eq!(a.diagnostics, b.diagnostics);
    }

    #[test]
    fn weight_inits_are_psd_and_deterministic() {
        let dims = crate::signal_model::SceneDims::new(4, 4).unwrap();
        for init in [
            WeightInit::Identity,
            WeightInit::CenterOnes(10),
            WeightInit::Random(3),
        ] {
            let w1 = initial_weight(init, dims).unwrap();
            let w2 = initial_weight(init, dims).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    assert_eq!(w1[(i, j)], w2[(i, j)]);
                }
            }
            check_weight(w1.as_ref(), 16).unwrap();
        }
        assert!(initial_weight(WeightInit::CenterOnes(17), dims).is_err());
    }
}
