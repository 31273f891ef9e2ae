use gridless2d::bench_metrics::*;
use gridless2d::multilevel_toeplitz::assemble;
use gridless2d::sdp_rwtm::*;
use gridless2d::signal_model::*;
use std::time::Instant;

fn main() {
    let dims = SceneDims::new(14, 14).unwrap();
    let scene = preset_airbus18(7);
    let s_true = synthesize(&scene, dims);
    let mask = random_mask(dims, 90, 0).unwrap();
    let obs = apply_mask(&s_true, &mask).unwrap();
    let base = SolverConfig { record_diagnostics: false, max_inner_iter: 2500, ..SolverConfig::default() };
    let anm = anm_solve(&obs, &mask, &base).unwrap();
    let t_hat = assemble(&anm.u_hat);
    let lam = probe::eigvals_max(&t_hat);
    let winv = probe::inv_shift(&t_hat, lam);
    for rho in [0.05, 0.2, 1.0, 5.0, 20.0] {
        let cfg = SolverConfig { rho, ..base.clone() };
        // weighted pass (cold)
        let t0 = Instant::now();
        let s1 = solve_weighted_trace(&obs, &mask, winv.as_ref(), &cfg).unwrap();
        let dt1 = t0.elapsed().as_secs_f64();
        // anm pass
        let t0 = Instant::now();
        let s0 = solve_weighted_trace(&obs, &mask, gridless2d::multilevel_toeplitz::identity(dims).as_ref(), &cfg).unwrap();
        let dt0 = t0.elapsed().as_secs_f64();
        println!(
            "rho {rho:5}: anm iters {:4} ({}) {dt0:5.1}s | weighted iters {:4} ({}) {dt1:5.1}s pr {:.1e} du {:.1e}",
            s0.iterations, s0.converged, s1.iterations, s1.converged, s1.primal_residual, s1.dual_residual
        );
    }
}

mod probe {
    use faer::{Mat, Side, c64};
    pub fn eigvals_max(a: &Mat<c64>) -> f64 {
        a.self_adjoint_eigenvalues(Side::Lower).unwrap().iter().cloned().fold(f64::MIN, f64::max)
    }
    pub fn inv_shift(a: &Mat<c64>, mu: f64) -> Mat<c64> {
        let e = a.self_adjoint_eigen(Side::Lower).unwrap();
        let n = a.nrows();
        let mut scaled = Mat::<c64>::zeros(n, n);
        for j in 0..n {
            let lam = e.S()[j].re.max(0.0);
            let inv_sqrt = 1.0 / (lam + mu).sqrt();
            for i in 0..n { scaled[(i, j)] = e.U()[(i, j)] * inv_sqrt; }
        }
        &scaled * scaled.adjoint()
    }
}
