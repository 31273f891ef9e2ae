//! Scoring and experiment protocols: cyclic frequency matching, MSE
//! metrics, separation checks, and deterministic ANM-vs-RWTM sweeps.

use crate::multilevel_toeplitz::assemble;
use crate::sdp_rwtm::{anm_solve, rwtm_solve, RecoveryResult, SolverConfig};
use crate::signal_model::{
    apply_mask, random_mask, synthesize, vectorize, DataMatrix, DataVector, ScattererSet,
    SceneDims,
};
use crate::vandermonde_mapp::{estimate_rank, mapp_decompose, recover_amplitudes};
use crate::{c64, hungarian, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// First-dimension frequencies of the 18-point production scene.
pub const AIRBUS18_FX: [f64; 18] = [
    0.81, 0.71, 0.65, 0.43, 0.37, 0.28, 0.47, 0.75, 0.69, 0.8, 0.58, 0.28, 0.5, 0.55, 0.35, 0.51,
    0.62, 0.52,
];

/// Second-dimension frequencies of the 18-point production scene.
pub const AIRBUS18_FY: [f64; 18] = [
    0.83, 0.71, 0.63, 0.69, 0.78, 0.85, 0.37, 0.3, 0.4, 0.2, 0.55, 0.48, 0.27, 0.15, 0.45, 0.62,
    0.48, 0.47,
];

/// First-dimension frequencies of the 19-point scene with a 0.01-close pair.
pub const AIRBUS19_FX: [f64; 19] = [
    0.80, 0.81, 0.71, 0.65, 0.43, 0.37, 0.28, 0.47, 0.75, 0.69, 0.8, 0.58, 0.28, 0.5, 0.55, 0.35,
    0.51, 0.62, 0.52,
];

/// Second-dimension frequencies of the 19-point scene.
pub const AIRBUS19_FY: [f64; 19] = [
    0.82, 0.83, 0.71, 0.63, 0.69, 0.78, 0.85, 0.37, 0.3, 0.4, 0.2, 0.55, 0.48, 0.27, 0.15, 0.45,
    0.62, 0.48, 0.47,
];

/// The 18-point scene with seeded unit-modulus random-phase amplitudes.
pub fn preset_airbus18(amp_seed: u64) -> ScattererSet {
    ScattererSet::from_freqs_unit_random_phase(&AIRBUS18_FX, &AIRBUS18_FY, amp_seed)
        .expect("preset lists are consistent")
}

/// The 19-point close-pair scene with seeded unit-modulus amplitudes.
pub fn preset_airbus19close(amp_seed: u64) -> ScattererSet {
    ScattererSet::from_freqs_unit_random_phase(&AIRBUS19_FX, &AIRBUS19_FY, amp_seed)
        .expect("preset lists are consistent")
}

/// Cyclic distance on `[0,1)`: `min(|a-b| mod 1, 1 - |a-b| mod 1) ∈ [0, 0.5]`.
pub fn wrap_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// One matched truth/estimate pair with its cyclic error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub truth_index: usize,
    pub est_index: usize,
    /// `sqrt(wrap_dist(fx)² + wrap_dist(fy)²)`.
    pub error: f64,
}

/// Result of the optimal frequency assignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyMatching {
    pub pairs: Vec<MatchedPair>,
    pub total_cost: f64,
    /// Truth entries left unmatched (estimate list was shorter).
    pub unmatched_truth: Vec<usize>,
    /// Estimate entries left unmatched (truth list was shorter).
    pub unmatched_est: Vec<usize>,
}

impl FrequencyMatching {
    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.error).fold(0.0, f64::max)
    }
}

fn pair_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = wrap_dist(a.0, b.0);
    let dy = wrap_dist(a.1, b.1);
    dx * dx + dy * dy
}

/// Minimum-total-cost assignment between truth and estimated frequency
/// lists under the squared cyclic metric, by the Hungarian algorithm.
/// Surplus entries on the longer side are reported unmatched.
pub fn match_frequencies(truth: &[(f64, f64)], est: &[(f64, f64)]) -> FrequencyMatching {
    if truth.is_empty() || est.is_empty() {
        return FrequencyMatching {
            pairs: Vec::new(),
            total_cost: 0.0,
            unmatched_truth: (0..truth.len()).collect(),
            unmatched_est: (0..est.len()).collect(),
        };
    }
    let transpose = truth.len() > est.len();
    let (rows, cols): (&[(f64, f64)], &[(f64, f64)]) =
        if transpose { (est, truth) } else { (truth, est) };
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| pair_cost(r, c)).collect())
        .collect();
    let assignment = hungarian::min_cost_assignment(&cost);

    let mut pairs: Vec<MatchedPair> = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            let (truth_index, est_index) = if transpose { (c, r) } else { (r, c) };
            MatchedPair {
                truth_index,
                est_index,
                error: cost[r][c].sqrt(),
            }
        })
        .collect();
    pairs.sort_by_key(|p| p.truth_index);
    let total_cost = assignment.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();

    let matched_truth: Vec<bool> = {
        let mut v = vec![false; truth.len()];
        for p in &pairs {
            v[p.truth_index] = true;
        }
        v
    };
    let matched_est: Vec<bool> = {
        let mut v = vec![false; est.len()];
        for p in &pairs {
            v[p.est_index] = true;
        }
        v
    };
    FrequencyMatching {
        pairs,
        total_cost,
        unmatched_truth: matched_truth
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(i, _)| i)
            .collect(),
        unmatched_est: matched_est
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(i, _)| i)
            .collect(),
    }
}

/// Frequency-domain score: mean squared cyclic distance (both dimensions
/// summed) over optimally matched pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqMse {
    pub mse: f64,
    pub matched: usize,
    /// Nonzero when the lists had different lengths.
    pub surplus: usize,
}

pub fn freq_mse(truth: &[(f64, f64)], est: &[(f64, f64)]) -> FreqMse {
    let matching = match_frequencies(truth, est);
    let matched = matching.pairs.len();
    let mse = if matched == 0 {
        0.0
    } else {
        matching.total_cost / matched as f64
    };
    FreqMse {
        mse,
        matched,
        surplus: truth.len().abs_diff(est.len()),
    }
}

/// Data-domain score: `‖vec(S_trueᵀ) - s_rec‖² / (NM)`.
pub fn data_mse(s_true: &DataMatrix, s_rec: &DataVector) -> Result<f64> {
    if s_true.dims() != s_rec.dims() {
        return Err(Error::DimMismatch(format!(
            "truth is {}x{}, reconstruction is {}x{}",
            s_true.dims().n(),
            s_true.dims().m(),
            s_rec.dims().n(),
            s_rec.dims().m()
        )));
    }
    let truth = vectorize(s_true);
    let sum: f64 = truth
        .entries()
        .iter()
        .zip(s_rec.entries())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(sum / s_true.dims().nm() as f64)
}

/// Pairwise scene separation against the resolvability limit `Δ_f = 0.45/n₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinSeparation {
    /// Minimum over pairs of the max-over-dimensions cyclic distance.
    pub min_sep: f64,
    /// `0.45 / n1`.
    pub delta_f: f64,
    pub satisfied: bool,
}

/// A pair is resolvable when it is separated in at least one dimension, so
/// its separation is the larger of the two per-dimension cyclic distances.
pub fn min_separation(scene: &ScattererSet, n1: usize) -> Result<MinSeparation> {
    if scene.k() < 2 {
        return Err(Error::InvalidArgument(
            "separation needs at least two scatterers".into(),
        ));
    }
    if n1 == 0 {
        return Err(Error::InvalidArgument("n1 must be positive".into()));
    }
    let freqs = scene.freqs();
    let mut min_sep = f64::INFINITY;
    for i in 0..freqs.len() {
        for j in i + 1..freqs.len() {
            let sep = wrap_dist(freqs[i].0, freqs[j].0).max(wrap_dist(freqs[i].1, freqs[j].1));
            min_sep = min_sep.min(sep);
        }
    }
    let delta_f = 0.45 / n1 as f64;
    Ok(MinSeparation {
        min_sep,
        delta_f,
        satisfied: min_sep >= delta_f,
    })
}

/// Recovery method under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Anm,
    Rwtm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Anm => write!(f, "anm"),
            Method::Rwtm => write!(f, "rwtm"),
        }
    }
}

/// Scene selection for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenePreset {
    Airbus18,
    Airbus19Close,
    /// Explicit frequency/amplitude lists.
    Custom {
        fx: Vec<f64>,
        fy: Vec<f64>,
        amp_re: Vec<f64>,
        amp_im: Vec<f64>,
    },
}

/// How the model order passed to the pencil step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Eigenvalue count above `rel_tol · λ_max`.
    Auto { rel_tol: f64 },
    /// Fixed order.
    Pinned(usize),
    /// The scene's point count (the usual benchmark choice: the target's
    /// scatterer count is treated as known).
    FromScene,
}

/// Full sweep description: scene, grid, sample counts, seeds, methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scene: ScenePreset,
    pub dims: SceneDims,
    pub sample_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Seed for the preset scenes' amplitude phases.
    pub amp_seed: u64,
    pub rank_policy: RankPolicy,
    /// Solver settings, including the weighting initialization.
    pub solver: SolverConfig,
}

impl ScenarioConfig {
    /// Sweep over the production scene at the given counts and seeds with
    /// defaults appropriate for batch runs.
    pub fn airbus18(dims: SceneDims, sample_counts: Vec<usize>, seeds: Vec<u64>) -> Self {
        Self {
            scene: ScenePreset::Airbus18,
            dims,
            sample_counts,
            seeds,
            methods: vec![Method::Anm, Method::Rwtm],
            amp_seed: 7,
            rank_policy: RankPolicy::FromScene,
            solver: SolverConfig {
                record_diagnostics: false,
                ..SolverConfig::default()
            },
        }
    }

    pub fn scene_set(&self) -> Result<ScattererSet> {
        match &self.scene {
            ScenePreset::Airbus18 => Ok(preset_airbus18(self.amp_seed)),
            ScenePreset::Airbus19Close => Ok(preset_airbus19close(self.amp_seed)),
            ScenePreset::Custom {
                fx,
                fy,
                amp_re,
                amp_im,
            } => {
                if fx.len() != fy.len() || fx.len() != amp_re.len() || fx.len() != amp_im.len() {
                    return Err(Error::DimMismatch(
                        "custom scene lists must have equal lengths".into(),
                    ));
                }
                let pts = fx
                    .iter()
                    .zip(fy)
                    .zip(amp_re.iter().zip(amp_im))
                    .map(|((&x, &y), (&re, &im))| {
                        crate::signal_model::Scatterer::new(x, y, c64::new(re, im))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ScattererSet::new(pts)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sample_counts.is_empty() || self.seeds.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidArgument(
                "sample_counts, seeds and methods must be nonempty".into(),
            ));
        }
        self.solver.validate()
    }
}

/// One sweep row: metrics of a single (method, sample count, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub sample_count: usize,
    pub seed: u64,
    pub data_mse: Option<f64>,
    pub freq_mse: Option<f64>,
    pub max_pair_error: Option<f64>,
    pub matched: usize,
    pub recovered_k: usize,
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    /// Wall-clock seconds; carried in JSON reports but excluded from the
    /// byte-reproducible CSV.
    pub wall_time_s: f64,
    pub error: Option<String>,
}

/// All rows of a sweep, in deterministic (method, count, seed) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Byte-reproducible CSV of the metric columns (timings excluded).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,sample_count,seed,data_mse,freq_mse,max_pair_error,matched,recovered_k,converged,outer_iterations,inner_iterations_total,error\n",
        );
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.method,
                r.sample_count,
                r.seed,
                opt(r.data_mse),
                opt(r.freq_mse),
                opt(r.max_pair_error),
                r.matched,
                r.recovered_k,
                r.converged,
                r.outer_iterations,
                r.inner_iterations_total,
                r.error.clone().unwrap_or_default()
            ));
        }
        out
    }

    /// Mean of a metric over rows matching a method and sample count.
    pub fn mean_data_mse(&self, method: Method, sample_count: usize) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.sample_count == sample_count)
            .filter_map(|r| r.data_mse)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

/// Recovery of one masked instance, scored against the known scene.
pub struct ScoredRun {
    pub result: RecoveryResult,
    pub decomposition: crate::vandermonde_mapp::DecompositionResult,
    pub amplitudes: crate::vandermonde_mapp::AmplitudeFit,
    pub data_mse: f64,
    pub freq: FreqMse,
    pub max_pair_error: f64,
}

/// Runs one (method, count, seed) cell: draw the mask, solve, decompose,
/// recover amplitudes, and score against the truth.
pub fn run_single(
    scene: &ScattererSet,
    dims: SceneDims,
    method: Method,
    sample_count: usize,
    seed: u64,
    rank_policy: RankPolicy,
    solver: &SolverConfig,
) -> Result<ScoredRun> {
    let s_true = synthesize(scene, dims);
    let mask = random_mask(dims, sample_count, seed)?;
    let obs = apply_mask(&s_true, &mask)?;
    let result = match method {
        Method::Anm => anm_solve(&obs, &mask, solver)?,
        Method::Rwtm => rwtm_solve(&obs, &mask, solver)?,
    };
    let k = match rank_policy {
        RankPolicy::Auto { rel_tol } => estimate_rank(assemble(&result.u_hat).as_ref(), rel_tol)?,
        RankPolicy::Pinned(k) => k,
        RankPolicy::FromScene => scene.k(),
    };
    let decomposition = mapp_decompose(&result.u_hat, k)?;
    let amplitudes = recover_amplitudes(&result.s_hat, &decomposition.freqs)?;
    let truth = scene.freqs();
    let matching = match_frequencies(&truth, &decomposition.freqs);
    let max_pair_error = matching.max_error();
    let freq = freq_mse(&truth, &decomposition.freqs);
    let data_mse = data_mse(&s_true, &result.s_hat)?;
    Ok(ScoredRun {
        result,
        decomposition,
        amplitudes,
        data_mse,
        freq,
        max_pair_error,
    })
}

/// Executes the full sweep. Rows run concurrently and are reported in
/// deterministic (method, sample count, seed) order; individual failures
/// are recorded in their row and never abort the sweep.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let scene = cfg.scene_set()?;
    let cells: Vec<(Method, usize, u64)> = cfg
        .methods
        .iter()
        .flat_map(|&method| {
            cfg.sample_counts.iter().flat_map(move |&count| {
                cfg.seeds.iter().map(move |&seed| (method, count, seed))
            })
        })
        .collect();
    let rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(method, count, seed)| {
            let started = std::time::Instant::now();
            match run_single(&scene, cfg.dims, method, count, seed, cfg.rank_policy, &cfg.solver) {
                Ok(run) => BenchRow {
                    method,
                    sample_count: count,
                    seed,
                    data_mse: Some(run.data_mse),
                    freq_mse: Some(run.freq.mse),
                    max_pair_error: Some(run.max_pair_error),
                    matched: run.freq.matched,
                    recovered_k: run.decomposition.freqs.len(),
                    converged: run.result.converged,
                    outer_iterations: run.result.outer_iterations,
                    inner_iterations_total: run.result.inner_iterations.iter().sum(),
                    wall_time_s: started.elapsed().as_secs_f64(),
                    error: None,
                },
                Err(e) => BenchRow {
                    method,
                    sample_count: count,
                    seed,
                    data_mse: None,
                    freq_mse: None,
                    max_pair_error: None,
                    matched: 0,
                    recovered_k: 0,
                    converged: false,
                    outer_iterations: 0,
                    inner_iterations_total: 0,
                    wall_time_s: started.elapsed().as_secs_f64(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(BenchReport { rows })
}
