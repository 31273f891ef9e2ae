//! Command-line front end: synthesis, masking, recovery, decomposition,
//! benchmark sweeps, and the full reproduction bundle.
//!
//! Exit codes: 0 success, 2 usage/parse/dimension errors, 3 flagged solver
//! non-convergence or partial sweep failures. Logging goes through the
//! `GRIDLESS2D_LOG` environment variable (error, info, debug).

use clap::{Args, Parser, Subcommand};
use gridless2d::bench_metrics::{
    data_mse, match_frequencies, preset_airbus18, preset_airbus19close, run_scenario, run_single,
    Method, RankPolicy, ScenarioConfig, ScenePreset,
};
use gridless2d::io::{
    read_json, write_json, DataFile, MaskFile, RecoveryFile, SceneFile,
};
use gridless2d::multilevel_toeplitz::assemble;
use gridless2d::sdp_rwtm::{anm_solve, rwtm_solve, SolverConfig, WeightInit};
use gridless2d::signal_model::{
    apply_mask, random_mask, synthesize, vectorize, ScattererSet, SceneDims,
};
use gridless2d::vandermonde_mapp::{estimate_rank, mapp_decompose, recover_amplitudes};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "gridless2d", version, about = "Gridless recovery of sparse 2D scattering points from incomplete harmonic measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the full data grid from a scene file or a named preset.
    Synth(SynthArgs),
    /// Draw a random observation mask.
    Mask(MaskArgs),
    /// Complete masked data and extract scatterers.
    Recover(RecoverArgs),
    /// Extract scatterers from a recovery result file.
    Decompose(DecomposeArgs),
    /// Run a benchmark sweep described by a scenario config file.
    Bench(BenchArgs),
    /// Reproduce the weighting, proximity, and MSE-sweep experiments.
    ReproPaper(ReproArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Scene JSON file (dims, scatterers, optional radar parameters).
    #[arg(long, conflicts_with = "preset")]
    scene: Option<PathBuf>,
    /// Named preset scene: airbus18 or airbus19close.
    #[arg(long)]
    preset: Option<String>,
    /// Amplitude phase seed for preset scenes.
    #[arg(long, default_value_t = 7)]
    amp_seed: u64,
    /// Grid size as N,M (overrides the scene file; required with --preset).
    #[arg(long, value_parser = parse_dims)]
    dims: Option<SceneDims>,
    /// Output data file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the effective scene to this path.
    #[arg(long)]
    scene_out: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long, value_parser = parse_dims)]
    dims: SceneDims,
    /// Number of observed samples.
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    /// Full data grid (only masked entries are read).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "rwtm")]
    method: Method,
    /// Solver config JSON (keys mirror SolverConfig; missing keys default).
    #[arg(long)]
    config: Option<PathBuf>,
    /// identity | center:SIZE | random:SEED (overrides the config file).
    #[arg(long, value_parser = parse_weight_init)]
    weight_init: Option<WeightInit>,
    /// Pin the model order; default estimates it from the eigenvalues.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Write per-iteration residuals as CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Recovery result file from `recover`.
    #[arg(long)]
    result: PathBuf,
    /// Pin the model order; default estimates it from the eigenvalues.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario config JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReproArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Amplitude phase seed for the preset scenes.
    #[arg(long, default_value_t = 7)]
    amp_seed: u64,
    /// Mask seed for the single-mask experiments.
    #[arg(long, default_value_t = 0)]
    mask_seed: u64,
    /// Observed samples for the single-mask experiments.
    #[arg(long, default_value_t = 90)]
    samples: usize,
    /// Sample counts of the MSE sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![60usize, 80, 100, 120])]
    fig6_counts: Vec<usize>,
    /// Number of sweep seeds (0..n).
    #[arg(long, default_value_t = 10)]
    fig6_seeds: u64,
}

fn parse_dims(s: &str) -> Result<SceneDims, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected N,M".into());
    }
    let n: usize = parts[0].trim().parse().map_err(|e| format!("bad N: {e}"))?;
    let m: usize = parts[1].trim().parse().map_err(|e| format!("bad M: {e}"))?;
    SceneDims::new(n, m).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "anm" => Ok(Method::Anm),
        "rwtm" => Ok(Method::Rwtm),
        other => Err(format!("unknown method '{other}', expected anm or rwtm")),
    }
}

fn parse_weight_init(s: &str) -> Result<WeightInit, String> {
    if s == "identity" {
        return Ok(WeightInit::Identity);
    }
    if let Some(size) = s.strip_prefix("center:") {
        let size: usize = size.parse().map_err(|e| format!("bad center size: {e}"))?;
        return Ok(WeightInit::CenterOnes(size));
    }
    if let Some(seed) = s.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|e| format!("bad random seed: {e}"))?;
        return Ok(WeightInit::Random(seed));
    }
    Err(format!(
        "unknown weight init '{s}', expected identity, center:SIZE or random:SEED"
    ))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GRIDLESS2D_LOG")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Mask(args) => cmd_mask(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Bench(args) => cmd_bench(args),
        Command::ReproPaper(args) => cmd_repro_paper(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_preset(name: &str, amp_seed: u64) -> Result<ScattererSet, gridless2d::Error> {
    match name {
        "airbus18" => Ok(preset_airbus18(amp_seed)),
        "airbus19close" => Ok(preset_airbus19close(amp_seed)),
        other => Err(gridless2d::Error::InvalidArgument(format!(
            "unknown preset '{other}', expected airbus18 or airbus19close"
        ))),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<u8, gridless2d::Error> {
    let (scene, dims) = match (&args.scene, &args.preset) {
        (Some(path), None) => {
            let file: SceneFile = read_json(path)?;
            let (scene, file_dims) = file.to_scene()?;
            (scene, args.dims.unwrap_or(file_dims))
        }
        (None, Some(name)) => {
            let scene = load_preset(name, args.amp_seed)?;
            let dims = args.dims.ok_or_else(|| {
                gridless2d::Error::InvalidArgument("--dims is required with --preset".into())
            })?;
            (scene, dims)
        }
        _ => {
            return Err(gridless2d::Error::InvalidArgument(
                "exactly one of --scene or --preset is required".into(),
            ))
        }
    };
    let data = synthesize(&scene, dims);
    write_json(&args.out, &DataFile::from_matrix(&data))?;
    if let Some(path) = &args.scene_out {
        write_json(path, &SceneFile::from_scene(&scene, dims, None))?;
    }
    println!(
        "synthesized {}x{} grid from {} scatterers -> {}",
        dims.n(),
        dims.m(),
        scene.k(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_mask(args: MaskArgs) -> Result<u8, gridless2d::Error> {
    let mask = random_mask(args.dims, args.samples, args.seed)?;
    write_json(&args.out, &MaskFile::from_mask(&mask))?;
    println!(
        "mask with {} of {} samples (seed {}) -> {}",
        mask.len(),
        args.dims.nm(),
        args.seed,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn load_solver_config(
    path: &Option<PathBuf>,
    weight_init: Option<WeightInit>,
) -> Result<SolverConfig, gridless2d::Error> {
    let mut cfg: SolverConfig = match path {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    if let Some(w) = weight_init {
        cfg.weight_init = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_recover(args: RecoverArgs) -> Result<u8, gridless2d::Error> {
    let data: DataFile = read_json(&args.data)?;
    let data = data.to_matrix()?;
    let mask: MaskFile = read_json(&args.mask)?;
    let mask = mask.to_mask()?;
    let cfg = load_solver_config(&args.config, args.weight_init)?;
    let obs = apply_mask(&data, &mask)?;

    let result = match args.method {
        Method::Anm => anm_solve(&obs, &mask, &cfg)?,
        Method::Rwtm => rwtm_solve(&obs, &mask, &cfg)?,
    };
    let k = match args.rank {
        Some(k) => k,
        None => estimate_rank(assemble(&result.u_hat).as_ref(), 1e-6)?,
    };
    let decomposition = mapp_decompose(&result.u_hat, k)?;
    let amplitudes = recover_amplitudes(&result.s_hat, &decomposition.freqs)?;

    let file = RecoveryFile::new(&result).with_points(&decomposition, &amplitudes.amps);
    write_json(&args.out, &file)?;
    if let Some(path) = &args.diagnostics {
        std::fs::write(path, result.diagnostics.to_csv()).map_err(|source| {
            gridless2d::Error::Io {
                path: path.display().to_string(),
                source,
            }
        })?;
    }

    let mse = data_mse(&data, &result.s_hat)?;
    println!(
        "{} on {} of {} samples: converged={} outer={} inner={:?}",
        args.method,
        mask.len(),
        mask.dims().nm(),
        result.converged,
        result.outer_iterations,
        result.inner_iterations
    );
    println!(
        "residuals: primal {:.3e} dual {:.3e}; observed-data mse {mse:.3e}",
        result.final_primal, result.final_dual
    );
    println!(
        "extracted {} points (rank {}), decomposition residual {:.3e}",
        decomposition.freqs.len(),
        k,
        decomposition.residual
    );
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct PointsOut {
    points: Vec<gridless2d::io::RecoveredPointJson>,
    residual: f64,
    ill_conditioned: bool,
    clamped_powers: usize,
}

fn cmd_decompose(args: DecomposeArgs) -> Result<u8, gridless2d::Error> {
    let file: RecoveryFile = read_json(&args.result)?;
    let u = file.u_hat.to_coeffs()?;
    let s_hat = file.s_hat_vector()?;
    let k = match args.rank {
        Some(k) => k,
        None => estimate_rank(assemble(&u).as_ref(), 1e-6)?,
    };
    let decomposition = mapp_decompose(&u, k)?;
    let amplitudes = recover_amplitudes(&s_hat, &decomposition.freqs)?;
    let out = PointsOut {
        points: decomposition
            .freqs
            .iter()
            .zip(&decomposition.powers)
            .zip(&amplitudes.amps)
            .map(|((&(fx, fy), &power), amp)| gridless2d::io::RecoveredPointJson {
                fx,
                fy,
                power,
                amp_re: amp.re,
                amp_im: amp.im,
            })
            .collect(),
        residual: decomposition.residual,
        ill_conditioned: decomposition.ill_conditioned || amplitudes.ill_conditioned,
        clamped_powers: decomposition.clamped_powers,
    };
    write_json(&args.out, &out)?;
    println!(
        "decomposed rank {k}: residual {:.3e} -> {}",
        decomposition.residual,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, gridless2d::Error> {
    let cfg: ScenarioConfig = read_json(&args.config)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|source| gridless2d::Error::Io {
        path: args.out_dir.display().to_string(),
        source,
    })?;
    let report = run_scenario(&cfg)?;
    let csv_path = args.out_dir.join("report.csv");
    std::fs::write(&csv_path, report.to_csv()).map_err(|source| gridless2d::Error::Io {
        path: csv_path.display().to_string(),
        source,
    })?;
    write_json(args.out_dir.join("report.json"), &report)?;
    let failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} rows -> {} ({} failures)",
        report.rows.len(),
        args.out_dir.display(),
        failures
    );
    Ok(if failures == 0 { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct ReproManifest {
    dims: [usize; 2],
    amp_seed: u64,
    mask_seed: u64,
    samples: usize,
    solver: SolverConfig,
    fig6_counts: Vec<usize>,
    fig6_seeds: Vec<u64>,
    outputs: Vec<String>,
    runs: Vec<ReproRun>,
    failures: usize,
}

#[derive(Serialize)]
struct ReproRun {
    name: String,
    converged: bool,
    max_pair_error: Option<f64>,
    data_mse: Option<f64>,
    error: Option<String>,
}

fn write_point_csv(
    path: &Path,
    header_extra: Option<&str>,
    truth: &[(f64, f64)],
    run: &gridless2d::bench_metrics::ScoredRun,
) -> Result<(), gridless2d::Error> {
    let matching = match_frequencies(truth, &run.decomposition.freqs);
    let mut csv = String::new();
    let prefix = header_extra.map(|s| format!("{s},")).unwrap_or_default();
    csv.push_str(&format!(
        "{}point,true_fx,true_fy,rec_fx,rec_fy,rec_power,pair_error\n",
        if header_extra.is_some() { "scene," } else { "" }
    ));
    let _ = &prefix;
    for p in &matching.pairs {
        let (tfx, tfy) = truth[p.truth_index];
        let (rfx, rfy) = run.decomposition.freqs[p.est_index];
        let power = run.decomposition.powers[p.est_index];
        csv.push_str(&format!(
            "{}{},{},{},{},{},{},{}\n",
            header_extra.map(|s| format!("{s},")).unwrap_or_default(),
            p.truth_index,
            tfx,
            tfy,
            rfx,
            rfy,
            power,
            p.error
        ));
    }
    std::fs::write(path, csv).map_err(|source| gridless2d::Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_repro_paper(args: ReproArgs) -> Result<u8, gridless2d::Error> {
    std::fs::create_dir_all(&args.out_dir).map_err(|source| gridless2d::Error::Io {
        path: args.out_dir.display().to_string(),
        source,
    })?;
    let dims = SceneDims::new(14, 14)?;
    let solver = gridless2d::bench_metrics::repro_solver_config();
    let scene18 = preset_airbus18(args.amp_seed);
    let scene19 = preset_airbus19close(args.amp_seed);
    let truth18 = scene18.freqs();
    let truth19 = scene19.freqs();
    let mut runs: Vec<ReproRun> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();

    // Weighting-matrix experiments: identity, center ones, random.
    let weight_cases = [
        ("fig3a", WeightInit::Identity),
        ("fig3b", WeightInit::CenterOnes(128)),
        ("fig3c", WeightInit::Random(1)),
    ];
    for (name, init) in weight_cases {
        let cfg = SolverConfig {
            weight_init: init,
            ..solver.clone()
        };
        let outcome = run_single(
            &scene18,
            dims,
            Method::Rwtm,
            args.samples,
            args.mask_seed,
            RankPolicy::FromScene,
            &cfg,
        );
        match outcome {
            Ok(run) => {
                let path = args.out_dir.join(format!("{name}.csv"));
                write_point_csv(&path, None, &truth18, &run)?;
                outputs.push(format!("{name}.csv"));
                runs.push(ReproRun {
                    name: name.into(),
                    converged: run.result.converged,
                    max_pair_error: Some(run.max_pair_error),
                    data_mse: Some(run.data_mse),
                    error: None,
                });
            }
            Err(e) => runs.push(ReproRun {
                name: name.into(),
                converged: false,
                max_pair_error: None,
                data_mse: None,
                error: Some(e.to_string()),
            }),
        }
    }

    // Proximity experiment: the separated 18-point scene against the
    // 19-point scene whose closest pair sits below the resolvability limit.
    {
        let mut csv = String::from("scene,point,true_fx,true_fy,rec_fx,rec_fy,rec_power,pair_error\n");
        for (label, scene, truth) in [
            ("airbus18", &scene18, &truth18),
            ("airbus19close", &scene19, &truth19),
        ] {
            let outcome = run_single(
                scene,
                dims,
                Method::Rwtm,
                args.samples,
                args.mask_seed,
                RankPolicy::FromScene,
                &solver,
            );
            match outcome {
                Ok(run) => {
                    let matching = match_frequencies(truth, &run.decomposition.freqs);
                    for p in &matching.pairs {
                        let (tfx, tfy) = truth[p.truth_index];
                        let (rfx, rfy) = run.decomposition.freqs[p.est_index];
                        csv.push_str(&format!(
                            "{label},{},{},{},{},{},{},{}\n",
                            p.truth_index,
                            tfx,
                            tfy,
                            rfx,
                            rfy,
                            run.decomposition.powers[p.est_index],
                            p.error
                        ));
                    }
                    runs.push(ReproRun {
                        name: format!("fig4_5/{label}"),
                        converged: run.result.converged,
                        max_pair_error: Some(run.max_pair_error),
                        data_mse: Some(run.data_mse),
                        error: None,
                    });
                }
                Err(e) => runs.push(ReproRun {
                    name: format!("fig4_5/{label}"),
                    converged: false,
                    max_pair_error: None,
                    data_mse: None,
                    error: Some(e.to_string()),
                }),
            }
        }
        let path = args.out_dir.join("fig4_5.csv");
        std::fs::write(&path, csv).map_err(|source| gridless2d::Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        outputs.push("fig4_5.csv".into());
    }

    // MSE sweep over sample counts, both methods.
    let fig6_seeds: Vec<u64> = (0..args.fig6_seeds).collect();
    let sweep = ScenarioConfig {
        scene: ScenePreset::Airbus18,
        dims,
        sample_counts: args.fig6_counts.clone(),
        seeds: fig6_seeds.clone(),
        methods: vec![Method::Anm, Method::Rwtm],
        amp_seed: args.amp_seed,
        rank_policy: RankPolicy::FromScene,
        solver: solver.clone(),
    };
    let report = run_scenario(&sweep)?;
    let mut fig6 = String::from("method,sample_count,seed,data_mse,freq_mse,converged\n");
    for r in &report.rows {
        fig6.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            r.sample_count,
            r.seed,
            r.data_mse.map(|v| format!("{v:e}")).unwrap_or_default(),
            r.freq_mse.map(|v| format!("{v:e}")).unwrap_or_default(),
            r.converged
        ));
    }
    let fig6_path = args.out_dir.join("fig6.csv");
    std::fs::write(&fig6_path, fig6).map_err(|source| gridless2d::Error::Io {
        path: fig6_path.display().to_string(),
        source,
    })?;
    outputs.push("fig6.csv".into());
    let sweep_failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        runs.push(ReproRun {
            name: format!("fig6/{}/{}/{}", r.method, r.sample_count, r.seed),
            converged: false,
            max_pair_error: None,
            data_mse: None,
            error: r.error.clone(),
        });
    }

    let failures = runs.iter().filter(|r| r.error.is_some()).count();
    let manifest = ReproManifest {
        dims: [dims.n(), dims.m()],
        amp_seed: args.amp_seed,
        mask_seed: args.mask_seed,
        samples: args.samples,
        solver,
        fig6_counts: args.fig6_counts,
        fig6_seeds,
        outputs,
        runs,
        failures,
    };
    write_json(args.out_dir.join("manifest.json"), &manifest)?;
    println!(
        "wrote {} outputs to {} ({} failures)",
        manifest.outputs.len() + 1,
        args.out_dir.display(),
        failures
    );
    Ok(if failures == 0 && sweep_failures == 0 {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}
