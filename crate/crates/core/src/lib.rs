//! Gridless recovery of sparse 2D scattering points from incomplete harmonic
//! measurements.
//!
//! A scene of point scatterers, each a complex amplitude at a continuous 2D
//! frequency, is observed on an `N×M` grid of complex samples from which an
//! arbitrary subset may be missing. This crate completes the missing samples
//! and retrieves the scatterers without any frequency grid:
//!
//! 1. [`signal_model`] — scenes, 2D complex-exponential atoms, synthesis,
//!    vectorization, and observation masks.
//! 2. [`multilevel_toeplitz`] — 2-level Toeplitz (2LT) matrices through their
//!    generating coefficients: assembly, adjoint, projection, weighted traces.
//! 3. [`sdp_rwtm`] — an ADMM solver for the trace-minimization semidefinite
//!    program over 2LT matrices, plus the reweighted iteration that sharpens
//!    it toward a rank-minimal solution.
//! 4. [`vandermonde_mapp`] — matrix-pencil extraction of paired 2D frequencies
//!    and powers from the recovered 2LT matrix, and amplitude recovery.
//! 5. [`bench_metrics`] — scoring (cyclic frequency matching, MSE metrics,
//!    separation checks) and deterministic benchmark sweeps.
//! 6. [`io`] — JSON file formats for scenes, masks, data, and results.
//!
//! All numeric entry points are deterministic: decompositions run
//! sequentially and randomness only enters through explicit seeds.

pub mod bench_metrics;
mod hungarian;
pub mod io;
pub(crate) mod linalg;
pub mod multilevel_toeplitz;
pub mod sdp_rwtm;
pub mod signal_model;
pub mod vandermonde_mapp;

/// Complex scalar used throughout (`num_complex::Complex<f64>`).
pub use faer::c64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generating coefficients violate Hermitian symmetry: {0}")]
    CoeffSymmetry(String),
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("weight matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("scene amplitudes must be real positive powers: {0}")]
    NonRealPower(String),
    #[error("pencil rank {k} exceeds row budget {budget}")]
    PencilBudget { k: usize, budget: usize },
    #[error("eigendecomposition did not converge")]
    EigenFailed,
    #[error("singular value decomposition did not converge")]
    SvdFailed,
    #[error("linear system is numerically singular")]
    SingularSystem,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("file format: {0}")]
    Format(String),
}
