//! JSON file formats for scenes, masks, data grids, generating
//! coefficients, and recovery results.
//!
//! Complex numbers are serialized as `[re, im]` arrays throughout, so the
//! formats stay language-neutral. All readers reject structural mismatches
//! with the offending file path in the error.

use crate::multilevel_toeplitz::{CoeffGrid, ToeplitzCoeffs};
use crate::sdp_rwtm::RecoveryResult;
use crate::signal_model::{
    DataMatrix, DataVector, ObservationMask, RadarParams, Scatterer, ScattererSet, SceneDims,
};
use crate::vandermonde_mapp::DecompositionResult;
use crate::{c64, Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DimsJson {
    n: usize,
    m: usize,
}

impl DimsJson {
    fn to_dims(&self) -> Result<SceneDims> {
        SceneDims::new(self.n, self.m)
    }

    fn of(dims: SceneDims) -> Self {
        Self {
            n: dims.n(),
            m: dims.m(),
        }
    }
}

/// Scene file: dimensions, scatterers, optional radar parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub dims: DimsJsonPublic,
    pub scatterers: Vec<ScattererJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radar: Option<RadarParams>,
}

/// Public mirror of the dims object (`{"n": .., "m": ..}`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DimsJsonPublic {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScattererJson {
    pub fx: f64,
    pub fy: f64,
    pub amp_re: f64,
    pub amp_im: f64,
}

impl SceneFile {
    pub fn from_scene(scene: &ScattererSet, dims: SceneDims, radar: Option<RadarParams>) -> Self {
        Self {
            dims: DimsJsonPublic {
                n: dims.n(),
                m: dims.m(),
            },
            scatterers: scene
                .points()
                .iter()
                .map(|p| ScattererJson {
                    fx: p.fx(),
                    fy: p.fy(),
                    amp_re: p.amp().re,
                    amp_im: p.amp().im,
                })
                .collect(),
            radar,
        }
    }

    pub fn to_scene(&self) -> Result<(ScattererSet, SceneDims)> {
        let dims = SceneDims::new(self.dims.n, self.dims.m)?;
        let pts = self
            .scatterers
            .iter()
            .map(|s| Scatterer::new(s.fx, s.fy, c64::new(s.amp_re, s.amp_im)))
            .collect::<Result<Vec<_>>>()?;
        Ok((ScattererSet::new(pts)?, dims))
    }
}

/// Mask file: dimensions plus a list of `[n, m]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskFile {
    dims: DimsJson,
    observed: Vec<[usize; 2]>,
}

impl MaskFile {
    pub fn from_mask(mask: &ObservationMask) -> Self {
        Self {
            dims: DimsJson::of(mask.dims()),
            observed: mask.pairs().iter().map(|&(n, m)| [n, m]).collect(),
        }
    }

    pub fn to_mask(&self) -> Result<ObservationMask> {
        ObservationMask::new(
            self.dims.to_dims()?,
            self.observed.iter().map(|&[n, m]| (n, m)).collect(),
        )
    }
}

/// Data file: the full complex grid, rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataFile {
    dims: DimsJson,
    rows: Vec<Vec<[f64; 2]>>,
}

impl DataFile {
    pub fn from_matrix(s: &DataMatrix) -> Self {
        let dims = s.dims();
        Self {
            dims: DimsJson::of(dims),
            rows: (0..dims.n())
                .map(|n| {
                    (0..dims.m())
                        .map(|m| {
                            let z = s.get(n, m);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DataMatrix> {
        let dims = self.dims.to_dims()?;
        if self.rows.len() != dims.n() || self.rows.iter().any(|r| r.len() != dims.m()) {
            return Err(Error::Format(format!(
                "data rows do not form a {}x{} grid",
                dims.n(),
                dims.m()
            )));
        }
        let entries = self
            .rows
            .iter()
            .flat_map(|row| row.iter().map(|&[re, im]| c64::new(re, im)))
            .collect();
        DataMatrix::from_entries(dims, entries)
    }
}

/// Generating-coefficient file: the `(2N-1)×(2M-1)` array, rows of
/// `[re, im]` pairs indexed `p = -(N-1)..N-1`, `q = -(M-1)..M-1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffsFile {
    dims: DimsJson,
    rows: Vec<Vec<[f64; 2]>>,
}

impl CoeffsFile {
    pub fn from_coeffs(u: &ToeplitzCoeffs) -> Self {
        let dims = u.dims();
        let grid = u.grid();
        Self {
            dims: DimsJson::of(dims),
            rows: grid
                .p_range()
                .map(|p| {
                    grid.q_range()
                        .map(|q| {
                            let z = grid.get(p, q);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_coeffs(&self) -> Result<ToeplitzCoeffs> {
        let dims = self.dims.to_dims()?;
        let (pn, qn) = (2 * dims.n() - 1, 2 * dims.m() - 1);
        if self.rows.len() != pn || self.rows.iter().any(|r| r.len() != qn) {
            return Err(Error::Format(format!(
                "coefficient rows do not form a {pn}x{qn} array"
            )));
        }
        let mut grid = CoeffGrid::zeros(dims);
        for (pi, row) in self.rows.iter().enumerate() {
            for (qi, &[re, im]) in row.iter().enumerate() {
                let p = pi as i64 - (dims.n() as i64 - 1);
                let q = qi as i64 - (dims.m() as i64 - 1);
                grid.set(p, q, c64::new(re, im));
            }
        }
        ToeplitzCoeffs::new(grid)
    }
}

/// Recovery result file: completed vector, coefficients, diagnostics, and
/// the extracted scatterers when decomposition ran.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryFile {
    pub dims: DimsJsonPublic,
    pub t_hat: f64,
    /// Completed data vector, index `k = n·M + m`, entries `[re, im]`.
    pub s_hat: Vec<[f64; 2]>,
    pub u_hat: CoeffsFile,
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub final_primal: f64,
    pub final_dual: f64,
    pub outer_objectives: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<RecoveredPointJson>>,
}

/// Extracted scatterer: frequency pair, power, complex amplitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecoveredPointJson {
    pub fx: f64,
    pub fy: f64,
    pub power: f64,
    pub amp_re: f64,
    pub amp_im: f64,
}

impl RecoveryFile {
    pub fn new(result: &RecoveryResult) -> Self {
        let dims = result.s_hat.dims();
        Self {
            dims: DimsJsonPublic {
                n: dims.n(),
                m: dims.m(),
            },
            t_hat: result.t_hat,
            s_hat: result.s_hat.entries().iter().map(|z| [z.re, z.im]).collect(),
            u_hat: CoeffsFile::from_coeffs(&result.u_hat),
            converged: result.converged,
            outer_iterations: result.outer_iterations,
            inner_iterations: result.inner_iterations.clone(),
            final_primal: result.final_primal,
            final_dual: result.final_dual,
            outer_objectives: result.outer_objectives.clone(),
            points: None,
        }
    }

    pub fn with_points(mut self, decomposition: &DecompositionResult, amps: &[c64]) -> Self {
        self.points = Some(
            decomposition
                .freqs
                .iter()
                .zip(&decomposition.powers)
                .enumerate()
                .map(|(i, (&(fx, fy), &power))| RecoveredPointJson {
                    fx,
                    fy,
                    power,
                    amp_re: amps.get(i).map(|a| a.re).unwrap_or(0.0),
                    amp_im: amps.get(i).map(|a| a.im).unwrap_or(0.0),
                })
                .collect(),
        );
        self
    }

    pub fn s_hat_vector(&self) -> Result<DataVector> {
        let dims = SceneDims::new(self.dims.n, self.dims.m)?;
        DataVector::from_entries(
            dims,
            self.s_hat.iter().map(|&[re, im]| c64::new(re, im)).collect(),
        )
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads any of the JSON file types.
pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a value as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{random_mask, synthesize};

    #[test]
    fn scene_file_round_trips() {
        let dims = SceneDims::new(4, 6).unwrap();
        let scene = crate::bench_metrics::preset_airbus18(7);
        let radar = RadarParams::new(9e9, 1e6, 1e-4, 3e8, 1e4).unwrap();
        let file = SceneFile::from_scene(&scene, dims, Some(radar));
        let text = serde_json::to_string(&file).unwrap();
        let parsed: SceneFile = serde_json::from_str(&text).unwrap();
        let (scene2, dims2) = parsed.to_scene().unwrap();
        assert_eq!(scene, scene2);
        assert_eq!(dims, dims2);
        assert_eq!(parsed.radar, Some(radar));
    }

    #[test]
    fn mask_and_data_files_round_trip() {
        let dims = SceneDims::new(5, 7).unwrap();
        let mask = random_mask(dims, 13, 3).unwrap();
        let m2 = MaskFile::from_mask(&mask).to_mask().unwrap();
        assert_eq!(mask, m2);

        let scene = crate::bench_metrics::preset_airbus18(1);
        let s = synthesize(&scene, dims);
        let text = serde_json::to_string(&DataFile::from_matrix(&s)).unwrap();
        let parsed: DataFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_matrix().unwrap(), s);
    }

    #[test]
    fn coeffs_file_round_trips() {
        let dims = SceneDims::new(3, 4).unwrap();
        let scene = ScattererSet::new(vec![
            Scatterer::new(0.2, 0.7, c64::new(1.5, 0.0)).unwrap(),
        ])
        .unwrap();
        let u = crate::multilevel_toeplitz::coeffs_from_scene(&scene, dims).unwrap();
        let text = serde_json::to_string(&CoeffsFile::from_coeffs(&u)).unwrap();
        let parsed: CoeffsFile = serde_json::from_str(&text).unwrap();
        let u2 = parsed.to_coeffs().unwrap();
        assert_eq!(u.grid().values(), u2.grid().values());
    }

    #[test]
    fn write_and_read_files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.json");
        let dims = SceneDims::new(4, 4).unwrap();
        let mask = random_mask(dims, 7, 11).unwrap();
        write_json(&path, &MaskFile::from_mask(&mask)).unwrap();
        let parsed: MaskFile = read_json(&path).unwrap();
        assert_eq!(parsed.to_mask().unwrap(), mask);

        let missing: Result<MaskFile> = read_json(dir.path().join("absent.json"));
        assert!(matches!(missing, Err(Error::Io { .. })));

        std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
        let broken: Result<MaskFile> = read_json(dir.path().join("broken.json"));
        assert!(matches!(broken, Err(Error::Json { .. })));
    }
}
