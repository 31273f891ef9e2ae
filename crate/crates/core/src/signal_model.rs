//! Scatterer scenes, 2D complex-exponential atoms, synthesis, vectorization,
//! and masked observation.
//!
//! A scatterer is a complex amplitude at a normalized 2D frequency
//! `(fx, fy) ∈ [0,1)²`. The full measurement on an `N×M` grid is
//! `S(n,m) = Σ_k amp_k · exp(j2π(fx_k·n + fy_k·m))`, observed only on a
//! subset `Ω` of index pairs. Atoms carry no normalization prefactor and a
//! positive exponent sign; every module in the crate shares this convention.

use crate::{c64, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Reduces a frequency to the canonical cyclic domain `[0, 1)`.
pub fn wrap_unit(f: f64) -> f64 {
    let r = f.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point scatterer: a complex amplitude at a normalized 2D frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    fx: f64,
    fy: f64,
    amp: c64,
}

impl Scatterer {
    /// Builds a scatterer, reducing both frequencies mod 1.
    ///
    /// Rejects non-finite frequencies and zero or non-finite amplitudes.
    pub fn new(fx: f64, fy: f64, amp: c64) -> Result<Self> {
        if !fx.is_finite() || !fy.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite frequency ({fx}, {fy})"
            )));
        }
        if !amp.re.is_finite() || !amp.im.is_finite() || amp.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be finite and nonzero, got {amp}"
            )));
        }
        Ok(Self {
            fx: wrap_unit(fx),
            fy: wrap_unit(fy),
            amp,
        })
    }

    /// Frequency in the first (range) direction, in `[0, 1)`.
    pub fn fx(&self) -> f64 {
        self.fx
    }

    /// Frequency in the second (cross-range) direction, in `[0, 1)`.
    pub fn fy(&self) -> f64 {
        self.fy
    }

    /// Complex amplitude.
    pub fn amp(&self) -> c64 {
        self.amp
    }
}

/// An ordered, nonempty collection of scatterers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererSet {
    points: Vec<Scatterer>,
}

impl ScattererSet {
    pub fn new(points: Vec<Scatterer>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("scene must contain at least one scatterer".into()));
        }
        Ok(Self { points })
    }

    /// Builds a scene from parallel frequency lists and unit-modulus
    /// amplitudes with seeded uniform random phases.
    pub fn from_freqs_unit_random_phase(fx: &[f64], fy: &[f64], seed: u64) -> Result<Self> {
        if fx.len() != fy.len() {
            return Err(Error::DimMismatch(format!(
                "frequency lists have lengths {} and {}",
                fx.len(),
                fy.len()
            )));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let points = fx
            .iter()
            .zip(fy)
            .map(|(&x, &y)| {
                let phase: f64 = rand::Rng::random::<f64>(&mut rng) * TWO_PI;
                Scatterer::new(x, y, c64::from_polar(1.0, phase))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    /// Number of scatterers `K`.
    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Scatterer] {
        &self.points
    }

    /// Frequency pairs `(fx, fy)` in scene order.
    pub fn freqs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.fx, p.fy)).collect()
    }
}

/// Grid dimensions: `N` viewing angles by `M` pulses per burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SceneDims {
    n: usize,
    m: usize,
}

impl SceneDims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {n}x{m}"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of grid samples `N·M`.
    pub fn nm(&self) -> usize {
        self.n * self.m
    }

    /// Vector index of grid entry `(n, m)`.
    pub fn vec_index(&self, n: usize, m: usize) -> usize {
        debug_assert!(n < self.n && m < self.m);
        n * self.m + m
    }
}

/// Dense `N×M` complex measurement grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    dims: SceneDims,
    entries: Vec<c64>,
}

impl DataMatrix {
    pub fn from_entries(dims: SceneDims, entries: Vec<c64>) -> Result<Self> {
        if entries.len() != dims.nm() {
            return Err(Error::DimMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                dims.nm(),
                dims.n,
                dims.m,
                entries.len()
            )));
        }
        Ok(Self { dims, entries })
    }

    pub fn zeros(dims: SceneDims) -> Self {
        Self {
            dims,
            entries: vec![c64::new(0.0, 0.0); dims.nm()],
        }
    }

    pub fn dims(&self) -> SceneDims {
        self.dims
    }

    pub fn get(&self, n: usize, m: usize) -> c64 {
        self.entries[self.dims.vec_index(n, m)]
    }

    pub fn entries(&self) -> &[c64] {
        &self.entries
    }
}

/// The measurement grid flattened so that index `k = n·M + m`.
///
/// This is the row-major flattening of [`DataMatrix`], i.e. the
/// column-stacking of the transposed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector {
    dims: SceneDims,
    entries: Vec<c64>,
}

impl DataVector {
    pub fn from_entries(dims: SceneDims, entries: Vec<c64>) -> Result<Self> {
        if entries.len() != dims.nm() {
            return Err(Error::DimMismatch(format!(
                "expected length {} for dims {}x{}, got {}",
                dims.nm(),
                dims.n,
                dims.m,
                entries.len()
            )));
        }
        Ok(Self { dims, entries })
    }

    pub fn dims(&self) -> SceneDims {
        self.dims
    }

    pub fn entries(&self) -> &[c64] {
        &self.entries
    }

    pub fn get(&self, n: usize, m: usize) -> c64 {
        self.entries[self.dims.vec_index(n, m)]
    }

    /// Euclidean norm of the entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The subset `Ω` of observed `(n, m)` index pairs.
///
/// Stored sparsely and sorted; zero-filling the unobserved entries is a
/// display concern, never part of this type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    dims: SceneDims,
    observed: Vec<(usize, usize)>,
}

impl ObservationMask {
    pub fn new(dims: SceneDims, mut observed: Vec<(usize, usize)>) -> Result<Self> {
        if observed.is_empty() || observed.len() > dims.nm() {
            return Err(Error::InvalidArgument(format!(
                "mask must contain between 1 and {} entries, got {}",
                dims.nm(),
                observed.len()
            )));
        }
        for &(n, m) in &observed {
            if n >= dims.n || m >= dims.m {
                return Err(Error::InvalidArgument(format!(
                    "mask entry ({n}, {m}) outside {}x{} grid",
                    dims.n, dims.m
                )));
            }
        }
        observed.sort_unstable();
        let before = observed.len();
        observed.dedup();
        if observed.len() != before {
            return Err(Error::InvalidArgument("mask contains duplicate entries".into()));
        }
        Ok(Self { dims, observed })
    }

    /// Mask observing every grid entry.
    pub fn full(dims: SceneDims) -> Self {
        let observed = (0..dims.n)
            .flat_map(|n| (0..dims.m).map(move |m| (n, m)))
            .collect();
        Self { dims, observed }
    }

    pub fn dims(&self) -> SceneDims {
        self.dims
    }

    /// Number of observed entries `|Ω|`.
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Observed index pairs in sorted order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.observed
    }

    /// Boolean flags over vector indices `k = n·M + m`.
    pub fn vector_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.dims.nm()];
        for &(n, m) in &self.observed {
            flags[self.dims.vec_index(n, m)] = true;
        }
        flags
    }
}

/// Physical radar parameters used only to map scene coordinates to
/// normalized frequencies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadarParams {
    /// Fundamental carrier frequency of a burst, Hz.
    pub f0: f64,
    /// Frequency step between consecutive pulses, Hz.
    pub delta_f: f64,
    /// Viewing-angle step, rad.
    pub delta_theta: f64,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Radar-target reference range, m.
    pub r0: f64,
}

impl RadarParams {
    pub fn new(f0: f64, delta_f: f64, delta_theta: f64, c: f64, r0: f64) -> Result<Self> {
        if !(f0 > 0.0 && delta_f > 0.0 && delta_theta > 0.0 && c > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidArgument(
                "radar parameters f0, delta_f, delta_theta, c must be positive".into(),
            ));
        }
        Ok(Self {
            f0,
            delta_f,
            delta_theta,
            c,
            r0,
        })
    }
}

/// 1D atom: `len` unit-modulus samples of `exp(j2π·f·n)`, `n = 0..len-1`.
pub fn atom_1d(f: f64, len: usize) -> Vec<c64> {
    assert!(len >= 1, "atom length must be at least 1");
    assert!(f.is_finite(), "atom frequency must be finite");
    let f = wrap_unit(f);
    (0..len)
        .map(|n| c64::from_polar(1.0, TWO_PI * f * n as f64))
        .collect()
}

/// 2D atom: the Kronecker product `atom_1d(fx, N) ⊗ atom_1d(fy, M)`.
///
/// Entry `n·M + m` equals `atom_1d(fx, N)[n] · atom_1d(fy, M)[m]`, i.e.
/// `exp(j2π(fx·n + fy·m))` up to roundoff.
pub fn atom_2d(fx: f64, fy: f64, dims: SceneDims) -> DataVector {
    let ax = atom_1d(fx, dims.n());
    let ay = atom_1d(fy, dims.m());
    let mut entries = Vec::with_capacity(dims.nm());
    for x in &ax {
        for y in &ay {
            entries.push(x * y);
        }
    }
    DataVector { dims, entries }
}

/// Synthesizes the full data grid `S(n,m) = Σ_k amp_k·exp(j2π(fx_k·n + fy_k·m))`.
pub fn synthesize(scene: &ScattererSet, dims: SceneDims) -> DataMatrix {
    let mut entries = vec![c64::new(0.0, 0.0); dims.nm()];
    for p in scene.points() {
        let ax = atom_1d(p.fx(), dims.n());
        let ay = atom_1d(p.fy(), dims.m());
        for (n, x) in ax.iter().enumerate() {
            let row = p.amp() * x;
            for (m, y) in ay.iter().enumerate() {
                entries[dims.vec_index(n, m)] += row * y;
            }
        }
    }
    DataMatrix { dims, entries }
}

/// Flattens the grid into the vector with `s[n·M + m] = S(n, m)`.
pub fn vectorize(s: &DataMatrix) -> DataVector {
    DataVector {
        dims: s.dims,
        entries: s.entries.clone(),
    }
}

/// Inverse of [`vectorize`]; errors if `dims` disagree with the vector.
pub fn unvectorize(s: &DataVector, dims: SceneDims) -> Result<DataMatrix> {
    if s.dims != dims {
        return Err(Error::DimMismatch(format!(
            "vector carries dims {}x{}, requested {}x{}",
            s.dims.n, s.dims.m, dims.n, dims.m
        )));
    }
    DataMatrix::from_entries(dims, s.entries.clone())
}

/// Extracts exactly the observed entries, in mask order.
pub fn apply_mask(s: &DataMatrix, mask: &ObservationMask) -> Result<Vec<((usize, usize), c64)>> {
    if s.dims != mask.dims {
        return Err(Error::DimMismatch(format!(
            "data is {}x{} but mask is {}x{}",
            s.dims.n, s.dims.m, mask.dims.n, mask.dims.m
        )));
    }
    Ok(mask
        .observed
        .iter()
        .map(|&(n, m)| ((n, m), s.get(n, m)))
        .collect())
}

/// Draws a uniformly random observation subset of the given size.
///
/// Deterministic for a fixed seed.
pub fn random_mask(dims: SceneDims, count: usize, seed: u64) -> Result<ObservationMask> {
    if count == 0 || count > dims.nm() {
        return Err(Error::InvalidArgument(format!(
            "sample count must be in 1..={}, got {count}",
            dims.nm()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, dims.nm(), count).into_vec();
    picks.sort_unstable();
    let observed = picks.into_iter().map(|k| (k / dims.m, k % dims.m)).collect();
    Ok(ObservationMask { dims, observed })
}

/// Maps physical scene coordinates (meters) to normalized cyclic frequencies.
///
/// Uses the per-index phase increments of the dechirped return:
/// `fx = (2·f0·Δθ/c)·x mod 1` and `fy = (2·Δf/c)·y mod 1`.
pub fn scene_to_frequencies(x: f64, y: f64, params: &RadarParams) -> (f64, f64) {
    let fx = wrap_unit(2.0 * params.f0 * params.delta_theta * x / params.c);
    let fy = wrap_unit(2.0 * params.delta_f * y / params.c);
    (fx, fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn approx(a: c64, b: c64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn atom_1d_zero_frequency_is_all_ones() {
        let a = atom_1d(0.0, 4);
        assert_eq!(a, vec![c64::new(1.0, 0.0); 4]);
    }

    #[test]
    fn atom_1d_nyquist_alternates() {
        let a = atom_1d(0.5, 4);
        for (n, z) in a.iter().enumerate() {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(approx(*z, c64::new(want, 0.0), 1e-15), "entry {n} = {z}");
        }
    }

    #[test]
    fn atom_1d_quarter_cycle() {
        // Direct evaluation of exp(j2π·0.25·n) for n = 0, 1, 2.
        let a = atom_1d(0.25, 3);
        assert!(approx(a[0], c64::new(1.0, 0.0), 1e-15));
        assert!(approx(a[1], c64::new(0.0, 1.0), 1e-15));
        assert!(approx(a[2], c64::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn atom_periodicity_exact_for_representable_shift() {
        // For dyadic f the shift f+1 is exactly representable, so the
        // reduction must give bit-identical atoms.
        for k in 0..16 {
            let f = k as f64 / 16.0;
            assert_eq!(atom_1d(f, 9), atom_1d(f + 1.0, 9), "f = {f}");
        }
    }

    #[test]
    fn atom_2d_matches_kronecker_and_entry_formula() {
        let dims = SceneDims::new(2, 2).unwrap();
        let a = atom_2d(0.0, 0.0, dims);
        assert_eq!(a.entries(), &vec![c64::new(1.0, 0.0); 4][..]);

        let b = atom_2d(0.5, 0.0, dims);
        let want = [1.0, 1.0, -1.0, -1.0];
        for (z, w) in b.entries().iter().zip(want) {
            assert!(approx(*z, c64::new(w, 0.0), 1e-15));
        }

        let c = atom_2d(0.25, 0.5, dims);
        let want = [
            c64::new(1.0, 0.0),
            c64::new(-1.0, 0.0),
            c64::new(0.0, 1.0),
            c64::new(0.0, -1.0),
        ];
        for (z, w) in c.entries().iter().zip(want) {
            assert!(approx(*z, w, 1e-15));
        }
    }

    #[test]
    fn atom_2d_is_exactly_the_product_of_1d_atoms() {
        let dims = SceneDims::new(5, 3).unwrap();
        let (fx, fy) = (0.137, 0.829);
        let a2 = atom_2d(fx, fy, dims);
        let ax = atom_1d(fx, 5);
        let ay = atom_1d(fy, 3);
        for n in 0..5 {
            for m in 0..3 {
                assert_eq!(a2.get(n, m), ax[n] * ay[m]);
            }
        }
    }

    #[test]
    fn synthesize_single_dc_scatterer_is_all_ones() {
        let dims = SceneDims::new(3, 3).unwrap();
        let scene = ScattererSet::new(vec![Scatterer::new(0.0, 0.0, c64::new(1.0, 0.0)).unwrap()])
            .unwrap();
        let s = synthesize(&scene, dims);
        for z in s.entries() {
            assert!(approx(*z, c64::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn synthesize_cancels_opposite_amplitudes() {
        let dims = SceneDims::new(4, 5).unwrap();
        let amp = c64::new(0.3, -1.2);
        let scene = ScattererSet::new(vec![
            Scatterer::new(0.37, 0.61, amp).unwrap(),
            Scatterer::new(0.37, 0.61, -amp).unwrap(),
        ])
        .unwrap();
        let s = synthesize(&scene, dims);
        for z in s.entries() {
            assert!(z.norm() <= 1e-14);
        }
    }

    #[test]
    fn synthesize_matches_per_entry_brute_force_on_paper_scene() {
        let dims = SceneDims::new(14, 14).unwrap();
        let scene = crate::bench_metrics::preset_airbus18(7);
        let s = synthesize(&scene, dims);
        // Independent oracle: direct double loop over entries and points.
        for n in 0..14 {
            for m in 0..14 {
                let mut want = c64::new(0.0, 0.0);
                for p in scene.points() {
                    let phase = TWO_PI * (p.fx() * n as f64 + p.fy() * m as f64);
                    want += p.amp() * c64::new(phase.cos(), phase.sin());
                }
                assert!(
                    approx(s.get(n, m), want, 1e-12 * want.norm().max(1.0)),
                    "entry ({n},{m})"
                );
            }
        }
    }

    #[test]
    fn synthesis_is_linear_in_the_scene() {
        let dims = SceneDims::new(6, 4).unwrap();
        let a = vec![
            Scatterer::new(0.11, 0.83, c64::new(1.5, 0.2)).unwrap(),
            Scatterer::new(0.42, 0.27, c64::new(-0.4, 1.1)).unwrap(),
        ];
        let b = vec![Scatterer::new(0.77, 0.05, c64::new(0.0, -2.0)).unwrap()];
        let sa = synthesize(&ScattererSet::new(a.clone()).unwrap(), dims);
        let sb = synthesize(&ScattererSet::new(b.clone()).unwrap(), dims);
        let mut both = a;
        both.extend(b);
        let sab = synthesize(&ScattererSet::new(both).unwrap(), dims);
        for k in 0..dims.nm() {
            let want = sa.entries()[k] + sb.entries()[k];
            assert!(approx(sab.entries()[k], want, 1e-12));
        }
    }

    #[test]
    fn vectorize_round_trips_bit_exactly() {
        let dims = SceneDims::new(3, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let entries: Vec<c64> = (0..dims.nm())
            .map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let s = DataMatrix::from_entries(dims, entries).unwrap();
        let v = vectorize(&s);
        assert_eq!(v.entries().len(), 15);
        let back = unvectorize(&v, dims).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn vectorize_layout_is_row_major() {
        let dims = SceneDims::new(2, 2).unwrap();
        let s = DataMatrix::from_entries(
            dims,
            vec![
                c64::new(1.0, 0.0),
                c64::new(2.0, 0.0),
                c64::new(3.0, 0.0),
                c64::new(4.0, 0.0),
            ],
        )
        .unwrap();
        let v = vectorize(&s);
        for (k, want) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_eq!(v.entries()[k], c64::new(*want, 0.0));
        }
    }

    #[test]
    fn unvectorize_rejects_mismatched_dims() {
        let dims = SceneDims::new(3, 5).unwrap();
        let v = DataVector::from_entries(dims, vec![c64::new(0.0, 0.0); 15]).unwrap();
        let err = unvectorize(&v, SceneDims::new(5, 3).unwrap());
        assert!(matches!(err, Err(Error::DimMismatch(_))));
    }

    #[test]
    fn apply_mask_full_returns_everything() {
        let dims = SceneDims::new(3, 4).unwrap();
        let scene =
            ScattererSet::new(vec![Scatterer::new(0.2, 0.9, c64::new(1.0, 1.0)).unwrap()]).unwrap();
        let s = synthesize(&scene, dims);
        let got = apply_mask(&s, &ObservationMask::full(dims)).unwrap();
        assert_eq!(got.len(), 12);
        for ((n, m), z) in got {
            assert_eq!(z, s.get(n, m));
        }
    }

    #[test]
    fn apply_mask_matches_paper_incomplete_grid() {
        // 6 angles x 8 pulses, observing angles {0,2,4} and pulses {0,2,6}:
        // exactly the nine entries S00 S02 S06 S20 S22 S26 S40 S42 S46 survive.
        let dims = SceneDims::new(6, 8).unwrap();
        let scene =
            ScattererSet::new(vec![Scatterer::new(0.13, 0.71, c64::new(0.5, -0.5)).unwrap()])
                .unwrap();
        let s = synthesize(&scene, dims);
        let pairs: Vec<(usize, usize)> = [0usize, 2, 4]
            .iter()
            .flat_map(|&n| [0usize, 2, 6].iter().map(move |&m| (n, m)))
            .collect();
        let mask = ObservationMask::new(dims, pairs.clone()).unwrap();
        let got = apply_mask(&s, &mask).unwrap();
        assert_eq!(got.len(), 9);
        let got_idx: Vec<(usize, usize)> = got.iter().map(|&(i, _)| i).collect();
        assert_eq!(got_idx, pairs);
        for ((n, m), z) in got {
            assert_eq!(z, s.get(n, m));
        }
    }

    #[test]
    fn apply_mask_single_entry() {
        let dims = SceneDims::new(3, 3).unwrap();
        let scene =
            ScattererSet::new(vec![Scatterer::new(0.4, 0.6, c64::new(2.0, 0.0)).unwrap()]).unwrap();
        let s = synthesize(&scene, dims);
        let mask = ObservationMask::new(dims, vec![(2, 1)]).unwrap();
        let got = apply_mask(&s, &mask).unwrap();
        assert_eq!(got, vec![((2, 1), s.get(2, 1))]);
    }

    #[test]
    fn random_mask_full_count_is_full_grid() {
        let dims = SceneDims::new(14, 14).unwrap();
        let mask = random_mask(dims, 196, 3).unwrap();
        assert_eq!(mask, ObservationMask::full(dims));
    }

    #[test]
    fn random_mask_is_deterministic_per_seed() {
        let dims = SceneDims::new(14, 14).unwrap();
        let a = random_mask(dims, 90, 12345).unwrap();
        let b = random_mask(dims, 90, 12345).unwrap();
        assert_eq!(a, b);
        let c = random_mask(dims, 90, 12346).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_mask_rejects_bad_counts() {
        let dims = SceneDims::new(4, 4).unwrap();
        assert!(random_mask(dims, 0, 0).is_err());
        assert!(random_mask(dims, 17, 0).is_err());
    }

    #[test]
    fn random_mask_inclusion_frequency_is_uniform() {
        // Empirical per-entry inclusion rate over 1000 seeds stays within
        // 3σ binomial bounds of 90/196.
        let dims = SceneDims::new(14, 14).unwrap();
        let trials = 1000usize;
        let mut counts = vec![0usize; dims.nm()];
        for seed in 0..trials as u64 {
            let mask = random_mask(dims, 90, seed).unwrap();
            for &(n, m) in mask.pairs() {
                counts[dims.vec_index(n, m)] += 1;
            }
        }
        let p = 90.0 / 196.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (k, &c) in counts.iter().enumerate() {
            let freq = c as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "entry {k}: frequency {freq:.4} outside {p:.4} ± {:.4}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn scene_to_frequencies_trivial_cases() {
        let params = RadarParams::new(9e9, 1e6, 1e-4, 3e8, 1e4).unwrap();
        assert_eq!(scene_to_frequencies(0.0, 0.0, &params), (0.0, 0.0));
        // Shifting x by the aliasing period leaves fx unchanged.
        let period = params.c / (2.0 * params.f0 * params.delta_theta);
        let (fx1, _) = scene_to_frequencies(1.7, 2.3, &params);
        let (fx2, _) = scene_to_frequencies(1.7 + period, 2.3, &params);
        assert!((fx1 - fx2).abs() < 1e-9, "{fx1} vs {fx2}");
    }

    #[test]
    fn scene_to_frequencies_matches_phase_difference_oracle() {
        // Independent oracle: evaluate the dechirped-return phase
        // phi(n, m) = (4π/c)·f_m·(x·θ_n + y) (conjugated-data convention)
        // at consecutive indices and difference it, in cycles.
        let params = RadarParams::new(9e9, 2e6, 3e-5, 299_792_458.0, 1e4).unwrap();
        let (x, y) = (4.2, -7.9);
        let phase_cycles = |n: f64, m: f64| {
            let theta = n * params.delta_theta;
            let fm = params.f0 + m * params.delta_f;
            2.0 * fm * (x * theta + y) / params.c
        };
        let fx_oracle = wrap_unit(phase_cycles(1.0, 0.0) - phase_cycles(0.0, 0.0));
        let fy_oracle = wrap_unit(phase_cycles(0.0, 1.0) - phase_cycles(0.0, 0.0));
        let (fx, fy) = scene_to_frequencies(x, y, &params);
        assert!((fx - fx_oracle).abs() < 1e-9, "{fx} vs {fx_oracle}");
        assert!((fy - fy_oracle).abs() < 1e-9, "{fy} vs {fy_oracle}");
    }

    #[test]
    fn scatterer_constructor_validates() {
        assert!(Scatterer::new(f64::NAN, 0.0, c64::new(1.0, 0.0)).is_err());
        assert!(Scatterer::new(0.1, 0.2, c64::new(0.0, 0.0)).is_err());
        let s = Scatterer::new(1.25, -0.25, c64::new(1.0, 0.0)).unwrap();
        assert!((s.fx() - 0.25).abs() < 1e-15);
        assert!((s.fy() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mask_constructor_validates() {
        let dims = SceneDims::new(3, 3).unwrap();
        assert!(ObservationMask::new(dims, vec![]).is_err());
        assert!(ObservationMask::new(dims, vec![(3, 0)]).is_err());
        assert!(ObservationMask::new(dims, vec![(1, 1), (1, 1)]).is_err());
    }
}
