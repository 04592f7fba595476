//! Periodic-box discretization: spectral and physical velocity fields,
//! Fourier transforms, Leray projection, dealiasing, and checkpoint I/O.
//!
//! Conventions, fixed across the crate:
//! - the domain is `[0, 2pi)^3` sampled on a uniform `n^3` grid, so grid
//!   spacing is `dx = 2pi/n` and integer wavenumbers coincide with
//!   physical ones;
//! - the forward transform divides by `n^3`; coefficients are therefore
//!   Fourier-series coefficients and `u(x) = sum_k uhat(k) exp(i k.x)`;
//! - per-axis wavenumbers run over `{-n/2+1, ..., n/2}`;
//! - real fields satisfy the Hermitian symmetry `uhat(-k) = conj(uhat(k))`,
//!   velocity fields have `uhat(0) = 0` and `k . uhat(k) = 0` after
//!   projection.

use std::collections::HashMap;
use std::io::{BufReader, BufWriter, Read as _, Write as _};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Side length of the periodic box.
pub const BOX_LENGTH: f64 = std::f64::consts::TAU;

/// Box volume `(2pi)^3`, the weight turning coefficient sums into integrals.
pub const VOLUME: f64 = BOX_LENGTH * BOX_LENGTH * BOX_LENGTH;

/// Checkpoint file magic.
const CHECKPOINT_MAGIC: &[u8; 4] = b"FNS1";

/// Grid resolution descriptor for the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxSpec {
    n: usize,
}

impl BoxSpec {
    /// Creates a box with `n` samples per axis. `n` must be a power of two
    /// and at least 16 so that the dealiased band is non-trivial.
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Samples per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `2pi/n`.
    pub fn dx(&self) -> f64 {
        BOX_LENGTH / self.n as f64
    }

    /// Largest per-axis wavenumber kept by the 2/3-rule dealias mask.
    pub fn dealias_limit(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Integer wavenumber for storage index `i`, in `{-n/2+1, ..., n/2}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.n)
    }

    /// Integer wavevector for a storage index triple.
    pub fn wavevector(&self, idx: (usize, usize, usize)) -> [i64; 3] {
        [
            self.wavenumber(idx.0),
            self.wavenumber(idx.1),
            self.wavenumber(idx.2),
        ]
    }

    /// Coordinates of grid point `(i, j, k)`.
    pub fn point(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        let dx = self.dx();
        [idx.0 as f64 * dx, idx.1 as f64 * dx, idx.2 as f64 * dx]
    }
}

fn wavenumber(i: usize, n: usize) -> i64 {
    let i = i as i64;
    let n = n as i64;
    if i <= n / 2 {
        i
    } else {
        i - n
    }
}

/// `|k|^2` for a storage index triple on an `n` grid.
fn k_squared(spec: &BoxSpec, idx: (usize, usize, usize)) -> f64 {
    let [kx, ky, kz] = spec.wavevector(idx);
    (kx * kx + ky * ky + kz * kz) as f64
}

// ---------------------------------------------------------------------------
// FFT plumbing. Plans are cached per resolution; rustfft plans are Send+Sync.
// ---------------------------------------------------------------------------

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Applies a 1-D transform along every lane of `axis`.
fn transform_axis(data: &mut Array3<Complex64>, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = data.dim().0;
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for mut lane in data.lanes_mut(Axis(axis)) {
        if let Some(slice) = lane.as_slice_mut() {
            fft.process(slice);
        } else {
            for (dst, src) in scratch.iter_mut().zip(lane.iter()) {
                *dst = *src;
            }
            fft.process(&mut scratch);
            for (dst, src) in lane.iter_mut().zip(scratch.iter()) {
                *dst = *src;
            }
        }
    }
}

/// In-place forward transform: samples to Fourier-series coefficients
/// (includes the `1/n^3` normalization).
pub(crate) fn fft3_forward(data: &mut Array3<Complex64>) {
    let n = data.dim().0;
    let (fwd, _) = plans(n);
    for axis in 0..3 {
        transform_axis(data, axis, &fwd);
    }
    let scale = 1.0 / (n as f64).powi(3);
    data.mapv_inplace(|c| c * scale);
}

/// In-place inverse transform: coefficients to samples (no scaling).
pub(crate) fn fft3_inverse(data: &mut Array3<Complex64>) {
    let n = data.dim().0;
    let (_, inv) = plans(n);
    for axis in 0..3 {
        transform_axis(data, axis, &inv);
    }
}

// ---------------------------------------------------------------------------
// Spectral embedding and restriction between resolutions.
//
// The positive Nyquist mode k = n/2 stands for the +-n/2 pair on the source
// grid, so moving to a finer grid splits it evenly across both slots and
// moving back sums them. With these weights `restrict(extend(x)) == x`.
// ---------------------------------------------------------------------------

fn axis_extend_map(n_src: usize, n_dst: usize) -> Vec<Vec<(usize, f64)>> {
    assert!(n_dst >= n_src);
    (0..n_src)
        .map(|i| {
            let k = wavenumber(i, n_src);
            if 2 * k == n_src as i64 {
                vec![
                    (n_src / 2, 0.5),
                    (n_dst - n_src / 2, 0.5),
                ]
            } else {
                vec![(k.rem_euclid(n_dst as i64) as usize, 1.0)]
            }
        })
        .collect()
}

fn axis_restrict_map(n_src: usize, n_dst: usize) -> Vec<Vec<(usize, f64)>> {
    assert!(n_src >= n_dst);
    (0..n_dst)
        .map(|i| {
            let k = wavenumber(i, n_dst);
            if 2 * k == n_dst as i64 {
                vec![
                    (n_dst / 2, 1.0),
                    (n_src - n_dst / 2, 1.0),
                ]
            } else {
                vec![(k.rem_euclid(n_src as i64) as usize, 1.0)]
            }
        })
        .collect()
}

/// Embeds coefficients of an `n_src` grid into an `n_dst >= n_src` grid.
pub(crate) fn extend_spectrum(src: &Array3<Complex64>, n_dst: usize) -> Array3<Complex64> {
    let n_src = src.dim().0;
    let map = axis_extend_map(n_src, n_dst);
    let mut dst = Array3::from_elem((n_dst, n_dst, n_dst), Complex64::new(0.0, 0.0));
    for ((i, j, k), &c) in src.indexed_iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for &(ti, wi) in &map[i] {
            for &(tj, wj) in &map[j] {
                for &(tk, wk) in &map[k] {
                    dst[[ti, tj, tk]] += c * (wi * wj * wk);
                }
            }
        }
    }
    dst
}

/// Restricts coefficients of an `n_src` grid onto an `n_dst <= n_src` grid.
pub(crate) fn restrict_spectrum(src: &Array3<Complex64>, n_dst: usize) -> Array3<Complex64> {
    let n_src = src.dim().0;
    let map = axis_restrict_map(n_src, n_dst);
    let mut dst = Array3::from_elem((n_dst, n_dst, n_dst), Complex64::new(0.0, 0.0));
    for i in 0..n_dst {
        for j in 0..n_dst {
            for k in 0..n_dst {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(si, wi) in &map[i] {
                    for &(sj, wj) in &map[j] {
                        for &(sk, wk) in &map[k] {
                            acc += src[[si, sj, sk]] * (wi * wj * wk);
                        }
                    }
                }
                dst[[i, j, k]] = acc;
            }
        }
    }
    dst
}

/// Pointwise product of two scalar spectra, evaluated alias-free on a
/// doubled grid and restricted back. This is the product convention used
/// by the paraproduct and commutator machinery.
pub(crate) fn padded_product(
    a: &Array3<Complex64>,
    b: &Array3<Complex64>,
) -> Array3<Complex64> {
    let n = a.dim().0;
    let mut pa = extend_spectrum(a, 2 * n);
    let mut pb = extend_spectrum(b, 2 * n);
    fft3_inverse(&mut pa);
    fft3_inverse(&mut pb);
    ndarray::Zip::from(&mut pa).and(&pb).for_each(|x, &y| *x *= y);
    fft3_forward(&mut pa);
    restrict_spectrum(&pa, n)
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// Three-component velocity field in spectral representation. Stores the
/// full complex cube for each component.
#[derive(Debug, Clone)]
pub struct SpectralField {
    spec: BoxSpec,
    coeffs: [Array3<Complex64>; 3],
}

/// Three-component velocity field sampled on the grid.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    spec: BoxSpec,
    values: [Array3<f64>; 3],
}

/// Scalar field in spectral representation (no divergence or mean-zero
/// constraint; used by the paraproduct and commutator diagnostics).
#[derive(Debug, Clone)]
pub struct ScalarField {
    spec: BoxSpec,
    coeffs: Array3<Complex64>,
}

impl SpectralField {
    /// Zero field on the given box.
    pub fn zeros(spec: BoxSpec) -> Self {
        let n = spec.n();
        let zero = Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0));
        Self {
            spec,
            coeffs: [zero.clone(), zero.clone(), zero],
        }
    }

    /// Builds a field from raw component cubes.
    pub fn from_components(spec: BoxSpec, coeffs: [Array3<Complex64>; 3]) -> Result<Self> {
        let n = spec.n();
        for c in &coeffs {
            if c.dim() != (n, n, n) {
                return Err(Error::InvalidParameter(format!(
                    "component shape {:?} does not match grid {n}^3",
                    c.dim()
                )));
            }
        }
        Ok(Self { spec, coeffs })
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn component(&self, i: usize) -> &Array3<Complex64> {
        &self.coeffs[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut Array3<Complex64> {
        &mut self.coeffs[i]
    }

    /// Transforms to physical space. Imaginary residue of the inverse
    /// transform is discarded; it is at roundoff level for Hermitian input.
    pub fn to_physical(&self) -> PhysicalField {
        let n = self.spec.n();
        let mut values: [Array3<f64>; 3] = [
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
        ];
        for (c, out) in self.coeffs.iter().zip(values.iter_mut()) {
            let mut work = c.clone();
            fft3_inverse(&mut work);
            ndarray::Zip::from(out).and(&work).for_each(|v, &w| *v = w.re);
        }
        PhysicalField {
            spec: self.spec,
            values,
        }
    }

    /// Transforms grid samples to coefficients.
    pub fn from_physical(phys: &PhysicalField) -> Self {
        let n = phys.spec.n();
        let mut coeffs: [Array3<Complex64>; 3] = [
            Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0)),
            Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0)),
            Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0)),
        ];
        for (v, out) in phys.values.iter().zip(coeffs.iter_mut()) {
            ndarray::Zip::from(out.view_mut())
                .and(v)
                .for_each(|c, &x| *c = Complex64::new(x, 0.0));
            fft3_forward(out);
        }
        Self {
            spec: phys.spec,
            coeffs,
        }
    }

    /// Applies the Leray projection `uhat -> uhat - k (k.uhat)/|k|^2`
    /// mode by mode; the zero mode is left untouched.
    pub fn leray_project(&mut self) {
        let n = self.spec.n();
        for i in 0..n {
            let ki = self.spec.wavenumber(i) as f64;
            for j in 0..n {
                let kj = self.spec.wavenumber(j) as f64;
                for k in 0..n {
                    let kk = self.spec.wavenumber(k) as f64;
                    let k2 = ki * ki + kj * kj + kk * kk;
                    if k2 == 0.0 {
                        continue;
                    }
                    let dot = self.coeffs[0][[i, j, k]] * ki
                        + self.coeffs[1][[i, j, k]] * kj
                        + self.coeffs[2][[i, j, k]] * kk;
                    let d = dot / k2;
                    self.coeffs[0][[i, j, k]] -= d * ki;
                    self.coeffs[1][[i, j, k]] -= d * kj;
                    self.coeffs[2][[i, j, k]] -= d * kk;
                }
            }
        }
    }

    /// Sharp 2/3-rule dealias mask: zeroes every mode with
    /// `max(|k1|,|k2|,|k3|) > n/3`.
    pub fn dealias(&mut self) {
        let n = self.spec.n() as i64;
        let spec = self.spec;
        for c in self.coeffs.iter_mut() {
            for ((i, j, k), v) in c.indexed_iter_mut() {
                let [kx, ky, kz] = spec.wavevector((i, j, k));
                let m = kx.abs().max(ky.abs()).max(kz.abs());
                if 3 * m > n {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Zeroes the mean mode of every component.
    pub fn remove_mean(&mut self) {
        for c in self.coeffs.iter_mut() {
            c[[0, 0, 0]] = Complex64::new(0.0, 0.0);
        }
    }

    /// Zeroes every mode with some `|k_i| = n/2`. The Nyquist planes of a
    /// real field alias the +-n/2 pair into one slot, which no
    /// sign-sensitive per-component operator (projection, derivative) can
    /// treat consistently; velocity fields therefore never carry them.
    /// Dealiasing removes them anyway since `n/3 < n/2`.
    pub fn clear_nyquist(&mut self) {
        let half = (self.spec.n() / 2) as i64;
        let spec = self.spec;
        for c in self.coeffs.iter_mut() {
            for ((i, j, k), v) in c.indexed_iter_mut() {
                let [kx, ky, kz] = spec.wavevector((i, j, k));
                if kx == half || ky == half || kz == half {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Multiplies every mode of every component by `f(|k|^2)`.
    pub fn apply_radial(&mut self, f: impl Fn(f64) -> f64) {
        let spec = self.spec;
        for c in self.coeffs.iter_mut() {
            for ((i, j, k), v) in c.indexed_iter_mut() {
                let m = f(k_squared(&spec, (i, j, k)));
                *v = *v * m;
            }
        }
    }

    /// In-place `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) {
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            ndarray::Zip::from(c).and(o).for_each(|x, &y| *x += y * a);
        }
    }

    /// In-place scaling by a real factor.
    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            c.mapv_inplace(|v| v * a);
        }
    }

    /// Sum of squared coefficient magnitudes over all components; equals
    /// the grid average of `|u|^2` by the Parseval identity.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Largest relative violation of `uhat(-k) = conj(uhat(k))`.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.spec.n();
        let mut max_diff: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for c in &self.coeffs {
            for ((i, j, k), v) in c.indexed_iter() {
                let m = c[[(n - i) % n, (n - j) % n, (n - k) % n]];
                max_diff = max_diff.max((m - v.conj()).norm());
                max_abs = max_abs.max(v.norm());
            }
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_diff / max_abs
        }
    }

    /// Largest per-mode `|k.uhat(k)| / |uhat(k)|` over modes with
    /// non-negligible amplitude; zero for the zero field.
    pub fn divergence_error(&self) -> f64 {
        let n = self.spec.n();
        let floor = 1e-300;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let [kx, ky, kz] = self.spec.wavevector((i, j, k));
                    let a0 = self.coeffs[0][[i, j, k]];
                    let a1 = self.coeffs[1][[i, j, k]];
                    let a2 = self.coeffs[2][[i, j, k]];
                    let amp = (a0.norm_sqr() + a1.norm_sqr() + a2.norm_sqr()).sqrt();
                    if amp <= floor {
                        continue;
                    }
                    let dot = (a0 * kx as f64 + a1 * ky as f64 + a2 * kz as f64).norm();
                    worst = worst.max(dot / amp);
                }
            }
        }
        worst
    }

    /// Magnitude of the mean mode, `|uhat(0)|`.
    pub fn mean_magnitude(&self) -> f64 {
        (self.coeffs[0][[0, 0, 0]].norm_sqr()
            + self.coeffs[1][[0, 0, 0]].norm_sqr()
            + self.coeffs[2][[0, 0, 0]].norm_sqr())
        .sqrt()
    }

    /// Checks for any non-finite coefficient.
    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

impl PhysicalField {
    pub fn zeros(spec: BoxSpec) -> Self {
        let n = spec.n();
        Self {
            spec,
            values: [
                Array3::zeros((n, n, n)),
                Array3::zeros((n, n, n)),
                Array3::zeros((n, n, n)),
            ],
        }
    }

    /// Builds a field by sampling closures of the grid coordinates.
    pub fn from_fn(spec: BoxSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(spec);
        let n = spec.n();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = f(spec.point((i, j, k)));
                    out.values[0][[i, j, k]] = v[0];
                    out.values[1][[i, j, k]] = v[1];
                    out.values[2][[i, j, k]] = v[2];
                }
            }
        }
        out
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn component(&self, i: usize) -> &Array3<f64> {
        &self.values[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut Array3<f64> {
        &mut self.values[i]
    }

    /// Velocity magnitude `|u(x)|` at every grid point.
    pub fn magnitude(&self) -> Array3<f64> {
        let mut out = self.values[0].mapv(|v| v * v);
        for c in &self.values[1..] {
            ndarray::Zip::from(&mut out).and(c).for_each(|o, &v| *o += v * v);
        }
        out.mapv_inplace(f64::sqrt);
        out
    }

    /// Grid maximum of `|u(x)|`.
    pub fn max_abs(&self) -> f64 {
        self.magnitude().iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

impl ScalarField {
    pub fn zeros(spec: BoxSpec) -> Self {
        let n = spec.n();
        Self {
            spec,
            coeffs: Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0)),
        }
    }

    /// Transforms grid samples of a scalar into coefficients.
    pub fn from_samples(spec: BoxSpec, samples: &Array3<f64>) -> Result<Self> {
        let n = spec.n();
        if samples.dim() != (n, n, n) {
            return Err(Error::InvalidParameter(format!(
                "sample shape {:?} does not match grid {n}^3",
                samples.dim()
            )));
        }
        let mut coeffs = Array3::from_elem((n, n, n), Complex64::new(0.0, 0.0));
        ndarray::Zip::from(&mut coeffs)
            .and(samples)
            .for_each(|c, &x| *c = Complex64::new(x, 0.0));
        fft3_forward(&mut coeffs);
        Ok(Self { spec, coeffs })
    }

    /// Builds a scalar by sampling a closure of the grid coordinates.
    pub fn from_fn(spec: BoxSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let n = spec.n();
        let mut samples = Array3::zeros((n, n, n));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    samples[[i, j, k]] = f(spec.point((i, j, k)));
                }
            }
        }
        Self::from_samples(spec, &samples).expect("shape matches by construction")
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    /// Grid samples of the scalar.
    pub fn to_samples(&self) -> Array3<f64> {
        let mut work = self.coeffs.clone();
        fft3_inverse(&mut work);
        work.mapv(|c| c.re)
    }
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout: magic "FNS1", little-endian u32 n, little-endian f64 time, then
// 3 * n^3 little-endian f64 physical samples (components in order, x index
// fastest, then y, then z). Physical-space storage keeps the file format
// independent of the spectral layout.
// ---------------------------------------------------------------------------

/// Writes a checkpoint for the sampled field at the given time.
pub fn write_checkpoint(path: &Path, field: &PhysicalField, time: f64) -> Result<()> {
    let n = field.spec.n();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for c in 0..3 {
        let v = field.component(c);
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    w.write_all(&v[[ix, iy, iz]].to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint, validating magic, resolution, and length.
pub fn read_checkpoint(path: &Path) -> Result<(PhysicalField, f64)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file shorter than header".into()))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected {:?}",
            magic, CHECKPOINT_MAGIC
        )));
    }
    let mut nb = [0u8; 4];
    r.read_exact(&mut nb)
        .map_err(|_| Error::Checkpoint("missing resolution field".into()))?;
    let n = u32::from_le_bytes(nb) as usize;
    let spec = BoxSpec::new(n)
        .map_err(|_| Error::Checkpoint(format!("unsupported resolution {n}")))?;
    let mut tb = [0u8; 8];
    r.read_exact(&mut tb)
        .map_err(|_| Error::Checkpoint("missing time field".into()))?;
    let time = f64::from_le_bytes(tb);
    if !time.is_finite() {
        return Err(Error::Checkpoint(format!("non-finite time {time}")));
    }

    let mut field = PhysicalField::zeros(spec);
    let mut buf = vec![0u8; n * 8];
    for c in 0..3 {
        for iz in 0..n {
            for iy in 0..n {
                r.read_exact(&mut buf).map_err(|_| {
                    Error::Checkpoint(format!(
                        "truncated payload in component {} (expected {} samples/axis)",
                        c + 1,
                        n
                    ))
                })?;
                for ix in 0..n {
                    let bytes: [u8; 8] = buf[ix * 8..ix * 8 + 8].try_into().unwrap();
                    field.values[c][[ix, iy, iz]] = f64::from_le_bytes(bytes);
                }
            }
        }
    }
    // Reject trailing garbage so a concatenated or padded file is caught.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok((field, time)),
        _ => Err(Error::Checkpoint("trailing bytes after payload".into())),
    }
}

// ---------------------------------------------------------------------------
// Random smooth fields (shared by ensemble diagnostics and verify suites)
// ---------------------------------------------------------------------------

/// Draws a divergence-free, mean-zero random field whose spectrum decays
/// like `exp(-decay |k|^2)`, normalized to unit maximum velocity.
/// Deterministic in the seed.
pub fn random_smooth_field(spec: BoxSpec, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phys = PhysicalField::zeros(spec);
    for c in 0..3 {
        for v in phys.component_mut(c).iter_mut() {
            // Sum of 4 uniforms, centered: cheap near-Gaussian samples.
            let s: f64 = (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum();
            *v = s * 0.5;
        }
    }
    let mut u = SpectralField::from_physical(&phys);
    u.apply_radial(|k2| (-decay * k2).exp());
    u.remove_mean();
    u.clear_nyquist();
    u.leray_project();
    let sup = u.to_physical().max_abs();
    if sup > 0.0 {
        u.scale(1.0 / sup);
    }
    u
}
