//! Periodic sample grids on `[0, L)ⁿ` and their discrete Fourier transforms.
//!
//! Sample `m` sits at `x = L·m/N`. The raw spectrum is `c_k = Σ_m f(x_m)
//! e^{-2πi k·m/N}`; index `k` represents the frequency `ξ = k/L` with `k`
//! taken in `[-N/2, N/2)`, and `(L/N)ⁿ c_k` approximates `∫ f(x) e^{-2πi x·ξ} dx`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_err, Error, Result};
use crate::quad::pairwise_sum;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    n: usize,
    size: usize,
    period: f64,
    values: Vec<Complex64>,
}

/// JSON sidecar written next to a binary grid file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridMeta {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub points_per_axis: usize,
    pub period: f64,
    pub layout: String,
    #[serde(default)]
    pub note: String,
}

fn check_shape(n: usize, size: usize, period: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("grid dimension must be >= 1"));
    }
    if size < 2 || !size.is_power_of_two() {
        return Err(invalid(format!("points per axis must be a power of two >= 2, got {size}")));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(invalid(format!("period must be positive, got {period}")));
    }
    if size.checked_pow(n as u32).is_none() {
        return Err(invalid("grid too large"));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(n: usize, size: usize, period: f64, values: Vec<Complex64>) -> Result<Self> {
        check_shape(n, size, period)?;
        let want = size.pow(n as u32);
        if values.len() != want {
            return Err(invalid(format!("expected {want} values, got {}", values.len())));
        }
        Ok(Self { n, size, period, values })
    }

    pub fn zeros(n: usize, size: usize, period: f64) -> Result<Self> {
        check_shape(n, size, period)?;
        Ok(Self { n, size, period, values: vec![Complex64::new(0.0, 0.0); size.pow(n as u32)] })
    }

    /// Samples a real function at the grid nodes.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(n: usize, size: usize, period: f64, f: F) -> Result<Self> {
        Self::from_complex_fn(n, size, period, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_complex_fn<F: Fn(&[f64]) -> Complex64>(
        n: usize,
        size: usize,
        period: f64,
        f: F,
    ) -> Result<Self> {
        let mut g = Self::zeros(n, size, period)?;
        let mut x = vec![0.0; n];
        for i in 0..g.values.len() {
            g.point_into(i, &mut x);
            g.values[i] = f(&x);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn spacing(&self) -> f64 {
        self.period / self.size as f64
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.size == other.size && self.period == other.period
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::GridMismatch(format!(
                "(n={}, N={}, L={}) vs (n={}, N={}, L={})",
                self.n, self.size, self.period, other.n, other.size, other.period
            )));
        }
        Ok(())
    }

    /// Multi-index of flat position `i` (row-major, last axis fastest).
    pub fn index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for a in (0..self.n).rev() {
            idx[a] = i % self.size;
            i /= self.size;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.size + k % self.size)
    }

    fn point_into(&self, mut i: usize, x: &mut [f64]) {
        let h = self.spacing();
        for a in (0..self.n).rev() {
            x[a] = h * (i % self.size) as f64;
            i /= self.size;
        }
    }

    /// Physical coordinates of flat position `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.point_into(i, &mut x);
        x
    }

    /// Signed frequency index in `[-N/2, N/2)` along one axis.
    pub fn signed(&self, k: usize) -> i64 {
        let half = self.size / 2;
        if k >= half {
            k as i64 - self.size as i64
        } else {
            k as i64
        }
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Pointwise modulus as a real-valued grid.
    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Raw forward DFT `c_k`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        fft_nd(&mut data, self.n, self.size, false);
        data
    }

    /// Inverse of [`spectrum`](Self::spectrum): values `(1/Nⁿ) Σ_k c_k e^{2πi k·m/N}`.
    pub fn from_spectrum(n: usize, size: usize, period: f64, mut spec: Vec<Complex64>) -> Result<Self> {
        check_shape(n, size, period)?;
        if spec.len() != size.pow(n as u32) {
            return Err(invalid("spectrum length does not match grid"));
        }
        fft_nd(&mut spec, n, size, true);
        let s = 1.0 / spec.len() as f64;
        for v in &mut spec {
            *v *= s;
        }
        Self::new(n, size, period, spec)
    }

    /// Translation by a whole number of grid steps per axis:
    /// `out(x) = self(x - shift·h)`.
    pub fn roll(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.n {
            return Err(invalid("shift must have one entry per axis"));
        }
        let mut out = self.clone();
        let nn = self.size as i64;
        for i in 0..self.len() {
            let idx = self.index(i);
            let dst: Vec<usize> = idx
                .iter()
                .zip(shift)
                .map(|(&k, &s)| (k as i64 + s).rem_euclid(nn) as usize)
                .collect();
            out.values[self.flat(&dst)] = self.values[i];
        }
        Ok(out)
    }

    /// Periodic multilinear interpolation of the samples at an arbitrary
    /// point.
    pub fn interpolate(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.n, "point dimension");
        let h = self.spacing();
        let mut base = vec![0usize; self.n];
        let mut frac = vec![0.0; self.n];
        for a in 0..self.n {
            let s = (x[a] / h).rem_euclid(self.size as f64);
            let f = s.floor();
            base[a] = f as usize % self.size;
            frac[a] = s - f;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = vec![0usize; self.n];
        for corner in 0..(1usize << self.n) {
            let mut w = 1.0;
            for a in 0..self.n {
                let up = (corner >> a) & 1 == 1;
                idx[a] = (base[a] + up as usize) % self.size;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                acc += self.values[self.flat(&idx)] * w;
            }
        }
        acc
    }

    /// Discrete `L^p` norm `(Σ |h|^p (L/N)ⁿ)^{1/p}`; `p = ∞` gives the max.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_with_note(path, "")
    }

    /// Writes the binary layout (header `n`, `N` as u64 LE, `L` as f64 LE,
    /// then `(re, im)` f64 LE pairs row-major) and a JSON sidecar at
    /// `path.json`.
    pub fn save_with_note(&self, path: &Path, note: &str) -> Result<()> {
        let mut buf = Vec::with_capacity(24 + 16 * self.values.len());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(&(self.size as u64).to_le_bytes());
        buf.extend_from_slice(&self.period.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        let mut file = fs::File::create(path).map_err(io_err(path))?;
        file.write_all(&buf).map_err(io_err(path))?;
        let meta = GridMeta {
            format: "spheremax-grid".into(),
            version: 1,
            n: self.n,
            points_per_axis: self.size,
            period: self.period,
            layout: "header u64 n, u64 N, f64 L (LE); then N^n (re, im) f64 LE, row-major".into(),
            note: note.into(),
        };
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(io_err(&side))?;
        Ok(())
    }

    /// Reads a grid written by [`save`](Self::save). The sidecar is checked
    /// against the header when present.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        if bytes.len() < 24 {
            return Err(Error::Format(format!("{}: header truncated", path.display())));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8 bytes") };
        let n = u64::from_le_bytes(word(0)) as usize;
        let size = u64::from_le_bytes(word(1)) as usize;
        let period = f64::from_le_bytes(word(2));
        check_shape(n, size, period).map_err(|e| Error::Format(e.to_string()))?;
        let count = size.pow(n as u32);
        if bytes.len() != 24 + 16 * count {
            return Err(Error::Format(format!(
                "{}: expected {} bytes, found {}",
                path.display(),
                24 + 16 * count,
                bytes.len()
            )));
        }
        let values = (0..count)
            .map(|i| Complex64::new(f64::from_le_bytes(word(3 + 2 * i)), f64::from_le_bytes(word(4 + 2 * i))))
            .collect();
        let side = sidecar_path(path);
        if side.exists() {
            let text = fs::read_to_string(&side).map_err(io_err(&side))?;
            let meta: GridMeta = serde_json::from_str(&text)?;
            if meta.n != n || meta.points_per_axis != size || meta.period != period {
                return Err(Error::Format(format!("{}: sidecar disagrees with header", side.display())));
            }
        }
        Self::new(n, size, period, values)
    }
}

/// `path` with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Discrete `L^p` (quasi-)norm, `p ∈ (0, ∞]`.
pub fn lp_norm(h: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(invalid(format!("exponent p must be > 0, got {p}")));
    }
    if p.is_infinite() {
        return Ok(h.max_abs());
    }
    let cell = h.spacing().powi(h.n as i32);
    let terms: Vec<f64> = h.values.iter().map(|v| v.norm().powf(p)).collect();
    Ok((pairwise_sum(&terms) * cell).powf(1.0 / p))
}

/// In-place n-dimensional FFT over a row-major cube of side `size`.
/// Unnormalized in both directions.
pub fn fft_nd(data: &mut [Complex64], n: usize, size: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(size) } else { planner.plan_fft_forward(size) };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = size.pow((n - 1 - axis) as u32);
        let block = stride * size;
        for start in 0..total / size {
            let outer = start / stride;
            let inner = start % stride;
            let base = outer * block + inner;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[base + k * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}
