//! Uniform grids on `[−L, L)^d`, sampled fields, and their spectra.
//!
//! Spectra approximate the continuous transform
//!
//! ```text
//! f̂(ξ) = ∫ f(x) e^{−i x·ξ} dx,      f(x) = (2π)^{−d} ∫ f̂(ξ) e^{i x·ξ} dξ
//! ```
//!
//! The forward DFT is scaled by `h^d` and the inverse by `(Δξ/2π)^d`, with
//! spatial nodes `x_j = (j − n/2)h` and frequency nodes `ξ_m = (m − n/2)Δξ`,
//! `Δξ = π/L`. Zero frequency sits at index `n/2` on every axis. Values are
//! stored row-major with `x₁` varying fastest.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<const D: usize> {
    half_extent: f64,
    samples: usize,
}

impl<const D: usize> Grid<D> {
    pub fn new(half_extent: f64, samples: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid half extent must be positive, got {half_extent}"
            )));
        }
        if samples < 8 || samples % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "samples per axis must be even and at least 8, got {samples}"
            )));
        }
        Ok(Grid {
            half_extent,
            samples,
        })
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.samples as f64
    }

    /// `Δξ = π/L`.
    pub fn freq_spacing(&self) -> f64 {
        PI / self.half_extent
    }

    /// `π/h`; the frequency grid covers `[−π/h, π/h)` per axis.
    pub fn freq_half_extent(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.samples / 2) as f64) * self.spacing()
    }

    pub fn freq_coord(&self, i: usize) -> f64 {
        (i as f64 - (self.samples / 2) as f64) * self.freq_spacing()
    }

    pub fn len(&self) -> usize {
        self.samples.pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat_index(&self, idx: &[usize; D]) -> usize {
        idx.iter()
            .rev()
            .fold(0, |acc, &i| acc * self.samples + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; D] {
        let mut out = [0; D];
        for slot in out.iter_mut() {
            *slot = flat % self.samples;
            flat /= self.samples;
        }
        out
    }

    pub fn node(&self, flat: usize) -> [f64; D] {
        self.multi_index(flat).map(|i| self.coord(i))
    }

    pub fn freq_node(&self, flat: usize) -> [f64; D] {
        self.multi_index(flat).map(|i| self.freq_coord(i))
    }
}

/// Samples of a complex function on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const D: usize> {
    grid: Grid<D>,
    values: Vec<Complex64>,
}

/// Samples of a continuous Fourier transform on the dual frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<const D: usize> {
    grid: Grid<D>,
    values: Vec<Complex64>,
}

macro_rules! sampled_common {
    ($ty:ident) => {
        impl<const D: usize> $ty<D> {
            pub fn new(grid: Grid<D>, values: Vec<Complex64>) -> Result<Self> {
                if values.len() != grid.len() {
                    return Err(Error::InvalidArgument(format!(
                        "expected {} samples, got {}",
                        grid.len(),
                        values.len()
                    )));
                }
                Ok($ty { grid, values })
            }

            pub fn zeros(grid: Grid<D>) -> Self {
                $ty {
                    grid,
                    values: vec![Complex64::new(0.0, 0.0); grid.len()],
                }
            }

            /// The spatial grid (for spectra, the grid whose dual this is).
            pub fn grid(&self) -> &Grid<D> {
                &self.grid
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
        }
    };
}

sampled_common!(Field);
sampled_common!(Spectrum);

impl<const D: usize> Field<D> {
    pub fn from_fn<F>(grid: Grid<D>, f: F) -> Self
    where
        F: Fn([f64; D]) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Field { grid, values }
    }

    pub fn from_real_fn<F>(grid: Grid<D>, f: F) -> Self
    where
        F: Fn([f64; D]) -> f64,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// `Σ f(x_j)·h^d`, the Riemann sum of the field.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.spacing().powi(D as i32)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Divides by the largest modulus; a zero field is returned unchanged.
    pub fn normalized_max(&self) -> Self {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / peak, 0.0))
    }
}

impl<const D: usize> Spectrum<D> {
    pub fn from_fn<F>(grid: Grid<D>, f: F) -> Self
    where
        F: Fn([f64; D]) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| f(grid.freq_node(i))).collect();
        Spectrum { grid, values }
    }

    /// Multiplies every node by `filter(ξ)`.
    pub fn filtered<F>(&self, filter: F) -> Self
    where
        F: Fn([f64; D]) -> Complex64,
    {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * filter(self.grid.freq_node(i)))
            .collect();
        Spectrum {
            grid: self.grid,
            values,
        }
    }
}

fn checkerboard_sign<const D: usize>(grid: &Grid<D>, flat: usize) -> f64 {
    let s: usize = grid.multi_index(flat).iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn fft_nd<const D: usize>(grid: &Grid<D>, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.samples();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..D {
        let stride = n.pow(axis as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

/// Shared sign from centering both grids: `(−1)^{d·n/2}`.
fn centering_sign<const D: usize>(grid: &Grid<D>) -> f64 {
    if (D * grid.samples() / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Continuous-scaled forward transform with kernel `e^{−i x·ξ}`.
pub fn dft_forward<const D: usize>(f: &Field<D>) -> Spectrum<D> {
    let grid = f.grid;
    let mut data: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * checkerboard_sign(&grid, i))
        .collect();
    fft_nd(&grid, &mut data, FftDirection::Forward);
    let scale = grid.spacing().powi(D as i32) * centering_sign(&grid);
    for (i, v) in data.iter_mut().enumerate() {
        *v *= scale * checkerboard_sign(&grid, i);
    }
    Spectrum { grid, values: data }
}

/// Inverse of [`dft_forward`].
pub fn dft_inverse<const D: usize>(spectrum: &Spectrum<D>) -> Field<D> {
    let grid = spectrum.grid;
    let mut data: Vec<Complex64> = spectrum
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * checkerboard_sign(&grid, i))
        .collect();
    fft_nd(&grid, &mut data, FftDirection::Inverse);
    let scale = (grid.freq_spacing() / (2.0 * PI)).powi(D as i32) * centering_sign(&grid);
    for (i, v) in data.iter_mut().enumerate() {
        *v *= scale * checkerboard_sign(&grid, i);
    }
    Field { grid, values: data }
}

/// Multilinear interpolation of a spectrum at an off-grid frequency.
pub fn interp_spectrum<const D: usize>(spectrum: &Spectrum<D>, point: &[f64; D]) -> Result<Complex64> {
    let grid = &spectrum.grid;
    let n = grid.samples();
    let dxi = grid.freq_spacing();
    let mut base = [0usize; D];
    let mut frac = [0.0; D];
    for a in 0..D {
        let pos = point[a] / dxi + (n / 2) as f64;
        if !(pos >= 0.0 && pos <= (n - 1) as f64) {
            return Err(Error::OutOfDomain(format!("{point:?}")));
        }
        let i0 = (pos.floor() as usize).min(n - 2);
        base[a] = i0;
        frac[a] = pos - i0 as f64;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << D) {
        let mut weight = 1.0;
        let mut idx = base;
        for a in 0..D {
            if corner >> a & 1 == 1 {
                idx[a] += 1;
                weight *= frac[a];
            } else {
                weight *= 1.0 - frac[a];
            }
        }
        if weight != 0.0 {
            acc += spectrum.values[grid.flat_index(&idx)] * weight;
        }
    }
    Ok(acc)
}

/// Element type of the binary sample format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Two little-endian `f32` per sample.
    #[default]
    Complex64,
    /// Two little-endian `f64` per sample.
    Complex128,
}

/// Any grid-sampled quantity readable from a binary sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    Field2(Field<2>),
    Field3(Field<3>),
    Spectrum2(Spectrum<2>),
    Spectrum3(Spectrum<3>),
}

const MAGIC: &[u8; 4] = b"HWF1";
const FLAG_SPECTRUM: u32 = 1;
const FLAG_DOUBLE: u32 = 2;

/// Binary layout: a 32-byte header
///
/// ```text
/// 0..4   magic "HWF1"
/// 4..8   d (u32)
/// 8..12  samples per axis (u32)
/// 12..16 flags (u32): bit 0 spectrum, bit 1 complex128 samples
/// 16..24 half extent L (f64)
/// 24..32 reserved, zero
/// ```
///
/// followed by `n^d` samples, all little-endian.
fn write_raw<W: Write, const D: usize>(
    mut w: W,
    grid: &Grid<D>,
    values: &[Complex64],
    spectrum: bool,
    precision: Precision,
) -> std::io::Result<()> {
    let mut header = Vec::with_capacity(32);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&(D as u32).to_le_bytes());
    header.extend_from_slice(&(grid.samples() as u32).to_le_bytes());
    let mut flags = 0;
    if spectrum {
        flags |= FLAG_SPECTRUM;
    }
    if precision == Precision::Complex128 {
        flags |= FLAG_DOUBLE;
    }
    header.extend_from_slice(&flags.to_le_bytes());
    header.extend_from_slice(&grid.half_extent().to_le_bytes());
    header.extend_from_slice(&[0u8; 8]);
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(values.len() * 16);
    for v in values {
        match precision {
            Precision::Complex64 => {
                body.extend_from_slice(&(v.re as f32).to_le_bytes());
                body.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
            Precision::Complex128 => {
                body.extend_from_slice(&v.re.to_le_bytes());
                body.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    w.write_all(&body)
}

impl<const D: usize> Field<D> {
    pub fn write_to<W: Write>(&self, w: W, precision: Precision) -> std::io::Result<()> {
        write_raw(w, &self.grid, &self.values, false, precision)
    }

    pub fn save(&self, path: &Path, precision: Precision) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf, precision)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

impl<const D: usize> Spectrum<D> {
    pub fn write_to<W: Write>(&self, w: W, precision: Precision) -> std::io::Result<()> {
        write_raw(w, &self.grid, &self.values, true, precision)
    }

    pub fn save(&self, path: &Path, precision: Precision) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf, precision)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

impl Field<2> {
    /// CSV rows `x1,x2,re,im`, one per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,x2,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            let [x1, x2] = self.grid.node(i);
            writeln!(w, "{x1},{x2},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

impl Sampled {
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |d: &str| Error::format("sample file", d.to_string());
        let mut header = [0u8; 32];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated header"))?;
        if &header[0..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let d = word(4) as usize;
        let n = word(8) as usize;
        let flags = word(12);
        let half_extent = f64::from_le_bytes(header[16..24].try_into().unwrap());
        let count = n
            .checked_pow(d as u32)
            .ok_or_else(|| bad("sample count overflows"))?;
        let width = if flags & FLAG_DOUBLE != 0 { 16 } else { 8 };
        let mut body = Vec::new();
        r.read_to_end(&mut body)
            .map_err(|e| bad(&e.to_string()))?;
        if body.len() != count * width {
            return Err(bad(&format!(
                "expected {} payload bytes, found {}",
                count * width,
                body.len()
            )));
        }
        let values: Vec<Complex64> = body
            .chunks_exact(width)
            .map(|c| {
                if width == 16 {
                    Complex64::new(
                        f64::from_le_bytes(c[0..8].try_into().unwrap()),
                        f64::from_le_bytes(c[8..16].try_into().unwrap()),
                    )
                } else {
                    Complex64::new(
                        f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                        f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
                    )
                }
            })
            .collect();
        let spectrum = flags & FLAG_SPECTRUM != 0;
        Ok(match (d, spectrum) {
            (2, false) => Sampled::Field2(Field::new(Grid::new(half_extent, n)?, values)?),
            (3, false) => Sampled::Field3(Field::new(Grid::new(half_extent, n)?, values)?),
            (2, true) => Sampled::Spectrum2(Spectrum::new(Grid::new(half_extent, n)?, values)?),
            (3, true) => Sampled::Spectrum3(Spectrum::new(Grid::new(half_extent, n)?, values)?),
            _ => return Err(bad(&format!("unsupported dimension {d}"))),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Sampled::Field2(_) | Sampled::Spectrum2(_) => 2,
            Sampled::Field3(_) | Sampled::Spectrum3(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_field<const D: usize>(grid: Grid<D>, seed: u64) -> Field<D> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::new(grid, values).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::<2>::new(1.0, 6).is_err());
        assert!(Grid::<2>::new(1.0, 9).is_err());
        assert!(Grid::<2>::new(0.0, 8).is_err());
        let g = Grid::<3>::new(2.0, 8).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g.coord(4), 0.0);
        assert_eq!(g.freq_coord(4), 0.0);
        let idx = [3, 1, 7];
        assert_eq!(g.multi_index(g.flat_index(&idx)), idx);
        assert_eq!(g.flat_index(&[1, 0, 0]), 1);
    }

    #[test]
    fn frequency_coverage_matches_full_size_grids() {
        let k = 2.0 * PI;
        let g3 = Grid::<3>::new(5.0, 256).unwrap();
        assert!((g3.freq_half_extent() / k - 12.8).abs() < 1e-12);
        let g2 = Grid::<2>::new(5.0, 512).unwrap();
        assert!((g2.freq_half_extent() / k - 25.6).abs() < 1e-12);
        assert!((g2.freq_spacing() - PI / 5.0).abs() < 1e-15);
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::<2>::new(1.0, 16).unwrap();
        let z = Field::zeros(g);
        assert!(dft_forward(&z).values().iter().all(|v| v.norm() == 0.0));
        let s = Spectrum::zeros(g);
        assert!(dft_inverse(&s).values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::<3>::new(1.5, 16).unwrap();
        let f = random_field(g, 7);
        let spec = dft_forward(&f);
        let back = dft_inverse(&spec);
        let norm_f: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        let err: f64 = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!((err / norm_f).sqrt() < 1e-10);

        let lhs = norm_f * g.spacing().powi(3);
        let rhs: f64 = spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
            * (g.freq_spacing() / (2.0 * PI)).powi(3);
        assert!((lhs / rhs - 1.0).abs() < 1e-10);
    }

    fn gaussian_transform_error(half_extent: f64) -> f64 {
        let g = Grid::<3>::new(half_extent, 64).unwrap();
        let f = Field::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
        let spec = dft_forward(&f);
        let mut worst: f64 = 0.0;
        for (i, v) in spec.values().iter().enumerate() {
            let xi = g.freq_node(i);
            let r2 = xi.iter().map(|t| t * t).sum::<f64>();
            if r2 <= 4.0 {
                let want = (2.0 * PI).powf(1.5) * (-r2 / 2.0).exp();
                worst = worst.max((v - want).norm());
            }
        }
        worst
    }

    #[test]
    fn gaussian_transform_3d() {
        // On [−5, 5]³ the e^{−12.5} tails cut off by the window dominate (≈2.9e-5).
        assert!(gaussian_transform_error(5.0) < 3e-5);
        assert!(gaussian_transform_error(8.0) < 1e-6);
    }

    #[test]
    fn shift_theorem() {
        let g = Grid::<2>::new(2.0, 16).unwrap();
        let f = random_field(g, 11);
        let (s0, s1) = (3usize, 5usize);
        let n = g.samples();
        let shifted = Field::new(
            g,
            (0..g.len())
                .map(|flat| {
                    let [i, j] = g.multi_index(flat);
                    f.values()[g.flat_index(&[(i + n - s0) % n, (j + n - s1) % n])]
                })
                .collect(),
        )
        .unwrap();
        let a = [s0 as f64 * g.spacing(), s1 as f64 * g.spacing()];
        let fs = dft_forward(&f);
        let ss = dft_forward(&shifted);
        for (i, (u, v)) in fs.values().iter().zip(ss.values()).enumerate() {
            let xi = g.freq_node(i);
            let want = u * Complex64::from_polar(1.0, -(a[0] * xi[0] + a[1] * xi[1]));
            assert!((v - want).norm() < 1e-9);
        }
    }

    #[test]
    fn interpolation_basics() {
        let g = Grid::<2>::new(1.0, 8).unwrap();
        let s = Spectrum::from_fn(g, |xi| Complex64::new(xi[0] + 2.0 * xi[1], xi[0] * xi[1]));
        let node = g.freq_node(g.flat_index(&[2, 5]));
        assert_eq!(interp_spectrum(&s, &node).unwrap(), s.values()[g.flat_index(&[2, 5])]);
        let a = s.values()[g.flat_index(&[2, 5])];
        let b = s.values()[g.flat_index(&[3, 5])];
        let mid = [0.5 * (g.freq_coord(2) + g.freq_coord(3)), g.freq_coord(5)];
        assert!((interp_spectrum(&s, &mid).unwrap() - (a + b) / 2.0).norm() < 1e-12);
        // Bilinear functions are reproduced exactly.
        let p = [0.37 * PI, -1.1 * PI];
        let want = Complex64::new(p[0] + 2.0 * p[1], p[0] * p[1]);
        assert!((interp_spectrum(&s, &p).unwrap() - want).norm() < 1e-12);
        let outside = [g.freq_coord(7) + 0.01, 0.0];
        assert!(matches!(interp_spectrum(&s, &outside), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let gauss = |xi: [f64; 3]| {
            let r2: f64 = xi.iter().map(|t| t * t).sum();
            (2.0 * PI).powf(1.5) * (-r2 / 2.0).exp()
        };
        let points: Vec<[f64; 3]> = (0..100)
            .map(|_| [0; 3].map(|_: i32| rng.random_range(-3.0..3.0)))
            .collect();
        let mut errors = Vec::new();
        for half_extent in [5.0, 10.0] {
            let g = Grid::<3>::new(half_extent, 64).unwrap();
            let s = Spectrum::from_fn(g, |xi| Complex64::new(gauss(xi), 0.0));
            let dxi = g.freq_spacing();
            // Multilinear error ≤ (d/8)·Δξ²·max|∂²f̂|, and |∂²f̂| ≤ (2π)^{3/2}.
            let bound = 3.0 / 8.0 * dxi * dxi * (2.0 * PI).powf(1.5);
            let worst = points
                .iter()
                .map(|p| (interp_spectrum(&s, p).unwrap().re - gauss(*p)).abs())
                .fold(0.0, f64::max);
            assert!(worst <= bound, "{worst} > {bound}");
            errors.push(worst);
        }
        let ratio = errors[0] / errors[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
    }

    #[test]
    fn binary_format_round_trip() {
        let g = Grid::<2>::new(1.25, 8).unwrap();
        let f = random_field(g, 5);
        let mut buf = Vec::new();
        f.write_to(&mut buf, Precision::Complex128).unwrap();
        assert_eq!(&buf[0..4], b"HWF1");
        assert_eq!(buf.len(), 32 + 64 * 16);
        match Sampled::read_from(buf.as_slice()).unwrap() {
            Sampled::Field2(back) => assert_eq!(back, f),
            other => panic!("unexpected {other:?}"),
        }

        let spec = dft_forward(&f);
        let mut buf = Vec::new();
        spec.write_to(&mut buf, Precision::Complex64).unwrap();
        assert_eq!(buf.len(), 32 + 64 * 8);
        match Sampled::read_from(buf.as_slice()).unwrap() {
            Sampled::Spectrum2(back) => {
                for (a, b) in back.values().iter().zip(spec.values()) {
                    assert!((a - b).norm() <= 1e-6 * b.norm().max(1.0));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Sampled::read_from(&b"HWF2"[..]).is_err());
        assert!(Sampled::read_from(&buf[..40]).is_err());
    }
}
