//! Best approximation on a ball `B(0,R)` by spherical wave functions
//! `u_nm(x) = j_n(k|x|) Y_nm(x/|x|)`.
//!
//! By Funk–Hecke, `u_nm(x) = (−i)ⁿ(4πk²)⁻¹ ∫_{S(0,k)} e^{ix·z} Y_nm(z/k) dS(z)`,
//! so inner products can be measured in frequency space,
//!
//! ```text
//! ⟨u_nm, f⟩ = iⁿ (4πk²)⁻¹ ∫_{S(0,k)} conj(Y_nm(z/k)) f̂(z) dS(z)
//! ```
//!
//! with the inner product conjugate-linear in its first argument. The
//! truncated projection `f_{R,N} = Σ ⟨u_nm,f⟩/‖u_nm‖² u_nm` is a Herglotz wave
//! with density `g = (4πk²)⁻² Σ M_nm/‖u_nm‖² Y_nm(z/k)`, where `M_nm` are the
//! moments above. As `R` grows, `8π²R·g` tends to the degree-`N` harmonic
//! projection of `f̂` on the sphere, which motivates using `f̂` itself as the
//! density ([`asymptotic_density`]).

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fieldeval::HerglotzDensity;
use crate::grid::{interp_spectrum, Spectrum};
use crate::specfun::{mode_count, radial_bessel_norm, sph_bessel_j_all, sph_harm_all, ModalIndex, MAX_DEGREE};
use crate::spheremesh::SphereMesh;
use crate::{norm, Error, Result};

/// `iⁿ`.
fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Inner products `⟨u_nm, f⟩` and norms `‖u_nm‖²` on `B(0,R)`, indexed by
/// [`ModalIndex::flat`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoeffs {
    max_degree: usize,
    k: f64,
    radius: f64,
    inner: Vec<Complex64>,
    norms: Vec<f64>,
}

impl ModalCoeffs {
    /// Computes the norms for the given inner products.
    pub fn new(max_degree: usize, k: f64, radius: f64, inner: Vec<Complex64>) -> Result<Self> {
        if max_degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(max_degree));
        }
        if inner.len() != mode_count(max_degree) {
            return Err(Error::InvalidArgument(format!(
                "{} inner products for degree {max_degree}, expected {}",
                inner.len(),
                mode_count(max_degree)
            )));
        }
        let mut norms = Vec::with_capacity(inner.len());
        for n in 0..=max_degree {
            let v = radial_bessel_norm(n, k, radius)?;
            norms.extend(std::iter::repeat_n(v, 2 * n + 1));
        }
        Ok(ModalCoeffs {
            max_degree,
            k,
            radius,
            inner,
            norms,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn inner(&self) -> &[Complex64] {
        &self.inner
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Projection coefficient `⟨u_nm,f⟩ / ‖u_nm‖²`.
    pub fn ratio(&self, idx: ModalIndex) -> Complex64 {
        self.inner[idx.flat()] / self.norms[idx.flat()]
    }

    /// CSV rows `n,m,re,im,norm`, preceded by a `# k=…,R=…` line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# k={},R={}", self.k, self.radius)?;
        writeln!(w, "n,m,re,im,norm")?;
        for idx in ModalIndex::all_up_to(self.max_degree) {
            let v = self.inner[idx.flat()];
            writeln!(w, "{},{},{},{},{}", idx.n(), idx.m(), v.re, v.im, self.norms[idx.flat()])?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |d: String| Error::format("modal CSV", d);
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
        let mut k = None;
        let mut radius = None;
        for part in first.trim_start_matches('#').split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("bad header {first:?}")))?;
            let value: f64 = value.trim().parse().map_err(|_| bad(format!("bad header {first:?}")))?;
            match key.trim() {
                "k" => k = Some(value),
                "R" => radius = Some(value),
                other => return Err(bad(format!("unknown header key {other}"))),
            }
        }
        let (k, radius) = k.zip(radius).ok_or_else(|| bad("header needs k and R".into()))?;
        let mut inner = Vec::new();
        for (i, line) in lines.skip(1).enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(bad(format!("row {}: expected 5 columns", i + 1)));
            }
            let n: usize = cols[0].parse().map_err(|_| bad(format!("row {}: n", i + 1)))?;
            let m: i64 = cols[1].parse().map_err(|_| bad(format!("row {}: m", i + 1)))?;
            if ModalIndex::new(n, m)?.flat() != inner.len() {
                return Err(bad(format!("row {}: modes out of order", i + 1)));
            }
            let re: f64 = cols[2].parse().map_err(|_| bad(format!("row {}: re", i + 1)))?;
            let im: f64 = cols[3].parse().map_err(|_| bad(format!("row {}: im", i + 1)))?;
            inner.push(Complex64::new(re, im));
        }
        let count = inner.len();
        let max_degree = (count as f64).sqrt() as usize;
        if max_degree == 0 || mode_count(max_degree - 1) != count {
            return Err(bad(format!("{count} rows is not a complete set of modes")));
        }
        ModalCoeffs::new(max_degree - 1, k, radius, inner)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn sphere_samples(spectrum: &Spectrum<3>, mesh: &SphereMesh) -> Result<Vec<Complex64>> {
    mesh.centers().iter().map(|z| interp_spectrum(spectrum, z)).collect()
}

/// `M_nm = Σ_c conj(Y_nm(z_c/k)) f̂(z_c) area_c` for `n ≤ N`.
pub fn spherical_harmonic_moments(
    spectrum: &Spectrum<3>,
    mesh: &SphereMesh,
    max_degree: usize,
) -> Result<Vec<Complex64>> {
    if max_degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(max_degree));
    }
    let samples = sphere_samples(spectrum, mesh)?;
    let k = mesh.k();
    // Per-triangle harmonics in parallel, then a fixed-order sum so results
    // do not depend on the thread count.
    let terms: Vec<Vec<Complex64>> = mesh
        .centers()
        .par_iter()
        .zip(samples.par_iter().zip(mesh.areas().par_iter()))
        .map(|(z, (s, a))| {
            let dir = [z[0] / k, z[1] / k, z[2] / k];
            sph_harm_all(max_degree, &dir)
                .into_iter()
                .map(|y| y.conj() * s * a)
                .collect()
        })
        .collect();
    let mut moments = vec![Complex64::new(0.0, 0.0); mode_count(max_degree)];
    for t in &terms {
        for (acc, v) in moments.iter_mut().zip(t) {
            *acc += v;
        }
    }
    Ok(moments)
}

/// `⟨u_nm, f⟩ = iⁿ M_nm / (4πk²)` together with the norms on `B(0,R)`.
///
/// For even `n` this agrees with dividing by `iⁿ`; for odd `n` the sign
/// follows the Jacobi–Anger expansion `e^{ix·z} = 4π Σ iⁿ j_n Y_nm conj(Y_nm)`.
pub fn modal_inner_products(moments: &[Complex64], max_degree: usize, k: f64, radius: f64) -> Result<ModalCoeffs> {
    if moments.len() < mode_count(max_degree) {
        return Err(Error::InvalidArgument(format!(
            "{} moments do not cover degree {max_degree}",
            moments.len()
        )));
    }
    let inner = ModalIndex::all_up_to(max_degree)
        .map(|idx| moments[idx.flat()] * i_pow(idx.n()) / (4.0 * std::f64::consts::PI * k * k))
        .collect();
    ModalCoeffs::new(max_degree, k, radius, inner)
}

/// Evaluates `f_{R,N}(x) = Σ ⟨u_nm,f⟩/‖u_nm‖² j_n(k|x|) Y_nm(x/|x|)`.
pub fn project_ball(c: &ModalCoeffs, points: &[[f64; 3]]) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|x| {
            let r = norm(x);
            // Only Y_00 survives at the origin, so any direction works.
            let dir = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0, 0.0, 1.0] };
            let radial = sph_bessel_j_all(c.max_degree, c.k * r)?;
            let harmonics = sph_harm_all(c.max_degree, &dir);
            Ok(ModalIndex::all_up_to(c.max_degree)
                .map(|idx| c.ratio(idx) * harmonics[idx.flat()] * radial[idx.n()])
                .sum())
        })
        .collect()
}

/// Density of the finite-`R` projection,
/// `g(z) = (4πk²)⁻² Σ M_nm/‖u_nm‖² Y_nm(z/k)`.
pub fn density_from_modal(c: &ModalCoeffs, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    if (mesh.k() / c.k - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "mesh radius {} differs from wavenumber {}",
            mesh.k(),
            c.k
        )));
    }
    let k = c.k;
    let scale = 4.0 * std::f64::consts::PI * k * k;
    // M_nm/(4πk²)² = (−i)ⁿ ⟨u_nm,f⟩/(4πk²).
    let weights: Vec<Complex64> = ModalIndex::all_up_to(c.max_degree)
        .map(|idx| c.ratio(idx) / i_pow(idx.n()) / scale)
        .collect();
    let values = mesh
        .centers()
        .par_iter()
        .map(|z| {
            let dir = [z[0] / k, z[1] / k, z[2] / k];
            sph_harm_all(c.max_degree, &dir)
                .iter()
                .zip(&weights)
                .map(|(y, w)| y * w)
                .sum()
        })
        .collect();
    HerglotzDensity::new(mesh, values)
}

/// The volumetric pipeline density: `g(z_c) = f̂(z_c)` by interpolation.
///
/// Off from the exact projection by a scale factor, so results are compared
/// through their zero level sets.
pub fn asymptotic_density(spectrum: &Spectrum<3>, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    let values = sphere_samples(spectrum, &mesh)?;
    HerglotzDensity::new(mesh, values)
}
