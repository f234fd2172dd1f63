//! Best approximation on the plane `x₃ = 0`.
//!
//! Band-limited functions on the plane are exactly the traces of Herglotz
//! waves whose density lives on the upper hemisphere, so the optimal
//! approximation is the projection onto `B_k = {f : supp f̂ ⊂ B(0,k)}`.
//! Time reversal instead filters `f̂` by the `j₀` kernel multiplier
//! `2π/(k√(k²−|ξ|²))`, which boosts frequencies near the rim.
//!
//! Time reversal of a point source gives `(4π)⁻¹j₀`, while the plane
//! convolution identity uses `j₀` itself. The two differ by a constant; this
//! module follows the convolution identity and comparisons are made after
//! scale normalisation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::fieldeval::HerglotzDensity;
use crate::grid::{dft_forward, dft_inverse, interp_spectrum, Field, Grid, Spectrum};
use crate::spheremesh::SphereMesh;
use crate::{Error, Result, WaveContext};

/// Default relative clamp for the time-reversal multiplier.
pub const DEFAULT_CLAMP: f64 = 1.0 / 256.0;

/// Slack for deciding `|ξ| ≤ k`, so nodes that sit on the circle in exact
/// arithmetic are kept despite rounding in `ξ`.
const RIM_SLACK: f64 = 1e-12;

/// A field on the plane `x₃ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    field: Field<2>,
    context: WaveContext,
}

impl PlaneField {
    pub fn new(field: Field<2>, context: WaveContext) -> Self {
        PlaneField { field, context }
    }

    pub fn field(&self) -> &Field<2> {
        &self.field
    }

    pub fn context(&self) -> &WaveContext {
        &self.context
    }

    pub fn into_field(self) -> Field<2> {
        self.field
    }

    fn spectrum(&self) -> Result<Spectrum<2>> {
        let grid = self.field.grid();
        let k = self.context.k();
        let reach = (grid.samples() / 2 - 1) as f64 * grid.freq_spacing();
        if k > reach {
            return Err(Error::OutOfDomain(format!(
                "frequency grid reaches {reach}, which does not cover B(0, {k})"
            )));
        }
        Ok(dft_forward(&self.field))
    }

    fn with_spectrum(&self, spectrum: &Spectrum<2>) -> PlaneField {
        PlaneField {
            field: dft_inverse(spectrum),
            context: self.context,
        }
    }
}

fn in_disk(xi: &[f64; 2], k: f64) -> bool {
    xi[0] * xi[0] + xi[1] * xi[1] <= k * k * (1.0 + RIM_SLACK)
}

/// Orthogonal projection onto `B_k`: inverse DFT of `f̂·χ_{|ξ|≤k}`.
pub fn bandlimit_project(f: &PlaneField) -> Result<PlaneField> {
    let k = f.context.k();
    let spectrum = f.spectrum()?;
    let kept = spectrum.filtered(|xi| {
        if in_disk(&xi, k) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(f.with_spectrum(&kept))
}

fn check_mesh(mesh: &SphereMesh, context: &WaveContext) -> Result<()> {
    if (mesh.k() / context.k() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "mesh radius {} differs from wavenumber {}",
            mesh.k(),
            context.k()
        )));
    }
    Ok(())
}

/// Density of the optimal approximation,
/// `g(z) = (2π)⁻² χ_{B(0,k)}(z) f̂(z) (z₃)₊/k`.
pub fn plane_density(f: &PlaneField, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    plane_density_padded(f, mesh, 1)
}

/// [`plane_density`] with `f̂` taken from a DFT of `f` zero-padded by
/// `padding` per axis.
///
/// A target that fills its window has a spectrum sampled only at the Nyquist
/// rate `π/L`; padding refines the sampling before interpolation. With
/// padding the density approximates the continuous projection of `f`
/// extended by zero, which differs from the periodic [`bandlimit_project`]
/// near the window edges.
pub fn plane_density_padded(f: &PlaneField, mesh: Arc<SphereMesh>, padding: usize) -> Result<HerglotzDensity> {
    let k = f.context.k();
    hemisphere_density(f, mesh, padding, |fhat, z| fhat * (z[2] / k / (4.0 * PI * PI)))
}

fn hemisphere_density<F>(f: &PlaneField, mesh: Arc<SphereMesh>, padding: usize, weight: F) -> Result<HerglotzDensity>
where
    F: Fn(Complex64, &[f64; 3]) -> Complex64,
{
    check_mesh(&mesh, &f.context)?;
    let spectrum = padded_spectrum(f, padding)?;
    sample_hemisphere(&spectrum, mesh, weight)
}

fn sample_hemisphere<F>(spectrum: &Spectrum<2>, mesh: Arc<SphereMesh>, weight: F) -> Result<HerglotzDensity>
where
    F: Fn(Complex64, &[f64; 3]) -> Complex64,
{
    let values = mesh
        .centers()
        .iter()
        .map(|z| {
            if z[2] <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(weight(interp_spectrum(spectrum, &[z[0], z[1]])?, z))
        })
        .collect::<Result<Vec<_>>>()?;
    HerglotzDensity::new(mesh, values)
}

/// [`plane_density`] from a precomputed spectrum, e.g. one read from disk.
/// The wavenumber is that of the mesh.
pub fn plane_density_from_spectrum(spectrum: &Spectrum<2>, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    let k = mesh.k();
    sample_hemisphere(spectrum, mesh, |fhat, z| fhat * (z[2] / k / (4.0 * PI * PI)))
}

/// [`tr_density`] from a precomputed spectrum.
pub fn tr_density_from_spectrum(spectrum: &Spectrum<2>, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    let k = mesh.k();
    sample_hemisphere(spectrum, mesh, |fhat, _| fhat / (2.0 * PI * k * k))
}

/// Spectrum of `f` embedded in a zero field `padding` times wider.
pub fn padded_spectrum(f: &PlaneField, padding: usize) -> Result<Spectrum<2>> {
    if padding == 0 {
        return Err(Error::InvalidArgument("padding factor must be at least 1".into()));
    }
    if padding == 1 {
        return f.spectrum();
    }
    let grid = f.field.grid();
    let n = grid.samples();
    let big = Grid::<2>::new(grid.half_extent() * padding as f64, n * padding)?;
    let offset = (n * padding - n) / 2;
    let mut values = vec![Complex64::new(0.0, 0.0); big.len()];
    for (j, row) in f.field.values().chunks_exact(n).enumerate() {
        let start = (j + offset) * n * padding + offset;
        values[start..start + n].copy_from_slice(row);
    }
    PlaneField::new(Field::new(big, values)?, f.context).spectrum()
}

/// The time-reversal multiplier `2π/(k√(k²−|ξ|²))` at `|ξ| = r`, held at
/// its value at `(1−ε)k` on the annulus `(1−ε)k < r ≤ k` and zero beyond.
pub fn time_reversal_multiplier(r: f64, k: f64, epsilon: f64) -> f64 {
    if r * r > k * k * (1.0 + RIM_SLACK) {
        return 0.0;
    }
    let r = r.min((1.0 - epsilon) * k);
    2.0 * PI / (k * (k * k - r * r).sqrt())
}

/// Plane trace of the time-reversed field, `F⁻¹[m(|ξ|) f̂]`.
pub fn time_reversal_filter(f: &PlaneField, epsilon: f64) -> Result<PlaneField> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "clamp ε must lie in (0, 1), got {epsilon}"
        )));
    }
    let k = f.context.k();
    let spectrum = f.spectrum()?;
    let filtered = spectrum.filtered(|xi| {
        let r = xi[0].hypot(xi[1]);
        Complex64::new(time_reversal_multiplier(r, k, epsilon), 0.0)
    });
    Ok(f.with_spectrum(&filtered))
}

/// Time-reversal density `g(z) = (2π)⁻¹ k⁻² f̂(z) χ_{z₃>0}`.
pub fn tr_density(f: &PlaneField, mesh: Arc<SphereMesh>) -> Result<HerglotzDensity> {
    tr_density_padded(f, mesh, 1)
}

/// [`tr_density`] with a zero-padded spectrum, as in [`plane_density_padded`].
pub fn tr_density_padded(f: &PlaneField, mesh: Arc<SphereMesh>, padding: usize) -> Result<HerglotzDensity> {
    let k = f.context.k();
    hemisphere_density(f, mesh, padding, |fhat, _| fhat / (2.0 * PI * k * k))
}

/// `j₀(k|·|) * f` over the plane, via [`time_reversal_filter`] with the
/// default clamp.
pub fn j0_convolve_2d(f: &PlaneField) -> Result<PlaneField> {
    time_reversal_filter(f, DEFAULT_CLAMP)
}

/// Fraction of the spectral energy of `f` on the clamp annulus
/// `(1−ε)k < |ξ| ≤ k`. Large values mean the clamp shapes the output.
pub fn clamp_annulus_energy(f: &PlaneField, epsilon: f64) -> Result<f64> {
    let k = f.context.k();
    let spectrum = f.spectrum()?;
    let grid = spectrum.grid();
    let inner = (1.0 - epsilon) * k;
    let mut total = 0.0;
    let mut annulus = 0.0;
    for (i, v) in spectrum.values().iter().enumerate() {
        let xi = grid.freq_node(i);
        let e = v.norm_sqr();
        total += e;
        if xi[0].hypot(xi[1]) > inner && in_disk(&xi, k) {
            annulus += e;
        }
    }
    Ok(if total == 0.0 { 0.0 } else { annulus / total })
}
