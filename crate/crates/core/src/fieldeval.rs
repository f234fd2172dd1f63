//! Herglotz wave functions from densities sampled on a sphere mesh.
//!
//! The integral over `S(0,k)` is replaced by the midpoint rule of the mesh,
//! so a density is a finite sum of plane waves:
//!
//! ```text
//! u(x) = Σ_c g_c · exp(i x·z_c) · area_c
//! ```

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{Field, Grid};
use crate::spheremesh::{build_sphere_mesh, SphereMesh};
use crate::{dot, norm, Error, Result, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Density values at the triangle centers of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzDensity {
    mesh: Arc<SphereMesh>,
    values: Vec<Complex64>,
}

impl HerglotzDensity {
    pub fn new(mesh: Arc<SphereMesh>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidArgument(format!(
                "density has {} values for {} triangles",
                values.len(),
                mesh.len()
            )));
        }
        Ok(HerglotzDensity { mesh, values })
    }

    pub fn zeros(mesh: Arc<SphereMesh>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); mesh.len()];
        HerglotzDensity { mesh, values }
    }

    /// Samples `f` at every triangle center.
    pub fn from_fn<F>(mesh: Arc<SphereMesh>, f: F) -> Self
    where
        F: Fn(&Vec3) -> Complex64,
    {
        let values = mesh.centers().iter().map(f).collect();
        HerglotzDensity { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<SphereMesh> {
        &self.mesh
    }

    pub fn k(&self) -> f64 {
        self.mesh.k()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `α·self + β·other` on the same mesh.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) && self.mesh != other.mesh {
            return Err(Error::InvalidArgument("densities live on different meshes".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(HerglotzDensity {
            mesh: self.mesh.clone(),
            values,
        })
    }

    /// Discrete `L²_W` norm squared, `Σ |g_c|² / max(|z₃|, 10⁻⁶k) · area_c`.
    pub fn weighted_norm_sqr(&self) -> f64 {
        let floor = 1e-6 * self.k();
        self.values
            .iter()
            .zip(self.mesh.centers())
            .zip(self.mesh.areas())
            .map(|((g, z), a)| g.norm_sqr() / z[2].abs().max(floor) * a)
            .sum()
    }

    /// CSV rows `z1,z2,z3,re,im,area`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z1,z2,z3,re,im,area")?;
        for ((g, z), a) in self
            .values
            .iter()
            .zip(self.mesh.centers())
            .zip(self.mesh.areas())
        {
            writeln!(w, "{},{},{},{},{},{}", z[0], z[1], z[2], g.re, g.im, a)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a density CSV written by [`HerglotzDensity::write_csv`].
    ///
    /// The mesh is regenerated from the row count and the radius of the
    /// centers; rows must match that mesh.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |d: String| Error::format("density CSV", d);
        let mut rows = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 6 {
                return Err(bad(format!("line {}: expected 6 columns", lineno + 1)));
            }
            rows.push(cols);
        }
        if rows.len() < 8 {
            return Err(bad(format!("only {} rows", rows.len())));
        }
        let k = rows.iter().map(|c| norm(&[c[0], c[1], c[2]])).sum::<f64>() / rows.len() as f64;
        let mesh = build_sphere_mesh(k, rows.len())?;
        if mesh.len() != rows.len() {
            return Err(bad(format!(
                "{} rows do not correspond to a generated mesh",
                rows.len()
            )));
        }
        for (i, (c, z)) in rows.iter().zip(mesh.centers()).enumerate() {
            let d = norm(&[c[0] - z[0], c[1] - z[1], c[2] - z[2]]);
            if d > 1e-9 * k || (c[5] - mesh.areas()[i]).abs() > 1e-9 * mesh.areas()[i] {
                return Err(bad(format!("row {} does not match the regenerated mesh", i + 1)));
            }
        }
        let values = rows.iter().map(|c| Complex64::new(c[3], c[4])).collect();
        Ok(HerglotzDensity {
            mesh: Arc::new(mesh),
            values,
        })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    fn weights(&self) -> impl Iterator<Item = (Complex64, &Vec3)> + '_ {
        self.values
            .iter()
            .zip(self.mesh.areas())
            .zip(self.mesh.centers())
            .map(|((g, a), z)| (g * a, z))
    }
}

/// A point on the reservoir wall with its outward normal and impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    position: Vec3,
    normal: Vec3,
    impedance: Complex64,
}

impl BoundarySample {
    pub fn new(position: Vec3, normal: Vec3, impedance: Complex64) -> Result<Self> {
        if (norm(&normal) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "boundary normal must be unit length, |n| = {}",
                norm(&normal)
            )));
        }
        Ok(BoundarySample {
            position,
            normal,
            impedance,
        })
    }

    pub fn position(&self) -> &Vec3 {
        &self.position
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn impedance(&self) -> Complex64 {
        self.impedance
    }
}

/// `u(x)` at each point by direct summation over triangles.
pub fn eval_herglotz(g: &HerglotzDensity, points: &[Vec3]) -> Vec<Complex64> {
    points
        .par_iter()
        .map(|x| {
            g.weights()
                .map(|(w, z)| w * Complex64::cis(dot(x, z)))
                .sum()
        })
        .collect()
}

/// `∇u(x)` at each point.
pub fn grad_herglotz(g: &HerglotzDensity, points: &[Vec3]) -> Vec<[Complex64; 3]> {
    points
        .par_iter()
        .map(|x| {
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for (w, z) in g.weights() {
                let t = w * Complex64::cis(dot(x, z)) * I;
                for a in 0..3 {
                    acc[a] += t * z[a];
                }
            }
            acc
        })
        .collect()
}

/// Transducer excitation `φ = n·∇u + ikαu` at each boundary sample.
pub fn boundary_excitation(g: &HerglotzDensity, samples: &[BoundarySample]) -> Vec<Complex64> {
    let points: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
    let values = eval_herglotz(g, &points);
    let grads = grad_herglotz(g, &points);
    let k = g.k();
    samples
        .iter()
        .zip(values.iter().zip(&grads))
        .map(|(s, (u, du))| {
            let normal_derivative: Complex64 = (0..3).map(|a| du[a] * s.normal[a]).sum();
            normal_derivative + I * k * s.impedance * u
        })
        .collect()
}

fn axis_phases(coords: &[f64], z: f64) -> Vec<Complex64> {
    coords.iter().map(|&x| Complex64::cis(x * z)).collect()
}

/// Evaluates `u(x₁, x₂, x₃)` on a 2D grid at fixed height `x₃`.
///
/// Separates `e^{i x·z}` into per-axis factors, so each triangle costs one
/// complex multiply-add per node instead of a complex exponential.
pub fn eval_on_plane(g: &HerglotzDensity, grid: &Grid<2>, x3: f64) -> Field<2> {
    let n = grid.samples();
    let coords: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (w, z) in g.weights() {
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let w = w * Complex64::cis(x3 * z[2]);
        let a = axis_phases(&coords, z[0]);
        let b = axis_phases(&coords, z[1]);
        for (row, bj) in out.chunks_exact_mut(n).zip(&b) {
            let t = w * bj;
            for (slot, ai) in row.iter_mut().zip(&a) {
                *slot += t * ai;
            }
        }
    }
    Field::new(*grid, out).expect("grid-sized buffer")
}

/// Evaluates `u` on every node of a 3D grid.
pub fn eval_on_grid(g: &HerglotzDensity, grid: &Grid<3>) -> Field<3> {
    let n = grid.samples();
    let coords: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (w, z) in g.weights() {
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let a = axis_phases(&coords, z[0]);
        let b = axis_phases(&coords, z[1]);
        let c = axis_phases(&coords, z[2]);
        for (slab, cl) in out.chunks_exact_mut(n * n).zip(&c) {
            let wc = w * cl;
            for (row, bj) in slab.chunks_exact_mut(n).zip(&b) {
                let t = wc * bj;
                for (slot, ai) in row.iter_mut().zip(&a) {
                    *slot += t * ai;
                }
            }
        }
    }
    Field::new(*grid, out).expect("grid-sized buffer")
}

/// Finite-difference Helmholtz residual `max|Δ_h u + k²u| / (k²·max|u|)`
/// over interior nodes, using the 7-point Laplacian.
///
/// The residual of an exact Helmholtz solution is pure discretisation error,
/// `O((kh)²)`.
pub fn helmholtz_residual(g: &HerglotzDensity, grid: &Grid<3>) -> Result<f64> {
    let k = g.k();
    let h = grid.spacing();
    let wavelength = 2.0 * std::f64::consts::PI / k;
    if h > wavelength / 8.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {h} exceeds λ/8 = {}",
            wavelength / 8.0
        )));
    }
    let u = eval_on_grid(g, grid);
    let values = u.values();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let n = grid.samples();
    let idx = |i: usize, j: usize, l: usize| i + n * (j + n * l);
    let mut worst: f64 = 0.0;
    for l in 1..n - 1 {
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let c = values[idx(i, j, l)];
                let lap = values[idx(i + 1, j, l)]
                    + values[idx(i - 1, j, l)]
                    + values[idx(i, j + 1, l)]
                    + values[idx(i, j - 1, l)]
                    + values[idx(i, j, l + 1)]
                    + values[idx(i, j, l - 1)]
                    - c * 6.0;
                worst = worst.max((lap / (h * h) + c * (k * k)).norm());
            }
        }
    }
    Ok(worst / (k * k * peak))
}
