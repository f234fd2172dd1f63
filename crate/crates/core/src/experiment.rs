//! Config-driven reproduction of the numerical experiments.
//!
//! A run builds the target, transforms it, computes a density with the chosen
//! method, evaluates the field on slices and writes level sets, metrics and
//! rasters. Every artifact is listed with its SHA-256 in `manifest.json`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    least_squares_scale, nodal_distance, rel_l2_error, render_heatmap, render_level_sets, render_mollweide,
    zero_level_set, LevelSet, Part, Slice, SLICE_SAMPLES,
};
use crate::ballapprox::{asymptotic_density, density_from_modal, modal_inner_products, spherical_harmonic_moments};
use crate::error::StageExt;
use crate::fieldeval::HerglotzDensity;
use crate::grid::{dft_forward, Field, Grid, Precision, Spectrum};
use crate::planeapprox::{
    bandlimit_project, clamp_annulus_energy, plane_density_padded, time_reversal_filter, tr_density_padded,
    PlaneField, DEFAULT_CLAMP,
};
use crate::raster::{BinaryImage, Polarity, RgbImage};
use crate::spheremesh::{build_sphere_mesh, SphereMesh};
use crate::targets::{bitmap_target, gaussian_target, tetra_target, TetraSpec};
use crate::{Error, Result, WaveContext};

/// Built-in U logo raster.
pub const U_LOGO_PGM: &[u8] = include_bytes!("../assets/u_logo.pgm");

pub const DESK_SAMPLES_2D: usize = 256;
pub const PAPER_SAMPLES_2D: usize = 512;
pub const DESK_SAMPLES_3D: usize = 128;
pub const PAPER_SAMPLES_3D: usize = 256;

fn five() -> f64 {
    5.0
}

fn six() -> f64 {
    6.0
}

fn one() -> f64 {
    1.0
}

fn default_clamp() -> f64 {
    DEFAULT_CLAMP
}

/// The function to approximate. Lengths are in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetConfig {
    /// `|T| χ_B − |B| χ_T` for a regular tetrahedron.
    Tetra {
        #[serde(default = "five")]
        circumradius: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    /// ±1 bitmap; the built-in U logo when `path` is absent.
    Bitmap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default = "six")]
        width: f64,
        #[serde(default)]
        polarity: Polarity,
    },
    /// Centered Gaussian in the method's dimension; `center` defaults to the origin.
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig::Bitmap {
            path: None,
            width: six(),
            polarity: Polarity::Bright,
        }
    }
}

/// How the density is obtained.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Method {
    /// `g = f̂` on the sphere, the large-ball limit.
    BallAsymptotic,
    /// Best approximation in `B(0, R)` by spherical waves up to degree `N`.
    BallModal { max_degree: usize, radius: f64 },
    /// Optimal approximation on the plane `x₃ = 0`.
    #[default]
    PlaneProjection,
    /// Time reversal restricted to the plane.
    PlaneTimeReversal {
        #[serde(default = "default_clamp")]
        epsilon: f64,
    },
}

impl Method {
    pub fn is_planar(&self) -> bool {
        matches!(self, Method::PlaneProjection | Method::PlaneTimeReversal { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::BallAsymptotic => "ball-asymptotic",
            Method::BallModal { .. } => "ball-modal",
            Method::PlaneProjection => "plane-projection",
            Method::PlaneTimeReversal { .. } => "plane-time-reversal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_extent: f64,
    /// Samples per axis; desk or paper scale by dimension when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_extent: 5.0,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SliceConfig {
    pub offsets: Vec<f64>,
    pub half_extent: f64,
    /// Samples per axis. Defaults to 100 for volumetric methods and to the
    /// target grid for planar ones, so the `x₃ = 0` slice can be compared
    /// with the projection node by node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            offsets: vec![-1.0, 0.0, 1.0],
            half_extent: 5.0,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    /// Colour range for field rasters. Planar runs default to `[−2, 1.5]`;
    /// volumetric runs draw slices divided by their joint peak on `[−1, 1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_range: Option<[f64; 2]>,
    /// Colour range for the Mollweide maps; symmetric about the peak modulus
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_range: Option<[f64; 2]>,
    pub mollweide_width: usize,
    pub contour_size: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            field_range: None,
            density_range: None,
            mollweide_width: 720,
            contour_size: 512,
        }
    }
}

/// A full experiment. Every field has a default; lengths are in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub wavelength: f64,
    pub mesh_triangles: usize,
    pub spectral_padding: usize,
    pub paper_scale: bool,
    /// Also write the volumetric target and spectrum.
    pub save_volumes: bool,
    /// Where artifacts go. Not echoed into the written config, so runs that
    /// differ only in location hash identically.
    #[serde(skip_serializing)]
    pub output: PathBuf,
    pub target: TargetConfig,
    pub method: Method,
    pub grid: GridConfig,
    pub slices: SliceConfig,
    pub render: RenderConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            wavelength: 1.0,
            mesh_triangles: 7292,
            spectral_padding: 1,
            paper_scale: false,
            save_volumes: false,
            output: PathBuf::from("out"),
            target: TargetConfig::default(),
            method: Method::default(),
            grid: GridConfig::default(),
            slices: SliceConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format("experiment config", e.to_string()))
    }

    /// Reads a config file; a relative bitmap path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let TargetConfig::Bitmap { path: Some(p), .. } = &mut config.target {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn dimension(&self) -> usize {
        if self.method.is_planar() {
            2
        } else {
            3
        }
    }

    /// Samples per axis of the target grid.
    pub fn grid_samples(&self) -> usize {
        self.grid.samples.unwrap_or(match (self.dimension(), self.paper_scale) {
            (2, false) => DESK_SAMPLES_2D,
            (2, true) => PAPER_SAMPLES_2D,
            (_, false) => DESK_SAMPLES_3D,
            (_, true) => PAPER_SAMPLES_3D,
        })
    }

    pub fn slice_samples(&self) -> usize {
        self.slices.samples.unwrap_or(if self.method.is_planar() {
            self.grid_samples()
        } else {
            SLICE_SAMPLES
        })
    }

    /// The tetrahedron of a tetra target, scaled to physical units.
    pub fn tetra(&self) -> Result<Option<TetraSpec>> {
        match &self.target {
            TargetConfig::Tetra { circumradius, center } => Ok(Some(TetraSpec::new(
                circumradius * self.wavelength,
                center.map(|c| c * self.wavelength),
            )?)),
            _ => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return bad(format!("wavelength must be positive, got {}", self.wavelength));
        }
        let n = self.grid_samples();
        if !n.is_power_of_two() || n < 8 {
            return bad(format!("grid samples must be a power of two ≥ 8, got {n}"));
        }
        if self.spectral_padding == 0 {
            return bad("spectral padding must be at least 1".into());
        }
        if self.slices.offsets.iter().any(|x| !x.is_finite()) {
            return bad("slice offsets must be finite".into());
        }
        for range in [self.render.field_range, self.render.density_range].into_iter().flatten() {
            if !(range[0] < range[1]) {
                return bad(format!("colour range {range:?} needs min < max"));
            }
        }
        match (&self.target, self.method.is_planar()) {
            (TargetConfig::Tetra { .. }, true) => return bad("the tetra target needs a ball method".into()),
            (TargetConfig::Bitmap { .. }, false) => return bad("the bitmap target needs a plane method".into()),
            (TargetConfig::Gaussian { center, .. }, _) if !center.is_empty() && center.len() != self.dimension() => {
                return bad(format!(
                    "Gaussian center has {} coordinates, expected {}",
                    center.len(),
                    self.dimension()
                ))
            }
            _ => {}
        }
        if let Method::BallModal { max_degree, radius } = self.method {
            if max_degree > crate::specfun::MAX_DEGREE || !(radius > 0.0) {
                return bad(format!("ball-modal needs 0 ≤ N ≤ {} and R > 0", crate::specfun::MAX_DEGREE));
            }
        }
        Ok(())
    }
}

/// One written artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn get(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.path == path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetrics {
    pub x3: f64,
    pub peak: f64,
    /// Mean distance between the slice's nodal set and the target's; absent
    /// when either is empty.
    pub nodal_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub method: String,
    pub grid_samples: usize,
    pub mesh_triangles: usize,
    pub density_weighted_norm: f64,
    pub slices: Vec<SliceMetrics>,
    /// `‖u(·,0) − P f‖/‖P f‖`, planar runs whose slice grid is the target grid.
    pub plane_identity: Option<f64>,
    /// `‖u(·,λ) − u(·,−λ)‖/‖u(·,−λ)‖` when both slices exist.
    pub slice_asymmetry: Option<f64>,
    /// `min_α ‖α P f − f‖/‖f‖` for the planar filter `P` of the method.
    pub approximation_error: Option<f64>,
    /// Spectral energy fraction on the time-reversal clamp annulus.
    pub clamp_annulus_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub metrics: Metrics,
}

/// Collects artifacts, writes them and records their hashes.
struct Artifacts {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Artifacts {
    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    fn field<const D: usize>(&mut self, name: &str, f: &Field<D>) -> Result<()> {
        let mut buf = Vec::new();
        f.write_to(&mut buf, Precision::Complex128)
            .map_err(|e| Error::io(self.dir.join(name), e))?;
        self.put(name, buf)
    }

    fn spectrum<const D: usize>(&mut self, name: &str, s: &Spectrum<D>) -> Result<()> {
        let mut buf = Vec::new();
        s.write_to(&mut buf, Precision::Complex128)
            .map_err(|e| Error::io(self.dir.join(name), e))?;
        self.put(name, buf)
    }

    fn image(&mut self, name: &str, img: &RgbImage) -> Result<()> {
        let mut buf = Vec::new();
        img.write_png(&mut buf)?;
        self.put(name, buf)
    }

    fn level_set(&mut self, name: &str, set: &LevelSet) -> Result<()> {
        let mut buf = Vec::new();
        set.write_text(&mut buf)
            .map_err(|e| Error::io(self.dir.join(name), e))?;
        self.put(name, buf)
    }

    fn finish(mut self) -> Result<Manifest> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest { files: self.entries };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// File-name stem of a slice, e.g. `slice_-1.00`.
pub fn slice_stem(x3: f64) -> String {
    format!("slice_{x3:+.2}")
}

const BLACK: [u8; 3] = [0, 0, 0];
const RED: [u8; 3] = [220, 0, 0];

fn load_bitmap(path: &Option<PathBuf>, polarity: Polarity) -> Result<BinaryImage> {
    match path {
        Some(p) => BinaryImage::load(p, polarity),
        None => BinaryImage::decode(U_LOGO_PGM, polarity),
    }
}

fn density_range(config: &ExperimentConfig, g: &HerglotzDensity) -> [f64; 2] {
    config.render.density_range.unwrap_or_else(|| {
        let peak = g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let peak = if peak > 0.0 { peak } else { 1.0 };
        [-peak, peak]
    })
}

/// Samples a planar target (bitmap or Gaussian) on `grid`.
pub fn plane_target(config: &ExperimentConfig, grid: &Grid<2>) -> Result<Field<2>> {
    let lam = config.wavelength;
    match &config.target {
        TargetConfig::Bitmap { path, width, polarity } => {
            let image = load_bitmap(path, *polarity)?;
            bitmap_target(&image, width * lam, grid)
        }
        TargetConfig::Gaussian { sigma, center } => {
            let c = gaussian_center::<2>(center, lam)?;
            gaussian_target(sigma * lam, &c, grid)
        }
        TargetConfig::Tetra { .. } => Err(Error::InvalidArgument("the tetra target is volumetric".into())),
    }
}

/// Samples a volumetric target (tetra or Gaussian) on `grid`.
pub fn volume_target(config: &ExperimentConfig, grid: &Grid<3>) -> Result<Field<3>> {
    let lam = config.wavelength;
    match &config.target {
        TargetConfig::Tetra { .. } => tetra_target(&config.tetra()?.expect("tetra target"), grid),
        TargetConfig::Gaussian { sigma, center } => {
            let c = gaussian_center::<3>(center, lam)?;
            gaussian_target(sigma * lam, &c, grid)
        }
        TargetConfig::Bitmap { .. } => Err(Error::InvalidArgument("the bitmap target is planar".into())),
    }
}

fn gaussian_center<const D: usize>(center: &[f64], lam: f64) -> Result<[f64; D]> {
    if center.is_empty() {
        return Ok([0.0; D]);
    }
    if center.len() != D {
        return Err(Error::InvalidArgument(format!(
            "Gaussian center has {} coordinates, expected {D}",
            center.len()
        )));
    }
    Ok(std::array::from_fn(|i| center[i] * lam))
}

/// Runs the experiment and writes everything under `config.output`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate().stage("config")?;
    std::fs::create_dir_all(&config.output).map_err(|e| Error::io(&config.output, e))?;
    let mut out = Artifacts {
        dir: config.output.clone(),
        entries: Vec::new(),
    };
    out.put("config.toml", config.to_toml().into_bytes())?;
    let context = WaveContext::from_wavelength(config.wavelength).stage("config")?;
    let mesh = Arc::new(build_sphere_mesh(context.k(), config.mesh_triangles).stage("mesh")?);
    let metrics = if config.method.is_planar() {
        run_plane(config, context, mesh, &mut out)?
    } else {
        run_ball(config, context, mesh, &mut out)?
    };
    let text = serde_json::to_string_pretty(&metrics).expect("metrics serialise");
    out.put("metrics.json", (text + "\n").into_bytes())?;
    Ok(RunOutput {
        manifest: out.finish()?,
        metrics,
    })
}

fn write_density(config: &ExperimentConfig, g: &HerglotzDensity, out: &mut Artifacts) -> Result<()> {
    let mut csv = Vec::new();
    g.write_csv(&mut csv)
        .map_err(|e| Error::io(out.dir.join("density.csv"), e))?;
    out.put("density.csv", csv)?;
    let [lo, hi] = density_range(config, g);
    let width = config.render.mollweide_width;
    out.image("mollweide_re.png", &render_mollweide(g, lo, hi, Part::Real, width).stage("render")?)?;
    out.image("mollweide_im.png", &render_mollweide(g, lo, hi, Part::Imag, width).stage("render")?)
}

fn slice_pair_asymmetry(slices: &[Slice], wavelength: f64) -> Result<Option<f64>> {
    let find = |x: f64| slices.iter().find(|s| (s.x3 - x).abs() < 1e-12 * wavelength.max(1.0));
    match (find(wavelength), find(-wavelength)) {
        (Some(up), Some(down)) => Ok(Some(rel_l2_error(&up.field, &down.field)?)),
        _ => Ok(None),
    }
}

fn run_plane(
    config: &ExperimentConfig,
    context: WaveContext,
    mesh: Arc<SphereMesh>,
    out: &mut Artifacts,
) -> Result<Metrics> {
    let lam = config.wavelength;
    let grid = Grid::<2>::new(config.grid.half_extent * lam, config.grid_samples()).stage("grid")?;
    let f = plane_target(config, &grid).stage("target")?;
    let target = PlaneField::new(f.clone(), context);
    out.field("target.hwf", &f)?;
    out.spectrum("spectrum.hwf", &dft_forward(&f))?;

    let (filtered, density, annulus) = match config.method {
        Method::PlaneProjection => (
            bandlimit_project(&target).stage("projection")?,
            plane_density_padded(&target, mesh, config.spectral_padding).stage("density")?,
            None,
        ),
        Method::PlaneTimeReversal { epsilon } => (
            time_reversal_filter(&target, epsilon).stage("time reversal")?,
            tr_density_padded(&target, mesh, config.spectral_padding).stage("density")?,
            Some(clamp_annulus_energy(&target, epsilon).stage("time reversal")?),
        ),
        _ => unreachable!("planar method"),
    };
    let filtered = filtered.into_field();
    out.field("filtered.hwf", &filtered)?;
    let scale = least_squares_scale(&filtered, &f).stage("metrics")?;
    let approximation_error = rel_l2_error(&filtered.scaled(scale), &f).stage("metrics")?;
    write_density(config, &density, out)?;

    let range = config.render.field_range.unwrap_or([-2.0, 1.5]);
    let target_set = zero_level_set(&f);
    let filtered_set = zero_level_set(&filtered);
    out.level_set("target_levelset.txt", &target_set)?;
    out.level_set("filtered_levelset.txt", &filtered_set)?;
    out.image("target.png", &render_heatmap(&f, range[0], range[1]).stage("render")?)?;
    out.image("filtered.png", &render_heatmap(&filtered, range[0], range[1]).stage("render")?)?;
    let half = grid.half_extent();
    let size = config.render.contour_size;
    out.image(
        "filtered_contours.png",
        &render_level_sets(&[(&target_set, BLACK), (&filtered_set, RED)], half, size).stage("render")?,
    )?;

    let mut slices = Vec::new();
    let mut slice_metrics = Vec::new();
    let mut plane_identity = None;
    for &x3 in &config.slices.offsets {
        let s = Slice::evaluate(&density, config.slices.half_extent * lam, config.slice_samples(), x3 * lam)
            .stage("slices")?;
        let stem = slice_stem(x3);
        let set = zero_level_set(&s.field);
        out.field(&format!("{stem}.hwf"), &s.field)?;
        out.level_set(&format!("{stem}_levelset.txt"), &set)?;
        out.image(
            &format!("{stem}.png"),
            &render_heatmap(&s.field, range[0], range[1]).stage("render")?,
        )?;
        out.image(
            &format!("{stem}_contours.png"),
            &render_level_sets(&[(&target_set, BLACK), (&set, RED)], s.field.grid().half_extent(), size)
                .stage("render")?,
        )?;
        if x3 == 0.0 && s.field.grid() == &grid {
            plane_identity = Some(rel_l2_error(&s.field, &filtered).stage("metrics")?);
        }
        slice_metrics.push(SliceMetrics {
            x3,
            peak: s.field.values().iter().map(|v| v.norm()).fold(0.0, f64::max),
            nodal_distance: if target_set.is_empty() || set.is_empty() {
                None
            } else {
                Some(nodal_distance(&target_set, &set).stage("metrics")?)
            },
        });
        slices.push(s);
    }
    Ok(Metrics {
        method: config.method.name().into(),
        grid_samples: grid.samples(),
        mesh_triangles: density.mesh().len(),
        density_weighted_norm: density.weighted_norm_sqr().sqrt(),
        slices: slice_metrics,
        plane_identity,
        slice_asymmetry: slice_pair_asymmetry(&slices, lam).stage("metrics")?,
        approximation_error: Some(approximation_error),
        clamp_annulus_energy: annulus,
    })
}

fn run_ball(
    config: &ExperimentConfig,
    context: WaveContext,
    mesh: Arc<SphereMesh>,
    out: &mut Artifacts,
) -> Result<Metrics> {
    let lam = config.wavelength;
    let grid = Grid::<3>::new(config.grid.half_extent * lam, config.grid_samples()).stage("grid")?;
    let tetra = config.tetra().stage("target")?;
    let f = volume_target(config, &grid).stage("target")?;
    let spectrum = dft_forward(&f);
    if config.save_volumes {
        out.field("target.hwf", &f)?;
        out.spectrum("spectrum.hwf", &spectrum)?;
    }
    drop(f);

    let density = match config.method {
        Method::BallAsymptotic => asymptotic_density(&spectrum, mesh).stage("density")?,
        Method::BallModal { max_degree, radius } => {
            let moments = spherical_harmonic_moments(&spectrum, &mesh, max_degree).stage("density")?;
            let coeffs = modal_inner_products(&moments, max_degree, context.k(), radius * lam).stage("density")?;
            let mut csv = Vec::new();
            coeffs
                .write_csv(&mut csv)
                .map_err(|e| Error::io(out.dir.join("modal.csv"), e))?;
            out.put("modal.csv", csv)?;
            density_from_modal(&coeffs, mesh).stage("density")?
        }
        _ => unreachable!("ball method"),
    };
    drop(spectrum);
    write_density(config, &density, out)?;

    let slices: Vec<Slice> = config
        .slices
        .offsets
        .iter()
        .map(|&x3| Slice::evaluate(&density, config.slices.half_extent * lam, config.slice_samples(), x3 * lam))
        .collect::<Result<_>>()
        .stage("slices")?;
    // The asymptotic density is off by a scale factor, so slices are drawn
    // relative to their joint peak.
    let peak = slices
        .iter()
        .flat_map(|s| s.field.values().iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    let norm = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let range = config.render.field_range.unwrap_or([-1.0, 1.0]);
    let size = config.render.contour_size;
    let mut slice_metrics = Vec::new();
    for s in &slices {
        let stem = slice_stem(s.x3 / lam);
        let set = zero_level_set(&s.field);
        out.field(&format!("{stem}.hwf"), &s.field)?;
        out.level_set(&format!("{stem}_levelset.txt"), &set)?;
        let shown = s.field.scaled(Complex64::new(norm, 0.0));
        out.image(
            &format!("{stem}.png"),
            &render_heatmap(&shown, range[0], range[1]).stage("render")?,
        )?;
        let reference = tetra
            .and_then(|t| t.section(s.x3))
            .map(LevelSet::from_polygon)
            .transpose()
            .stage("analysis")?;
        let mut layers = Vec::new();
        if let Some(r) = &reference {
            out.level_set(&format!("{stem}_reference.txt"), r)?;
            layers.push((r, BLACK));
        }
        layers.push((&set, RED));
        out.image(
            &format!("{stem}_contours.png"),
            &render_level_sets(&layers, s.field.grid().half_extent(), size).stage("render")?,
        )?;
        let distance = match &reference {
            Some(r) if !set.is_empty() => Some(nodal_distance(r, &set).stage("metrics")?),
            _ => None,
        };
        slice_metrics.push(SliceMetrics {
            x3: s.x3 / lam,
            peak: s.field.values().iter().map(|v| v.norm()).fold(0.0, f64::max),
            nodal_distance: distance,
        });
    }
    Ok(Metrics {
        method: config.method.name().into(),
        grid_samples: grid.samples(),
        mesh_triangles: density.mesh().len(),
        density_weighted_norm: density.weighted_norm_sqr().sqrt(),
        slices: slice_metrics,
        plane_identity: None,
        slice_asymmetry: slice_pair_asymmetry(&slices, lam).stage("metrics")?,
        approximation_error: None,
        clamp_annulus_energy: None,
    })
}
