//! Target functions to approximate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{Field, Grid};
use crate::raster::BinaryImage;
use crate::{dot, norm, sub, Error, Result, Vec3};

/// A regular tetrahedron inscribed in a sphere.
///
/// One vertex sits on the `+x₃` axis through `center`; the other three lie in
/// the plane `x₃ = center₃ − r/3`, the first of them in the `x₁x₃` half-plane
/// with `x₁ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraSpec {
    pub circumradius: f64,
    pub center: Vec3,
}

impl TetraSpec {
    pub fn new(circumradius: f64, center: Vec3) -> Result<Self> {
        if !(circumradius > 0.0 && circumradius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "circumradius must be positive, got {circumradius}"
            )));
        }
        Ok(TetraSpec {
            circumradius,
            center,
        })
    }

    /// Unit directions from the center to the vertices.
    fn directions() -> [Vec3; 4] {
        let s = 2.0 * 2f64.sqrt() / 3.0;
        let mut out = [[0.0, 0.0, 1.0]; 4];
        for (i, d) in out.iter_mut().enumerate().skip(1) {
            let phi = 2.0 * PI * (i - 1) as f64 / 3.0;
            *d = [s * phi.cos(), s * phi.sin(), -1.0 / 3.0];
        }
        out
    }

    pub fn vertices(&self) -> [Vec3; 4] {
        let r = self.circumradius;
        Self::directions().map(|d| {
            [
                self.center[0] + r * d[0],
                self.center[1] + r * d[1],
                self.center[2] + r * d[2],
            ]
        })
    }

    /// `|T| = 8√3/27 · r³`.
    pub fn volume(&self) -> f64 {
        8.0 * 3f64.sqrt() / 27.0 * self.circumradius.powi(3)
    }

    pub fn ball_volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.circumradius.powi(3)
    }

    /// Closed tetrahedron membership. Each face lies at distance `r/3` from
    /// the center with outward normal equal to minus the opposite vertex
    /// direction.
    pub fn contains(&self, x: &Vec3) -> bool {
        let y = sub(x, &self.center);
        let bound = -self.circumradius / 3.0 * (1.0 + 1e-12);
        Self::directions().iter().all(|d| dot(d, &y) >= bound)
    }

    pub fn in_ball(&self, x: &Vec3) -> bool {
        norm(&sub(x, &self.center)) <= self.circumradius * (1.0 + 1e-12)
    }

    /// Cross-section with the plane `x₃ = height` as a convex polygon in
    /// counter-clockwise order, or `None` if the plane misses the interior.
    pub fn section(&self, height: f64) -> Option<Vec<[f64; 2]>> {
        let v = self.vertices();
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = (v[i], v[j]);
                if (a[2] - height) * (b[2] - height) > 0.0 || a[2] == b[2] {
                    continue;
                }
                let t = (height - a[2]) / (b[2] - a[2]);
                pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let c = [
            pts.iter().map(|p| p[0]).sum::<f64>() / pts.len().max(1) as f64,
            pts.iter().map(|p| p[1]).sum::<f64>() / pts.len().max(1) as f64,
        ];
        pts.sort_by(|p, q| {
            let angle = |p: &[f64; 2]| (p[1] - c[1]).atan2(p[0] - c[0]);
            angle(p).total_cmp(&angle(q))
        });
        pts.dedup_by(|p, q| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12 * self.circumradius);
        (pts.len() >= 3).then_some(pts)
    }

    /// `f(x) = |T| χ_B(x) − |B| χ_T(x)`.
    pub fn value(&self, x: &Vec3) -> f64 {
        let mut v = 0.0;
        if self.in_ball(x) {
            v += self.volume();
        }
        if self.contains(x) {
            v -= self.ball_volume();
        }
        v
    }
}

/// Samples the zero-mean tetrahedron target on a 3D grid.
pub fn tetra_target(spec: &TetraSpec, grid: &Grid<3>) -> Result<Field<3>> {
    let l = grid.half_extent() * (1.0 + 1e-12);
    let r = spec.circumradius;
    if spec.center.iter().any(|c| c - r < -l || c + r > l) {
        return Err(Error::InvalidArgument(format!(
            "grid [−{0}, {0}]³ does not contain the ball of radius {r}",
            grid.half_extent()
        )));
    }
    Ok(Field::from_real_fn(*grid, |x| spec.value(&x)))
}

/// Samples `image` stretched over the square `[−w/2, w/2)²`: +1 on
/// foreground pixels, −1 on background and outside the square.
pub fn bitmap_target(image: &BinaryImage, physical_width: f64, grid: &Grid<2>) -> Result<Field<2>> {
    if !(physical_width > 0.0) || physical_width > 2.0 * grid.half_extent() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "physical width {physical_width} must be positive and fit the grid extent {}",
            2.0 * grid.half_extent()
        )));
    }
    let half = physical_width / 2.0;
    let (w, h) = (image.width() as f64, image.height() as f64);
    Ok(Field::from_real_fn(*grid, |[x1, x2]| {
        if !(-half..half).contains(&x1) || !(-half..half).contains(&x2) {
            return -1.0;
        }
        let col = (((x1 + half) / physical_width * w) as usize).min(image.width() - 1);
        let row = (((half - x2) / physical_width * h) as usize).min(image.height() - 1);
        if image.get(col, row) {
            1.0
        } else {
            -1.0
        }
    }))
}

/// `exp(−|x − center|² / 2σ²)`.
pub fn gaussian_target<const D: usize>(sigma: f64, center: &[f64; D], grid: &Grid<D>) -> Result<Field<D>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("σ must be positive, got {sigma}")));
    }
    Ok(Field::from_real_fn(*grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        (-r2 / (2.0 * sigma * sigma)).exp()
    }))
}

/// Closed-form transform of [`gaussian_target`],
/// `(2πσ²)^{d/2} e^{−σ²|ξ|²/2} e^{−i c·ξ}`.
pub fn gaussian_spectrum<const D: usize>(sigma: f64, center: &[f64; D], xi: &[f64; D]) -> Complex64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let phase: f64 = xi.iter().zip(center).map(|(a, b)| a * b).sum();
    let amp = (2.0 * PI * sigma * sigma).powf(D as f64 / 2.0) * (-sigma * sigma * xi2 / 2.0).exp();
    Complex64::from_polar(amp, -phase)
}

/// Riemann sum `∫ f` of a target, used to check the zero-mean property.
pub fn target_integral<const D: usize>(f: &Field<D>) -> f64 {
    f.integral().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::dft_forward;

    #[test]
    fn tetra_geometry() {
        let t = TetraSpec::new(5.0, [0.0; 3]).unwrap();
        let v = t.vertices();
        for p in &v {
            assert!((norm(p) - 5.0).abs() < 1e-12);
            assert!(t.contains(p));
        }
        let edge = norm(&sub(&v[0], &v[1]));
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((norm(&sub(&v[i], &v[j])) - edge).abs() < 1e-12);
            }
        }
        assert!((edge - 5.0 * (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // a³/(6√2)
        assert!((t.volume() - edge.powi(3) / (6.0 * 2f64.sqrt())).abs() < 1e-9);
        let centroid: Vec3 = [0, 1, 2].map(|a| v.iter().map(|p| p[a]).sum::<f64>() / 4.0);
        assert!(norm(&centroid) < 1e-12);
    }

    #[test]
    fn tetra_sections() {
        let t = TetraSpec::new(5.0, [0.0, 0.0, 1.0]).unwrap();
        // At the center the section is the base triangle scaled by 3/4.
        let tri = t.section(1.0).unwrap();
        assert_eq!(tri.len(), 3);
        for p in &tri {
            assert!((p[0].hypot(p[1]) - 5.0 / 2f64.sqrt()).abs() < 1e-12);
            assert!(t.contains(&[p[0], p[1], 1.0]));
        }
        assert!(t.section(6.5).is_none());
        assert!(t.section(-2.0).is_none());
    }

    #[test]
    fn tetra_values() {
        let t = TetraSpec::new(5.0, [0.0; 3]).unwrap();
        assert_eq!(t.value(&[0.0, 0.0, 5.1]), 0.0);
        assert_eq!(t.value(&[4.0, 3.0, 0.5]), 0.0);
        assert!((t.value(&[0.0; 3]) - (t.volume() - t.ball_volume())).abs() < 1e-12);
        assert!(t.value(&[0.0; 3]) < 0.0);
        // Inside the ball, outside T: below the bottom face.
        assert_eq!(t.value(&[0.0, 0.0, -2.0]), t.volume());
    }

    #[test]
    fn tetra_grid_checks() {
        let t = TetraSpec::new(5.0, [0.0; 3]).unwrap();
        assert!(tetra_target(&t, &Grid::new(4.0, 16).unwrap()).is_err());
        let off = TetraSpec::new(5.0, [1.0, 0.0, 0.0]).unwrap();
        assert!(tetra_target(&off, &Grid::new(5.0, 16).unwrap()).is_err());
        assert!(TetraSpec::new(-1.0, [0.0; 3]).is_err());
    }

    #[test]
    fn tetra_support_and_mean() {
        let t = TetraSpec::new(5.0, [0.0; 3]).unwrap();
        let grid = Grid::<3>::new(5.0, 64).unwrap();
        let f = tetra_target(&t, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            if norm(&grid.node(i)) > 5.0 {
                assert_eq!(v.re, 0.0);
            }
        }
        let mean = target_integral(&f) / (t.volume() * t.ball_volume());
        assert!(mean.abs() <= 0.02, "{mean}");
    }

    #[test]
    fn bitmap_all_foreground() {
        let img = BinaryImage::new(3, 3, vec![true; 9]).unwrap();
        let grid = Grid::<2>::new(5.0, 20).unwrap();
        let f = bitmap_target(&img, 6.0, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let [a, b] = grid.node(i);
            let inside = (-3.0..3.0).contains(&a) && (-3.0..3.0).contains(&b);
            assert_eq!(v.re, if inside { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn bitmap_checker_orientation() {
        // Top-left and bottom-right foreground.
        let img = BinaryImage::new(2, 2, vec![true, false, false, true]).unwrap();
        let grid = Grid::<2>::new(2.0, 16).unwrap();
        let f = bitmap_target(&img, 4.0, &grid).unwrap();
        let at = |x: f64, y: f64| {
            let i = ((x / grid.spacing()) + 8.0) as usize;
            let j = ((y / grid.spacing()) + 8.0) as usize;
            f.values()[grid.flat_index(&[i, j])].re
        };
        assert_eq!(at(-1.0, 1.0), 1.0);
        assert_eq!(at(1.0, -1.0), 1.0);
        assert_eq!(at(1.0, 1.0), -1.0);
        assert_eq!(at(-1.0, -1.0), -1.0);
    }

    #[test]
    fn bitmap_rejects_oversized_width() {
        let img = BinaryImage::new(1, 1, vec![true]).unwrap();
        let grid = Grid::<2>::new(2.0, 8).unwrap();
        assert!(bitmap_target(&img, 5.0, &grid).is_err());
        assert!(bitmap_target(&img, 0.0, &grid).is_err());
    }

    #[test]
    fn gaussian_center_and_spectrum() {
        let c = [0.3, -0.2];
        let grid = Grid::<2>::new(8.0, 128).unwrap();
        let f = gaussian_target(0.7, &c, &grid).unwrap();
        let g = gaussian_target(0.7, &[0.0, 0.0], &grid).unwrap();
        assert_eq!(g.values()[grid.flat_index(&[64, 64])].re, 1.0);

        let spec = dft_forward(&f);
        let worst = (0..grid.len())
            .map(|i| (spec.values()[i] - gaussian_spectrum(0.7, &c, &grid.freq_node(i))).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!(gaussian_target(0.0, &c, &grid).is_err());
    }
}
