//! Triangulations of the sphere `S(0,k)` and the midpoint quadrature rule
//! built on them.
//!
//! Points come from a centrally symmetric Fibonacci lattice: the upper half is
//! the usual golden-angle spiral and the lower half its antipodal image. The
//! triangulation is the convex hull of the points, which for points on a
//! sphere is the spherical Delaunay triangulation. Each triangle contributes
//! one quadrature node (its centroid pushed out to radius `k`) weighted by its
//! flat area.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::{cross, dot, norm, sub, Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh {
    k: f64,
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    centers: Vec<Vec3>,
    areas: Vec<f64>,
}

impl SphereMesh {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Quadrature nodes, one per triangle, with `|center| = k`.
    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    /// Quadrature weights (flat triangle areas).
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// `Σ_c f(center_c)·area_c`.
    pub fn integrate<F>(&self, f: F) -> num_complex::Complex64
    where
        F: Fn(&Vec3) -> num_complex::Complex64,
    {
        self.centers
            .iter()
            .zip(&self.areas)
            .map(|(c, a)| f(c) * *a)
            .sum()
    }

    /// Writes the mesh as an OFF file.
    pub fn write_off(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        self.write_off_to(&mut out)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_off_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Builds a mesh of `S(0,k)` with roughly `target_triangles` triangles.
///
/// A hull of `p` points has `2p − 4` triangles; `p` is rounded to an even
/// number so the lattice can be made antipodally symmetric, which keeps the
/// count within a few triangles of the target.
pub fn build_sphere_mesh(k: f64, target_triangles: usize) -> Result<SphereMesh> {
    if target_triangles < 8 {
        return Err(Error::InvalidArgument(format!(
            "sphere mesh needs at least 8 triangles, got {target_triangles}"
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    let mut points = (target_triangles + 4) / 2;
    if points % 2 == 1 {
        points += 1;
    }
    let unit = symmetric_fibonacci(points);
    let faces = convex_hull(&unit)?;

    let vertices: Vec<Vec3> = unit.iter().map(|p| scale(p, k)).collect();
    let mut centers = Vec::with_capacity(faces.len());
    let mut areas = Vec::with_capacity(faces.len());
    for f in &faces {
        let (a, b, c) = (&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ];
        centers.push(scale(&centroid, k / norm(&centroid)));
        areas.push(0.5 * norm(&cross(&sub(b, a), &sub(c, a))));
    }
    Ok(SphereMesh {
        k,
        vertices,
        triangles: faces,
        centers,
        areas,
    })
}

fn scale(v: &Vec3, s: f64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

fn symmetric_fibonacci(points: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let half = points / 2;
    let mut out = Vec::with_capacity(points);
    for i in 0..half {
        let z = 1.0 - (2 * i + 1) as f64 / points as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        out.push([r * phi.cos(), r * phi.sin(), z]);
    }
    for i in 0..half {
        let p = out[half - 1 - i];
        out.push([-p[0], -p[1], -p[2]]);
    }
    out
}

/// Incremental convex hull for points in convex position around the origin.
/// Returns outward-oriented triangles.
fn convex_hull(points: &[Vec3]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    let degenerate = || Error::InvalidArgument("degenerate point set for hull".into());

    // Seed tetrahedron: pole, its antipode, and the two points that maximise volume.
    let a = 0;
    let b = n - 1;
    let ab = sub(&points[b], &points[a]);
    let c = (1..n - 1)
        .max_by(|&i, &j| {
            let ci = norm(&cross(&ab, &sub(&points[i], &points[a])));
            let cj = norm(&cross(&ab, &sub(&points[j], &points[a])));
            ci.total_cmp(&cj)
        })
        .ok_or_else(degenerate)?;
    let normal = cross(&ab, &sub(&points[c], &points[a]));
    let d = (1..n - 1)
        .filter(|&i| i != c)
        .max_by(|&i, &j| {
            let vi = dot(&normal, &sub(&points[i], &points[a])).abs();
            let vj = dot(&normal, &sub(&points[j], &points[a])).abs();
            vi.total_cmp(&vj)
        })
        .ok_or_else(degenerate)?;
    if dot(&normal, &sub(&points[d], &points[a])).abs() < 1e-12 {
        return Err(degenerate());
    }

    let mut hull = Hull {
        points,
        faces: Vec::new(),
        normals: Vec::new(),
        edges: HashMap::new(),
    };
    let interior = {
        let s = [a, b, c, d].iter().fold([0.0; 3], |acc, &i| {
            [acc[0] + points[i][0], acc[1] + points[i][1], acc[2] + points[i][2]]
        });
        scale(&s, 0.25)
    };
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let nrm = cross(&sub(&points[tri[1]], &points[tri[0]]), &sub(&points[tri[2]], &points[tri[0]]));
        if dot(&nrm, &sub(&points[tri[0]], &interior)) > 0.0 {
            hull.add_face(tri);
        } else {
            hull.add_face([tri[0], tri[2], tri[1]]);
        }
    }

    for p in 0..n {
        if p == a || p == b || p == c || p == d {
            continue;
        }
        hull.insert(p)?;
    }
    Ok(hull.faces.into_iter().flatten().collect())
}

struct Hull<'a> {
    points: &'a [Vec3],
    faces: Vec<Option<[usize; 3]>>,
    normals: Vec<Vec3>,
    edges: HashMap<(usize, usize), usize>,
}

impl Hull<'_> {
    fn add_face(&mut self, f: [usize; 3]) {
        let id = self.faces.len();
        let p = self.points;
        let nrm = cross(&sub(&p[f[1]], &p[f[0]]), &sub(&p[f[2]], &p[f[0]]));
        self.faces.push(Some(f));
        self.normals.push(nrm);
        for e in 0..3 {
            self.edges.insert((f[e], f[(e + 1) % 3]), id);
        }
    }

    fn visible(&self, face: usize, p: usize) -> bool {
        match self.faces[face] {
            Some(f) => {
                let nrm = &self.normals[face];
                let h = dot(nrm, &sub(&self.points[p], &self.points[f[0]]));
                h > 1e-14 * norm(nrm)
            }
            None => false,
        }
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let start = (0..self.faces.len())
            .find(|&f| self.visible(f, p))
            .ok_or_else(|| Error::InvalidArgument(format!("hull point {p} is not extreme")))?;

        // Flood the visible region from the seed face through shared edges.
        let mut visible = vec![start];
        let mut seen = std::collections::HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            let tri = self.faces[f].expect("live face");
            for e in 0..3 {
                let twin = (tri[(e + 1) % 3], tri[e]);
                if let Some(&g) = self.edges.get(&twin) {
                    if !seen.contains(&g) && self.visible(g, p) {
                        seen.insert(g);
                        visible.push(g);
                        stack.push(g);
                    }
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            let tri = self.faces[f].expect("live face");
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                let across = self.edges.get(&(v, u)).copied();
                if across.map_or(true, |g| !seen.contains(&g)) {
                    horizon.push((u, v));
                }
            }
        }
        for &f in &visible {
            let tri = self.faces[f].take().expect("live face");
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                if self.edges.get(&key) == Some(&f) {
                    self.edges.remove(&key);
                }
            }
        }
        for (u, v) in horizon {
            self.add_face([u, v, p]);
        }
        Ok(())
    }
}

/// Equal-area Mollweide coordinates `(u, v)` of a unit direction, with
/// `u ∈ [−2√2, 2√2]` along longitude and `v ∈ [−√2, √2]` along latitude.
pub fn mollweide(dir: &Vec3) -> (f64, f64) {
    let lat = dir[2].clamp(-1.0, 1.0).asin();
    let lon = dir[1].atan2(dir[0]);
    let theta = mollweide_auxiliary(lat);
    (
        2.0 * 2f64.sqrt() / PI * lon * theta.cos(),
        2f64.sqrt() * theta.sin(),
    )
}

/// Solves `2θ + sin 2θ = π sin(lat)` by Newton iteration.
fn mollweide_auxiliary(lat: f64) -> f64 {
    let target = PI * lat.sin();
    if (lat.abs() - 0.5 * PI).abs() < 1e-12 {
        return lat.signum() * 0.5 * PI;
    }
    let mut theta = lat;
    for _ in 0..200 {
        let f = 2.0 * theta + (2.0 * theta).sin() - target;
        let df = 2.0 + 2.0 * (2.0 * theta).cos();
        if df == 0.0 {
            break;
        }
        let step = f / df;
        theta -= step;
        if step.abs() < 1e-10 * 1e-3 {
            break;
        }
    }
    theta.clamp(-0.5 * PI, 0.5 * PI)
}

/// Inverse Mollweide map. Returns `None` outside the ellipse.
pub fn mollweide_inverse(u: f64, v: f64) -> Option<Vec3> {
    let sqrt2 = 2f64.sqrt();
    let s = v / sqrt2;
    if s.abs() > 1.0 {
        return None;
    }
    let theta = s.asin();
    let cos_t = theta.cos();
    let lon = if cos_t > 0.0 {
        PI * u / (2.0 * sqrt2 * cos_t)
    } else if u == 0.0 {
        0.0
    } else {
        return None;
    };
    if lon.abs() > PI {
        return None;
    }
    let sin_lat = ((2.0 * theta + (2.0 * theta).sin()) / PI).clamp(-1.0, 1.0);
    let cos_lat = (1.0 - sin_lat * sin_lat).sqrt();
    Some([cos_lat * lon.cos(), cos_lat * lon.sin(), sin_lat])
}
