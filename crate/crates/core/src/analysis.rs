//! Nodal sets, field comparison metrics, slices and figure rasters.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::fieldeval::{eval_on_plane, HerglotzDensity};
use crate::grid::{Field, Grid};
use crate::raster::RgbImage;
use crate::spheremesh::mollweide_inverse;
use crate::{Error, Result};

/// A polyline in the plane. Closed polylines do not repeat their first point.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    /// Consecutive point pairs, including the closing segment.
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 2 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| dist(&a, &b)).sum()
    }
}

/// A set of contour polylines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelSet {
    pub polylines: Vec<Polyline>,
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn len(&self) -> usize {
        self.polylines.len()
    }

    pub fn length(&self) -> f64 {
        self.polylines.iter().map(Polyline::length).sum()
    }

    /// A single closed polygon.
    pub fn from_polygon(points: Vec<[f64; 2]>) -> Result<Self> {
        let line = clean(points, true, 0.0);
        if line.points.len() < 3 {
            return Err(Error::InvalidArgument("polygon needs three distinct points".into()));
        }
        Ok(LevelSet {
            polylines: vec![line],
        })
    }

    /// One polyline per line: `closed` or `open`, then space-separated `x,y` pairs.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for line in &self.polylines {
            write!(w, "{}", if line.closed { "closed" } else { "open" })?;
            for [x, y] in &line.points {
                write!(w, " {x},{y}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_text(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let bad = |d: String| Error::format("level set", d);
        let mut polylines = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let mut words = line.split_whitespace();
            let closed = match words.next() {
                None => continue,
                Some("closed") => true,
                Some("open") => false,
                Some(other) => return Err(bad(format!("line {}: unknown flag `{other}`", no + 1))),
            };
            let points = words
                .map(|pair| {
                    let (x, y) = pair
                        .split_once(',')
                        .ok_or_else(|| bad(format!("line {}: `{pair}` is not x,y", no + 1)))?;
                    let parse = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|e| bad(format!("line {}: {e}", no + 1)))
                    };
                    Ok([parse(x)?, parse(y)?])
                })
                .collect::<Result<Vec<_>>>()?;
            polylines.push(Polyline { points, closed });
        }
        Ok(LevelSet { polylines })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Drops consecutive points closer than `tol`.
fn clean(points: Vec<[f64; 2]>, closed: bool, tol: f64) -> Polyline {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|q| dist(q, &p) > tol) {
            out.push(p);
        }
    }
    if closed {
        while out.len() > 1 && dist(&out[0], out.last().unwrap()) <= tol {
            out.pop();
        }
    }
    Polyline {
        points: out,
        closed,
    }
}

/// Zero contours of `Re f` by marching squares.
///
/// Nodes with `Re f > 0` are positive, all others nonpositive. Crossings are
/// placed by linear interpolation along cell edges. In a saddle cell the two
/// corners sharing the sign of the cell-center average stay connected.
pub fn zero_level_set(f: &Field<2>) -> LevelSet {
    let grid = *f.grid();
    let n = grid.samples();
    let h = grid.spacing();
    let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let at = |i: usize, j: usize| re[j * n + i];
    let pos = |v: f64| v > 0.0;

    // Edge ids: 2·node for the edge towards +x₁, 2·node + 1 towards +x₂.
    let hedge = |i: usize, j: usize| 2 * (j * n + i);
    let vedge = |i: usize, j: usize| 2 * (j * n + i) + 1;
    let crossing = |id: usize| -> [f64; 2] {
        let node = id / 2;
        let (i, j) = (node % n, node / n);
        let (i2, j2) = if id.is_multiple_of(2) { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (at(i, j), at(i2, j2));
        let t = a / (a - b);
        let (x, y) = (grid.coord(i), grid.coord(j));
        if id.is_multiple_of(2) {
            [x + t * h, y]
        } else {
            [x, y + t * h]
        }
    };

    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut link = |a: usize, b: usize| {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    };
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let s = c.map(pos);
            let edges = [hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&e| s[e] != s[(e + 1) % 4]).collect();
            match cut.len() {
                2 => link(edges[cut[0]], edges[cut[1]]),
                4 => {
                    let center = pos(c.iter().sum::<f64>() / 4.0);
                    if center == s[0] {
                        // Corners 1 and 3 are cut off.
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut visited = std::collections::BTreeSet::new();
    let mut polylines = Vec::new();
    let walk = |start: usize, visited: &mut std::collections::BTreeSet<usize>| -> (Vec<usize>, bool) {
        let mut chain = vec![start];
        visited.insert(start);
        let mut current = start;
        loop {
            let mut next: Vec<usize> = adjacency[&current]
                .iter()
                .copied()
                .filter(|v| !visited.contains(v))
                .collect();
            next.sort_unstable();
            match next.first() {
                Some(&v) => {
                    visited.insert(v);
                    chain.push(v);
                    current = v;
                }
                None => {
                    let closed = chain.len() > 2 && adjacency[&current].contains(&start);
                    return (chain, closed);
                }
            }
        }
    };
    let ends: Vec<usize> = adjacency
        .iter()
        .filter(|(_, nb)| nb.len() == 1)
        .map(|(&id, _)| id)
        .collect();
    let all: Vec<usize> = adjacency.keys().copied().collect();
    for start in ends.into_iter().chain(all) {
        if visited.contains(&start) {
            continue;
        }
        let (chain, closed) = walk(start, &mut visited);
        let line = clean(chain.into_iter().map(crossing).collect(), closed, 1e-12 * h);
        if line.points.len() >= 2 {
            polylines.push(line);
        }
    }
    LevelSet { polylines }
}

fn check_grids<const D: usize>(a: &Field<D>, b: &Field<D>) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::InvalidArgument(format!(
            "grid mismatch: {:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    Ok(())
}

/// `‖a − b‖₂ / ‖b‖₂` over the grid nodes, complex values kept.
pub fn rel_l2_error<const D: usize>(a: &Field<D>, b: &Field<D>) -> Result<f64> {
    check_grids(a, b)?;
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::InvalidArgument("reference field is zero".into()));
    }
    Ok((num / den).sqrt())
}

/// The complex `α` minimising `‖α a − b‖₂`.
pub fn least_squares_scale<const D: usize>(a: &Field<D>, b: &Field<D>) -> Result<Complex64> {
    check_grids(a, b)?;
    let aa: f64 = a.values().iter().map(|x| x.norm_sqr()).sum();
    if aa == 0.0 {
        return Err(Error::InvalidArgument("cannot scale a zero field".into()));
    }
    let ab: Complex64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(ab / aa)
}

/// First sign change of `Re f` walking from the origin along `+x₁`, located
/// by linear interpolation between nodes.
pub fn first_radial_zero(f: &Field<2>) -> Option<f64> {
    let grid = f.grid();
    let n = grid.samples();
    let row = n / 2;
    let value = |i: usize| f.values()[grid.flat_index(&[i, row])].re;
    let origin = value(n / 2);
    if origin == 0.0 {
        return None;
    }
    for i in n / 2..n - 1 {
        let (a, b) = (value(i), value(i + 1));
        if b == 0.0 || (b > 0.0) != (origin > 0.0) {
            return Some(grid.coord(i) + a / (a - b) * grid.spacing());
        }
    }
    None
}

fn point_segment_distance(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    dist(p, &[a[0] + t * d[0], a[1] + t * d[1]])
}

/// Arclength-weighted samples `(point, weight)`, each segment split into
/// pieces no longer than `step`. Degenerate sets fall back to their points.
fn resample(set: &LevelSet, step: f64) -> Vec<([f64; 2], f64)> {
    let mut out = Vec::new();
    for line in &set.polylines {
        for (a, b) in line.segments() {
            let len = dist(&a, &b);
            let pieces = (len / step).ceil().max(1.0) as usize;
            for s in 0..pieces {
                let t = (s as f64 + 0.5) / pieces as f64;
                out.push(([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], len / pieces as f64));
            }
        }
    }
    if out.iter().all(|(_, w)| *w == 0.0) {
        out = set
            .polylines
            .iter()
            .flat_map(|l| l.points.iter().map(|&p| (p, 1.0)))
            .collect();
    }
    out
}

fn distance_to_set(p: &[f64; 2], set: &LevelSet) -> f64 {
    let mut best = f64::INFINITY;
    for line in &set.polylines {
        if line.points.len() == 1 {
            best = best.min(dist(p, &line.points[0]));
        }
        for (a, b) in line.segments() {
            best = best.min(point_segment_distance(p, &a, &b));
        }
    }
    best
}

fn mean_distance(from: &LevelSet, to: &LevelSet, step: f64) -> f64 {
    let samples = resample(from, step);
    let total: f64 = samples.iter().map(|(_, w)| w).sum();
    samples
        .iter()
        .map(|(p, w)| distance_to_set(p, to) * w)
        .sum::<f64>()
        / total
}

/// Symmetric mean distance between two contour sets: the arclength average
/// of the distance from points of `a` to `b`, averaged with the reverse.
/// Both sets are resampled at a quarter of their mean segment length.
pub fn nodal_distance(a: &LevelSet, b: &LevelSet) -> Result<f64> {
    let points = |s: &LevelSet| s.polylines.iter().map(|l| l.points.len()).sum::<usize>();
    if points(a) == 0 || points(b) == 0 {
        return Err(Error::InvalidArgument("nodal distance of an empty level set".into()));
    }
    let (mut len, mut count) = (0.0, 0usize);
    for line in a.polylines.iter().chain(&b.polylines) {
        for (p, q) in line.segments() {
            len += dist(&p, &q);
            count += 1;
        }
    }
    let step = if count > 0 && len > 0.0 {
        0.25 * len / count as f64
    } else {
        1.0
    };
    Ok(0.5 * (mean_distance(a, b, step) + mean_distance(b, a, step)))
}

/// Diverging blue–white–red colormap over `[vmin, vmax]`; values outside clip.
pub fn diverging_color(v: f64, vmin: f64, vmax: f64) -> [u8; 3] {
    let t = ((v - vmin) / (vmax - vmin)).clamp(0.0, 1.0);
    let ramp = |s: f64| (255.0 * s).round() as u8;
    if t < 0.5 {
        let s = 2.0 * t;
        [ramp(s), ramp(s), 255]
    } else {
        let s = 2.0 * (1.0 - t);
        [255, ramp(s), ramp(s)]
    }
}

fn check_range(vmin: f64, vmax: f64) -> Result<()> {
    if !(vmin < vmax) || !vmin.is_finite() || !vmax.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "colour range needs vmin < vmax, got [{vmin}, {vmax}]"
        )));
    }
    Ok(())
}

/// One pixel per node of `Re f`, `+x₂` up.
pub fn render_heatmap(f: &Field<2>, vmin: f64, vmax: f64) -> Result<RgbImage> {
    check_range(vmin, vmax)?;
    let n = f.grid().samples();
    let mut img = RgbImage::new(n, n, [255; 3]);
    for (idx, v) in f.values().iter().enumerate() {
        let [i, j] = f.grid().multi_index(idx);
        img.set(i, n - 1 - j, diverging_color(v.re, vmin, vmax));
    }
    Ok(img)
}

/// Draws contour sets in the given colours on a white `size × size` canvas
/// covering `[−L, L]²`, `+x₂` up.
pub fn render_level_sets(sets: &[(&LevelSet, [u8; 3])], half_extent: f64, size: usize) -> Result<RgbImage> {
    if size == 0 || !(half_extent > 0.0) {
        return Err(Error::InvalidArgument("empty canvas".into()));
    }
    let mut img = RgbImage::new(size, size, [255; 3]);
    let to_px = |p: &[f64; 2]| {
        [
            (p[0] + half_extent) / (2.0 * half_extent) * size as f64,
            (half_extent - p[1]) / (2.0 * half_extent) * size as f64,
        ]
    };
    for (set, color) in sets {
        for line in &set.polylines {
            for (a, b) in line.segments() {
                let (pa, pb) = (to_px(&a), to_px(&b));
                let steps = (pa[0] - pb[0]).abs().max((pa[1] - pb[1]).abs()).ceil().max(1.0) as usize;
                for s in 0..=steps {
                    let t = s as f64 / steps as f64;
                    let x = pa[0] + t * (pb[0] - pa[0]);
                    let y = pa[1] + t * (pb[1] - pa[1]);
                    if x >= 0.0 && y >= 0.0 && (x as usize) < size && (y as usize) < size {
                        img.set(x as usize, y as usize, *color);
                    }
                }
            }
        }
    }
    Ok(img)
}

/// Which component of a complex density to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Real,
    Imag,
}

/// Pixels outside the Mollweide ellipse.
pub const MOLLWEIDE_BACKGROUND: [u8; 3] = [224, 224, 224];

/// Nearest triangle center by bucketing unit centers into latitude bands of
/// equal area.
struct CenterIndex {
    dirs: Vec<[f64; 3]>,
    bands: Vec<Vec<usize>>,
}

impl CenterIndex {
    fn new(centers: &[[f64; 3]]) -> Self {
        let dirs: Vec<[f64; 3]> = centers
            .iter()
            .map(|c| {
                let r = crate::norm(c);
                [c[0] / r, c[1] / r, c[2] / r]
            })
            .collect();
        let count = ((dirs.len() as f64).sqrt().ceil() as usize).max(1);
        let mut bands = vec![Vec::new(); count];
        for (i, d) in dirs.iter().enumerate() {
            bands[Self::band_of(d[2], count)].push(i);
        }
        CenterIndex { dirs, bands }
    }

    fn band_of(z: f64, count: usize) -> usize {
        (((z + 1.0) / 2.0 * count as f64) as usize).min(count - 1)
    }

    fn nearest(&self, q: &[f64; 3]) -> usize {
        let count = self.bands.len();
        let home = Self::band_of(q[2], count);
        let width = 2.0 / count as f64;
        let (mut best, mut best_d2) = (usize::MAX, f64::INFINITY);
        let consider = |band: usize, best: &mut usize, best_d2: &mut f64| {
            for &i in &self.bands[band] {
                let d2 = crate::norm(&crate::sub(q, &self.dirs[i])).powi(2);
                if d2 < *best_d2 || (d2 == *best_d2 && i < *best) {
                    *best_d2 = d2;
                    *best = i;
                }
            }
        };
        consider(home, &mut best, &mut best_d2);
        for step in 1..count {
            // Chord distance is at least the gap in z to the nearer band edge.
            let below = (home >= step).then(|| q[2] - (-1.0 + (home - step + 1) as f64 * width));
            let above = (home + step < count).then(|| -1.0 + (home + step) as f64 * width - q[2]);
            let gap = match (below, above) {
                (None, None) => break,
                (Some(a), None) | (None, Some(a)) => a,
                (Some(a), Some(b)) => a.min(b),
            }
            .max(0.0);
            if gap * gap > best_d2 {
                break;
            }
            if below.is_some() {
                consider(home - step, &mut best, &mut best_d2);
            }
            if above.is_some() {
                consider(home + step, &mut best, &mut best_d2);
            }
        }
        best
    }
}

/// Mollweide map of a density, `width × width/2` pixels: each pixel inside
/// the ellipse takes the value of the triangle whose center is nearest.
pub fn render_mollweide(g: &HerglotzDensity, vmin: f64, vmax: f64, part: Part, width: usize) -> Result<RgbImage> {
    check_range(vmin, vmax)?;
    if width < 2 {
        return Err(Error::InvalidArgument("Mollweide raster needs width ≥ 2".into()));
    }
    let height = width / 2;
    let index = CenterIndex::new(g.mesh().centers());
    let mut img = RgbImage::new(width, height, MOLLWEIDE_BACKGROUND);
    let umax = 2.0 * 2f64.sqrt();
    let vmax_axis = 2f64.sqrt();
    for row in 0..height {
        let v = vmax_axis * (1.0 - 2.0 * (row as f64 + 0.5) / height as f64);
        for col in 0..width {
            let u = umax * (2.0 * (col as f64 + 0.5) / width as f64 - 1.0);
            if (u / umax).powi(2) + (v / vmax_axis).powi(2) > 1.0 {
                continue;
            }
            let Some(dir) = mollweide_inverse(u, v) else {
                continue;
            };
            let value = g.values()[index.nearest(&dir)];
            let x = match part {
                Part::Real => value.re,
                Part::Imag => value.im,
            };
            img.set(col, row, diverging_color(x, vmin, vmax));
        }
    }
    Ok(img)
}

/// A plane `x₃ = const` sampled from a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub x3: f64,
    pub field: Field<2>,
}

/// Default slice resolution.
pub const SLICE_SAMPLES: usize = 100;

impl Slice {
    /// Evaluates `g` on `[−L, L)²` at height `x3`.
    pub fn evaluate(g: &HerglotzDensity, half_extent: f64, samples: usize, x3: f64) -> Result<Self> {
        let grid = Grid::new(half_extent, samples)?;
        Ok(Slice {
            x3,
            field: eval_on_plane(g, &grid, x3),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::sph_bessel_j;
    use std::f64::consts::PI;

    fn grid(half: f64, n: usize) -> Grid<2> {
        Grid::new(half, n).unwrap()
    }

    fn all_points(set: &LevelSet) -> Vec<[f64; 2]> {
        set.polylines.iter().flat_map(|l| l.points.clone()).collect()
    }

    #[test]
    fn linear_field_gives_one_line() {
        let g = grid(2.0, 32);
        let f = Field::from_real_fn(g, |[x, _]| x);
        let set = zero_level_set(&f);
        assert_eq!(set.len(), 1);
        let line = &set.polylines[0];
        assert!(!line.closed);
        assert_eq!(line.points.len(), 32);
        assert!(line.points.iter().all(|p| p[0].abs() < g.spacing() / 100.0));
        let ys: Vec<f64> = line.points.iter().map(|p| p[1]).collect();
        assert!(ys.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn constant_field_is_empty() {
        let f = Field::from_real_fn(grid(2.0, 16), |_| 1.0);
        assert!(zero_level_set(&f).is_empty());
    }

    #[test]
    fn circle_is_closed() {
        let f = Field::from_real_fn(grid(2.0, 64), |[x, y]| x * x + y * y - 1.0);
        let set = zero_level_set(&f);
        assert_eq!(set.len(), 1);
        assert!(set.polylines[0].closed);
        for p in all_points(&set) {
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 0.01);
        }
        assert!((set.length() - 2.0 * PI).abs() < 0.01);
    }

    #[test]
    fn j0_rings() {
        let k = 2.0 * PI;
        let g = grid(5.0, 256);
        let f = Field::from_real_fn(g, |[x, y]| sph_bessel_j(0, k * x.hypot(y)).unwrap());
        let set = zero_level_set(&f);
        let mut radii_seen = std::collections::BTreeSet::new();
        for p in all_points(&set) {
            let r = p[0].hypot(p[1]);
            let m = (r / 0.5).round();
            assert!(m >= 1.0);
            assert!((r - 0.5 * m).abs() < g.spacing(), "r = {r}");
            radii_seen.insert(m as i64);
        }
        assert!((1..=9).all(|m| radii_seen.contains(&m)));
        let first = set
            .polylines
            .iter()
            .filter(|l| l.closed)
            .map(|l| l.points.iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / l.points.len() as f64)
            .fold(f64::INFINITY, f64::min);
        assert!((first - PI / k).abs() < g.spacing());
    }

    #[test]
    fn saddle_follows_center_sign() {
        // Corners (+, −, +, −) with positive center mean: the positive
        // corners stay connected, so the contours cut off the others.
        let g = grid(4.0, 8);
        let f = Field::from_real_fn(g, |[x, y]| {
(x - 0.5) * (y - 0.5) + 0.1
        });
        let set = zero_level_set(&f);
        let neg = Field::from_real_fn(g, |[x, y]| -((x - 0.5) * (y - 0.5) + 0.1));
        assert_eq!(set, zero_level_set(&neg));
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn sign_flip_invariant() {
        let g = grid(3.0, 48);
        let f = Field::from_real_fn(g, |[x, y]| (2.1 * x).sin() * (1.7 * y + 0.3).cos() + 0.05);
        let a = zero_level_set(&f);
        let b = zero_level_set(&f.scaled(Complex64::new(-1.0, 0.0)));
        assert_eq!(a.len(), b.len());
        for (la, lb) in a.polylines.iter().zip(&b.polylines) {
            assert_eq!(la.closed, lb.closed);
            for (p, q) in la.points.iter().zip(&lb.points) {
                assert!(dist(p, q) < 1e-12);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let f = Field::from_real_fn(grid(2.0, 32), |[x, y]| x * x + 0.5 * y * y - 1.0 + 0.3 * x);
        let set = zero_level_set(&f);
        let mut buf = Vec::new();
        set.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("closed "));
        assert_eq!(LevelSet::read_text(&buf[..]).unwrap(), set);
        assert!(LevelSet::read_text(&b"wavy 0,0"[..]).is_err());
        assert!(LevelSet::read_text(&b"open 0;0"[..]).is_err());
    }

    #[test]
    fn rel_l2_basics() {
        let g = grid(1.0, 8);
        let b = Field::from_fn(g, |[x, y]| Complex64::new(x + 0.2, y));
        assert_eq!(rel_l2_error(&b, &b).unwrap(), 0.0);
        let a = b.scaled(Complex64::new(2.0, 0.0));
        assert!((rel_l2_error(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let other = Field::from_real_fn(grid(1.0, 16), |_| 1.0);
        assert!(rel_l2_error(&other, &b).is_err());
        assert!(rel_l2_error(&b, &Field::zeros(g)).is_err());
    }

    #[test]
    fn least_squares_scale_recovers_factor() {
        let g = grid(1.0, 8);
        let b = Field::from_fn(g, |[x, y]| Complex64::new(x + 0.2, y * y));
        let alpha = Complex64::new(0.3, -1.1);
        let a = b.scaled(alpha);
        let s = least_squares_scale(&a, &b).unwrap();
        assert!((s * alpha - 1.0).norm() < 1e-14);
    }

    #[test]
    fn radial_zero_of_cosine() {
        let g = grid(2.0, 64);
        let f = Field::from_real_fn(g, |[x, _]| (PI * x).cos());
        let r = first_radial_zero(&f).unwrap();
        assert!((r - 0.5).abs() < 1e-3, "{r}");
        assert!(first_radial_zero(&Field::from_real_fn(g, |_| 1.0)).is_none());
    }

    fn circle(r: f64, n: usize) -> LevelSet {
        LevelSet::from_polygon(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    [r * t.cos(), r * t.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn nodal_distance_examples() {
        let a = circle(1.0, 400);
        assert!(nodal_distance(&a, &a).unwrap() < 1e-12);
        let b = circle(1.1, 400);
        let d = nodal_distance(&a, &b).unwrap();
        assert!((d - 0.1).abs() < 0.002, "{d}");
        assert!((nodal_distance(&b, &a).unwrap() - d).abs() < 1e-15);

        let line = |y: f64| LevelSet {
            polylines: vec![Polyline {
                points: vec![[-1.0, y], [1.0, y]],
                closed: false,
            }],
        };
        let d = nodal_distance(&line(0.0), &line(0.3)).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        assert!(nodal_distance(&line(0.0), &LevelSet::default()).is_err());
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(diverging_color(-5.0, -1.0, 1.0), [0, 0, 255]);
        assert_eq!(diverging_color(-1.0, -1.0, 1.0), [0, 0, 255]);
        assert_eq!(diverging_color(3.0, -1.0, 1.0), [255, 0, 0]);
        assert_eq!(diverging_color(0.0, -1.0, 1.0), [255, 255, 255]);
    }

    #[test]
    fn heatmap_layout() {
        let g = grid(1.0, 8);
        let zero = render_heatmap(&Field::zeros(g), -1.0, 1.0).unwrap();
        assert!((0..8).all(|r| (0..8).all(|c| zero.get(c, r) == [255, 255, 255])));
        let f = Field::from_real_fn(g, |[_, y]| if y > 0.0 { 5.0 } else { -5.0 });
        let img = render_heatmap(&f, -1.0, 1.0).unwrap();
        assert_eq!(img.get(3, 0), [255, 0, 0]);
        assert_eq!(img.get(3, 7), [0, 0, 255]);
        assert!(render_heatmap(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn level_set_canvas() {
        let set = LevelSet {
            polylines: vec![Polyline {
                points: vec![[-1.0, 0.0], [1.0, 0.0]],
                closed: false,
            }],
        };
        let img = render_level_sets(&[(&set, [0, 0, 0])], 1.0, 20).unwrap();
        assert_eq!(img.get(5, 10), [0, 0, 0]);
        assert_eq!(img.get(5, 3), [255, 255, 255]);
    }

    fn density(f: impl Fn(&[f64; 3]) -> Complex64) -> HerglotzDensity {
        let mesh = std::sync::Arc::new(crate::spheremesh::build_sphere_mesh(2.0 * PI, 2000).unwrap());
        HerglotzDensity::from_fn(mesh, |z| f(z))
    }

    #[test]
    fn nearest_center_matches_brute_force() {
        let g = density(|_| Complex64::new(0.0, 0.0));
        let centers = g.mesh().centers();
        let index = CenterIndex::new(centers);
        for i in 0..500 {
            let t = i as f64;
            let z = (0.37 * t).sin();
            let s = (1.0 - z * z).sqrt();
            let q = [s * (1.9 * t).cos(), s * (1.9 * t).sin(), z];
            let brute = (0..index.dirs.len())
                .min_by(|&a, &b| {
                    let da = crate::norm(&crate::sub(&q, &index.dirs[a]));
                    let db = crate::norm(&crate::sub(&q, &index.dirs[b]));
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let found = index.nearest(&q);
            let d = |j: usize| crate::norm(&crate::sub(&q, &index.dirs[j]));
            assert_eq!(d(found), d(brute));
        }
    }

    #[test]
    fn mollweide_uniform_densities() {
        let zero = render_mollweide(&density(|_| Complex64::new(0.0, 0.0)), -20.0, 20.0, Part::Real, 120).unwrap();
        let c = Complex64::new(10.0, -20.0);
        let constant = render_mollweide(&density(|_| c), -20.0, 20.0, Part::Imag, 120).unwrap();
        let mut inside = 0;
        for row in 0..60 {
            for col in 0..120 {
                let px = zero.get(col, row);
                if px == MOLLWEIDE_BACKGROUND {
                    assert_eq!(constant.get(col, row), MOLLWEIDE_BACKGROUND);
                    continue;
                }
                inside += 1;
                assert_eq!(px, [255, 255, 255]);
                assert_eq!(constant.get(col, row), [0, 0, 255]);
            }
        }
        // The ellipse fills π/4 of its bounding box.
        let frac = inside as f64 / 7200.0;
        assert!((frac - PI / 4.0).abs() < 0.02, "{frac}");
        assert_eq!(zero.get(60, 30), [255, 255, 255]);
        assert_eq!(zero.get(0, 0), MOLLWEIDE_BACKGROUND);
    }

    #[test]
    fn mollweide_hemisphere_density() {
        let g = density(|z| Complex64::new(z[2].max(0.0), 0.0));
        let img = render_mollweide(&g, -20.0, 20.0, Part::Real, 200).unwrap();
        // Pixel rows more than two triangle widths below the equator.
        for row in 55..100 {
            for col in 0..200 {
                let px = img.get(col, row);
                assert!(px == MOLLWEIDE_BACKGROUND || px == [255, 255, 255], "row {row}");
            }
        }
        assert_ne!(img.get(100, 10), [255, 255, 255]);
    }

    #[test]
    fn slice_matches_direct_evaluation() {
        let g = density(|z| Complex64::new(z[0], 0.2));
        let s = Slice::evaluate(&g, 5.0, SLICE_SAMPLES, 1.0).unwrap();
        assert_eq!(s.field.grid().samples(), 100);
        let i = s.field.grid().flat_index(&[13, 71]);
        let [x, y] = s.field.grid().node(i);
        let direct = crate::fieldeval::eval_herglotz(&g, &[[x, y, 1.0]])[0];
        assert!((s.field.values()[i] - direct).norm() < 1e-9 * (1.0 + direct.norm()));
    }
}
