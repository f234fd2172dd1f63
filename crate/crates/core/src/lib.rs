//! Approximation of target functions by Herglotz wave functions.
//!
//! A Herglotz wave function is a superposition of plane waves that all share
//! the wavenumber `k`:
//!
//! ```text
//! u(x) = ∫_{S(0,k)} g(z) exp(i x·z) dS(z)
//! ```
//!
//! The crate computes densities `g` that best approximate a target `f`, either
//! in a ball (via the spherical wave expansion and its large-radius limit) or on
//! the plane `x₃ = 0` (via a band-limiting projection), evaluates the resulting
//! fields and compares their nodal sets with those of the target.

pub mod analysis;
pub mod ballapprox;
pub mod error;
pub mod experiment;
pub mod fieldeval;
pub mod grid;
pub mod planeapprox;
pub mod raster;
pub mod spheremesh;
pub mod specfun;
pub mod targets;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use wave::WaveContext;

/// Plain 3-vector used for positions and directions.
pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
