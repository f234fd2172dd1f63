//! Special functions: spherical Bessel functions `j_n`, the cylindrical
//! Bessel function `J₁`, and orthonormal complex spherical harmonics.
//!
//! Spherical harmonics follow the orthonormal convention on the unit sphere
//! with the Condon–Shortley phase `(−1)^m` folded into the associated
//! Legendre functions, so that
//!
//! ```text
//! Y_{n,−m} = (−1)^m conj(Y_{n,m}),   Y_{1,0}(θ) = √(3/4π) cos θ.
//! ```
//!
//! The Funk–Hecke factors `iⁿ` used elsewhere in the crate hold for any
//! orthonormal basis of degree-`n` harmonics, so the phase choice only has to
//! be applied consistently.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result, Vec3};

/// Largest supported degree for `j_n` and `Y_nm`.
pub const MAX_DEGREE: usize = 64;

/// Degree/order pair `(n, m)` with `|m| ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModalIndex {
    n: usize,
    m: i64,
}

impl ModalIndex {
    pub fn new(n: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > n {
            return Err(Error::InvalidArgument(format!(
                "order m = {m} exceeds degree n = {n}"
            )));
        }
        Ok(ModalIndex { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    /// Position in the flat `(n, m)` ordering `n² + n + m`.
    pub fn flat(&self) -> usize {
        ((self.n * self.n + self.n) as i64 + self.m) as usize
    }

    /// All indices with degree up to `max_degree`, in flat order.
    pub fn all_up_to(max_degree: usize) -> impl Iterator<Item = ModalIndex> {
        (0..=max_degree).flat_map(|n| (-(n as i64)..=n as i64).map(move |m| ModalIndex { n, m }))
    }
}

/// Number of `(n, m)` modes with `n ≤ max_degree`.
pub fn mode_count(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

/// Spherical Bessel function of the first kind `j_n(t)` for `t ≥ 0`.
///
/// Uses a power series for `t < 1`, Miller's downward recurrence for
/// `t < n`, and upward recurrence from `j₀`, `j₁` otherwise.
pub fn sph_bessel_j(n: usize, t: f64) -> Result<f64> {
    if n > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(n));
    }
    check_argument(t)?;
    Ok(sph_bessel_seq(n, t)[n])
}

/// `j_0(t), …, j_{max_degree}(t)` in one sweep.
pub fn sph_bessel_j_all(max_degree: usize, t: f64) -> Result<Vec<f64>> {
    if max_degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(max_degree));
    }
    check_argument(t)?;
    Ok(sph_bessel_seq(max_degree, t))
}

fn check_argument(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

pub(crate) fn sph_bessel_seq(nmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if t < 1.0 {
        let mut prefactor = 1.0;
        let half_t2 = -0.5 * t * t;
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                prefactor *= t / (2 * n + 1) as f64;
            }
            if prefactor == 0.0 {
                break;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..60 {
                term *= half_t2 / (k as f64 * (2 * n + 2 * k + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *slot = prefactor * sum;
        }
        return out;
    }

    let (s, c) = t.sin_cos();
    let j0 = s / t;
    let j1 = s / (t * t) - c / t;

    if t >= nmax as f64 {
        out[0] = j0;
        if nmax >= 1 {
            out[1] = j1;
        }
        for n in 1..nmax {
            out[n + 1] = (2 * n + 1) as f64 / t * out[n] - out[n - 1];
        }
        return out;
    }

    // Miller: start well above both nmax and t with (0, tiny) and run down.
    let start = nmax + 40 + t as usize;
    let mut upper = 0.0_f64;
    let mut current = 1e-300_f64;
    for n in (1..=start).rev() {
        let lower = (2 * n + 1) as f64 / t * current - upper;
        upper = current;
        current = lower;
        if n - 1 <= nmax {
            out[n - 1] = current;
        }
        if current.abs() > 1e250 {
            let scale = 1e-250;
            current *= scale;
            upper *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Cylindrical Bessel function `J₁(t)`.
pub fn bessel_j1(t: f64) -> f64 {
    t * bessel_j1_over_t(t)
}

/// `J₁(t)/t`, continuous at the origin where it equals `1/2`.
///
/// Power series below `t = 12`, Hankel asymptotic expansion above.
pub fn bessel_j1_over_t(t: f64) -> f64 {
    let t = t.abs();
    if t < 12.0 {
        let q = -0.25 * t * t;
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..80 {
            term *= q / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        return sum;
    }
    // P ~ Σ (−1)^k a_{2k}/t^{2k}, Q ~ Σ (−1)^k a_{2k+1}/t^{2k+1}
    // with a_j = Π_{i≤j} (4ν² − (2i−1)²) / (j! 8^j), ν = 1.
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut last = f64::INFINITY;
    for j in 1..60 {
        let odd = (2 * j - 1) as f64;
        a *= (mu - odd * odd) / (j as f64 * 8.0 * t);
        if a.abs() > last || a.abs() < 1e-17 {
            break;
        }
        last = a.abs();
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    let chi = t - 0.75 * PI;
    let (s, c) = chi.sin_cos();
    (2.0 / (PI * t)).sqrt() * (p * c - q * s) / t
}

/// `Y_nm(dir)` for a unit direction.
pub fn sph_harm(idx: ModalIndex, dir: &Vec3) -> Result<Complex64> {
    check_unit(dir)?;
    let values = sph_harm_all(idx.n, dir);
    Ok(values[idx.flat()])
}

fn check_unit(dir: &Vec3) -> Result<()> {
    let len = crate::norm(dir);
    if !((len - 1.0).abs() <= 1e-12) {
        return Err(Error::Domain(format!(
            "direction must be a unit vector, |dir| = {len}"
        )));
    }
    Ok(())
}

/// All `Y_nm(dir)` with `n ≤ max_degree`, in [`ModalIndex::flat`] order.
///
/// `dir` is assumed to be unit length; no check is made.
pub fn sph_harm_all(max_degree: usize, dir: &Vec3) -> Vec<Complex64> {
    let count = mode_count(max_degree);
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    let x = dir[2].clamp(-1.0, 1.0);
    let rho = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let phase = if rho > 0.0 {
        Complex64::new(dir[0] / rho, dir[1] / rho)
    } else {
        Complex64::new(1.0, 0.0)
    };

    // Normalized associated Legendre functions, m ≥ 0, Condon–Shortley included.
    let mut diag = (1.0 / (4.0 * PI)).sqrt();
    let mut eimphi = Complex64::new(1.0, 0.0);
    for m in 0..=max_degree {
        if m > 0 {
            let mf = m as f64;
            diag *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * rho;
            eimphi *= phase;
        }
        let mut p_prev = 0.0;
        let mut p_curr = diag;
        for n in m..=max_degree {
            if n == m + 1 {
                p_prev = p_curr;
                p_curr = x * ((2 * m + 3) as f64).sqrt() * diag;
            } else if n > m + 1 {
                let nf = n as f64;
                let mf = m as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                    .sqrt();
                let next = a * (x * p_curr - b * p_prev);
                p_prev = p_curr;
                p_curr = next;
            }
            let y = eimphi * p_curr;
            let base = n * n + n;
            out[base + m] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[base - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// `∫₀^R r² j_n(kr)² dr`, i.e. `‖u_nm‖²` on the ball `B(0,R)`.
///
/// Composite Gauss–Legendre on panels a quarter wavelength wide, each panel
/// refined by bisection until the 10- and 20-point rules agree to `1e-10`.
pub fn radial_bessel_norm(n: usize, k: f64, radius: f64) -> Result<f64> {
    if n > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(n));
    }
    if !(k > 0.0 && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavenumber and radius must be positive (k = {k}, R = {radius})"
        )));
    }
    let integrand = |r: f64| {
        let j = sph_bessel_seq(n, k * r)[n];
        r * r * j * j
    };
    let panel = 0.5 * PI / k;
    let panels = (radius / panel).ceil().max(1.0) as usize;
    let width = radius / panels as f64;
    let total = (0..panels)
        .map(|i| {
            let a = i as f64 * width;
            adaptive_gauss(&integrand, a, a + width, 1e-10, 30)
        })
        .sum();
    Ok(total)
}

fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64, depth: u32) -> f64 {
    let coarse = quad::gauss_legendre_apply(10, f, a, b);
    let fine = quad::gauss_legendre_apply(20, f, a, b);
    if depth == 0 || (coarse - fine).abs() <= rel * fine.abs() || fine == 0.0 && coarse == 0.0 {
        return fine;
    }
    let mid = 0.5 * (a + b);
    adaptive_gauss(f, a, mid, rel, depth - 1) + adaptive_gauss(f, mid, b, rel, depth - 1)
}

pub(crate) mod quad {
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    /// Gauss–Legendre nodes and weights on `[−1, 1]`.
    pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        (nodes, weights)
    }

    fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        for j in 2..=order {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, d)
    }

    fn cached(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
        static TEN: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        static TWENTY: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        match order {
            10 => TEN.get_or_init(|| gauss_legendre(10)),
            20 => TWENTY.get_or_init(|| gauss_legendre(20)),
            _ => unreachable!("only the 10- and 20-point rules are cached"),
        }
    }

    pub fn gauss_legendre_apply(order: usize, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (nodes, weights) = cached(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision evaluation.
    const J_TABLE: &[(usize, f64, f64)] = &[
        (0, 0.25, 0.989615837018091718),
        (0, 5.0, -0.191784854932627694),
        (1, 0.001, 0.000333333300000001197),
        (2, 0.7, 0.0315387803766147179),
        (3, 1.0, 0.00900658111711251626),
        (5, 2.5, 0.00735763873776893629),
        (5, 4.999, 0.106752316112824443),
        (10, 3.0, 3.52600389317525633e-6),
        (10, 10.0, 0.0646051544925642643),
        (10, 55.0, 0.0095256289349167383),
        (20, 5.0, 5.42772676079320835e-12),
        (20, 19.5, 0.0315425235490181327),
        (30, 29.9, 0.0271665344826030956),
        (40, 1.5, 1.68808789219496548e-54),
        (50, 80.0, -0.0106385701180818172),
        (64, 10.0, 3.20882654890351594e-46),
        (64, 63.0, 0.0118336812413226436),
        (64, 64.0, 0.0155020910315421004),
        (64, 100.0, 0.00889873222712548641),
        (7, 0.001, 4.93333812157341832e-28),
    ];

    #[test]
    fn j0_special_points() {
        assert_eq!(sph_bessel_j(0, 0.0).unwrap(), 1.0);
        assert!(sph_bessel_j(0, PI).unwrap().abs() < 1e-15);
        assert!((sph_bessel_j(1, PI).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(sph_bessel_j(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn degree_cap_and_domain() {
        assert!(matches!(
            sph_bessel_j(65, 1.0),
            Err(Error::UnsupportedDegree(65))
        ));
        assert!(sph_bessel_j(64, 10.0).is_ok());
        assert!(matches!(sph_bessel_j(2, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(sph_bessel_j(2, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_table() {
        for &(n, t, expected) in J_TABLE {
            let got = sph_bessel_j(n, t).unwrap();
            let scale = expected.abs().max(1e-300);
            assert!(
                (got - expected).abs() <= 1e-12 * scale + 1e-300,
                "j_{n}({t}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn three_term_recurrence() {
        for i in 0..=200 {
            let t = 0.5 + 99.5 * i as f64 / 200.0;
            let j = sph_bessel_j_all(11, t).unwrap();
            for n in 1..=10 {
                let lhs = j[n - 1] + j[n + 1];
                let rhs = (2 * n + 1) as f64 * j[n] / t;
                let scale = lhs.abs().max(rhs.abs()).max(j[n - 1].abs()).max(1e-300);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * scale,
                    "n = {n}, t = {t}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn seq_matches_single_calls() {
        for &t in &[0.3, 2.0, 7.5, 30.0, 70.0] {
            let all = sph_bessel_j_all(20, t).unwrap();
            for (n, v) in all.iter().enumerate() {
                let single = sph_bessel_j(n, t).unwrap();
                assert!((single - v).abs() <= 1e-12 * v.abs().max(1e-200));
            }
        }
    }

    /// Independent `J₁` through Bessel's integral `(1/π)∫₀^π cos(τ − t sin τ) dτ`.
    fn j1_integral(t: f64) -> f64 {
        let steps = 2000;
        let h = PI / steps as f64;
        let mut s = 0.0;
        for i in 0..=steps {
            let tau = i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            s += w * (tau - t * tau.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j1_against_integral_representation() {
        for i in 0..120 {
            let t = 0.05 + 0.25 * i as f64;
            let got = bessel_j1(t);
            let want = j1_integral(t);
            assert!((got - want).abs() < 1e-10, "t = {t}: {got} vs {want}");
        }
        assert_eq!(bessel_j1_over_t(0.0), 0.5);
    }

    #[test]
    fn j1_first_zero() {
        let (mut lo, mut hi) = (3.0, 4.5);
        assert!(j1_integral(lo) > 0.0 && j1_integral(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if j1_integral(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle_zero = 0.5 * (lo + hi);
        assert!((oracle_zero - 3.8317060).abs() < 1e-6);
        assert!(bessel_j1_over_t(oracle_zero - 1e-6) > 0.0);
        assert!(bessel_j1_over_t(oracle_zero + 1e-6) < 0.0);

        // With k = 2π/λ the zero sits at z ≈ 1.22 λ/2.
        let lambda = 1.0;
        let k = 2.0 * PI / lambda;
        let z = oracle_zero / k;
        assert!((z / (lambda / 2.0) - 1.22).abs() < 0.005);
    }

    #[test]
    fn harmonic_low_orders() {
        let y00 = sph_harm(ModalIndex::new(0, 0).unwrap(), &[0.6, 0.0, 0.8]).unwrap();
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let y10 = sph_harm(ModalIndex::new(1, 0).unwrap(), &[0.0, 0.0, 1.0]).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        // Y₁₁ = −√(3/8π) sinθ e^{iφ}
        let y11 = sph_harm(ModalIndex::new(1, 1).unwrap(), &[0.0, 1.0, 0.0]).unwrap();
        assert!((y11 - Complex64::new(0.0, -(3.0 / (8.0 * PI)).sqrt())).norm() < 1e-15);
        // Y₂₁ = −√(15/8π) sinθ cosθ e^{iφ}
        let d = [0.48, 0.36, 0.8];
        let y21 = sph_harm(ModalIndex::new(2, 1).unwrap(), &d).unwrap();
        let sin_t: f64 = 0.6;
        let want = Complex64::new(0.8, 0.6) * (-(15.0 / (8.0 * PI)).sqrt() * sin_t * 0.8);
        assert!((y21 - want).norm() < 1e-14);
    }

    #[test]
    fn harmonic_rejects_non_unit() {
        let idx = ModalIndex::new(2, 1).unwrap();
        assert!(matches!(sph_harm(idx, &[0.0, 0.0, 1.1]), Err(Error::Domain(_))));
        assert!(ModalIndex::new(2, 3).is_err());
    }

    #[test]
    fn conjugation_symmetry() {
        let d = {
            let v: Vec3 = [0.3, -0.5, 0.7];
            let l = crate::norm(&v);
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let all = sph_harm_all(12, &d);
        for idx in ModalIndex::all_up_to(12) {
            let m = idx.m();
            if m <= 0 {
                continue;
            }
            let neg = ModalIndex::new(idx.n(), -m).unwrap();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((all[neg.flat()] - all[idx.flat()].conj() * sign).norm() < 1e-14);
        }
    }

    #[test]
    fn radial_norm_small_ball() {
        let r = 1e-3;
        let v = radial_bessel_norm(0, 1.0, r).unwrap();
        assert!((v / (r * r * r / 3.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn radial_norm_large_ball() {
        let (k, r) = (1.0, 200.0);
        let v = radial_bessel_norm(0, k, r).unwrap();
        assert!((v / (r / (2.0 * k * k)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = quad::gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
