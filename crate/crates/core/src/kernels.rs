//! Laplace and Helmholtz Green's functions and the smooth remainder
//! `ĝ(r;k) = g(r;k) − g(r)` with `g(r) = ln r / 2π` and `g(r;k) = −(i/4)H₀⁽¹⁾(kr)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::bessel::{hankel01, EULER_GAMMA};
use crate::error::{invalid, Result};
use crate::geometry::{EllipseParams, Vec2};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this `|k r|` the remainder is summed from its power series, which
/// avoids subtracting two nearly equal logarithms.
pub const HAT_SERIES_LIMIT: f64 = 5.0;

/// A radial kernel and its first two `r`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial {
    pub g: Complex64,
    pub dg: Complex64,
    pub ddg: Complex64,
}

pub fn green_laplace(r: f64) -> f64 {
    r.ln() / (2.0 * PI)
}

pub fn green_helmholtz(r: f64, k: Complex64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(invalid("r", "Helmholtz kernel is singular at r = 0"));
    }
    if k.norm() == 0.0 {
        return Err(invalid("k", "wavenumber must be non-zero"));
    }
    Ok(helmholtz_radial(r, k).g)
}

/// `g(r;k)` with derivatives for `r > 0` and `Im k ≥ 0`.
pub fn helmholtz_radial(r: f64, k: Complex64) -> Radial {
    let (h0, h1) = hankel01(k * r);
    let g = -0.25 * I * h0;
    let dg = 0.25 * I * k * h1;
    Radial {
        g,
        dg,
        ddg: -k * k * g - dg / r,
    }
}

/// `ĝ(0;k) = −i/4 + (ln(k/2) + γ)/2π`.
pub fn ghat_at_zero(k: Complex64) -> Complex64 {
    -0.25 * I + ((k * 0.5).ln() + EULER_GAMMA) / (2.0 * PI)
}

/// `(ĝ(r;k), ĝ′(r;k))` for `r ≥ 0`, continuous through the diagonal limits
/// `ĝ(0;k)` and `ĝ′(0;k) = 0`.
pub fn ghat(r: f64, k: Complex64) -> (Complex64, Complex64) {
    if r == 0.0 {
        return (ghat_at_zero(k), Complex64::new(0.0, 0.0));
    }
    if (k * r).norm() <= HAT_SERIES_LIMIT {
        ghat_series(r, k)
    } else {
        let rad = helmholtz_radial(r, k);
        (rad.g - green_laplace(r), rad.dg - 1.0 / (2.0 * PI * r))
    }
}

/// `ĝ`, `ĝ′` and `ĝ″ = −k² g(r;k) − ĝ′/r` for `r > 0`. The second
/// derivative diverges logarithmically at the origin.
pub fn ghat_radial(r: f64, k: Complex64) -> Radial {
    debug_assert!(r > 0.0);
    let (g, dg) = ghat(r, k);
    let full = g + green_laplace(r);
    Radial {
        g,
        dg,
        ddg: -k * k * full - dg / r,
    }
}

fn ghat_series(r: f64, k: Complex64) -> (Complex64, Complex64) {
    let z = k * r;
    let mq = -(z * z * 0.25);
    let mut t = Complex64::new(1.0, 0.0);
    let mut u = Complex64::new(1.0, 0.0);
    let mut j0m1 = Complex64::new(0.0, 0.0);
    let mut j1s = u;
    let mut s = Complex64::new(0.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0); // Σ -H_m t_m 2m, divided by z at the end
    let mut harm = 0.0;
    for m in 1..200 {
        let mf = m as f64;
        t *= mq / (mf * mf);
        u *= mq / (mf * (mf + 1.0));
        harm += 1.0 / mf;
        j0m1 += t;
        j1s += u;
        s -= t * harm;
        ds -= t * (harm * 2.0 * mf);
        if t.norm() * (1.0 + harm * 2.0 * mf) < 1e-18 * (1.0 + j0m1.norm()) {
            break;
        }
    }
    let j0 = 1.0 + j0m1;
    let j1 = z * 0.5 * j1s;
    let lr = r.ln();
    let c = (k * 0.5).ln() + EULER_GAMMA;
    let g = -0.25 * I * j0 + (c * j0 + lr * j0m1 + s) / (2.0 * PI);
    let dg = 0.25 * I * k * j1 + (-c * k * j1 + j0m1 / r - lr * k * j1 + k * ds / z) / (2.0 * PI);
    (g, dg)
}

/// `(J₀(kr) − 1, J₁(kr))`, the coefficients of the logarithmic part of the
/// smooth remainder. Uses the ascending series, switching to `Re H⁽¹⁾` for
/// real arguments beyond the series range.
pub fn bessel_j_log_parts(r: f64, k: Complex64) -> (Complex64, Complex64) {
    let z = k * r;
    if z.im == 0.0 && z.re > HAT_SERIES_LIMIT {
        let (h0, h1) = crate::bessel::hankel01(z);
        return (Complex64::from(h0.re - 1.0), Complex64::from(h1.re));
    }
    let mq = -(z * z * 0.25);
    let mut t = Complex64::new(1.0, 0.0);
    let mut u = Complex64::new(1.0, 0.0);
    let mut j0m1 = Complex64::new(0.0, 0.0);
    let mut j1s = u;
    for m in 1..200 {
        let mf = m as f64;
        t *= mq / (mf * mf);
        u *= mq / (mf * (mf + 1.0));
        j0m1 += t;
        j1s += u;
        if t.norm() < 1e-18 * j0m1.norm().max(1e-300) && u.norm() < 1e-18 * j1s.norm() {
            break;
        }
    }
    (j0m1, z * 0.5 * j1s)
}

/// `(G, G′)` of the full Helmholtz kernel (`hat = false`, needs `r > 0`) or
/// `(ĝ, ĝ′)` of the smooth remainder (`hat = true`, any `r ≥ 0`).
#[inline]
pub fn radial_pair(r: f64, k: Complex64, hat: bool) -> (Complex64, Complex64) {
    if hat {
        ghat(r, k)
    } else {
        let rad = helmholtz_radial(r, k);
        (rad.g, rad.dg)
    }
}

/// Like [`radial_pair`] but also returns the second derivative. For the
/// remainder at `r = 0` the second derivative is reported as zero; every
/// caller multiplies it by a factor that vanishes to second order there.
#[inline]
pub fn radial_triple(r: f64, k: Complex64, hat: bool) -> Radial {
    if hat {
        if r == 0.0 {
            let (g, dg) = ghat(0.0, k);
            return Radial { g, dg, ddg: Complex64::new(0.0, 0.0) };
        }
        ghat_radial(r, k)
    } else {
        helmholtz_radial(r, k)
    }
}

/// The two pieces of `∂Gᵏ(z)/∂ν_x`, kept apart so that callers can use the
/// correct diagonal limit for each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalKernel {
    /// `ĝ′(|z|;k) (ẑ·ν)`, whose diagonal limit is 0.
    pub hat: Complex64,
    /// `(ẑ·ν) / (2π|z|)`.
    pub laplace: f64,
}

pub fn normal_derivative_kernel(z: Vec2, nu: Vec2, k: Complex64) -> Result<NormalKernel> {
    let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
    if !(r > 0.0) {
        return Err(invalid("z", "coincident points need the diagonal limit"));
    }
    let zn = (z[0] * nu[0] + z[1] * nu[1]) / r;
    let (_, dg) = ghat(r, k);
    Ok(NormalKernel {
        hat: dg * zn,
        laplace: zn / (2.0 * PI * r),
    })
}

/// Diagonal value of the Laplace kernel `∂G(x(t)−x(s))/∂ν_x(t)` as `s → t`.
/// By symmetry the same number is the diagonal of `∂G(x(t)−x(s))/∂ν_y(s)`.
pub fn laplace_normal_limit(p: &EllipseParams, t: f64) -> f64 {
    let dd = p.second_derivative(t);
    let nu = p.normal(t);
    let sp = p.speed(t);
    -(dd[0] * nu[0] + dd[1] * nu[1]) / (4.0 * PI * sp * sp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_limit_with_unit_half_wavenumber() {
        let k = Complex64::new(2.0, 0.0);
        let g0 = ghat_at_zero(k);
        assert!((g0.re - EULER_GAMMA / (2.0 * PI)).abs() < 1e-16);
        assert!((g0.im + 0.25).abs() < 1e-16);
        assert_eq!(ghat(0.0, k).1, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn series_and_direct_agree_at_switch() {
        for &k in &[0.01, 0.04, 0.3] {
            let k = Complex64::new(k, 0.0);
            let r = HAT_SERIES_LIMIT / k.norm();
            let (a, da) = ghat_series(r, k);
            let rad = helmholtz_radial(r, k);
            let b = rad.g - green_laplace(r);
            let db = rad.dg - 1.0 / (2.0 * PI * r);
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
            assert!((da - db).norm() < 1e-12 * k.norm().max(1.0), "{da} vs {db}");
        }
    }

    #[test]
    fn perpendicular_normal_gives_zero() {
        let nk = normal_derivative_kernel([1.0, 0.0], [0.0, 1.0], Complex64::new(0.1, 0.0)).unwrap();
        assert_eq!(nk.hat, Complex64::new(0.0, 0.0));
        assert_eq!(nk.laplace, 0.0);
    }
}
