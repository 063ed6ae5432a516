//! Hankel functions of the first kind, orders 0 and 1.
//!
//! Arguments live in the closed upper half plane (`Im z ≥ 0`, `z ≠ 0`), which
//! covers `k r` for every wavenumber on the radiating branch. Three regimes:
//!
//! * `|z| ≤ 5` near the real axis: ascending series for J and Y.
//! * otherwise below `|z| = 20`: `H_ν(z) = (2/π) i^{-ν-1} K_ν(-iz)` with the Laplace-type
//!   integral of `K_ν` written as a Gaussian integral and summed by the
//!   trapezoid rule, which converges geometrically here because the nearest
//!   singularity of the integrand sits at distance `≥ √|z|` from the real line.
//! * `|z| ≥ 20`: Hankel's asymptotic expansion, truncated at its smallest term.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;

const SERIES_RADIUS: f64 = 5.0;
const ASYMPTOTIC_RADIUS: f64 = 20.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `(H₀⁽¹⁾(x), H₁⁽¹⁾(x))` for real `x > 0`.
pub fn hankel_h0_h1(x: f64) -> Result<(Complex64, Complex64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("z", format!("Hankel argument {x} must be positive")));
    }
    Ok(hankel01(Complex64::new(x, 0.0)))
}

/// `(H₀⁽¹⁾(z), H₁⁽¹⁾(z))` for `Im z ≥ 0`, `z ≠ 0`.
pub fn hankel01(z: Complex64) -> (Complex64, Complex64) {
    debug_assert!(z.im >= 0.0 && z.norm() > 0.0, "hankel01 outside domain: {z}");
    let r = z.norm();
    // Away from the real axis J and Y grow like e^{Im z} while H decays, so the
    // series loses digits to cancellation there.
    if r <= 2.0 || (r <= SERIES_RADIUS && z.im <= 2.0) {
        let (j0, j1, y0, y1) = series_jy(z);
        (j0 + I * y0, j1 + I * y1)
    } else if r < ASYMPTOTIC_RADIUS {
        gaussian_k(z)
    } else {
        asymptotic(z)
    }
}

/// Ascending series for `(J₀, J₁, Y₀, Y₁)`.
pub fn series_jy(z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let q = z * z * 0.25;
    let mq = -q;
    // t_m = (-q)^m / (m!)^2, u_m = (-q)^m / (m!(m+1)!)
    let mut t = Complex64::new(1.0, 0.0);
    let mut u = Complex64::new(1.0, 0.0);
    let mut j0 = t;
    let mut j1s = u;
    let mut harm = 0.0; // H_m
    let mut y0s = Complex64::new(0.0, 0.0);
    // ψ(m+1) + ψ(m+2) = 2H_m + 1/(m+1) - 2γ
    let mut y1s = Complex64::new(1.0 - 2.0 * EULER_GAMMA, 0.0);
    for m in 1..200 {
        let mf = m as f64;
        t *= mq / (mf * mf);
        u *= mq / (mf * (mf + 1.0));
        harm += 1.0 / mf;
        j0 += t;
        j1s += u;
        // (-1)^{m+1} H_m q^m/(m!)^2 = -H_m t_m
        y0s -= t * harm;
        y1s += u * (2.0 * harm + 1.0 / (mf + 1.0) - 2.0 * EULER_GAMMA);
        if t.norm() < 1e-18 * j0.norm().max(1e-300) && u.norm() < 1e-18 && m > 2 {
            break;
        }
    }
    let half = z * 0.5;
    let j1 = half * j1s;
    let lg = half.ln();
    let y0 = (2.0 / PI) * ((lg + EULER_GAMMA) * j0 + y0s);
    let y1 = -2.0 / (PI * z) + (2.0 / PI) * lg * j1 - (z / (2.0 * PI)) * y1s;
    (j0, j1, y0, y1)
}

const GK_STEP: f64 = 0.2;
const GK_NODES: usize = 36;

/// Trapezoid evaluation of
/// `K₀(w) = e^{-w}/√(2w) ∫ e^{-v²}(1 + v²/2w)^{-1/2} dv` and
/// `K₁(w) = 2e^{-w}/√(2w) ∫ e^{-v²} v² (1 + v²/2w)^{1/2} dv` at `w = -iz`.
fn gaussian_k(z: Complex64) -> (Complex64, Complex64) {
    let w = -I * z;
    let inv2w = 1.0 / (2.0 * w);
    let mut i0 = Complex64::new(1.0, 0.0);
    let mut i1 = Complex64::new(0.0, 0.0);
    for &(v2, g) in gaussian_nodes() {
        let s = principal_sqrt(1.0 + v2 * inv2w);
        i0 += 2.0 * g / s;
        i1 += 2.0 * g * v2 * s;
    }
    i0 *= GK_STEP;
    i1 *= GK_STEP;
    let pref = (-w).exp() / principal_sqrt(2.0 * w);
    let k0 = pref * i0;
    let k1 = 2.0 * pref * i1;
    // H0 = (2/(πi)) K0, H1 = -(2/π) K1
    (-2.0 * I / PI * k0, -2.0 / PI * k1)
}

/// `(v², e^{−v²})` at the positive trapezoid nodes `v = j·GK_STEP`.
fn gaussian_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        (1..GK_NODES)
            .map(|j| {
                let v = GK_STEP * j as f64;
                (v * v, (-v * v).exp())
            })
            .collect()
    })
}

/// Principal square root without the polar round trip.
#[inline]
fn principal_sqrt(z: Complex64) -> Complex64 {
    let m = z.re.hypot(z.im);
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.0 {
        let t = (0.5 * (m + z.re)).sqrt();
        Complex64::new(t, 0.5 * z.im / t)
    } else {
        let t = (0.5 * (m - z.re)).sqrt();
        Complex64::new(0.5 * z.im.abs() / t, t.copysign(z.im))
    }
}

fn asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let pref = (2.0 / (PI * z)).sqrt();
    let iz = I / z;
    let mut s0 = Complex64::new(1.0, 0.0);
    let mut s1 = Complex64::new(1.0, 0.0);
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    let mut last0 = f64::INFINITY;
    let mut last1 = f64::INFINITY;
    let mut done0 = false;
    let mut done1 = false;
    for k in 1..60 {
        let kf = k as f64;
        let odd = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        // a_k(ν) = a_{k-1}(ν) (4ν² - (2k-1)²) / (8k)
        if !done0 {
            let n0 = t0 * iz * ((0.0 - odd) / (8.0 * kf));
            if n0.norm() >= last0 {
                done0 = true;
            } else {
                last0 = n0.norm();
                t0 = n0;
                s0 += t0;
                done0 = last0 < 1e-17;
            }
        }
        if !done1 {
            let n1 = t1 * iz * ((4.0 - odd) / (8.0 * kf));
            if n1.norm() >= last1 && k > 1 {
                done1 = true;
            } else {
                last1 = n1.norm();
                t1 = n1;
                s1 += t1;
                done1 = last1 < 1e-17;
            }
        }
        if done0 && done1 {
            break;
        }
    }
    let e0 = (I * (z - PI / 4.0)).exp();
    let e1 = (I * (z - 3.0 * PI / 4.0)).exp();
    (pref * e0 * s0, pref * e1 * s1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive() {
        assert!(hankel_h0_h1(0.0).is_err());
        assert!(hankel_h0_h1(-1.0).is_err());
    }

    #[test]
    fn regimes_agree_at_crossovers() {
        for &r in &[SERIES_RADIUS, ASYMPTOTIC_RADIUS] {
            for &ang in &[0.0, 0.2, 0.4] {
                let z = Complex64::from_polar(r, ang);
                let (a0, a1) = if r == SERIES_RADIUS {
                    let (j0, j1, y0, y1) = series_jy(z);
                    (j0 + I * y0, j1 + I * y1)
                } else {
                    asymptotic(z)
                };
                let (b0, b1) = gaussian_k(z);
                assert!((a0 - b0).norm() <= 1e-13 * b0.norm(), "{z}: {a0} vs {b0}");
                assert!((a1 - b1).norm() <= 1e-13 * b1.norm(), "{z}: {a1} vs {b1}");
            }
        }
    }
}
