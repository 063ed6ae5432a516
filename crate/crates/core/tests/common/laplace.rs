//! Reference Laplace layer operators by fine-grid quadrature.
//!
//! The single layer splits `ln|x(t) − x(s)| = ln|2 sin((t−s)/2)| + L(t,s)`
//! with `L` smooth. The first part is integrated exactly against the
//! trigonometric interpolant of the rest of the integrand, using
//! `∫ ln|2 sin((t−s)/2)| cos(m s) ds = −π cos(m t)/m`. The double-layer type
//! kernels are smooth and use the plain trapezoid rule.

use ellipsorb::geometry::EllipseParams;
use std::f64::consts::PI;

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `∫ ln|2 sin((t−s)/2)| g(s) ds` from samples of `g` on `n` equispaced nodes.
fn log_sine_integral(g: &[f64], t: f64) -> f64 {
    let n = g.len();
    let h = 2.0 * PI / n as f64;
    let mut acc = 0.0;
    for m in 1..n / 2 {
        let (mut a, mut b) = (0.0, 0.0);
        for (l, v) in g.iter().enumerate() {
            let (s, c) = (m as f64 * h * l as f64).sin_cos();
            a += v * c;
            b += v * s;
        }
        a *= h / PI;
        b *= h / PI;
        let (s, c) = (m as f64 * t).sin_cos();
        acc -= PI * (a * c + b * s) / m as f64;
    }
    acc
}

/// `S[f](t) = (1/2π) ∫ ln|x(t) − x(s)| |x′(s)| f(s) ds`.
pub fn single_layer(p: &EllipseParams, f: &dyn Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let xt = p.point(t);
    let mut g = Vec::with_capacity(n);
    let mut smooth = 0.0;
    for l in 0..n {
        let s = h * l as f64;
        let w = p.speed(s) * f(s);
        g.push(w);
        let d = t - s;
        let two_sin = (2.0 * (0.5 * d).sin()).abs();
        let r = dot(sub(xt, p.point(s)), sub(xt, p.point(s))).sqrt();
        let ell = if two_sin < 1e-10 {
            p.speed(t).ln()
        } else {
            (r / two_sin).ln()
        };
        smooth += ell * w;
    }
    (log_sine_integral(&g, t) + smooth * h) / (2.0 * PI)
}

/// `S*[g](t) = |x′(t)| (1/2π) ∫ ln|x(t) − x(s)| g(s) ds`.
pub fn single_layer_adjoint(p: &EllipseParams, g: &dyn Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let f = |s: f64| g(s) / p.speed(s);
    p.speed(t) * single_layer(p, &f, t, n)
}

fn normal_limit(p: &EllipseParams, t: f64) -> f64 {
    let d1 = p.tangent(t);
    let d2 = p.second_derivative(t);
    // Signed curvature over 4π, with the outward normal convention.
    let cross = d1[0] * d2[1] - d1[1] * d2[0];
    cross / (4.0 * PI * p.speed(t).powi(3))
}

/// `K*[f](t) = ∫ ∂G(x(t) − x(s))/∂ν(t) |x′(s)| f(s) ds`.
pub fn np_adjoint(p: &EllipseParams, f: &dyn Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let xt = p.point(t);
    let nu = p.normal(t);
    let mut acc = 0.0;
    for l in 0..n {
        let s = h * l as f64;
        let z = sub(xt, p.point(s));
        let r2 = dot(z, z);
        let k = if r2 < 1e-24 {
            normal_limit(p, t)
        } else {
            dot(z, nu) / (2.0 * PI * r2)
        };
        acc += k * p.speed(s) * f(s);
    }
    acc * h
}

/// `K[g](t) = |x′(t)| ∫ ∂G(x(t) − x(s))/∂ν(s) g(s) ds`.
pub fn np(p: &EllipseParams, g: &dyn Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let xt = p.point(t);
    let mut acc = 0.0;
    for l in 0..n {
        let s = h * l as f64;
        let z = sub(xt, p.point(s));
        let r2 = dot(z, z);
        let k = if r2 < 1e-24 {
            normal_limit(p, s)
        } else {
            -dot(z, p.normal(s)) / (2.0 * PI * r2)
        };
        acc += k * g(s);
    }
    acc * h * p.speed(t)
}
