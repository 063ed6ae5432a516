//! Closed-form actions of the Laplace single layer and Neumann–Poincaré
//! operators on the eigenbasis of one ellipse, and their shape derivatives.
//!
//! In elliptic coordinates `a = c cosh ρ`, `b = c sinh ρ`, with metric
//! `Ξ(t) = c √(sinh²ρ + sin²t)` and `α_n = e^{-2nρ}/2`:
//!
//! * forward basis `ψ = trig(nt)/Ξ`, with `K*[ψ] = ∓α_n ψ` (minus for sine),
//!   `S[sin/Ξ] = −(½ − α_n) sin(nt)/n`, `S[cos/Ξ] = −(½ + α_n) cos(nt)/n`
//!   and `S[1/Ξ] = ρ + ln(c/2)`;
//! * adjoint basis `p = trig(nt)` and `q = trig(nt) Ξ`, with `K[q] = ∓α_n q`
//!   and `S*[trig] = (same coefficient) · trig · Ξ`.
//!
//! All lengths are in nanometres. The order-zero single-layer value contains
//! `ln c`, so it depends on that unit choice.
//!
//! Basis functions are indexed as in the collocation scheme: sine orders
//! `1..N/2−1` first, then cosine orders `0..=N/2`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{EllipseParams, EllipticData, SLOTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Sin,
    Cos,
}

/// One trigonometric mode `sin(nt)` or `cos(nt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub parity: Parity,
    pub order: usize,
}

impl Mode {
    #[inline]
    pub fn trig(&self, t: f64) -> f64 {
        let x = self.order as f64 * t;
        match self.parity {
            Parity::Sin => x.sin(),
            Parity::Cos => x.cos(),
        }
    }

    /// `−1` for sine modes and `+1` for cosine modes: the sign of the
    /// eigenvalue of `K*` on this mode.
    #[inline]
    pub fn eigen_sign(&self) -> f64 {
        match self.parity {
            Parity::Sin => -1.0,
            Parity::Cos => 1.0,
        }
    }
}

/// The `N` modes of a basis of size `N`.
pub fn modes(n: usize) -> Result<Vec<Mode>> {
    if n < 2 || n % 2 != 0 {
        return Err(invalid("basis_size", format!("N = {n} must be even and at least 2")));
    }
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    out.extend((1..half).map(|order| Mode {
        parity: Parity::Sin,
        order,
    }));
    out.extend((0..=half).map(|order| Mode {
        parity: Parity::Cos,
        order,
    }));
    Ok(out)
}

/// Truncation of the series used for `S[ψ/Ξ²]` and `K*[ψ/Ξ²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Number of Fourier terms kept.
    pub terms: usize,
    /// Trapezoid nodes for the κ integrals.
    pub nodes: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            terms: 64,
            nodes: 256,
        }
    }
}

impl SeriesOptions {
    /// Counts actually used for elliptic radius `rho` and basis size `n`.
    ///
    /// The Fourier coefficients of `trig/Ξ²` decay like `e^{-nρ}`, so flat
    /// ellipses need more than the configured defaults. The counts are raised
    /// until the first dropped term is below `1e-16`.
    pub fn effective(&self, rho: f64, n: usize) -> SeriesOptions {
        let decay = (37.0 / rho).ceil() as usize;
        let terms = self.terms.max(n / 2 + decay);
        let mut nodes = self.nodes.max(2 * terms + decay);
        nodes += nodes % 2;
        SeriesOptions { terms, nodes }
    }
}

/// `(κ^{ss}, κ^{cs}, κ^{sc}, κ^{cc})` for orders `(n, i)`:
/// `κ^{xy}_{ni} = (1/cπ) ∫ x(ns) y(is) / (sinh²ρ + sin²s) ds`, by the
/// periodic trapezoid rule on `nodes` points.
pub fn kappa_coefficients(e: &EllipticData, n: usize, i: usize, nodes: usize) -> [f64; 4] {
    let sh2 = e.rho.sinh().powi(2);
    let h = 2.0 * PI / nodes as f64;
    let mut k = [0.0; 4];
    for l in 0..nodes {
        let s = h * l as f64;
        let w = 1.0 / (sh2 + s.sin().powi(2));
        let (sn, cn) = (n as f64 * s).sin_cos();
        let (si, ci) = (i as f64 * s).sin_cos();
        k[0] += sn * si * w;
        k[1] += cn * si * w;
        k[2] += sn * ci * w;
        k[3] += cn * ci * w;
    }
    k.map(|v| v * h / (e.c * PI))
}

/// Cosine moments `C_m = (1/cπ) ∫ cos(ms)/(sinh²ρ + sin²s) ds` for
/// `m = 0..count`, by the trapezoid rule. Products of modes reduce to these
/// through `cos·cos = ½[cos(n−i) + cos(n+i)]` and `sin·sin = ½[cos(n−i) − cos(n+i)]`.
fn cosine_moments(e: &EllipticData, count: usize, nodes: usize) -> Vec<f64> {
    let sh2 = e.rho.sinh().powi(2);
    let h = 2.0 * PI / nodes as f64;
    let weights: Vec<f64> = (0..nodes)
        .map(|l| 1.0 / (sh2 + (h * l as f64).sin().powi(2)))
        .collect();
    let scale = h / (e.c * PI);
    (0..count)
        .map(|m| {
            // cos(m s_l) only depends on (m l) mod nodes.
            let acc: f64 = weights
                .iter()
                .enumerate()
                .map(|(l, w)| w * (h * ((m * l) % nodes) as f64).cos())
                .sum();
            acc * scale
        })
        .collect()
}

/// Eigenbasis of one ellipse with everything needed to evaluate the singular
/// operator actions and their derivatives at arbitrary `t`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub params: EllipseParams,
    pub elliptic: EllipticData,
    pub modes: Vec<Mode>,
    /// `α` of each basis function.
    pub alpha: Vec<f64>,
    series: SeriesOptions,
    /// `α_n` for `n = 0..=series.terms`.
    alpha_series: Vec<f64>,
    /// Same-parity κ coefficients of each basis function, `n = 0..=terms`.
    kappa: Vec<Vec<f64>>,
}

impl SpectralBasis {
    pub fn new(params: &EllipseParams, n: usize, series: SeriesOptions) -> Result<Self> {
        params.validate()?;
        let modes = modes(n)?;
        let elliptic = params.elliptic();
        let series = series.effective(elliptic.rho, n);
        let alpha_of = |order: usize| 0.5 * (-2.0 * order as f64 * elliptic.rho).exp();
        let alpha = modes.iter().map(|m| alpha_of(m.order)).collect();
        let alpha_series = (0..=series.terms).map(alpha_of).collect();
        let moments = cosine_moments(&elliptic, series.terms + n / 2 + 1, series.nodes);
        let kappa = modes
            .iter()
            .map(|m| {
                let i = m.order;
                (0..=series.terms)
                    .map(|k| {
                        let lo = moments[k.abs_diff(i)];
                        let hi = moments[k + i];
                        match m.parity {
                            Parity::Sin => 0.5 * (lo - hi),
                            Parity::Cos => 0.5 * (lo + hi),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(SpectralBasis {
            params: *params,
            elliptic,
            modes,
            alpha,
            series,
            alpha_series,
            kappa,
        })
    }

    pub fn size(&self) -> usize {
        self.modes.len()
    }

    /// Series truncation actually in use.
    pub fn series(&self) -> SeriesOptions {
        self.series
    }

    #[inline]
    pub fn xi(&self, t: f64) -> f64 {
        self.elliptic.xi(t)
    }

    #[inline]
    pub fn trig(&self, i: usize, t: f64) -> f64 {
        self.modes[i].trig(t)
    }

    /// Forward basis function `ψ_i(t) = trig_i(t)/Ξ(t)`.
    pub fn forward(&self, i: usize, t: f64) -> f64 {
        self.trig(i, t) / self.xi(t)
    }

    /// Adjoint basis for `p̃`: `trig_i(t)`.
    pub fn adjoint_p(&self, i: usize, t: f64) -> f64 {
        self.trig(i, t)
    }

    /// Adjoint basis for `q̃`: `trig_i(t) Ξ(t)`.
    pub fn adjoint_q(&self, i: usize, t: f64) -> f64 {
        self.trig(i, t) * self.xi(t)
    }

    /// Coefficient `s_i` with `S[ψ_i] = s_i trig_i` (order zero: constant).
    fn single_layer_coefficient(&self, i: usize) -> f64 {
        let m = self.modes[i];
        if m.order == 0 {
            return self.elliptic.rho + (0.5 * self.elliptic.c).ln();
        }
        let a = self.alpha[i];
        match m.parity {
            Parity::Sin => -(0.5 - a) / m.order as f64,
            Parity::Cos => -(0.5 + a) / m.order as f64,
        }
    }

    /// `S[ψ_i](t)` for the Laplace single layer.
    pub fn single_layer(&self, i: usize, t: f64) -> f64 {
        self.single_layer_coefficient(i) * self.trig(i, t)
    }

    /// `K*[ψ_i](t) = ∓α_i ψ_i(t)`.
    pub fn np_adjoint(&self, i: usize, t: f64) -> f64 {
        self.modes[i].eigen_sign() * self.alpha[i] * self.forward(i, t)
    }

    /// `S*[trig_i](t)` for the adjoint of the parameterized single layer.
    pub fn single_layer_adjoint(&self, i: usize, t: f64) -> f64 {
        self.single_layer_coefficient(i) * self.trig(i, t) * self.xi(t)
    }

    /// `K[q_i](t) = ∓α_i q_i(t)`.
    pub fn np(&self, i: usize, t: f64) -> f64 {
        self.modes[i].eigen_sign() * self.alpha[i] * self.adjoint_q(i, t)
    }

    /// Same-parity κ coefficient `κ_{n,i}` as used by the series.
    pub fn kappa(&self, n: usize, i: usize) -> f64 {
        self.kappa[i][n]
    }

    /// `S[ψ_i/Ξ²](t)`, summed from the Fourier expansion of `trig_i/Ξ²`.
    pub fn single_layer_weighted(&self, i: usize, t: f64) -> f64 {
        let e = &self.elliptic;
        let parity = self.modes[i].parity;
        let kap = &self.kappa[i];
        let mut acc = match parity {
            Parity::Cos => 0.5 * kap[0] * (e.rho + (0.5 * e.c).ln()),
            Parity::Sin => 0.0,
        };
        for n in 1..=self.series.terms {
            let nf = n as f64;
            let a = self.alpha_series[n];
            let term = match parity {
                Parity::Sin => (0.5 - a) * (nf * t).sin(),
                Parity::Cos => (0.5 + a) * (nf * t).cos(),
            };
            acc -= kap[n] * term / nf;
        }
        acc / e.c
    }

    /// `K*[ψ_i/Ξ²](t)`, summed from the same expansion.
    pub fn np_adjoint_weighted(&self, i: usize, t: f64) -> f64 {
        let e = &self.elliptic;
        let parity = self.modes[i].parity;
        let kap = &self.kappa[i];
        let mut acc = match parity {
            Parity::Cos => 0.25 * kap[0],
            Parity::Sin => 0.0,
        };
        for n in 1..=self.series.terms {
            let a = self.alpha_series[n];
            if a < 1e-300 {
                break;
            }
            let x = n as f64 * t;
            acc += match parity {
                Parity::Sin => -a * kap[n] * x.sin(),
                Parity::Cos => a * kap[n] * x.cos(),
            };
        }
        acc / (e.c * self.xi(t))
    }

    /// Shape derivatives `(∂S_w/∂w [ψ_i](t), ∂K*_w/∂w [ψ_i](t))` with the
    /// density held fixed as a function of `t`. Only the `a` and `b` slots can
    /// be non-zero.
    ///
    /// Obtained as `∂(S[ψ_i])/∂w − S[∂ψ_i/∂w]` (and likewise for `K*`), where
    /// `∂ψ_i/∂w = −ψ_i (c_w/c) − ab ρ_w ψ_i/Ξ²`.
    pub fn derivative_actions(&self, i: usize, t: f64) -> ([f64; SLOTS], [f64; SLOTS]) {
        let p = &self.params;
        let e = &self.elliptic;
        let m = self.modes[i];
        let nf = m.order as f64;
        let a = self.alpha[i];
        let c_w = p.dc_dw();
        let rho_w = p.drho_dw();
        let ab = p.a * p.b;
        let xi = self.xi(t);
        let trig = m.trig(t);
        let psi = trig / xi;
        let s_psi = self.single_layer(i, t);
        let k_psi = self.np_adjoint(i, t);
        let s_w = self.single_layer_weighted(i, t);
        let k_w = self.np_adjoint_weighted(i, t);
        let mut ds = [0.0; SLOTS];
        let mut dk = [0.0; SLOTS];
        for slot in 0..2 {
            let cr = c_w[slot] / e.c;
            let rr = rho_w[slot];
            // d(S[ψ_i])/dw with α_n' = −2nα_n ρ_w.
            let total_s = if m.order == 0 {
                rr + cr
            } else {
                match m.parity {
                    Parity::Sin => -2.0 * a * rr * trig,
                    Parity::Cos => 2.0 * a * rr * trig,
                }
            };
            // d(∓α ψ)/dw.
            let total_k = -m.eigen_sign() * a * psi * (cr + (2.0 * nf + ab / (xi * xi)) * rr);
            ds[slot] = total_s + cr * s_psi + ab * rr * s_w;
            dk[slot] = total_k + cr * k_psi + ab * rr * k_w;
        }
        (ds, dk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(a: f64, b: f64, n: usize) -> SpectralBasis {
        let p = EllipseParams::new(a, b, 0.3, 1.0, 2.0).unwrap();
        SpectralBasis::new(&p, n, SeriesOptions::default()).unwrap()
    }

    #[test]
    fn layout_for_ten() {
        let m = modes(10).unwrap();
        let sines: Vec<_> = m.iter().filter(|m| m.parity == Parity::Sin).map(|m| m.order).collect();
        let cosines: Vec<_> = m.iter().filter(|m| m.parity == Parity::Cos).map(|m| m.order).collect();
        assert_eq!(sines, vec![1, 2, 3, 4]);
        assert_eq!(cosines, vec![0, 1, 2, 3, 4, 5]);
        assert!(modes(7).is_err());
    }

    #[test]
    fn alpha_values() {
        let b = basis(10.0, 6.0, 10);
        let c0 = b.modes.iter().position(|m| m.parity == Parity::Cos && m.order == 0).unwrap();
        assert_eq!(b.alpha[c0], 0.5);
        assert!((b.alpha[0] - 0.125).abs() < 1e-15);
        assert!((b.single_layer(0, 0.4) + 0.375 * 0.4f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn flat_ellipse_raises_series_counts() {
        let b = basis(10.0, 1.0, 10);
        assert!(b.series().terms > 300);
        assert!(b.series().nodes > 2 * b.series().terms);
    }

    #[test]
    fn pure_scaling_leaves_np_operator_invariant() {
        // The Laplace K* is scale invariant, so its derivative along
        // (a, b) ∝ (a, b) must vanish.
        let b = basis(10.0, 4.0, 10);
        for i in 0..b.size() {
            for &t in &[0.1, 1.3, 2.9] {
                let (_, dk) = b.derivative_actions(i, t);
                let along = dk[0] * 10.0 + dk[1] * 4.0;
                assert!(along.abs() < 1e-12, "i = {i}: {along}");
            }
        }
    }
}
