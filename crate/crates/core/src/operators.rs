//! Trapezoid-rule blocks of the wavelength-dependent (non-singular) operator
//! parts, evaluated on the basis at the collocation nodes.
//!
//! Rows are `(target particle n, collocation node j)` and columns are
//! `(source particle m, basis index i)`, both flattened as `particle · N + index`.
//! Diagonal particle blocks use the remainder `Ĝᵏ = Gᵏ − G`; off-diagonal
//! blocks use the full kernel `Gᵏ`. The remainder still carries a weak
//! `(J₀(kr) − 1) ln r` term, so diagonal blocks split it off and integrate it
//! with trigonometric product weights; the plain trapezoid rule would only
//! converge algebraically.

use num_complex::Complex64;

use crate::design::DesignCache;
use crate::kernels::{bessel_j_log_parts, radial_pair};
use crate::linalg::CMatrix;

/// Non-singular parts of `S` and `K*` (forward) or of `S*` and `K` (adjoint)
/// for the two wavenumbers. Index 0 is the particle wavenumber `k_c`,
/// index 1 the background wavenumber `k_m`.
#[derive(Debug, Clone)]
pub struct SmoothBlocks {
    pub single: [CMatrix; 2],
    pub double: [CMatrix; 2],
}

/// Forward and (optionally) adjoint smooth blocks from one sweep over kernel
/// evaluations.
///
/// Forward entries are `Σ_l w Ĝ(x_j − y_l) trig_i(s_l)` and
/// `Σ_l w ∂Ĝ/∂ν_x trig_i(s_l)`, since `|y′| ψ_i = trig_i`.
/// Adjoint entries carry the target-side weight `|x′(t_j)|` and conjugated
/// kernels: `Σ_l w conj(Ĝ) |x′(t_j)| trig_i(s_l)` and
/// `Σ_l w conj(∂Ĝ/∂ν_y) |x′(t_j)| trig_i(s_l) Ξ(s_l)`.
pub fn smooth_blocks(
    cache: &DesignCache,
    k: [Complex64; 2],
    adjoint: bool,
) -> (SmoothBlocks, Option<SmoothBlocks>) {
    let n_basis = cache.basis_size();
    let dim = cache.block();
    let w = cache.quad_weight();
    let nq = cache.opts.quad_count();
    let four_pi = 4.0 * std::f64::consts::PI;
    let zero = || CMatrix::zeros(dim, dim);
    let mut fwd = SmoothBlocks {
        single: [zero(), zero()],
        double: [zero(), zero()],
    };
    let mut adj = if adjoint {
        Some(SmoothBlocks {
            single: [zero(), zero()],
            double: [zero(), zero()],
        })
    } else {
        None
    };
    let mut acc = vec![Complex64::new(0.0, 0.0); 8 * n_basis];
    for (n, target) in cache.particles.iter().enumerate() {
        for (j, xj) in target.colloc.iter().enumerate() {
            let row = n * n_basis + j;
            for (m, source) in cache.particles.iter().enumerate() {
                let hat = n == m;
                acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (l, ys) in source.quad.iter().enumerate() {
                    let z = [xj.x[0] - ys.x[0], xj.x[1] - ys.x[1]];
                    let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
                    let (zx, zy) = if r > 0.0 {
                        (
                            (z[0] * xj.normal[0] + z[1] * xj.normal[1]) / r,
                            (z[0] * ys.normal[0] + z[1] * ys.normal[1]) / r,
                        )
                    } else {
                        (0.0, 0.0)
                    };
                    let trig = &source.trig_quad[l * n_basis..(l + 1) * n_basis];
                    let lw = if hat { cache.log_weights[j * nq + l] } else { 0.0 };
                    for (kk, &kv) in k.iter().enumerate() {
                        let (g, dg) = radial_pair(r, kv, hat);
                        // Log coefficients of ĝ and ĝ′ (ẑ·ν): (J₀ − 1)/4π and −k J₁/4π.
                        let (la, lb) = if hat {
                            let (j0m1, j1) = bessel_j_log_parts(r, kv);
                            (j0m1 / four_pi, -kv * j1 / four_pi)
                        } else {
                            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
                        };
                        let s_val = g * w + la * lw;
                        let d_val = (dg * w + lb * lw) * zx;
                        let base = kk * 2 * n_basis;
                        for (i, &tr) in trig.iter().enumerate() {
                            acc[base + i] += s_val * tr;
                            acc[base + n_basis + i] += d_val * tr;
                        }
                        if adjoint {
                            let sa = (g.conj() * w + la.conj() * lw) * xj.speed;
                            // ∂G/∂ν_y = −G′ (ẑ·ν_y)
                            let da = -(dg.conj() * w + lb.conj() * lw) * (zy * xj.speed * ys.speed);
                            let base = 4 * n_basis + kk * 2 * n_basis;
                            for (i, &tr) in trig.iter().enumerate() {
                                acc[base + i] += sa * tr;
                                acc[base + n_basis + i] += da * tr;
                            }
                        }
                    }
                }
                for i in 0..n_basis {
                    let col = m * n_basis + i;
                    for kk in 0..2 {
                        let base = kk * 2 * n_basis;
                        fwd.single[kk][(row, col)] = acc[base + i];
                        fwd.double[kk][(row, col)] = acc[base + n_basis + i];
                        if let Some(a) = adj.as_mut() {
                            let base = 4 * n_basis + kk * 2 * n_basis;
                            a.single[kk][(row, col)] = acc[base + i];
                            a.double[kk][(row, col)] = acc[base + n_basis + i];
                        }
                    }
                }
            }
        }
    }
    (fwd, adj)
}
