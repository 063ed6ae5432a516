//! Adjoint shape gradients of the absorptance and of the broadband objective.
//!
//! With the forward densities `(φ̃, φ)` and adjoint densities `(p̃, q̃)` at one
//! wavelength,
//! `dA/dw = A_w − Re ∫ (conj(p̃) 𝓔_w + conj(q̃) 𝓕_w) dt`,
//! where `𝓔_w` and `𝓕_w` are the shape derivatives of the Dirichlet and
//! Neumann residuals with both densities held fixed as functions of `t`, and
//! `A_w` is the explicit derivative of the absorptance through the boundary
//! points and speeds in `h`.
//!
//! All boundary integrals use the trapezoid rule on the quadrature nodes. The
//! Laplace part of the self-interaction comes from the closed-form
//! derivative actions of the spectral basis; the remainder `Ĝᵏ` and the
//! interaction kernels are differentiated directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::adjoint::{adjoint_rhs, assemble_both, solve_adjoint, AdjointSolution};
use crate::design::{DesignCache, Scene};
use crate::error::{Error, Result};
use crate::forward::{solve_forward, DensitySolution};
use crate::geometry::SLOTS;
use crate::kernels::radial_triple;
use crate::materials::{Optics, WavelengthGrid};
use crate::observables::{Evaluator, ExteriorTrace, MeasurementArc};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Absorptance and its gradient with respect to the `5M` shape parameters at
/// one wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptanceGradient {
    pub lambda: f64,
    pub absorptance: f64,
    pub gradient: Vec<f64>,
    /// Larger of the forward and adjoint relative residuals.
    pub residual: f64,
}

/// Per-particle samples at the quadrature nodes.
struct Samples {
    /// `φ̃ |y′|`.
    interior: Vec<Complex64>,
    /// `φ |y′|`.
    exterior: Vec<Complex64>,
    /// `p̃`.
    p: Vec<Complex64>,
    /// `q̃`.
    q: Vec<Complex64>,
}

fn samples(cache: &DesignCache, sol: &DensitySolution, adj: &AdjointSolution) -> Vec<Samples> {
    let n = cache.basis_size();
    cache
        .particles
        .iter()
        .enumerate()
        .map(|(m, part)| {
            let (ci, ce) = sol.particle(m, n);
            let (dp, dq) = adj.particle(m, n);
            let q = part
                .trig_sum_quad(dq)
                .into_iter()
                .zip(&part.quad)
                .map(|(v, nd)| v * nd.speed)
                .collect();
            Samples {
                interior: part.trig_sum_quad(ci),
                exterior: part.trig_sum_quad(ce),
                p: part.trig_sum_quad(dp),
                q,
            }
        })
        .collect()
}

/// Explicit derivative `A_w` through the boundary data in `h`.
fn explicit_term(cache: &DesignCache, eval: &Evaluator, k: f64, h_arc: &[Complex64], s: &[Samples]) -> Vec<f64> {
    let w = cache.quad_weight();
    let l_norm = eval.normalization();
    let theta0 = eval.scene.incident_angle;
    let with_forward = eval.forward_in_arc();
    let mut out = vec![0.0; SLOTS * cache.count()];
    for (m, part) in cache.particles.iter().enumerate() {
        // h_w(θ) for every slot, accumulated on the arc and at θ₀.
        let mut arc = vec![[ZERO; SLOTS]; eval.theta.len()];
        let mut fwd = [ZERO; SLOTS];
        let dirs: Vec<(f64, f64)> = eval.theta.iter().map(|t| t.sin_cos()).collect();
        let d0 = theta0.sin_cos();
        for (l, nd) in part.quad.iter().enumerate() {
            let jac = &part.quad_jacobians[l];
            let v = s[m].exterior[l] * w;
            let add = |(sn, cs): (f64, f64), acc: &mut [Complex64; SLOTS]| {
                let e = v * Complex64::from_polar(1.0, -k * (cs * nd.x[0] + sn * nd.x[1]));
                for slot in 0..SLOTS {
                    let dx = jac.dx[slot];
                    let factor = -I * k * (cs * dx[0] + sn * dx[1]) + jac.dspeed[slot] / nd.speed;
                    acc[slot] += e * factor;
                }
            };
            for (dir, acc) in dirs.iter().zip(arc.iter_mut()) {
                add(*dir, acc);
            }
            if with_forward {
                add(d0, &mut fwd);
            }
        }
        for slot in 0..SLOTS {
            let mut quad = 0.0;
            for ((hw, h), tw) in arc.iter().zip(h_arc).zip(&eval.theta_weights) {
                quad += tw * (hw[slot] * h.conj()).re;
            }
            let mut d = quad / (4.0 * PI * k);
            if with_forward {
                d += fwd[slot].im / k;
            }
            out[m * SLOTS + slot] = -d / l_norm;
        }
    }
    out
}

/// `∫ conj(p̃) 𝓔_w + conj(q̃) 𝓕_w` for every shape parameter.
fn operator_term(
    cache: &DesignCache,
    scene: &Scene,
    sol: &DensitySolution,
    s: &[Samples],
) -> Vec<Complex64> {
    let optics: &Optics = &sol.optics;
    let n_basis = cache.basis_size();
    let w = cache.quad_weight();
    let ks = [optics.k_c, Complex64::from(optics.k_m)];
    let dir_coef = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let neu_coef = [1.0 / optics.eps_c, Complex64::from(-1.0 / optics.eps_m)];
    let d = scene.direction();
    let km = optics.k_m;
    let mut out = vec![ZERO; SLOTS * cache.count()];
    for (n, target) in cache.particles.iter().enumerate() {
        let sn = &s[n];
        let (c_int, c_ext) = sol.particle(n, n_basis);
        let lap = target.singular_derivatives();
        for (a, xa) in target.quad.iter().enumerate() {
            let ja = &target.quad_jacobians[a];
            let pa = sn.p[a].conj() * w;
            let qa = sn.q[a].conj() * w;

            // Laplace part of the self-interaction.
            let mut e_self = [ZERO; SLOTS];
            let mut f_self = [ZERO; SLOTS];
            for i in 0..n_basis {
                let (ds, dk) = &lap[a * n_basis + i];
                let (ct, ce) = (c_int[i], c_ext[i]);
                for slot in 0..2 {
                    e_self[slot] += (ct - ce) * ds[slot];
                    f_self[slot] += (neu_coef[0] * ct + neu_coef[1] * ce) * dk[slot];
                }
            }
            for slot in 0..2 {
                out[n * SLOTS + slot] += pa * e_self[slot] + qa * f_self[slot];
            }

            // Incident field.
            let ui = (I * (km * (d[0] * xa.x[0] + d[1] * xa.x[1]))).exp();
            let dn = d[0] * xa.normal[0] + d[1] * xa.normal[1];
            for slot in 0..SLOTS {
                let ddx = d[0] * ja.dx[slot][0] + d[1] * ja.dx[slot][1];
                let ddn = d[0] * ja.dnormal[slot][0] + d[1] * ja.dnormal[slot][1];
                let f1 = I * km * ddx * ui;
                let f2 = I * km / optics.eps_m * (ddn + dn * I * km * ddx) * ui;
                out[n * SLOTS + slot] -= pa * f1 + qa * f2;
            }

            // Remainder kernel on the own particle.
            let mut e_t = [ZERO; SLOTS];
            let mut f_t = [ZERO; SLOTS];
            for (l, yl) in target.quad.iter().enumerate() {
                let jl = &target.quad_jacobians[l];
                let z = [xa.x[0] - yl.x[0], xa.x[1] - yl.x[1]];
                let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let zn = if r > 0.0 {
                    (z[0] * xa.normal[0] + z[1] * xa.normal[1]) / r
                } else {
                    0.0
                };
                for kk in 0..2 {
                    let rad = radial_triple(r, ks[kk], true);
                    let v = if kk == 0 { sn.interior[l] } else { sn.exterior[l] };
                    let dv = dir_coef[kk] * v;
                    let nv = neu_coef[kk] * v;
                    for slot in 0..SLOTS {
                        let dz = [ja.dx[slot][0] - jl.dx[slot][0], ja.dx[slot][1] - jl.dx[slot][1]];
                        let ds = jl.dspeed[slot] / yl.speed;
                        let (ps, pk) = kernel_variation(&rad, z, r, zn, xa.normal, dz, ja.dnormal[slot], ds);
                        e_t[slot] += dv * ps;
                        f_t[slot] += nv * pk;
                    }
                }
            }
            for slot in 0..SLOTS {
                out[n * SLOTS + slot] += (pa * e_t[slot] + qa * f_t[slot]) * w;
            }
        }
    }

    // Full kernel between distinct particles. Each evaluation serves both
    // orderings of the pair, since the radial parts depend on |z| only.
    let w2 = w * w;
    let mut ordered = Vec::new();
    for n in 0..cache.count() {
        for m in n + 1..cache.count() {
            ordered.push((n, m));
        }
    }
    for (n, m) in ordered {
        let (pn, pm) = (&cache.particles[n], &cache.particles[m]);
        let (sn, sm) = (&s[n], &s[m]);
        let mut acc_n = [ZERO; SLOTS];
        let mut acc_m = [ZERO; SLOTS];
        for (a, xa) in pn.quad.iter().enumerate() {
            let ja = &pn.quad_jacobians[a];
            let (pa, qa) = (sn.p[a].conj(), sn.q[a].conj());
            for (l, yl) in pm.quad.iter().enumerate() {
                let jl = &pm.quad_jacobians[l];
                let (pl, ql) = (sm.p[l].conj(), sm.q[l].conj());
                let z = [xa.x[0] - yl.x[0], xa.x[1] - yl.x[1]];
                let zr = [-z[0], -z[1]];
                let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let zn_a = (z[0] * xa.normal[0] + z[1] * xa.normal[1]) / r;
                let zn_l = (zr[0] * yl.normal[0] + zr[1] * yl.normal[1]) / r;
                for kk in 0..2 {
                    let rad = radial_triple(r, ks[kk], false);
                    let (v_a, v_l) = if kk == 0 {
                        (sn.interior[a], sm.interior[l])
                    } else {
                        (sn.exterior[a], sm.exterior[l])
                    };
                    // Test functions at the target times the source density.
                    let (dl, nl) = (pa * dir_coef[kk] * v_l, qa * neu_coef[kk] * v_l);
                    let (da, na) = (pl * dir_coef[kk] * v_a, ql * neu_coef[kk] * v_a);
                    for slot in 0..SLOTS {
                        let (dxa, dxl) = (ja.dx[slot], jl.dx[slot]);
                        let (dsa, dsl) = (ja.dspeed[slot] / xa.speed, jl.dspeed[slot] / yl.speed);
                        // Target on n, source on m.
                        let (ps, pk) = kernel_variation(&rad, z, r, zn_a, xa.normal, dxa, ja.dnormal[slot], 0.0);
                        acc_n[slot] += dl * ps + nl * pk;
                        let (ps, pk) = kernel_variation(&rad, z, r, zn_a, xa.normal, [-dxl[0], -dxl[1]], [0.0; 2], dsl);
                        acc_m[slot] += dl * ps + nl * pk;
                        // Target on m, source on n.
                        let (ps, pk) = kernel_variation(&rad, zr, r, zn_l, yl.normal, dxl, jl.dnormal[slot], 0.0);
                        acc_m[slot] += da * ps + na * pk;
                        let (ps, pk) = kernel_variation(&rad, zr, r, zn_l, yl.normal, [-dxa[0], -dxa[1]], [0.0; 2], dsa);
                        acc_n[slot] += da * ps + na * pk;
                    }
                }
            }
        }
        for slot in 0..SLOTS {
            out[n * SLOTS + slot] += acc_n[slot] * w2;
            out[m * SLOTS + slot] += acc_m[slot] * w2;
        }
    }
    out
}

/// Variation of `G(r)` and `G′(r) ẑ·ν_x` (times the source speed) for a
/// displacement `δz` of `z = x − y`, a normal variation `δν` and a relative
/// source speed variation `δs`. Returns `(δ(G |y′|), δ(G′ ẑ·ν |y′|))` divided
/// by `|y′|`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn kernel_variation(
    rad: &crate::kernels::Radial,
    z: [f64; 2],
    r: f64,
    zn: f64,
    nu: [f64; 2],
    dz: [f64; 2],
    dnu: [f64; 2],
    ds: f64,
) -> (Complex64, Complex64) {
    if r == 0.0 {
        return (rad.g * ds, ZERO);
    }
    let dr = (z[0] * dz[0] + z[1] * dz[1]) / r;
    let dzn = (dz[0] * nu[0] + dz[1] * nu[1] + z[0] * dnu[0] + z[1] * dnu[1]) / r - zn * dr / r;
    let s = rad.dg * dr + rad.g * ds;
    let k = rad.ddg * (dr * zn) + rad.dg * (dzn + zn * ds);
    (s, k)
}

/// Absorptance and `dA/dw` at one wavelength.
pub fn absorptance_gradient(
    cache: &DesignCache,
    scene: &Scene,
    eval: &Evaluator,
    lambda: f64,
) -> Result<AbsorptanceGradient> {
    let (fwd, adj_sys) = assemble_both(cache, scene, lambda)?;
    let sol = solve_forward(&fwd)?;
    let trace = ExteriorTrace::new(cache, &sol);
    let h_arc = eval.h_arc(&trace);
    let absorptance = eval.absorptance(&trace);
    let adj = solve_adjoint(&adj_sys, &adjoint_rhs(cache, eval, &sol))?;
    let s = samples(cache, &sol, &adj);
    let explicit = explicit_term(cache, eval, trace.k, &h_arc, &s);
    let implicit = operator_term(cache, scene, &sol, &s);
    let gradient: Vec<f64> = explicit.iter().zip(&implicit).map(|(e, t)| e - t.re).collect();
    if !absorptance.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("absorptance gradient at lambda = {lambda} nm"),
        });
    }
    Ok(AbsorptanceGradient {
        lambda,
        absorptance,
        gradient,
        residual: sol.residual.max(adj.residual),
    })
}

/// Broadband objective `J = ∫ |A − A^tar|² dλ`, its gradient and the
/// absorptance spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveGradient {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub absorptance: Vec<f64>,
}

/// Evaluate `J` and `dJ/dw` on a wavelength grid. Wavelengths run in
/// parallel; the reduction follows the grid order, so the result does not
/// depend on the thread count.
pub fn objective_gradient(
    cache: &DesignCache,
    scene: &Scene,
    arc: &MeasurementArc,
    grid: &WavelengthGrid,
    target: &[f64],
) -> Result<ObjectiveGradient> {
    grid.validate()?;
    arc.validate(scene.incident_angle)?;
    if target.len() != grid.count {
        return Err(Error::Mismatch {
            context: "objective target",
            expected: grid.count,
            got: target.len(),
        });
    }
    let eval = Evaluator::new(cache, scene, arc);
    let per: Vec<AbsorptanceGradient> = grid
        .nodes()
        .par_iter()
        .map(|&lambda| absorptance_gradient(cache, scene, &eval, lambda))
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut gradient = vec![0.0; SLOTS * cache.count()];
    for ((g, t), wl) in per.iter().zip(target).zip(grid.weights()) {
        let diff = g.absorptance - t;
        value += wl * diff * diff;
        for (acc, d) in gradient.iter_mut().zip(&g.gradient) {
            *acc += 2.0 * wl * diff * d;
        }
    }
    Ok(ObjectiveGradient {
        value,
        gradient,
        absorptance: per.iter().map(|g| g.absorptance).collect(),
    })
}
