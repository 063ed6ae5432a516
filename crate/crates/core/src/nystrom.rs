//! Classical Nyström reference solver for the forward and adjoint systems.
//!
//! Unknowns are nodal density values at `s_l = πl/n`, `l = 0..2n`, on every
//! particle. Self-interaction kernels are split as
//! `K(t,s) = K₁(t,s) ln(4 sin²((t−s)/2)) + K₂(t,s)` and the logarithmic part is
//! integrated with trigonometric product weights; interactions between
//! different particles use the plain trapezoid rule. Nothing here uses the
//! spectral basis, so this module serves as an independent check of it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::design::{kress_weight, uniform_nodes, Node, Scene};
use crate::error::{invalid, Result};
use crate::geometry::{EllipseParams, Vec2};
use crate::kernels::{bessel_j_log_parts, ghat_at_zero, helmholtz_radial, laplace_normal_limit};
use crate::linalg::{solve_dense, CMatrix, CVector};
use crate::materials::Optics;
use crate::observables::{absorptance_density_at, far_field_prefactor, Evaluator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Nodes of every particle.
#[derive(Debug, Clone)]
pub struct NystromGrid {
    /// Nodes per particle (even).
    pub nodes: usize,
    pub particles: Vec<EllipseParams>,
    pub points: Vec<Vec<Node>>,
    /// `R(t_i − s_l)` indexed by `(i − l) mod nodes`.
    kress: Vec<f64>,
    /// Diagonal value of the Laplace normal-derivative kernel per node.
    normal_limit: Vec<Vec<f64>>,
}

impl NystromGrid {
    pub fn new(particles: &[EllipseParams], nodes: usize) -> Result<Self> {
        if nodes < 8 || nodes % 2 != 0 {
            return Err(invalid("nodes", "need an even count of at least 8"));
        }
        if particles.is_empty() {
            return Err(invalid("particles", "need at least one particle"));
        }
        for p in particles {
            p.validate()?;
        }
        let t = uniform_nodes(nodes);
        let half = nodes / 2;
        Ok(NystromGrid {
            nodes,
            particles: particles.to_vec(),
            points: particles
                .iter()
                .map(|p| t.iter().map(|&s| Node::new(p, s)).collect())
                .collect(),
            kress: t.iter().map(|&d| kress_weight(d, 0.0, half)).collect(),
            normal_limit: particles
                .iter()
                .map(|p| t.iter().map(|&s| laplace_normal_limit(p, s)).collect())
                .collect(),
        })
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.nodes as f64
    }

    pub fn dim(&self) -> usize {
        self.nodes * self.particles.len()
    }

    /// All nodes in unknown order.
    pub fn flat(&self) -> impl Iterator<Item = &Node> {
        self.points.iter().flatten()
    }
}

/// Discretized layer operators for one wavenumber.
struct Operators {
    single: CMatrix,
    double: CMatrix,
}

/// `S`, `K*` (forward) or `S*`, `K` (adjoint, conjugate kernels with the
/// target-side speed) on the grid.
fn operators(grid: &NystromGrid, k: Complex64, adjoint: bool) -> Operators {
    let n = grid.nodes;
    let dim = grid.dim();
    let w = grid.weight();
    let four_pi = 4.0 * PI;
    let mut single = CMatrix::zeros(dim, dim);
    let mut double = CMatrix::zeros(dim, dim);
    for (p, tgt) in grid.points.iter().enumerate() {
        for (i, x) in tgt.iter().enumerate() {
            let row = p * n + i;
            for (m, src) in grid.points.iter().enumerate() {
                for (l, y) in src.iter().enumerate() {
                    let col = m * n + l;
                    // Forward kernels carry |y′(s)|, adjoint ones |x′(t)|.
                    let jac = if adjoint { x.speed } else { y.speed };
                    if p == m && i == l {
                        let g0 = ghat_at_zero(k) + x.speed.ln() / (2.0 * PI);
                        let g0 = if adjoint { g0.conj() } else { g0 };
                        let r0 = grid.kress[0];
                        single[(row, col)] = (r0 / four_pi + w * g0) * jac;
                        double[(row, col)] = Complex64::from(w * grid.normal_limit[p][i] * jac);
                        continue;
                    }
                    let z = [x.x[0] - y.x[0], x.x[1] - y.x[1]];
                    let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
                    let rad = helmholtz_radial(r, k);
                    let zn = if adjoint {
                        -(z[0] * y.normal[0] + z[1] * y.normal[1]) / r
                    } else {
                        (z[0] * x.normal[0] + z[1] * x.normal[1]) / r
                    };
                    let (mut g, mut dg) = (rad.g, rad.dg * zn);
                    if adjoint {
                        g = g.conj();
                        dg = dg.conj();
                    }
                    if p == m {
                        let (j0m1, j1) = bessel_j_log_parts(r, k);
                        let (mut a1, mut b1) = ((1.0 + j0m1) / four_pi, -k * j1 * zn / four_pi);
                        if adjoint {
                            a1 = a1.conj();
                            b1 = b1.conj();
                        }
                        let lg = (4.0 * (0.5 * (x.t - y.t)).sin().powi(2)).ln();
                        let rw = grid.kress[(i + n - l) % n];
                        single[(row, col)] = (a1 * rw + (g - a1 * lg) * w) * jac;
                        double[(row, col)] = (b1 * rw + (dg - b1 * lg) * w) * jac;
                    } else {
                        single[(row, col)] = g * (w * jac);
                        double[(row, col)] = dg * (w * jac);
                    }
                }
            }
        }
    }
    Operators { single, double }
}

fn block_system(
    grid: &NystromGrid,
    optics: &Optics,
    adjoint: bool,
) -> CMatrix {
    let dim = grid.dim();
    let oc = operators(grid, optics.k_c, adjoint);
    let om = operators(grid, Complex64::from(optics.k_m), adjoint);
    let inv_c = if adjoint { 1.0 / optics.eps_c.conj() } else { 1.0 / optics.eps_c };
    let inv_m = 1.0 / optics.eps_m;
    let mut a = CMatrix::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            let id = if r == c { 0.5 } else { 0.0 };
            if adjoint {
                a[(r, c)] = oc.single[(r, c)];
                a[(r, dim + c)] = inv_c * (oc.double[(r, c)] - id);
                a[(dim + r, c)] = -om.single[(r, c)];
                a[(dim + r, dim + c)] = -inv_m * (om.double[(r, c)] + id);
            } else {
                a[(r, c)] = oc.single[(r, c)];
                a[(r, dim + c)] = -om.single[(r, c)];
                a[(dim + r, c)] = inv_c * (oc.double[(r, c)] - id);
                a[(dim + r, dim + c)] = -inv_m * (om.double[(r, c)] + id);
            }
        }
    }
    a
}

/// Nodal forward densities.
#[derive(Debug, Clone)]
pub struct NystromSolution {
    pub optics: Optics,
    pub interior: CVector,
    pub exterior: CVector,
    pub residual: f64,
    pub condition: f64,
}

impl NystromSolution {
    /// `h(θ) = ∫ e^{−ik x̂·y} |y′| φ ds` by the trapezoid rule.
    pub fn h(&self, grid: &NystromGrid, theta: f64) -> Complex64 {
        let (s, c) = theta.sin_cos();
        let k = self.optics.k_m;
        grid.flat()
            .zip(self.exterior.iter())
            .map(|(y, v)| v * Complex64::from_polar(y.speed * grid.weight(), -k * (c * y.x[0] + s * y.x[1])))
            .sum()
    }

    pub fn far_field(&self, grid: &NystromGrid, theta: f64) -> Complex64 {
        far_field_prefactor(self.optics.k_m) * self.h(grid, theta)
    }

    /// Extinction cross section `−Im h(θ₀)/k`.
    pub fn q_ext(&self, grid: &NystromGrid, scene: &Scene) -> f64 {
        -self.h(grid, scene.incident_angle).im / self.optics.k_m
    }
}

/// Solve the forward transmission problem on the grid.
pub fn solve_forward_nystrom(grid: &NystromGrid, scene: &Scene, lambda: f64) -> Result<NystromSolution> {
    let optics = scene.optics(lambda)?;
    let a = block_system(grid, &optics, false);
    let dim = grid.dim();
    let d = scene.direction();
    let k = optics.k_m;
    let mut f = CVector::zeros(2 * dim);
    for (idx, node) in grid.flat().enumerate() {
        let ui = (I * (k * (d[0] * node.x[0] + d[1] * node.x[1]))).exp();
        f[idx] = ui;
        f[dim + idx] = I * (k * (d[0] * node.normal[0] + d[1] * node.normal[1]) / optics.eps_m) * ui;
    }
    let s = solve_dense(&a, &f, lambda)?;
    Ok(NystromSolution {
        optics,
        interior: s.x.rows(0, dim).into_owned(),
        exterior: s.x.rows(dim, dim).into_owned(),
        residual: s.residual,
        condition: s.condition,
    })
}

/// Nodal adjoint densities.
#[derive(Debug, Clone)]
pub struct NystromAdjoint {
    pub p: CVector,
    pub q: CVector,
    pub residual: f64,
    pub condition: f64,
}

/// Solve the adjoint system with right-hand side `(0, g₂)`, `g₂` sampled at
/// the grid nodes.
pub fn solve_adjoint_nystrom(
    grid: &NystromGrid,
    scene: &Scene,
    lambda: f64,
    g2: &[Complex64],
) -> Result<NystromAdjoint> {
    let optics = scene.optics(lambda)?;
    let dim = grid.dim();
    if g2.len() != dim {
        return Err(crate::error::Error::Mismatch {
            context: "nystrom adjoint rhs",
            expected: dim,
            got: g2.len(),
        });
    }
    let a = block_system(grid, &optics, true);
    let mut g = CVector::zeros(2 * dim);
    for (i, v) in g2.iter().enumerate() {
        g[dim + i] = *v;
    }
    let s = solve_dense(&a, &g, lambda)?;
    Ok(NystromAdjoint {
        p: s.x.rows(0, dim).into_owned(),
        q: s.x.rows(dim, dim).into_owned(),
        residual: s.residual,
        condition: s.condition,
    })
}

/// `g₂` at the grid nodes from a Nyström forward solution.
pub fn adjoint_rhs_nystrom(grid: &NystromGrid, eval: &Evaluator, sol: &NystromSolution) -> Vec<Complex64> {
    let h: Vec<Complex64> = eval.theta.iter().map(|&t| sol.h(grid, t)).collect();
    let pts: Vec<(Vec2, f64)> = grid.flat().map(|n| (n.x, n.speed)).collect();
    absorptance_density_at(eval, sol.optics.k_m, &h, &pts)
}
