//! Collocation system for the forward transmission problem and its solution.
//!
//! Unknowns are the coefficients of the interior density `φ̃` followed by
//! those of the exterior density `φ`, each of length `M·N` and ordered
//! `particle · N + basis index`. Rows follow the same layout: the Dirichlet
//! equation at every collocation node first, then the Neumann equation.

use num_complex::Complex64;

use crate::design::{DesignCache, Scene};
use crate::error::{invalid, Result};
use crate::linalg::{solve_dense, CMatrix, CVector};
use crate::materials::Optics;
use crate::operators::{smooth_blocks, SmoothBlocks};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `M[w, λ] c = f[w, λ]`, split into the closed-form singular part and the
/// quadrature part.
#[derive(Debug, Clone)]
pub struct ForwardSystem {
    pub optics: Optics,
    pub singular: CMatrix,
    pub smooth: CMatrix,
    pub rhs: CVector,
}

impl ForwardSystem {
    pub fn matrix(&self) -> CMatrix {
        &self.singular + &self.smooth
    }
}

/// Forward coefficients at one wavelength.
#[derive(Debug, Clone)]
pub struct DensitySolution {
    pub optics: Optics,
    /// `c^φ̃`, length `M·N`.
    pub interior: CVector,
    /// `c^φ`, length `M·N`.
    pub exterior: CVector,
    /// `‖Mc − f‖∞ / ‖f‖∞`.
    pub residual: f64,
    /// Lower bound on the 1-norm condition number of `M`.
    pub condition: f64,
}

impl DensitySolution {
    /// Coefficients of one particle, `(interior, exterior)`.
    pub fn particle(&self, m: usize, n_basis: usize) -> (&[Complex64], &[Complex64]) {
        let r = m * n_basis..(m + 1) * n_basis;
        (&self.interior.as_slice()[r.clone()], &self.exterior.as_slice()[r])
    }

    /// `(φ̃(t), φ(t))` on particle `m` from the basis expansion.
    pub fn reconstruct(&self, cache: &DesignCache, m: usize, t: f64) -> Result<(Complex64, Complex64)> {
        let p = cache
            .particles
            .get(m)
            .ok_or_else(|| invalid("particle", format!("index {m} out of range")))?;
        let (ci, ce) = self.particle(m, cache.basis_size());
        let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for i in 0..p.size() {
            let psi = p.basis.forward(i, t);
            acc.0 += ci[i] * psi;
            acc.1 += ce[i] * psi;
        }
        Ok(acc)
    }
}

fn put(dst: &mut CMatrix, r0: usize, c0: usize, src: &CMatrix, scale: Complex64) {
    for c in 0..src.ncols() {
        for r in 0..src.nrows() {
            dst[(r0 + r, c0 + c)] = src[(r, c)] * scale;
        }
    }
}

/// Singular part of the forward matrix from the cached closed-form actions.
pub fn forward_singular(cache: &DesignCache, optics: &Optics) -> CMatrix {
    let n = cache.basis_size();
    let dim = cache.block();
    let mut m1 = CMatrix::zeros(2 * dim, 2 * dim);
    let inv_c = 1.0 / optics.eps_c;
    let inv_m = 1.0 / optics.eps_m;
    for (p, part) in cache.particles.iter().enumerate() {
        for j in 0..n {
            let row = p * n + j;
            let speed = part.colloc[j].speed;
            for i in 0..n {
                let col = p * n + i;
                let e = j * n + i;
                let s = part.single[e];
                let k = part.np_adjoint[e];
                let psi = part.trig_colloc[e] / speed;
                m1[(row, col)] = s.into();
                m1[(row, dim + col)] = (-s).into();
                m1[(dim + row, col)] = inv_c * (k - 0.5 * psi);
                m1[(dim + row, dim + col)] = Complex64::from(-inv_m * (k + 0.5 * psi));
            }
        }
    }
    m1
}

/// Smooth part of the forward matrix from precomputed kernel blocks.
pub fn forward_smooth(cache: &DesignCache, optics: &Optics, blocks: &SmoothBlocks) -> CMatrix {
    let dim = cache.block();
    let one = Complex64::new(1.0, 0.0);
    let mut m2 = CMatrix::zeros(2 * dim, 2 * dim);
    put(&mut m2, 0, 0, &blocks.single[0], one);
    put(&mut m2, 0, dim, &blocks.single[1], -one);
    put(&mut m2, dim, 0, &blocks.double[0], 1.0 / optics.eps_c);
    put(&mut m2, dim, dim, &blocks.double[1], Complex64::from(-1.0 / optics.eps_m));
    m2
}

/// `f = (u^i, (1/ε_m) ∂u^i/∂ν)` at the collocation nodes.
pub fn forward_rhs(cache: &DesignCache, scene: &Scene, optics: &Optics) -> CVector {
    let n = cache.basis_size();
    let dim = cache.block();
    let d = scene.direction();
    let k = optics.k_m;
    let mut f = CVector::zeros(2 * dim);
    for (p, part) in cache.particles.iter().enumerate() {
        for (j, node) in part.colloc.iter().enumerate() {
            let ui = (I * (k * (d[0] * node.x[0] + d[1] * node.x[1]))).exp();
            let dn = d[0] * node.normal[0] + d[1] * node.normal[1];
            f[p * n + j] = ui;
            f[dim + p * n + j] = I * (k * dn / optics.eps_m) * ui;
        }
    }
    f
}

/// Assemble the forward system at wavelength `lambda`.
pub fn assemble_forward(cache: &DesignCache, scene: &Scene, lambda: f64) -> Result<ForwardSystem> {
    let optics = scene.optics(lambda)?;
    let (blocks, _) = smooth_blocks(cache, [optics.k_c, Complex64::from(optics.k_m)], false);
    Ok(ForwardSystem {
        singular: forward_singular(cache, &optics),
        smooth: forward_smooth(cache, &optics, &blocks),
        rhs: forward_rhs(cache, scene, &optics),
        optics,
    })
}

/// Dense LU solve of an assembled forward system.
pub fn solve_forward(system: &ForwardSystem) -> Result<DensitySolution> {
    let solved = solve_dense(&system.matrix(), &system.rhs, system.optics.lambda)?;
    let dim = solved.x.len() / 2;
    Ok(DensitySolution {
        optics: system.optics,
        interior: solved.x.rows(0, dim).into_owned(),
        exterior: solved.x.rows(dim, dim).into_owned(),
        residual: solved.residual,
        condition: solved.condition,
    })
}

/// Assemble and solve in one call.
pub fn forward(cache: &DesignCache, scene: &Scene, lambda: f64) -> Result<DensitySolution> {
    solve_forward(&assemble_forward(cache, scene, lambda)?)
}
