//! Collocation system for the adjoint densities `(p̃, q̃)`.
//!
//! `p̃` is expanded in `trig_i` and `q̃` in `trig_i · Ξ`, with the same
//! `particle · N + index` layout and collocation nodes as the forward system.
//! The right-hand side is `(0, A_φ)` where `A_φ` is the Riesz representer of
//! the absorptance derivative with respect to the exterior density:
//! `dA = Re ⟨δφ, A_φ⟩` with `⟨u, v⟩ = ∫ u v̄ dt`.

use num_complex::Complex64;

use crate::design::{DesignCache, Scene};
use crate::error::Result;
use crate::forward::{forward_rhs, forward_singular, forward_smooth, DensitySolution, ForwardSystem};
use crate::linalg::{solve_dense, CMatrix, CVector};
use crate::materials::Optics;
use crate::geometry::Vec2;
use crate::observables::{absorptance_density_at, Evaluator, ExteriorTrace};
use crate::operators::{smooth_blocks, SmoothBlocks};

/// `T[w, λ] d = g[w, λ]` without the right-hand side, which needs the
/// forward solution.
#[derive(Debug, Clone)]
pub struct AdjointSystem {
    pub optics: Optics,
    pub singular: CMatrix,
    pub smooth: CMatrix,
}

impl AdjointSystem {
    pub fn matrix(&self) -> CMatrix {
        &self.singular + &self.smooth
    }
}

/// Adjoint coefficients at one wavelength.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    /// `d^p̃`, coefficients of `trig_i`.
    pub p: CVector,
    /// `d^q̃`, coefficients of `trig_i · Ξ`.
    pub q: CVector,
    pub residual: f64,
    pub condition: f64,
}

impl AdjointSolution {
    pub fn particle(&self, m: usize, n_basis: usize) -> (&[Complex64], &[Complex64]) {
        let r = m * n_basis..(m + 1) * n_basis;
        (&self.p.as_slice()[r.clone()], &self.q.as_slice()[r])
    }

    /// `(p̃(t), q̃(t))` on particle `m`.
    pub fn reconstruct(&self, cache: &DesignCache, m: usize, t: f64) -> (Complex64, Complex64) {
        let part = &cache.particles[m];
        let (dp, dq) = self.particle(m, cache.basis_size());
        let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for i in 0..part.size() {
            acc.0 += dp[i] * part.basis.adjoint_p(i, t);
            acc.1 += dq[i] * part.basis.adjoint_q(i, t);
        }
        acc
    }
}

/// Singular part of the adjoint matrix.
pub fn adjoint_singular(cache: &DesignCache, optics: &Optics) -> CMatrix {
    let n = cache.basis_size();
    let dim = cache.block();
    let mut t1 = CMatrix::zeros(2 * dim, 2 * dim);
    let inv_c = 1.0 / optics.eps_c.conj();
    let inv_m = 1.0 / optics.eps_m;
    for (p, part) in cache.particles.iter().enumerate() {
        for j in 0..n {
            let row = p * n + j;
            let speed = part.colloc[j].speed;
            for i in 0..n {
                let col = p * n + i;
                let e = j * n + i;
                let s = part.single_adjoint[e];
                let k = part.np[e];
                let q = part.trig_colloc[e] * speed;
                t1[(row, col)] = s.into();
                t1[(row, dim + col)] = inv_c * (k - 0.5 * q);
                t1[(dim + row, col)] = (-s).into();
                t1[(dim + row, dim + col)] = Complex64::from(-inv_m * (k + 0.5 * q));
            }
        }
    }
    t1
}

/// Smooth part of the adjoint matrix from conjugate-kernel blocks.
pub fn adjoint_smooth(cache: &DesignCache, optics: &Optics, blocks: &SmoothBlocks) -> CMatrix {
    let dim = cache.block();
    let mut t2 = CMatrix::zeros(2 * dim, 2 * dim);
    let inv_c = 1.0 / optics.eps_c.conj();
    let inv_m = 1.0 / optics.eps_m;
    for c in 0..dim {
        for r in 0..dim {
            t2[(r, c)] = blocks.single[0][(r, c)];
            t2[(r, dim + c)] = blocks.double[0][(r, c)] * inv_c;
            t2[(dim + r, c)] = -blocks.single[1][(r, c)];
            t2[(dim + r, dim + c)] = -blocks.double[1][(r, c)] * inv_m;
        }
    }
    t2
}

/// Forward and adjoint systems sharing one sweep of kernel evaluations.
pub fn assemble_both(
    cache: &DesignCache,
    scene: &Scene,
    lambda: f64,
) -> Result<(ForwardSystem, AdjointSystem)> {
    let optics = scene.optics(lambda)?;
    let (fwd, adj) = smooth_blocks(cache, [optics.k_c, Complex64::from(optics.k_m)], true);
    let adj = adj.expect("adjoint blocks requested");
    Ok((
        ForwardSystem {
            singular: forward_singular(cache, &optics),
            smooth: forward_smooth(cache, &optics, &fwd),
            rhs: forward_rhs(cache, scene, &optics),
            optics,
        },
        AdjointSystem {
            singular: adjoint_singular(cache, &optics),
            smooth: adjoint_smooth(cache, &optics, &adj),
            optics,
        },
    ))
}

/// Assemble the adjoint matrix alone.
pub fn assemble_adjoint(cache: &DesignCache, scene: &Scene, lambda: f64) -> Result<AdjointSystem> {
    Ok(assemble_both(cache, scene, lambda)?.1)
}

/// `g = (0, A_φ)`.
pub fn adjoint_rhs(cache: &DesignCache, eval: &Evaluator, sol: &DensitySolution) -> CVector {
    let dim = cache.block();
    let trace = ExteriorTrace::new(cache, sol);
    let pts: Vec<(Vec2, f64)> = cache
        .particles
        .iter()
        .flat_map(|p| p.colloc.iter().map(|n| (n.x, n.speed)))
        .collect();
    let g2 = absorptance_density_at(eval, trace.k, &eval.h_arc(&trace), &pts);
    let mut g = CVector::zeros(2 * dim);
    for (i, v) in g2.into_iter().enumerate() {
        g[dim + i] = v;
    }
    g
}

pub fn solve_adjoint(system: &AdjointSystem, rhs: &CVector) -> Result<AdjointSolution> {
    let solved = solve_dense(&system.matrix(), rhs, system.optics.lambda)?;
    let dim = solved.x.len() / 2;
    Ok(AdjointSolution {
        p: solved.x.rows(0, dim).into_owned(),
        q: solved.x.rows(dim, dim).into_owned(),
        residual: solved.residual,
        condition: solved.condition,
    })
}
