//! Integer-constrained particle swarm minimization.
//!
//! Positions and velocities are real; positions are clamped to `x ≥ 0` and
//! every fitness evaluation sees the position rounded half-up to integers.
//! The swarm is seeded with a given starting point, so the returned best is
//! never worse than that point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct PsoOptions {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Number of swarm updates.
    pub iterations: usize,
    /// Half-width of the uniform perturbation around the start used for the
    /// other initial positions.
    pub spread: f64,
    /// Per-coordinate velocity limit.
    pub max_velocity: f64,
}

impl Default for PsoOptions {
    fn default() -> Self {
        PsoOptions {
            swarm_size: 64,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            iterations: 500,
            spread: 1.0,
            max_velocity: 2.0,
        }
    }
}

impl PsoOptions {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(invalid("swarm_size", "need at least one swarm member"));
        }
        let reals = [self.inertia, self.cognitive, self.social, self.spread, self.max_velocity];
        if reals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("pso", "coefficients must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Best integer point found and its fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best: Vec<u64>,
    pub fitness: f64,
    /// Best fitness after each update, starting with the seeded value.
    pub history: Vec<f64>,
}

/// Round half-up and clamp at zero.
pub fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor().max(0.0) as u64
}

/// Minimize `fitness` over non-negative integer vectors, starting from
/// `start`. Fitness evaluations within one update run in parallel; all
/// random draws come from a single `ChaCha8` stream in a fixed order, so the
/// result depends only on the inputs and `seed`.
pub fn minimize<F>(fitness: F, start: &[u64], opts: &PsoOptions, seed: u64) -> Result<PsoResult>
where
    F: Fn(&[u64]) -> f64 + Sync,
{
    opts.validate()?;
    let dim = start.len();
    let seed_fit = fitness(start);
    let mut history = vec![seed_fit];
    if opts.iterations == 0 || dim == 0 {
        return Ok(PsoResult {
            best: start.to_vec(),
            fitness: seed_fit,
            history,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin: Vec<f64> = start.iter().map(|&c| c as f64).collect();
    let mut pos: Vec<Vec<f64>> = (0..opts.swarm_size)
        .map(|i| {
            origin
                .iter()
                .map(|&c| {
                    if i == 0 {
                        c
                    } else {
                        (c + rng.gen_range(-opts.spread..=opts.spread)).max(0.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..opts.swarm_size)
        .map(|_| {
            (0..dim)
                .map(|_| rng.gen_range(-opts.max_velocity..=opts.max_velocity) * 0.5)
                .collect()
        })
        .collect();
    let rounded = |p: &[f64]| -> Vec<u64> { p.iter().map(|&x| round_half_up(x)).collect() };
    let evaluate = |pos: &[Vec<f64>]| -> Vec<(Vec<u64>, f64)> {
        pos.par_iter()
            .map(|p| {
                let r = rounded(p);
                let f = fitness(&r);
                (r, f)
            })
            .collect()
    };

    let mut personal: Vec<(Vec<f64>, f64)> = pos.iter().map(|p| (p.clone(), f64::INFINITY)).collect();
    let mut best = start.to_vec();
    let mut best_fit = seed_fit;
    let mut best_pos = origin;
    for iteration in 0..=opts.iterations {
        if iteration > 0 {
            for i in 0..opts.swarm_size {
                for d in 0..dim {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    let x = pos[i][d];
                    let v = opts.inertia * vel[i][d]
                        + opts.cognitive * r1 * (personal[i].0[d] - x)
                        + opts.social * r2 * (best_pos[d] - x);
                    vel[i][d] = v.clamp(-opts.max_velocity, opts.max_velocity);
                    pos[i][d] = (x + vel[i][d]).max(0.0);
                }
            }
        }
        // Ties keep the earlier point, so the seed wins over equal scores.
        for (i, (r, f)) in evaluate(&pos).into_iter().enumerate() {
            if f < personal[i].1 {
                personal[i] = (pos[i].clone(), f);
            }
            if f < best_fit {
                best_fit = f;
                best = r;
                best_pos = pos[i].clone();
            }
        }
        if iteration > 0 {
            history.push(best_fit);
        }
    }
    Ok(PsoResult {
        best,
        fitness: best_fit,
        history,
    })
}
