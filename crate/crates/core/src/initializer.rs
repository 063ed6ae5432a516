//! Physics-informed initial designs from a single-particle absorptance
//! dataset.
//!
//! The total absorptance of weakly interacting particles is approximated by
//! the sum of single-particle spectra, so choosing how many copies `c_ℓ` of
//! each dataset entry to use is an integer least-squares problem
//! `min ‖D c − A^tar‖` over `c ∈ ℤ₊^L`. It is relaxed to NNLS (`c†`), rounded
//! (`c‡`), refined by an integer particle swarm (`c*`) and finally laid out
//! on a centered grid.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignCache, Scene, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Bounds, DesignConfig, EllipseParams};
use crate::materials::WavelengthGrid;
use crate::nnls::nnls;
use crate::observables::{spectrum, MeasurementArc};
use crate::pso::{self, round_half_up, PsoOptions};

/// Uniform, endpoint-inclusive axis of parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + h * i as f64 })
            .collect()
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if self.count == 0 || !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(invalid(name, "need count ≥ 1 and finite min ≤ max"));
        }
        Ok(())
    }
}

/// Parameter grid of the dataset: fixed semi-major axis, varying `b` and `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub a: f64,
    pub b: Axis,
    pub theta: Axis,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            a: 10.0,
            b: Axis {
                min: 1.0,
                max: 9.0,
                count: 80,
            },
            theta: Axis {
                min: 0.0,
                max: std::f64::consts::FRAC_PI_2,
                count: 40,
            },
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        self.b.validate("b axis")?;
        self.theta.validate("theta axis")?;
        if !(self.a > 0.0) {
            return Err(invalid("a", "semi-major axis must be positive"));
        }
        if self.theta.min < 0.0 || self.theta.max > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return Err(invalid("theta axis", "angles must lie in [0, π/2]"));
        }
        Ok(())
    }

    /// Candidate parameters, `b`-major then `θ`. Pairs with `a ≤ b` are
    /// skipped.
    pub fn candidates(&self) -> Vec<EllipseParams> {
        let mut out = Vec::new();
        for b in self.b.values() {
            for theta in self.theta.values() {
                let p = EllipseParams {
                    a: self.a,
                    b,
                    theta,
                    x1: 0.0,
                    x2: 0.0,
                };
                if p.validate().is_ok() {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub params: EllipseParams,
    pub spectrum: Vec<f64>,
}

/// A candidate that could not be simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedEntry {
    pub params: EllipseParams,
    pub reason: String,
}

/// Single-particle absorptance spectra on a shared wavelength grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptanceDataset {
    pub grid: WavelengthGrid,
    pub entries: Vec<DatasetEntry>,
    #[serde(default)]
    pub dropped: Vec<DroppedEntry>,
}

impl AbsorptanceDataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        for e in &self.entries {
            if e.spectrum.len() != self.grid.count {
                return Err(Error::Mismatch {
                    context: "dataset spectrum",
                    expected: self.grid.count,
                    got: e.spectrum.len(),
                });
            }
        }
        Ok(())
    }

    /// `D` with rows over wavelengths and one column per entry.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.grid.count, self.len(), |i, j| self.entries[j].spectrum[i])
    }

    /// `D c` at the grid wavelengths.
    pub fn combine(&self, counts: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.count];
        for (e, &c) in self.entries.iter().zip(counts) {
            if c != 0.0 {
                for (o, a) in out.iter_mut().zip(&e.spectrum) {
                    *o += c * a;
                }
            }
        }
        out
    }

    /// `‖D c − A^tar‖_{L²(Λ)}` by the grid trapezoid rule.
    pub fn residual(&self, counts: &[f64], target: &[f64]) -> f64 {
        let fit = self.combine(counts);
        fit.iter()
            .zip(target)
            .zip(self.grid.weights())
            .map(|((f, t), w)| w * (f - t) * (f - t))
            .sum::<f64>()
            .sqrt()
    }
}

/// Simulate every candidate of `spec` as a single particle at the origin.
/// Entries run in parallel; the output keeps the candidate order.
pub fn build_dataset(
    spec: &DatasetSpec,
    scene: &Scene,
    arc: &MeasurementArc,
    grid: &WavelengthGrid,
    opts: &SolverOptions,
) -> Result<AbsorptanceDataset> {
    spec.validate()?;
    grid.validate()?;
    arc.validate(scene.incident_angle)?;
    let results: Vec<std::result::Result<DatasetEntry, DroppedEntry>> = spec
        .candidates()
        .into_par_iter()
        .map(|params| {
            let run = || -> Result<Vec<f64>> {
                let cache = DesignCache::from_params(&[params], opts)?;
                Ok(spectrum(&cache, scene, arc, grid)?.absorptance())
            };
            match run() {
                Ok(spectrum) => Ok(DatasetEntry { params, spectrum }),
                Err(e) => Err(DroppedEntry {
                    params,
                    reason: e.to_string(),
                }),
            }
        })
        .collect();
    let mut entries = Vec::new();
    let mut dropped = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(d) => dropped.push(d),
        }
    }
    Ok(AbsorptanceDataset {
        grid: grid.clone(),
        entries,
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStage {
    Relaxed,
    Rounded,
    Refined,
}

/// Multiplicities of the dataset entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountVector {
    pub counts: Vec<f64>,
    pub stage: CountStage,
}

impl CountVector {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

fn check_target(dataset: &AbsorptanceDataset, target: &[f64]) -> Result<()> {
    dataset.validate()?;
    if target.len() != dataset.grid.count {
        return Err(Error::Mismatch {
            context: "initializer target",
            expected: dataset.grid.count,
            got: target.len(),
        });
    }
    Ok(())
}

/// `c† = argmin_{c ≥ 0} ‖D c − A^tar‖_{L²(Λ)}`, with the trapezoid weights
/// folded into the rows.
pub fn solve_relaxed(dataset: &AbsorptanceDataset, target: &[f64]) -> Result<CountVector> {
    check_target(dataset, target)?;
    let sw: Vec<f64> = dataset.grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut a = dataset.matrix();
    for (i, s) in sw.iter().enumerate() {
        a.row_mut(i).scale_mut(*s);
    }
    let b = DVector::from_iterator(target.len(), target.iter().zip(&sw).map(|(t, s)| t * s));
    let sol = nnls(&a, &b, 3 * dataset.len().max(1))?;
    Ok(CountVector {
        counts: sol.x,
        stage: CountStage::Relaxed,
    })
}

/// `c‡`: nearest integers, ties rounded up.
pub fn round_counts(relaxed: &CountVector) -> Result<CountVector> {
    if relaxed.stage != CountStage::Relaxed {
        return Err(invalid("counts", "rounding expects relaxed counts"));
    }
    Ok(CountVector {
        counts: relaxed.counts.iter().map(|&c| round_half_up(c) as f64).collect(),
        stage: CountStage::Rounded,
    })
}

/// `c*`: integer particle-swarm refinement seeded with the rounded counts.
pub fn refine_heuristic(
    dataset: &AbsorptanceDataset,
    target: &[f64],
    start: &CountVector,
    opts: &PsoOptions,
    seed: u64,
) -> Result<CountVector> {
    check_target(dataset, target)?;
    if start.stage != CountStage::Rounded {
        return Err(invalid("counts", "refinement expects rounded counts"));
    }
    let ints: Vec<u64> = start.counts.iter().map(|&c| c as u64).collect();
    let fitness = |c: &[u64]| {
        let f: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        dataset.residual(&f, target)
    };
    let r = pso::minimize(fitness, &ints, opts, seed)?;
    Ok(CountVector {
        counts: r.best.iter().map(|&c| c as f64).collect(),
        stage: CountStage::Refined,
    })
}

/// Centered uniform grid position of particle `m` (0-based) out of `total`,
/// with `⌈√M⌉` columns filled row by row.
pub fn grid_position(m: usize, total: usize, spacing: [f64; 2]) -> [f64; 2] {
    let cols = (total as f64).sqrt().ceil() as usize;
    let rows = total.div_ceil(cols);
    let (i, j) = (m % cols + 1, m / cols + 1);
    [
        (i as f64 - (1.0 + cols as f64) / 2.0) * spacing[0],
        (j as f64 - (1.0 + rows as f64) / 2.0) * spacing[1],
    ]
}

/// Initial design: `c*_ℓ` copies of entry `ℓ` in entry order, placed on the
/// centered grid.
pub fn layout(
    counts: &CountVector,
    dataset: &AbsorptanceDataset,
    spacing: [f64; 2],
    bounds: Bounds,
) -> Result<DesignConfig> {
    if counts.counts.len() != dataset.len() {
        return Err(Error::Mismatch {
            context: "layout counts",
            expected: dataset.len(),
            got: counts.counts.len(),
        });
    }
    if counts.counts.iter().any(|c| *c < 0.0 || c.fract() != 0.0) {
        return Err(invalid("counts", "layout needs non-negative integer counts"));
    }
    let total = counts.total() as usize;
    if total == 0 {
        return Err(invalid("counts", "no particles selected"));
    }
    let mut particles = Vec::with_capacity(total);
    for (entry, &c) in dataset.entries.iter().zip(&counts.counts) {
        for _ in 0..c as usize {
            let [x1, x2] = grid_position(particles.len(), total, spacing);
            particles.push(EllipseParams { x1, x2, ..entry.params });
        }
    }
    let config = DesignConfig {
        particles,
        bounds,
        spacing,
    };
    config.validate()?;
    Ok(config)
}

/// `count` particles with uniformly random `a ∈ [a_min, a_max]`,
/// `η ∈ [η_min, η_max]` and `θ ∈ [0, π)`, placed on the centered grid.
pub fn random_design(count: usize, bounds: Bounds, spacing: [f64; 2], seed: u64) -> Result<DesignConfig> {
    bounds.validate()?;
    if count == 0 {
        return Err(invalid("count", "need at least one particle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let particles = (0..count)
        .map(|m| {
            let a = rng.gen_range(bounds.a_min..=bounds.a_max);
            let eta = rng.gen_range(bounds.eta_min..=bounds.eta_max);
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            let [x1, x2] = grid_position(m, count, spacing);
            EllipseParams::new(a, eta * a, theta, x1, x2)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignConfig {
        particles,
        bounds,
        spacing,
    })
}

/// All stages of the initial-guess pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Initialization {
    pub relaxed: CountVector,
    pub rounded: CountVector,
    pub refined: CountVector,
    /// `‖D c − A^tar‖_{L²(Λ)}` for the relaxed, rounded and refined counts.
    pub residuals: [f64; 3],
    pub config: DesignConfig,
}

/// Relax, round, refine and lay out.
pub fn initialize(
    dataset: &AbsorptanceDataset,
    target: &[f64],
    pso_opts: &PsoOptions,
    seed: u64,
    spacing: [f64; 2],
    bounds: Bounds,
) -> Result<Initialization> {
    let relaxed = solve_relaxed(dataset, target)?;
    let rounded = round_counts(&relaxed)?;
    let refined = refine_heuristic(dataset, target, &rounded, pso_opts, seed)?;
    let residuals = [
        dataset.residual(&relaxed.counts, target),
        dataset.residual(&rounded.counts, target),
        dataset.residual(&refined.counts, target),
    ];
    let config = layout(&refined, dataset, spacing, bounds)?;
    Ok(Initialization {
        relaxed,
        rounded,
        refined,
        residuals,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_particles_form_centered_square() {
        let d = 80.0;
        let pos: Vec<_> = (0..4).map(|m| grid_position(m, 4, [d, d])).collect();
        assert_eq!(pos, vec![[-40.0, -40.0], [40.0, -40.0], [-40.0, 40.0], [40.0, 40.0]]);
        assert_eq!(grid_position(0, 1, [d, d]), [0.0, 0.0]);
    }

    #[test]
    fn axis_includes_endpoints() {
        let v = Axis { min: 1.0, max: 9.0, count: 80 }.values();
        assert_eq!(v.len(), 80);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[79], 9.0);
    }
}
