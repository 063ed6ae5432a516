//! Projected gradient descent on the broadband objective.
//!
//! Each step takes `w̃ = w − β 𝒥′(w)` and projects every particle back onto
//! the box: `a` clamped to `[a_min, a_max]`, `θ` clamped to `[0, 2π]`, the
//! aspect ratio `η = b̃/ã` clamped to `[η_min, η_max]` and `b = η a`. Centers
//! are unconstrained.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::design::{DesignCache, Scene, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Bounds, DesignConfig, EllipseParams, SLOTS};
use crate::gradient::{objective_gradient, ObjectiveGradient};
use crate::materials::WavelengthGrid;
use crate::observables::MeasurementArc;

/// One row of the optimization history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    #[serde(rename = "J")]
    pub objective: f64,
    pub grad_inf_norm: f64,
}

/// Design, objective and gradient after some number of steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationState {
    pub iteration: usize,
    pub config: DesignConfig,
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub absorptance: Vec<f64>,
    pub history: Vec<HistoryRecord>,
}

impl OptimizationState {
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Everything that stays fixed during a run.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub scene: &'a Scene,
    pub arc: &'a MeasurementArc,
    pub grid: &'a WavelengthGrid,
    pub target: &'a [f64],
    pub opts: &'a SolverOptions,
}

impl Problem<'_> {
    /// `𝒥` and `𝒥′` at a design.
    pub fn evaluate(&self, config: &DesignConfig) -> Result<ObjectiveGradient> {
        let cache = DesignCache::new(config, self.opts)?;
        objective_gradient(&cache, self.scene, self.arc, self.grid, self.target)
    }
}

/// `max(lo, min(x, hi))`.
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    lo.max(x.min(hi))
}

/// Map a stepped parameter vector of one particle back onto the box.
pub fn project(w: [f64; SLOTS], bounds: &Bounds) -> Result<EllipseParams> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "stepped design parameters".into(),
        });
    }
    let [a_t, b_t, theta_t, x1, x2] = w;
    let eta_t = if a_t > 0.0 { b_t / a_t } else { bounds.eta_min };
    let a = clamp(a_t, bounds.a_min, bounds.a_max);
    let eta = clamp(eta_t, bounds.eta_min, bounds.eta_max);
    // `η a / a` can round past the bound; step `b` back by an ulp if so.
    let mut b = eta * a;
    while b / a > bounds.eta_max {
        b = b.next_down();
    }
    while b / a < bounds.eta_min {
        b = b.next_up();
    }
    Ok(EllipseParams {
        a,
        b,
        theta: clamp(theta_t, 0.0, 2.0 * PI),
        x1,
        x2,
    })
}

/// `w − β g` followed by the projection.
pub fn step_config(config: &DesignConfig, gradient: &[f64], beta: f64) -> Result<DesignConfig> {
    if gradient.len() != SLOTS * config.particles.len() {
        return Err(Error::Mismatch {
            context: "optimizer gradient",
            expected: SLOTS * config.particles.len(),
            got: gradient.len(),
        });
    }
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: "objective gradient".into(),
        });
    }
    let particles = config
        .particles
        .iter()
        .zip(gradient.chunks_exact(SLOTS))
        .map(|(p, g)| {
            let w = p.to_array();
            let mut t = [0.0; SLOTS];
            for k in 0..SLOTS {
                t[k] = w[k] - beta * g[k];
            }
            project(t, &config.bounds)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignConfig {
        particles,
        bounds: config.bounds,
        spacing: config.spacing,
    })
}

/// Evaluate the starting design.
pub fn start(problem: &Problem, initial: &DesignConfig) -> Result<OptimizationState> {
    initial.validate()?;
    let eval = problem.evaluate(initial)?;
    let mut state = OptimizationState {
        iteration: 0,
        config: initial.clone(),
        objective: eval.value,
        gradient: eval.gradient,
        absorptance: eval.absorptance,
        history: Vec::new(),
    };
    state.history.push(HistoryRecord {
        iteration: 0,
        objective: state.objective,
        grad_inf_norm: state.gradient_norm(),
    });
    Ok(state)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "step size must be finite and non-negative"));
    }
    Ok(())
}

fn advance(state: OptimizationState, config: DesignConfig, eval: ObjectiveGradient) -> OptimizationState {
    let mut next = OptimizationState {
        iteration: state.iteration + 1,
        config,
        objective: eval.value,
        gradient: eval.gradient,
        absorptance: eval.absorptance,
        history: state.history,
    };
    next.history.push(HistoryRecord {
        iteration: next.iteration,
        objective: next.objective,
        grad_inf_norm: next.gradient_norm(),
    });
    next
}

/// One projected gradient step and re-evaluation at the new design.
pub fn step(problem: &Problem, state: OptimizationState, beta: f64) -> Result<OptimizationState> {
    check_beta(beta)?;
    let config = step_config(&state.config, &state.gradient, beta)?;
    let eval = problem.evaluate(&config)?;
    Ok(advance(state, config, eval))
}

/// Settings of the descent loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct OptimizerOptions {
    /// Step size `β`.
    pub step_size: f64,
    pub iterations: usize,
    /// Halve the step (at most `max_halvings` times) while it would increase
    /// `𝒥`. Off by default.
    pub backtracking: bool,
    pub max_halvings: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            step_size: 0.2,
            iterations: 1000,
            backtracking: false,
            max_halvings: 20,
        }
    }
}

/// A step that halves `β` until `𝒥` does not increase. If every trial
/// increases `𝒥` the smallest trial step is taken.
pub fn backtracking_step(
    problem: &Problem,
    state: OptimizationState,
    beta: f64,
    max_halvings: usize,
) -> Result<OptimizationState> {
    check_beta(beta)?;
    let mut trial_beta = beta;
    let mut halvings = 0;
    loop {
        let config = step_config(&state.config, &state.gradient, trial_beta)?;
        let eval = problem.evaluate(&config)?;
        if eval.value <= state.objective || halvings == max_halvings {
            return Ok(advance(state, config, eval));
        }
        trial_beta *= 0.5;
        halvings += 1;
    }
}

/// `opts.iterations` steps from `initial`; `observer` sees every state
/// including the first. The history has `iterations + 1` rows.
pub fn run(
    problem: &Problem,
    initial: &DesignConfig,
    opts: &OptimizerOptions,
    mut observer: impl FnMut(&OptimizationState),
) -> Result<OptimizationState> {
    let mut state = start(problem, initial)?;
    observer(&state);
    for _ in 0..opts.iterations {
        state = if opts.backtracking {
            backtracking_step(problem, state, opts.step_size, opts.max_halvings)?
        } else {
            step(problem, state, opts.step_size)?
        };
        observer(&state);
    }
    Ok(state)
}
