//! Far field, energy flows, absorptance, cross sections and the broadband
//! objective.
//!
//! Everything is written in terms of
//! `h(θ) = ∫ e^{−i k_m x̂(θ)·y(s)} |y′(s)| φ(s) ds` of the exterior density,
//! with `u∞ = −e^{iπ/4} h / √(8π k_m)`. The energy constant `C` is fixed to 1;
//! it cancels from every ratio reported here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignCache, Scene};
use crate::error::{invalid, Error, Result};
use crate::forward::{forward, DensitySolution};
use crate::geometry::Vec2;
use crate::kernels::helmholtz_radial;
use crate::materials::WavelengthGrid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Measurement arc `∂B_{R,Θ}` with `Θ = (θ̄ − Δθ, θ̄ + Δθ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementArc {
    /// `R` in nm.
    pub radius: f64,
    /// `θ̄` in radians.
    pub theta_bar: f64,
    /// `Δθ` in radians.
    pub delta_theta: f64,
}

impl Default for MeasurementArc {
    fn default() -> Self {
        MeasurementArc {
            radius: 1500.0,
            theta_bar: 0.0,
            delta_theta: PI / 4.0,
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl MeasurementArc {
    pub fn validate(&self, incident_angle: f64) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(invalid("arc.radius", "must be positive"));
        }
        if !(self.delta_theta > 0.0 && self.delta_theta <= PI) {
            return Err(invalid("arc.delta_theta", "must lie in (0, pi]"));
        }
        if !self.theta_bar.is_finite() {
            return Err(invalid("arc.theta_bar", "must be finite"));
        }
        let l = self.normalization(incident_angle);
        if !(l.abs() > 1e-12 * self.radius) {
            return Err(invalid(
                "arc",
                "L = 2R sin(delta_theta) cos(theta_bar - theta0) vanishes",
            ));
        }
        Ok(())
    }

    /// `L_{R,Θ} = 2R sin Δθ cos(θ̄ − θ₀)`.
    pub fn normalization(&self, incident_angle: f64) -> f64 {
        2.0 * self.radius * self.delta_theta.sin() * (self.theta_bar - incident_angle).cos()
    }

    /// Whether the forward direction `θ₀` lies in the open arc `Θ`.
    pub fn contains(&self, angle: f64) -> bool {
        self.delta_theta >= PI || wrap_angle(angle - self.theta_bar).abs() < self.delta_theta
    }

    /// Endpoint-inclusive equispaced nodes on `Θ`.
    pub fn nodes(&self, count: usize) -> Vec<f64> {
        let lo = self.theta_bar - self.delta_theta;
        let h = 2.0 * self.delta_theta / (count - 1) as f64;
        (0..count).map(|q| lo + h * q as f64).collect()
    }

    /// Composite trapezoid weights matching [`MeasurementArc::nodes`].
    pub fn weights(&self, count: usize) -> Vec<f64> {
        let h = 2.0 * self.delta_theta / (count - 1) as f64;
        (0..count)
            .map(|q| if q == 0 || q + 1 == count { 0.5 * h } else { h })
            .collect()
    }
}

/// The exterior density at the quadrature nodes, premultiplied by `|y′|` and
/// the trapezoid weight, ready for far-field and potential evaluation.
#[derive(Debug, Clone)]
pub struct ExteriorTrace {
    pub k: f64,
    pub points: Vec<Vec2>,
    pub values: Vec<Complex64>,
}

impl ExteriorTrace {
    pub fn new(cache: &DesignCache, sol: &DensitySolution) -> Self {
        let n = cache.basis_size();
        let w = cache.quad_weight();
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (m, part) in cache.particles.iter().enumerate() {
            let (_, ce) = sol.particle(m, n);
            for (node, v) in part.quad.iter().zip(part.trig_sum_quad(ce)) {
                points.push(node.x);
                values.push(v * w);
            }
        }
        ExteriorTrace {
            k: sol.optics.k_m,
            points,
            values,
        }
    }

    /// `h(θ)`.
    pub fn h(&self, theta: f64) -> Complex64 {
        let (s, c) = theta.sin_cos();
        self.points
            .iter()
            .zip(&self.values)
            .map(|(y, v)| v * Complex64::from_polar(1.0, -self.k * (c * y[0] + s * y[1])))
            .sum()
    }

    /// Far-field pattern `u∞(θ)`.
    pub fn far_field(&self, theta: f64) -> Complex64 {
        far_field_prefactor(self.k) * self.h(theta)
    }

    /// Scattered field `S^{k_m}[φ](x)` and its gradient at a point away from
    /// the boundary.
    pub fn scattered(&self, x: Vec2) -> (Complex64, [Complex64; 2]) {
        let k = Complex64::from(self.k);
        let mut u = Complex64::new(0.0, 0.0);
        let mut grad = [Complex64::new(0.0, 0.0); 2];
        for (y, v) in self.points.iter().zip(&self.values) {
            let z = [x[0] - y[0], x[1] - y[1]];
            let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
            let rad = helmholtz_radial(r, k);
            u += rad.g * v;
            let d = rad.dg * v / r;
            grad[0] += d * z[0];
            grad[1] += d * z[1];
        }
        (u, grad)
    }
}

/// `−e^{iπ/4}/√(8π k)`.
pub fn far_field_prefactor(k: f64) -> Complex64 {
    -Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt()
}

/// Leading-order energy flows through the arc with `C = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyFlows {
    /// Incident flow `E^i = 4kR sin Δθ cos(θ̄ − θ₀)`.
    pub incident: f64,
    /// Scattered flow `E^s = ‖h‖²_Θ / (4π)`.
    pub scattered: f64,
    /// Interference flow `E′ = 2 Im h(θ₀)` when `θ₀ ∈ Θ`, else 0.
    pub interference: f64,
}

/// Per-wavelength observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub lambda_nm: f64,
    #[serde(rename = "A")]
    pub absorptance: f64,
    #[serde(rename = "Qe")]
    pub q_ext: f64,
    #[serde(rename = "Qs")]
    pub q_sca: f64,
    #[serde(rename = "Qa")]
    pub q_abs: f64,
}

/// Evaluates the arc and full-circle quantities of one forward solution.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub scene: &'a Scene,
    pub arc: &'a MeasurementArc,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub circle_nodes: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(cache: &DesignCache, scene: &'a Scene, arc: &'a MeasurementArc) -> Self {
        let n = cache.opts.theta_nodes;
        Evaluator {
            scene,
            arc,
            theta: arc.nodes(n),
            theta_weights: arc.weights(n),
            circle_nodes: cache.opts.circle_nodes,
        }
    }

    /// Whether the interference term enters.
    pub fn forward_in_arc(&self) -> bool {
        self.arc.contains(self.scene.incident_angle)
    }

    pub fn normalization(&self) -> f64 {
        self.arc.normalization(self.scene.incident_angle)
    }

    /// `h` at the arc nodes.
    pub fn h_arc(&self, trace: &ExteriorTrace) -> Vec<Complex64> {
        self.theta.iter().map(|&t| trace.h(t)).collect()
    }

    pub fn flows(&self, trace: &ExteriorTrace) -> EnergyFlows {
        let h = self.h_arc(trace);
        let norm2: f64 = h.iter().zip(&self.theta_weights).map(|(v, w)| v.norm_sqr() * w).sum();
        let interference = if self.forward_in_arc() {
            2.0 * trace.h(self.scene.incident_angle).im
        } else {
            0.0
        };
        EnergyFlows {
            incident: 2.0 * trace.k * self.normalization(),
            scattered: norm2 / (4.0 * PI),
            interference,
        }
    }

    /// `A = −(1/L)[‖h‖²_Θ/(8πk) + Im h(θ₀)/k]`, the second term only when
    /// `θ₀ ∈ Θ`.
    pub fn absorptance(&self, trace: &ExteriorTrace) -> f64 {
        let f = self.flows(trace);
        -(f.scattered + f.interference) / f.incident
    }

    /// `(Qᵉ, Qˢ, Qᵃ)` with `Qᵉ = −Im h(θ₀)/k` and `Qˢ = ∫₀^{2π} |u∞|² dθ`.
    pub fn cross_sections(&self, trace: &ExteriorTrace) -> (f64, f64, f64) {
        let k = trace.k;
        let q_ext = -trace.h(self.scene.incident_angle).im / k;
        let n = self.circle_nodes;
        let dt = 2.0 * PI / n as f64;
        let q_sca = (0..n)
            .map(|q| trace.h(dt * q as f64).norm_sqr())
            .sum::<f64>()
            * dt
            / (8.0 * PI * k);
        (q_ext, q_sca, q_ext - q_sca)
    }

    pub fn record(&self, trace: &ExteriorTrace, lambda: f64) -> SpectrumRecord {
        let (q_ext, q_sca, q_abs) = self.cross_sections(trace);
        SpectrumRecord {
            lambda_nm: lambda,
            absorptance: self.absorptance(trace),
            q_ext,
            q_sca,
            q_abs,
        }
    }
}

/// `A_φ(s) = −(1/L)[(1/(4πk)) ∫_Θ h(θ) p(θ,s) dθ + (i/k) p(θ₀,s)]` with
/// `p(θ,s) = e^{ik x̂(θ)·y(s)} |y′(s)|`, at boundary points `(y, |y′|)`, given
/// `h` on the arc nodes of `eval`. The second term is present only when
/// `θ₀ ∈ Θ`. This is the Riesz representer of `dA/dφ` for
/// `⟨u, v⟩ = ∫ u v̄ ds`.
pub fn absorptance_density_at(
    eval: &Evaluator,
    k: f64,
    h_arc: &[Complex64],
    points: &[(Vec2, f64)],
) -> Vec<Complex64> {
    let l = eval.normalization();
    let theta0 = eval.scene.incident_angle;
    let (s0, c0) = theta0.sin_cos();
    points
        .iter()
        .map(|(y, speed)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((hv, w), th) in h_arc.iter().zip(&eval.theta_weights).zip(&eval.theta) {
                let (s, c) = th.sin_cos();
                acc += hv * Complex64::from_polar(*w, k * (c * y[0] + s * y[1]));
            }
            let mut g = acc / (4.0 * PI * k);
            if eval.forward_in_arc() {
                g += I / k * Complex64::from_polar(1.0, k * (c0 * y[0] + s0 * y[1]));
            }
            -g * *speed / l
        })
        .collect()
}

/// Exact (finite-`R`) scattered and interference flows through the arc,
/// `(E^s_R, E′_R)`, integrated by composite Simpson on `nodes` (odd) points.
pub fn finite_radius_flows(
    cache: &DesignCache,
    sol: &DensitySolution,
    scene: &Scene,
    arc: &MeasurementArc,
    nodes: usize,
) -> Result<(f64, f64)> {
    for p in &cache.particles {
        let c = p.params;
        if (c.x1 * c.x1 + c.x2 * c.x2).sqrt() + c.a >= arc.radius {
            return Err(invalid("arc.radius", "arc intersects a particle"));
        }
    }
    if nodes < 3 || nodes % 2 == 0 {
        return Err(invalid("nodes", "Simpson rule needs an odd count >= 3"));
    }
    let trace = ExteriorTrace::new(cache, sol);
    let k = trace.k;
    let d = scene.direction();
    let lo = arc.theta_bar - arc.delta_theta;
    let h = 2.0 * arc.delta_theta / (nodes - 1) as f64;
    let (mut es, mut ep) = (0.0, 0.0);
    for q in 0..nodes {
        let th = lo + h * q as f64;
        let (s, c) = th.sin_cos();
        let x = [arc.radius * c, arc.radius * s];
        let (us, gs) = trace.scattered(x);
        let dus = gs[0] * c + gs[1] * s;
        let ui = (I * (k * (d[0] * x[0] + d[1] * x[1]))).exp();
        let dui = I * (k * (d[0] * c + d[1] * s)) * ui;
        // F·ν = 2 Im(ū ∂_r u) for F = −i(ū∇u − u∇ū).
        let fs = 2.0 * (us.conj() * dus).im;
        let fp = 2.0 * (ui.conj() * dus + us.conj() * dui).im;
        let w = if q == 0 || q + 1 == nodes {
            1.0
        } else if q % 2 == 1 {
            4.0
        } else {
            2.0
        };
        es += w * fs;
        ep += w * fp;
    }
    let scale = h / 3.0 * arc.radius;
    Ok((es * scale, ep * scale))
}

/// Absorptance and cross sections over a wavelength grid.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub grid: WavelengthGrid,
    pub records: Vec<SpectrumRecord>,
}

impl Spectrum {
    pub fn absorptance(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.absorptance).collect()
    }
}

/// Solve the forward problem at every grid wavelength and evaluate the
/// observables. Wavelengths are processed in parallel; the output order is
/// the grid order.
pub fn spectrum(
    cache: &DesignCache,
    scene: &Scene,
    arc: &MeasurementArc,
    grid: &WavelengthGrid,
) -> Result<Spectrum> {
    grid.validate()?;
    arc.validate(scene.incident_angle)?;
    let eval = Evaluator::new(cache, scene, arc);
    let records = grid
        .nodes()
        .par_iter()
        .map(|&lambda| {
            let sol = forward(cache, scene, lambda)?;
            Ok(eval.record(&ExteriorTrace::new(cache, &sol), lambda))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum {
        grid: grid.clone(),
        records,
    })
}

/// A wavelength band with a constant target value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub value: f64,
}

/// Target absorptance `A^tar(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpectrum {
    /// The same value at every wavelength.
    Constant { value: f64 },
    /// Piecewise constant: the first band containing `λ` (inclusive) wins,
    /// `default` elsewhere.
    Bands { bands: Vec<Band>, default: f64 },
    /// Explicit values at the grid nodes.
    Samples { values: Vec<f64> },
}

impl TargetSpectrum {
    /// Target values at the grid nodes.
    pub fn evaluate(&self, grid: &WavelengthGrid) -> Result<Vec<f64>> {
        let nodes = grid.nodes();
        Ok(match self {
            TargetSpectrum::Constant { value } => vec![*value; nodes.len()],
            TargetSpectrum::Bands { bands, default } => nodes
                .iter()
                .map(|&l| {
                    bands
                        .iter()
                        .find(|b| l >= b.lambda_min && l <= b.lambda_max)
                        .map_or(*default, |b| b.value)
                })
                .collect(),
            TargetSpectrum::Samples { values } => {
                if values.len() != nodes.len() {
                    return Err(Error::Mismatch {
                        context: "target samples",
                        expected: nodes.len(),
                        got: values.len(),
                    });
                }
                values.clone()
            }
        })
    }
}

/// `J = ∫_Λ |A − A^tar|² dλ` by the grid trapezoid rule.
pub fn objective(absorptance: &[f64], target: &[f64], grid: &WavelengthGrid) -> Result<f64> {
    if absorptance.len() != grid.count || target.len() != grid.count {
        return Err(Error::Mismatch {
            context: "objective",
            expected: grid.count,
            got: absorptance.len().min(target.len()),
        });
    }
    Ok(absorptance
        .iter()
        .zip(target)
        .zip(grid.weights())
        .map(|((a, t), w)| w * (a - t) * (a - t))
        .sum())
}

/// Indices of the resonance peaks of a sampled spectrum: interior local
/// maxima (`v[i−1] < v[i] ≥ v[i+1]`) of height at least
/// `min_fraction · max(v)`, in grid order.
pub fn resonance_peaks(values: &[f64], min_fraction: f64) -> Vec<usize> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i - 1] < values[i] && values[i] >= values[i + 1])
        .filter(|&i| values[i] >= min_fraction * top)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_membership_wraps() {
        let arc = MeasurementArc {
            radius: 1.0,
            theta_bar: 2.0 * PI - 0.1,
            delta_theta: 0.3,
        };
        assert!(arc.contains(0.1));
        assert!(!arc.contains(PI));
    }

    #[test]
    fn peaks_are_interior_maxima_above_the_floor() {
        let v = [0.0, 1.0, 0.5, 0.52, 0.4, 3.0, 3.0, 1.0, 2.0];
        assert_eq!(resonance_peaks(&v, 0.0), vec![1, 3, 5]);
        assert_eq!(resonance_peaks(&v, 0.25), vec![1, 5]);
        assert!(resonance_peaks(&[1.0, 2.0], 0.0).is_empty());
    }

    #[test]
    fn constant_offset_objective() {
        let grid = WavelengthGrid::new(150.0, 550.0, 41).unwrap();
        let a = vec![0.5; 41];
        let t = vec![0.3; 41];
        let j = objective(&a, &t, &grid).unwrap();
        assert!((j - 0.04 * 400.0).abs() < 1e-10);
    }
}
