//! Solver settings, the physical scene, and the wavelength-independent cache
//! built once per design `w`.
//!
//! The cache holds boundary samples at collocation and quadrature nodes, the
//! basis values there, and the closed-form singular blocks. Everything that
//! depends on `λ` is assembled from it by the forward and adjoint modules.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{DesignConfig, EllipseParams, ShapeJacobians, Vec2, SLOTS};
use crate::materials::{wavenumbers, BackgroundMedium, Optics, ParticleMaterial};
use crate::spectral::{SeriesOptions, SpectralBasis};

/// Discretization parameters of the reduced-basis solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct SolverOptions {
    /// Basis functions (and collocation nodes) per particle, `N`.
    pub basis_size: usize,
    /// Trapezoid nodes per particle for the smooth kernels. `None` means
    /// `max(64, 4N)`.
    pub quad_nodes: Option<usize>,
    /// Lower bound on the Fourier terms of the κ-series.
    pub series_terms: usize,
    /// Lower bound on the trapezoid nodes for the κ integrals.
    pub kappa_nodes: usize,
    /// Endpoint-inclusive trapezoid nodes on the measurement arc.
    pub theta_nodes: usize,
    /// Trapezoid nodes on the full circle for the scattering cross section.
    pub circle_nodes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            basis_size: 10,
            quad_nodes: None,
            series_terms: 64,
            kappa_nodes: 256,
            theta_nodes: 129,
            circle_nodes: 256,
        }
    }
}

impl SolverOptions {
    pub fn with_basis_size(basis_size: usize) -> Self {
        SolverOptions {
            basis_size,
            ..Default::default()
        }
    }

    pub fn quad_count(&self) -> usize {
        self.quad_nodes.unwrap_or_else(|| 64.max(4 * self.basis_size))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.basis_size;
        if n < 4 || n % 2 != 0 {
            return Err(invalid("basis_size", format!("N = {n} must be even and at least 4")));
        }
        let nq = self.quad_count();
        if nq < n || nq % 2 != 0 {
            return Err(invalid("quad_nodes", "need an even count of at least N quadrature nodes"));
        }
        if self.theta_nodes < 3 || self.circle_nodes < 8 {
            return Err(invalid("theta_nodes", "too few angular quadrature nodes"));
        }
        Ok(())
    }

    pub fn series(&self) -> SeriesOptions {
        SeriesOptions {
            terms: self.series_terms,
            nodes: self.kappa_nodes,
        }
    }
}

/// Materials and the incident plane wave `u^i = e^{i k_m d·x}`,
/// `d = (cos θ₀, sin θ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default)]
    pub medium: BackgroundMedium,
    #[serde(default)]
    pub material: ParticleMaterial,
    /// Incident angle `θ₀` in radians.
    #[serde(default)]
    pub incident_angle: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.material.validate()?;
        if !self.incident_angle.is_finite() {
            return Err(invalid("incident_angle", "must be finite"));
        }
        Ok(())
    }

    pub fn direction(&self) -> Vec2 {
        let (s, c) = self.incident_angle.sin_cos();
        [c, s]
    }

    pub fn optics(&self, lambda: f64) -> Result<Optics> {
        wavenumbers(lambda, &self.medium, &self.material)
    }
}

/// Boundary data at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub x: Vec2,
    /// `|x′(t)| = Ξ(t)`.
    pub speed: f64,
    pub normal: Vec2,
}

impl Node {
    pub fn new(p: &EllipseParams, t: f64) -> Self {
        Node {
            t,
            x: p.point(t),
            speed: p.speed(t),
            normal: p.normal(t),
        }
    }
}

/// Equispaced nodes `2πj/n`, `j = 0..n`.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Per-particle, wavelength-independent data.
#[derive(Debug)]
pub struct ParticleCache {
    pub params: EllipseParams,
    pub basis: SpectralBasis,
    pub colloc: Vec<Node>,
    pub quad: Vec<Node>,
    /// Shape Jacobians at the quadrature nodes.
    pub quad_jacobians: Vec<ShapeJacobians>,
    /// `trig_i(t_j)`, row-major `[j * N + i]`.
    pub trig_colloc: Vec<f64>,
    /// `trig_i(s_l)`, row-major `[l * N + i]`.
    pub trig_quad: Vec<f64>,
    /// Laplace `S[ψ_i](t_j)`.
    pub single: Vec<f64>,
    /// Laplace `K*[ψ_i](t_j)`.
    pub np_adjoint: Vec<f64>,
    /// Laplace `S*[trig_i](t_j)`.
    pub single_adjoint: Vec<f64>,
    /// Laplace `K[q_i](t_j)`.
    pub np: Vec<f64>,
    derivatives: OnceLock<Vec<([f64; SLOTS], [f64; SLOTS])>>,
}

impl ParticleCache {
    pub fn new(params: &EllipseParams, opts: &SolverOptions) -> Result<Self> {
        let n = opts.basis_size;
        let basis = SpectralBasis::new(params, n, opts.series())?;
        let colloc: Vec<Node> = uniform_nodes(n).into_iter().map(|t| Node::new(params, t)).collect();
        let quad: Vec<Node> = uniform_nodes(opts.quad_count())
            .into_iter()
            .map(|t| Node::new(params, t))
            .collect();
        let table = |nodes: &[Node], f: &dyn Fn(usize, f64) -> f64| -> Vec<f64> {
            nodes
                .iter()
                .flat_map(|nd| (0..n).map(move |i| (nd.t, i)))
                .map(|(t, i)| f(i, t))
                .collect()
        };
        Ok(ParticleCache {
            params: *params,
            trig_colloc: table(&colloc, &|i, t| basis.trig(i, t)),
            trig_quad: table(&quad, &|i, t| basis.trig(i, t)),
            single: table(&colloc, &|i, t| basis.single_layer(i, t)),
            np_adjoint: table(&colloc, &|i, t| basis.np_adjoint(i, t)),
            single_adjoint: table(&colloc, &|i, t| basis.single_layer_adjoint(i, t)),
            np: table(&colloc, &|i, t| basis.np(i, t)),
            basis,
            colloc,
            quad_jacobians: quad.iter().map(|nd| params.jacobians(nd.t)).collect(),
            quad,
            derivatives: OnceLock::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    /// `(∂S_w/∂w[ψ_i], ∂K*_w/∂w[ψ_i])` at every quadrature node, `[l * N + i]`.
    pub fn singular_derivatives(&self) -> &[([f64; SLOTS], [f64; SLOTS])] {
        self.derivatives.get_or_init(|| {
            let n = self.size();
            self.quad
                .iter()
                .flat_map(|nd| (0..n).map(move |i| (nd.t, i)))
                .map(|(t, i)| self.basis.derivative_actions(i, t))
                .collect()
        })
    }

    /// `Σ c_i trig_i(s_l)` at every quadrature node: the density times `|y′|`
    /// for a forward expansion, or the `p̃` values for an adjoint one.
    pub fn trig_sum_quad(&self, coeffs: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        let n = self.size();
        (0..self.quad.len())
            .map(|l| {
                let row = &self.trig_quad[l * n..(l + 1) * n];
                row.iter().zip(coeffs).map(|(t, c)| c * *t).sum()
            })
            .collect()
    }
}

/// Trigonometric product weights for `∫₀^{2π} ln(4 sin²((t − s)/2)) f(s) ds`
/// on `2n` equispaced nodes:
/// `R_l(t) = −(2π/n) Σ_{m=1}^{n−1} cos(m(t − s_l))/m − (π/n²) cos(n(t − s_l))`.
pub fn kress_weight(t: f64, s: f64, n: usize) -> f64 {
    let d = t - s;
    let nf = n as f64;
    let sum: f64 = (1..n).map(|m| (m as f64 * d).cos() / m as f64).sum();
    -2.0 * PI / nf * sum - PI / (nf * nf) * (nf * d).cos()
}

/// For each collocation node `t_j` and quadrature node `s_l`, the weight that
/// turns a kernel `A(s) ln(4 sin²((t − s)/2)) + B(s)` sampled as
/// `K_l = A_l ln(…) + B_l` into the product rule: the integral is
/// `Σ_l w K_l + A_l (R_l(t_j) − w ln(…))`. Where `s_l = t_j` the logarithm is
/// dropped, since callers supply `K_l` at its diagonal limit with `A_l = 0`.
pub fn log_weights(n_colloc: usize, n_quad: usize) -> Vec<f64> {
    let w = 2.0 * PI / n_quad as f64;
    let half = n_quad / 2;
    let tc = uniform_nodes(n_colloc);
    let sq = uniform_nodes(n_quad);
    let mut out = Vec::with_capacity(n_colloc * n_quad);
    for &t in &tc {
        for &s in &sq {
            let sn = (0.5 * (t - s)).sin();
            let lg = if sn.abs() < 1e-14 { 0.0 } else { (4.0 * sn * sn).ln() };
            out.push(kress_weight(t, s, half) - w * lg);
        }
    }
    out
}

/// Wavelength-independent data for a whole design.
#[derive(Debug)]
pub struct DesignCache {
    pub opts: SolverOptions,
    pub particles: Vec<ParticleCache>,
    /// Self-interaction log weights `R_l(t_j) − w ln(4 sin²((t_j − s_l)/2))`,
    /// row-major `[j * N_q + l]`; see [`log_weights`].
    pub log_weights: Vec<f64>,
}

impl DesignCache {
    pub fn new(config: &DesignConfig, opts: &SolverOptions) -> Result<Self> {
        opts.validate()?;
        if config.particles.is_empty() {
            return Err(invalid("particles", "need at least one particle"));
        }
        let particles = config
            .particles
            .iter()
            .map(|p| ParticleCache::new(p, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignCache {
            opts: *opts,
            log_weights: log_weights(opts.basis_size, opts.quad_count()),
            particles,
        })
    }

    pub fn from_params(particles: &[EllipseParams], opts: &SolverOptions) -> Result<Self> {
        Self::new(&DesignConfig::new(particles.to_vec()), opts)
    }

    /// Particle count `M`.
    pub fn count(&self) -> usize {
        self.particles.len()
    }

    /// Basis size `N`.
    pub fn basis_size(&self) -> usize {
        self.opts.basis_size
    }

    /// Unknowns per density, `M·N`.
    pub fn block(&self) -> usize {
        self.count() * self.basis_size()
    }

    pub fn quad_weight(&self) -> f64 {
        2.0 * PI / self.opts.quad_count() as f64
    }
}
