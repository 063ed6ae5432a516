//! Elliptical particle boundaries and their shape derivatives.
//!
//! A particle is `x(t) = Rot(θ)(a cos t, b sin t) + (x₁, x₂)`, traversed
//! counterclockwise. The parameter vector of one particle is ordered
//! `(a, b, θ, x₁, x₂)` everywhere in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Vec2 = [f64; 2];

/// Number of shape parameters per particle.
pub const SLOTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Focal half-distance and elliptic radius: `a = c cosh ρ`, `b = c sinh ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticData {
    pub c: f64,
    pub rho: f64,
}

impl EllipticData {
    /// Metric factor `Ξ(ρ,t) = c √(sinh²ρ + sin²t)`.
    pub fn xi(&self, t: f64) -> f64 {
        let sh = self.rho.sinh();
        let s = t.sin();
        self.c * (sh * sh + s * s).sqrt()
    }
}

/// Derivatives of the boundary data at one parameter value `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeJacobians {
    pub dx: [Vec2; SLOTS],
    pub dspeed: [f64; SLOTS],
    pub dnormal: [Vec2; SLOTS],
}

impl EllipseParams {
    pub fn new(a: f64, b: f64, theta: f64, x1: f64, x2: f64) -> Result<Self> {
        let p = EllipseParams {
            a,
            b,
            theta,
            x1,
            x2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.theta, self.x1, self.x2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("ellipse", "parameters must be finite"));
        }
        if !(self.b > 0.0) {
            return Err(invalid("b", format!("semi-minor axis {} must be positive", self.b)));
        }
        // Circles make c = 0 and ρ infinite.
        if !(self.a >= self.b * (1.0 + 1e-9)) {
            return Err(invalid(
                "a",
                format!("need a > b strictly, got a = {}, b = {}", self.a, self.b),
            ));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; SLOTS] {
        [self.a, self.b, self.theta, self.x1, self.x2]
    }

    pub fn from_array(w: [f64; SLOTS]) -> Self {
        EllipseParams {
            a: w[0],
            b: w[1],
            theta: w[2],
            x1: w[3],
            x2: w[4],
        }
    }

    pub fn elliptic(&self) -> EllipticData {
        let c = ((self.a - self.b) * (self.a + self.b)).sqrt();
        EllipticData {
            c,
            rho: ((self.a + self.b) / c).ln(),
        }
    }

    /// `∂c/∂w` in the `(a, b, θ, x₁, x₂)` ordering.
    pub fn dc_dw(&self) -> [f64; SLOTS] {
        let c = self.elliptic().c;
        [self.a / c, -self.b / c, 0.0, 0.0, 0.0]
    }

    /// `∂ρ/∂w` in the `(a, b, θ, x₁, x₂)` ordering.
    pub fn drho_dw(&self) -> [f64; SLOTS] {
        let c2 = self.a * self.a - self.b * self.b;
        [-self.b / c2, self.a / c2, 0.0, 0.0, 0.0]
    }

    #[inline]
    fn rotate(&self, v: Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    #[inline]
    fn rotate_dtheta(&self, v: Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        [-s * v[0] - c * v[1], c * v[0] - s * v[1]]
    }

    pub fn point(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        let p = self.rotate([self.a * c, self.b * s]);
        [p[0] + self.x1, p[1] + self.x2]
    }

    /// `x′(t)`.
    pub fn tangent(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        self.rotate([-self.a * s, self.b * c])
    }

    /// `x″(t)`.
    pub fn second_derivative(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        self.rotate([-self.a * c, -self.b * s])
    }

    /// `|x′(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.a * self.a * s * s + self.b * self.b * c * c).sqrt()
    }

    /// Outward unit normal: the unit tangent turned a quarter clockwise.
    pub fn normal(&self, t: f64) -> Vec2 {
        let d = self.tangent(t);
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[1] / n, -d[0] / n]
    }

    pub fn jacobians(&self, t: f64) -> ShapeJacobians {
        let (s, c) = t.sin_cos();
        let local = [self.a * c, self.b * s];
        let dlocal = [-self.a * s, self.b * c];
        let dx = [
            self.rotate([c, 0.0]),
            self.rotate([0.0, s]),
            self.rotate_dtheta(local),
            [1.0, 0.0],
            [0.0, 1.0],
        ];
        let speed = self.speed(t);
        let dspeed = [
            self.a * s * s / speed,
            self.b * c * c / speed,
            0.0,
            0.0,
            0.0,
        ];
        // Derivatives of the tangent x′ with respect to each slot.
        let dtan = [
            self.rotate([-s, 0.0]),
            self.rotate([0.0, c]),
            self.rotate_dtheta(dlocal),
            [0.0, 0.0],
            [0.0, 0.0],
        ];
        let nu = self.normal(t);
        let mut dnormal = [[0.0; 2]; SLOTS];
        for k in 0..SLOTS {
            dnormal[k] = [
                dtan[k][1] / speed - nu[0] * dspeed[k] / speed,
                -dtan[k][0] / speed - nu[1] * dspeed[k] / speed,
            ];
        }
        ShapeJacobians {
            dx,
            dspeed,
            dnormal,
        }
    }
}

/// Box constraints of the design problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub a_min: f64,
    pub a_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            a_min: 8.0,
            a_max: 20.0,
            eta_min: 0.1,
            eta_max: 0.9,
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_min > 0.0 && self.a_max >= self.a_min) {
            return Err(invalid("bounds", "need 0 < a_min <= a_max"));
        }
        if !(self.eta_min > 0.0 && self.eta_max >= self.eta_min && self.eta_max < 1.0) {
            return Err(invalid("bounds", "need 0 < eta_min <= eta_max < 1"));
        }
        Ok(())
    }

    pub fn contains(&self, p: &EllipseParams) -> bool {
        let eta = p.b / p.a;
        p.a >= self.a_min && p.a <= self.a_max && eta >= self.eta_min && eta <= self.eta_max
    }
}

/// Ordered particle list plus design metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub particles: Vec<EllipseParams>,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default = "default_spacing")]
    pub spacing: [f64; 2],
}

fn default_spacing() -> [f64; 2] {
    [80.0, 80.0]
}

impl DesignConfig {
    pub fn new(particles: Vec<EllipseParams>) -> Self {
        DesignConfig {
            particles,
            bounds: Bounds::default(),
            spacing: default_spacing(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(invalid("particles", "need at least one particle"));
        }
        for p in &self.particles {
            p.validate()?;
        }
        self.bounds.validate()
    }

    /// Flattened parameter vector, `5M` long.
    pub fn to_vector(&self) -> Vec<f64> {
        self.particles.iter().flat_map(|p| p.to_array()).collect()
    }

    pub fn with_vector(&self, w: &[f64]) -> DesignConfig {
        assert_eq!(w.len(), SLOTS * self.particles.len());
        let particles = w
            .chunks_exact(SLOTS)
            .map(|c| EllipseParams::from_array([c[0], c[1], c[2], c[3], c[4]]))
            .collect();
        DesignConfig {
            particles,
            bounds: self.bounds,
            spacing: self.spacing,
        }
    }

    /// Pairs of particles whose bounding circles intersect.
    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.particles.len() {
            for j in i + 1..self.particles.len() {
                let (p, q) = (&self.particles[i], &self.particles[j]);
                let d = ((p.x1 - q.x1).powi(2) + (p.x2 - q.x2).powi(2)).sqrt();
                if d <= p.a + q.a {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
