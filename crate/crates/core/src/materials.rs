//! Wavelength conversions and material dispersion.
//!
//! Lengths are in nanometres and photon energies in electron-volts throughout
//! the crate. The Laplace kernel `ln|x|/2π` is not scale invariant, so mixing
//! unit systems silently changes the single-layer operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// hc in eV·nm.
pub const HC_EV_NM: f64 = 1239.84193;

/// Photon energy (eV) of a vacuum wavelength (nm).
pub fn photon_energy(lambda: f64) -> f64 {
    HC_EV_NM / lambda
}

/// Free-electron metal, `ε(ω) = 1 − ω_p² / (ω(ω + iτ))` with ω in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeMaterial {
    pub plasma_frequency: f64,
    pub damping: f64,
}

impl DrudeMaterial {
    /// Silver parameters used throughout the examples.
    pub const SILVER: DrudeMaterial = DrudeMaterial {
        plasma_frequency: 7.613,
        damping: 0.048,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.plasma_frequency > 0.0) || !self.plasma_frequency.is_finite() {
            return Err(invalid("plasma_frequency", "must be positive"));
        }
        if !(self.damping >= 0.0) || !self.damping.is_finite() {
            return Err(invalid("damping", "must be non-negative"));
        }
        Ok(())
    }

    pub fn permittivity(&self, lambda: f64) -> Result<Complex64> {
        check_lambda(lambda)?;
        let w = photon_energy(lambda);
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        Ok(Complex64::new(1.0, 0.0) - wp2 / (w * Complex64::new(w, self.damping)))
    }
}

/// Relative permittivity model of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ParticleMaterial {
    Drude(DrudeMaterial),
    /// Non-dispersive permittivity, mostly useful for null tests.
    Constant { re: f64, im: f64 },
}

impl ParticleMaterial {
    pub fn permittivity(&self, lambda: f64) -> Result<Complex64> {
        match self {
            ParticleMaterial::Drude(d) => d.permittivity(lambda),
            ParticleMaterial::Constant { re, im } => {
                check_lambda(lambda)?;
                Ok(Complex64::new(*re, *im))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParticleMaterial::Drude(d) => d.validate(),
            ParticleMaterial::Constant { re, im } => {
                if !re.is_finite() || !im.is_finite() || *im < 0.0 {
                    return Err(invalid("permittivity", "needs finite parts and Im >= 0"));
                }
                if *re == 0.0 && *im == 0.0 {
                    return Err(invalid("permittivity", "must be non-zero"));
                }
                Ok(())
            }
        }
    }
}

impl Default for ParticleMaterial {
    fn default() -> Self {
        ParticleMaterial::Drude(DrudeMaterial::SILVER)
    }
}

/// Lossless homogeneous background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundMedium {
    pub rel_permittivity: f64,
    pub rel_permeability: f64,
    /// Relative permeability of the particles (non-magnetic by default).
    #[serde(default = "one")]
    pub particle_permeability: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for BackgroundMedium {
    fn default() -> Self {
        BackgroundMedium {
            rel_permittivity: 1.0,
            rel_permeability: 1.0,
            particle_permeability: 1.0,
        }
    }
}

impl BackgroundMedium {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_permittivity", self.rel_permittivity),
            ("rel_permeability", self.rel_permeability),
            ("particle_permeability", self.particle_permeability),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Everything that depends on the wavelength alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optics {
    pub lambda: f64,
    pub k0: f64,
    pub k_m: f64,
    pub k_c: Complex64,
    pub eps_m: f64,
    pub eps_c: Complex64,
}

/// Square root on the branch with non-negative imaginary part.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

pub fn wavenumbers(
    lambda: f64,
    medium: &BackgroundMedium,
    material: &ParticleMaterial,
) -> Result<Optics> {
    check_lambda(lambda)?;
    let k0 = 2.0 * PI / lambda;
    let eps_c = material.permittivity(lambda)?;
    let k_m = k0 * (medium.rel_permittivity * medium.rel_permeability).sqrt();
    let k_c = k0 * sqrt_upper(eps_c * medium.particle_permeability);
    Ok(Optics {
        lambda,
        k0,
        k_m,
        k_c,
        eps_m: medium.rel_permittivity,
        eps_c,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("{lambda} is not a positive wavelength")));
    }
    Ok(())
}

/// Uniform wavelength grid including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavelengthGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

impl WavelengthGrid {
    pub fn new(lambda_min: f64, lambda_max: f64, count: usize) -> Result<Self> {
        let g = WavelengthGrid {
            lambda_min,
            lambda_max,
            count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0) || !(self.lambda_max > self.lambda_min) {
            return Err(invalid("wavelength grid", "need 0 < lambda_min < lambda_max"));
        }
        if self.count < 2 {
            return Err(invalid("wavelength grid", "need at least two nodes"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.lambda_max - self.lambda_min) / (self.count - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.count)
            .map(|j| {
                if j + 1 == self.count {
                    self.lambda_max
                } else {
                    self.lambda_min + h * j as f64
                }
            })
            .collect()
    }

    /// Composite trapezoid weights over the grid.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.count)
            .map(|j| if j == 0 || j + 1 == self.count { 0.5 * h } else { h })
            .collect()
    }
}
