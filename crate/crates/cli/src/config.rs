//! JSON run configurations of the subcommands.
//!
//! Every config is parsed with unknown fields rejected, and deserialization
//! errors carry the path of the offending field. Physical invariants are
//! re-checked by the library validators before any computation starts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use ellipsorb::design::{Scene, SolverOptions};
use ellipsorb::geometry::{Bounds, DesignConfig, EllipseParams};
use ellipsorb::initializer::DatasetSpec;
use ellipsorb::materials::WavelengthGrid;
use ellipsorb::observables::{MeasurementArc, TargetSpectrum};
use ellipsorb::optimizer::OptimizerOptions;
use ellipsorb::pso::PsoOptions;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A problem with the configuration rather than with the numerics.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// A parsed config with the hash of its source bytes.
pub struct Loaded<T> {
    pub value: T,
    pub sha256: String,
    /// Directory that relative paths inside the config refer to.
    pub base: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>> {
    let bytes = fs::read(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_slice(&bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        config_error(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })?;
    Ok(Loaded {
        value,
        sha256: sha256_hex(&bytes),
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// Materials, arc, wavelength grid and solver settings of a simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default)]
    pub scene: Scene,
    #[serde(default)]
    pub arc: MeasurementArc,
    pub wavelengths: WavelengthGrid,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.arc.validate(self.scene.incident_angle)?;
        self.wavelengths.validate()?;
        self.solver.validate()?;
        Ok(())
    }
}

/// A named particle list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    pub particles: Vec<EllipseParams>,
}

/// Names end up in file names, so keep them to a safe alphabet.
pub fn check_names<'a>(field: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, name) in names.enumerate() {
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            && !name.starts_with('.');
        if !ok {
            return Err(config_error(format!(
                "{field}[{i}].name: `{name}` must be non-empty and use only letters, digits, `_`, `-` or `.`"
            )));
        }
        if !seen.insert(name) {
            return Err(config_error(format!("{field}[{i}].name: duplicate name `{name}`")));
        }
    }
    Ok(())
}

pub fn check_particles(field: &str, particles: &[EllipseParams]) -> Result<()> {
    if particles.is_empty() {
        return Err(config_error(format!("{field}: need at least one particle")));
    }
    for (i, p) in particles.iter().enumerate() {
        p.validate()
            .map_err(|e| config_error(format!("{field}[{i}]: {e}")))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub physics: Physics,
    #[serde(default)]
    pub variants: Vec<Variant>,
    /// Peaks lower than this fraction of the spectrum maximum are ignored.
    #[serde(default = "default_peak_fraction")]
    pub peak_fraction: f64,
}

fn default_peak_fraction() -> f64 {
    0.05
}

/// A randomly generated design for the cross-validation tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomVariant {
    pub name: String,
    pub count: usize,
    /// Falls back to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default = "default_spacing")]
    pub spacing: [f64; 2],
}

pub fn default_spacing() -> [f64; 2] {
    [80.0, 80.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub physics: Physics,
    #[serde(default = "default_nystrom_nodes")]
    pub nystrom_nodes: usize,
    /// Second reduced-basis size for a self-consistency column.
    #[serde(default)]
    pub reference_basis_size: Option<usize>,
    /// Second Nyström resolution for a grid-refinement column.
    #[serde(default)]
    pub reference_nystrom_nodes: Option<usize>,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub random_variants: Vec<RandomVariant>,
}

fn default_nystrom_nodes() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub physics: Physics,
    #[serde(default)]
    pub dataset: DatasetSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Dataset directory written by `dataset`, or its `dataset.json`.
    pub dataset: PathBuf,
    pub target: TargetSpectrum,
    #[serde(default)]
    pub pso: PsoOptions,
    #[serde(default = "default_spacing")]
    pub spacing: [f64; 2],
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A design given inline or as a path to a JSON design file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignSource {
    Path(PathBuf),
    Inline(DesignConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub physics: Physics,
    pub initial: DesignSource,
    pub target: TargetSpectrum,
    #[serde(default)]
    pub optimizer: OptimizerOptions,
}

/// Resolve `path` against the directory of the config that named it.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
