//! `sweep`: absorptance spectra of named particle configurations.
//!
//! Writes `spectrum_<name>.csv` per variant, a `peaks.csv` table of the
//! resonance peaks of every variant and, for variants with several
//! particles, `individual_<name>.csv` with each particle simulated alone
//! next to the sum of those spectra and the coupled result.

use std::path::Path;

use anyhow::Result;
use ellipsorb::design::DesignCache;
use ellipsorb::geometry::DesignConfig;
use ellipsorb::observables::{resonance_peaks, spectrum};
use serde::Serialize;

use crate::config::{check_names, check_particles, config_error, load, SweepConfig};
use crate::output::{Output, Provenance};

#[derive(Serialize)]
struct PeakRow<'a> {
    variant: &'a str,
    peak: usize,
    lambda_nm: f64,
    #[serde(rename = "A")]
    absorptance: f64,
}

pub fn run(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load::<SweepConfig>(config)?;
    let cfg = &loaded.value;
    let phys = &cfg.physics;
    phys.validate()?;
    check_names("variants", cfg.variants.iter().map(|v| v.name.as_str()))?;
    for (i, v) in cfg.variants.iter().enumerate() {
        check_particles(&format!("variants[{i}].particles"), &v.particles)?;
    }
    if !(0.0..=1.0).contains(&cfg.peak_fraction) {
        return Err(config_error("peak_fraction: must lie in [0, 1]"));
    }
    if cfg.variants.is_empty() {
        eprintln!("sweep: no variants, nothing written");
        return Ok(());
    }

    let output = Output::new(out, Provenance::new("sweep", loaded.sha256.clone(), seed.unwrap_or(0)));
    let mut peaks = output.csv("peaks.csv")?;
    for v in &cfg.variants {
        let design = DesignConfig::new(v.particles.clone());
        for (i, j) in design.overlapping_pairs() {
            eprintln!("warning: variant {}: particles {i} and {j} may overlap", v.name);
        }
        let cache = DesignCache::from_params(&v.particles, &phys.solver)?;
        let spec = spectrum(&cache, &phys.scene, &phys.arc, &phys.wavelengths)?;
        let mut w = output.csv(&format!("spectrum_{}.csv", v.name))?;
        for r in &spec.records {
            w.serialize(r)?;
        }
        w.flush()?;

        let a = spec.absorptance();
        for (k, i) in resonance_peaks(&a, cfg.peak_fraction).into_iter().enumerate() {
            peaks.serialize(PeakRow {
                variant: &v.name,
                peak: k,
                lambda_nm: spec.records[i].lambda_nm,
                absorptance: a[i],
            })?;
        }

        if v.particles.len() > 1 {
            let singles = v
                .particles
                .iter()
                .map(|p| {
                    let c = DesignCache::from_params(std::slice::from_ref(p), &phys.solver)?;
                    Ok(spectrum(&c, &phys.scene, &phys.arc, &phys.wavelengths)?.absorptance())
                })
                .collect::<Result<Vec<_>>>()?;
            let mut w = output.csv(&format!("individual_{}.csv", v.name))?;
            let mut header = vec!["lambda_nm".to_string()];
            header.extend((1..=singles.len()).map(|m| format!("A_{m}")));
            header.extend(["A_sum".to_string(), "A_total".to_string()]);
            w.write_record(&header)?;
            for (j, r) in spec.records.iter().enumerate() {
                let sum: f64 = singles.iter().map(|s| s[j]).sum();
                let mut row = vec![r.lambda_nm.to_string()];
                row.extend(singles.iter().map(|s| s[j].to_string()));
                row.extend([sum.to_string(), r.absorptance.to_string()]);
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        eprintln!("sweep: {} done ({} particles)", v.name, v.particles.len());
    }
    peaks.flush()?;
    Ok(())
}
