//! `dataset`, `init` and `optimize`: the inverse-design pipeline.
//!
//! `dataset` writes `dataset.json` (the spectra), `spectra.csv` (the same
//! data in long form) and `manifest.json`. `init` reads a dataset and writes
//! `initial_config.json`, `counts.csv`, `init_fit.csv` and
//! `init_summary.json`. `optimize` streams `history.csv` while it runs and
//! writes `final_config.json` and `final_spectrum.csv` at the end.

use std::fs;
use std::path::Path;

use anyhow::Result;
use ellipsorb::design::{Scene, SolverOptions};
use ellipsorb::initializer::{build_dataset, initialize, AbsorptanceDataset, DatasetSpec};
use ellipsorb::observables::MeasurementArc;
use ellipsorb::optimizer::{run, Problem};
use ellipsorb::materials::WavelengthGrid;
use serde::Serialize;

use crate::config::{config_error, load, resolve, DatasetConfig, DesignSource, InitConfig, OptimizeConfig};
use crate::output::{Output, Provenance};

/// Work units (particles × wavelengths × steps) above which a run is
/// announced as long.
const LONG_RUN: usize = 1_000_000;

#[derive(Serialize)]
struct Manifest<'a> {
    spec: &'a DatasetSpec,
    grid: &'a WavelengthGrid,
    scene: &'a Scene,
    arc: &'a MeasurementArc,
    solver: &'a SolverOptions,
    candidates: usize,
    entries: usize,
    dropped: usize,
    files: [&'static str; 2],
}

#[derive(Serialize)]
struct SpectraRow {
    index: usize,
    a: f64,
    b: f64,
    theta: f64,
    lambda_nm: f64,
    #[serde(rename = "A")]
    absorptance: f64,
}

pub fn dataset(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load::<DatasetConfig>(config)?;
    let cfg = &loaded.value;
    let phys = &cfg.physics;
    phys.validate()?;
    cfg.dataset
        .validate()
        .map_err(|e| config_error(format!("dataset: {e}")))?;
    let candidates = cfg.dataset.candidates().len();
    if candidates == 0 {
        return Err(config_error("dataset: no candidate has b < a"));
    }
    if candidates * phys.wavelengths.count > LONG_RUN / 10 {
        eprintln!(
            "dataset: {candidates} candidates × {} wavelengths, this takes a while",
            phys.wavelengths.count
        );
    }

    let ds = build_dataset(&cfg.dataset, &phys.scene, &phys.arc, &phys.wavelengths, &phys.solver)?;
    let output = Output::new(out, Provenance::new("dataset", loaded.sha256.clone(), seed.unwrap_or(0)));
    output.json("dataset.json", &ds)?;
    let nodes = ds.grid.nodes();
    let mut w = output.csv("spectra.csv")?;
    for (index, e) in ds.entries.iter().enumerate() {
        for (&lambda_nm, &absorptance) in nodes.iter().zip(&e.spectrum) {
            w.serialize(SpectraRow {
                index,
                a: e.params.a,
                b: e.params.b,
                theta: e.params.theta,
                lambda_nm,
                absorptance,
            })?;
        }
    }
    w.flush()?;
    output.json(
        "manifest.json",
        &Manifest {
            spec: &cfg.dataset,
            grid: &phys.wavelengths,
            scene: &phys.scene,
            arc: &phys.arc,
            solver: &phys.solver,
            candidates,
            entries: ds.len(),
            dropped: ds.dropped.len(),
            files: ["dataset.json", "spectra.csv"],
        },
    )?;
    for d in &ds.dropped {
        eprintln!(
            "dataset: dropped b = {} θ = {}: {}",
            d.params.b, d.params.theta, d.reason
        );
    }
    eprintln!("dataset: {} entries, {} dropped", ds.len(), ds.dropped.len());
    Ok(())
}

#[derive(Serialize)]
struct CountRow {
    index: usize,
    a: f64,
    b: f64,
    theta: f64,
    relaxed: f64,
    rounded: f64,
    refined: f64,
}

#[derive(Serialize)]
struct FitRow {
    lambda_nm: f64,
    target: f64,
    relaxed: f64,
    rounded: f64,
    refined: f64,
}

#[derive(Serialize)]
struct InitSummary {
    particles: usize,
    relaxed_total: f64,
    residual_relaxed: f64,
    residual_rounded: f64,
    residual_refined: f64,
}

fn load_dataset(path: &Path) -> Result<AbsorptanceDataset> {
    let file = if path.is_dir() { path.join("dataset.json") } else { path.to_path_buf() };
    let bytes = fs::read(&file).map_err(|e| config_error(format!("dataset {}: {e}", file.display())))?;
    let ds: AbsorptanceDataset = serde_json::from_slice(&bytes)
        .map_err(|e| config_error(format!("dataset {}: {e}", file.display())))?;
    ds.validate()
        .map_err(|e| config_error(format!("dataset {}: {e}", file.display())))?;
    Ok(ds)
}

pub fn init(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load::<InitConfig>(config)?;
    let cfg = &loaded.value;
    cfg.pso.validate().map_err(|e| config_error(format!("pso: {e}")))?;
    cfg.bounds
        .validate()
        .map_err(|e| config_error(format!("bounds: {e}")))?;
    if cfg.spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(config_error("spacing: must be positive"));
    }
    let ds = load_dataset(&resolve(&loaded.base, &cfg.dataset))?;
    let target = cfg.target.evaluate(&ds.grid)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);

    let init = initialize(&ds, &target, &cfg.pso, seed, cfg.spacing, cfg.bounds)?;
    let output = Output::new(out, Provenance::new("init", loaded.sha256.clone(), seed));
    output.json("initial_config.json", &init.config)?;

    let mut w = output.csv("counts.csv")?;
    for (index, e) in ds.entries.iter().enumerate() {
        let (relaxed, rounded, refined) = (
            init.relaxed.counts[index],
            init.rounded.counts[index],
            init.refined.counts[index],
        );
        if relaxed != 0.0 || rounded != 0.0 || refined != 0.0 {
            w.serialize(CountRow {
                index,
                a: e.params.a,
                b: e.params.b,
                theta: e.params.theta,
                relaxed,
                rounded,
                refined,
            })?;
        }
    }
    w.flush()?;

    let fits = [
        ds.combine(&init.relaxed.counts),
        ds.combine(&init.rounded.counts),
        ds.combine(&init.refined.counts),
    ];
    let mut w = output.csv("init_fit.csv")?;
    for (j, lambda_nm) in ds.grid.nodes().into_iter().enumerate() {
        w.serialize(FitRow {
            lambda_nm,
            target: target[j],
            relaxed: fits[0][j],
            rounded: fits[1][j],
            refined: fits[2][j],
        })?;
    }
    w.flush()?;

    let summary = InitSummary {
        particles: init.config.particles.len(),
        relaxed_total: init.relaxed.total(),
        residual_relaxed: init.residuals[0],
        residual_rounded: init.residuals[1],
        residual_refined: init.residuals[2],
    };
    output.json("init_summary.json", &summary)?;
    eprintln!(
        "init: {} particles, residuals relaxed {:.4e} rounded {:.4e} refined {:.4e}",
        summary.particles, summary.residual_relaxed, summary.residual_rounded, summary.residual_refined
    );
    Ok(())
}

#[derive(Serialize)]
struct FinalRow {
    lambda_nm: f64,
    target: f64,
    #[serde(rename = "A_initial")]
    initial: f64,
    #[serde(rename = "A_final")]
    last: f64,
}

pub fn optimize(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load::<OptimizeConfig>(config)?;
    let cfg = &loaded.value;
    let phys = &cfg.physics;
    phys.validate()?;
    let initial = match &cfg.initial {
        DesignSource::Inline(d) => d.clone(),
        DesignSource::Path(p) => {
            let path = resolve(&loaded.base, p);
            let bytes = fs::read(&path).map_err(|e| config_error(format!("initial {}: {e}", path.display())))?;
            serde_json::from_slice(&bytes).map_err(|e| config_error(format!("initial {}: {e}", path.display())))?
        }
    };
    initial
        .validate()
        .map_err(|e| config_error(format!("initial: {e}")))?;
    let opts = &cfg.optimizer;
    if !(opts.step_size.is_finite() && opts.step_size >= 0.0) {
        return Err(config_error("optimizer.step_size: must be finite and non-negative"));
    }
    let target = cfg.target.evaluate(&phys.wavelengths)?;
    for (i, j) in initial.overlapping_pairs() {
        eprintln!("warning: initial particles {i} and {j} may overlap");
    }
    let work = initial.particles.len() * phys.wavelengths.count * opts.iterations.max(1);
    if work > LONG_RUN {
        eprintln!(
            "optimize: {} particles × {} wavelengths × {} iterations, this takes a while",
            initial.particles.len(),
            phys.wavelengths.count,
            opts.iterations
        );
    }

    let output = Output::new(out, Provenance::new("optimize", loaded.sha256.clone(), seed.unwrap_or(0)));
    let problem = Problem {
        scene: &phys.scene,
        arc: &phys.arc,
        grid: &phys.wavelengths,
        target: &target,
        opts: &phys.solver,
    };
    let mut history = output.csv("history.csv")?;
    let mut write_error = None;
    let mut initial_absorptance = Vec::new();
    let last = run(&problem, &initial, opts, |s| {
        if s.iteration == 0 {
            initial_absorptance = s.absorptance.clone();
        }
        if write_error.is_none() {
            let rec = s.history.last().expect("history holds the current state");
            let written = history.serialize(rec).map_err(anyhow::Error::from);
            if let Err(e) = written.and_then(|()| Ok(history.flush()?)) {
                write_error = Some(e);
            }
        }
        if s.iteration % 10 == 0 || s.iteration == opts.iterations {
            eprintln!(
                "optimize: iteration {} J {:.6e} |grad| {:.3e}",
                s.iteration,
                s.objective,
                s.gradient_norm()
            );
        }
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    for (i, j) in last.config.overlapping_pairs() {
        eprintln!("warning: final particles {i} and {j} may overlap");
    }
    output.json("final_config.json", &last.config)?;
    let mut w = output.csv("final_spectrum.csv")?;
    for (j, lambda_nm) in phys.wavelengths.nodes().into_iter().enumerate() {
        w.serialize(FinalRow {
            lambda_nm,
            target: target[j],
            initial: initial_absorptance[j],
            last: last.absorptance[j],
        })?;
    }
    w.flush()?;
    Ok(())
}

