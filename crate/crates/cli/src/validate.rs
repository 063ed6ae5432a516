//! `validate`: reduced-basis solver checked against the Nyström reference.
//!
//! For every variant and wavelength the table `errors_<name>.csv` lists the
//! extinction cross section from both solvers, their relative difference and
//! the relative L² differences of the adjoint densities sampled at the
//! Nyström nodes. Optional reference resolutions add self-convergence
//! columns. Random variants are generated from the run seed and written to
//! `design_<name>.json` first so that every table can be reproduced.

use std::path::Path;

use anyhow::Result;
use ellipsorb::adjoint::{adjoint_rhs, assemble_both, solve_adjoint};
use ellipsorb::design::{DesignCache, SolverOptions};
use ellipsorb::forward::{forward, solve_forward};
use ellipsorb::geometry::EllipseParams;
use ellipsorb::initializer::random_design;
use ellipsorb::nystrom::{adjoint_rhs_nystrom, solve_adjoint_nystrom, solve_forward_nystrom, NystromGrid};
use ellipsorb::observables::{Evaluator, ExteriorTrace};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_names, check_particles, config_error, load, Physics, ValidateConfig};
use crate::output::{Output, Provenance};

#[derive(Debug, Serialize)]
struct ErrorRow {
    lambda_nm: f64,
    qext_rbm: f64,
    qext_nystrom: f64,
    qext_rel_err: f64,
    p_rel_err: f64,
    q_rel_err: f64,
    rbm_self_err: Option<f64>,
    nystrom_self_err: Option<f64>,
}

fn relative_l2(pairs: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (approx, reference) in pairs {
        num += (approx - reference).norm_sqr();
        den += reference.norm_sqr();
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn relative(a: f64, reference: f64) -> f64 {
    let d = (a - reference).abs();
    if reference != 0.0 {
        d / reference.abs()
    } else {
        d
    }
}

struct Resolution {
    nodes: usize,
    reference_solver: Option<SolverOptions>,
    reference_nodes: Option<usize>,
}

fn table(phys: &Physics, res: &Resolution, particles: &[EllipseParams]) -> Result<Vec<ErrorRow>> {
    let scene = &phys.scene;
    let cache = DesignCache::from_params(particles, &phys.solver)?;
    let eval = Evaluator::new(&cache, scene, &phys.arc);
    let grid = NystromGrid::new(particles, res.nodes)?;
    let ref_cache = res
        .reference_solver
        .map(|o| DesignCache::from_params(particles, &o))
        .transpose()?;
    let ref_grid = res.reference_nodes.map(|n| NystromGrid::new(particles, n)).transpose()?;

    let rows = phys
        .wavelengths
        .nodes()
        .par_iter()
        .map(|&lambda| -> Result<ErrorRow> {
            let (fwd, adj_sys) = assemble_both(&cache, scene, lambda)?;
            let sol = solve_forward(&fwd)?;
            let qext_rbm = eval.cross_sections(&ExteriorTrace::new(&cache, &sol)).0;
            let adj = solve_adjoint(&adj_sys, &adjoint_rhs(&cache, &eval, &sol))?;

            let ns = solve_forward_nystrom(&grid, scene, lambda)?;
            let qext_nystrom = ns.q_ext(&grid, scene);
            let an = solve_adjoint_nystrom(&grid, scene, lambda, &adjoint_rhs_nystrom(&grid, &eval, &ns))?;
            let rec: Vec<(Complex64, Complex64)> = grid
                .points
                .iter()
                .enumerate()
                .flat_map(|(m, nodes)| nodes.iter().map(move |nd| (m, nd.t)))
                .map(|(m, t)| adj.reconstruct(&cache, m, t))
                .collect();
            let p_rel_err = relative_l2(rec.iter().zip(an.p.iter()).map(|(r, n)| (r.0, *n)));
            let q_rel_err = relative_l2(rec.iter().zip(an.q.iter()).map(|(r, n)| (r.1, *n)));

            let rbm_self_err = match &ref_cache {
                Some(rc) => {
                    let sol = forward(rc, scene, lambda)?;
                    let q = Evaluator::new(rc, scene, &phys.arc)
                        .cross_sections(&ExteriorTrace::new(rc, &sol))
                        .0;
                    Some(relative(qext_rbm, q))
                }
                None => None,
            };
            let nystrom_self_err = match &ref_grid {
                Some(rg) => Some(relative(qext_nystrom, solve_forward_nystrom(rg, scene, lambda)?.q_ext(rg, scene))),
                None => None,
            };
            Ok(ErrorRow {
                lambda_nm: lambda,
                qext_rbm,
                qext_nystrom,
                qext_rel_err: relative(qext_rbm, qext_nystrom),
                p_rel_err,
                q_rel_err,
                rbm_self_err,
                nystrom_self_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

pub fn run(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load::<ValidateConfig>(config)?;
    let cfg = &loaded.value;
    let phys = &cfg.physics;
    phys.validate()?;
    let names = cfg
        .variants
        .iter()
        .map(|v| v.name.as_str())
        .chain(cfg.random_variants.iter().map(|v| v.name.as_str()));
    check_names("variants", names)?;
    for (i, v) in cfg.variants.iter().enumerate() {
        check_particles(&format!("variants[{i}].particles"), &v.particles)?;
    }
    if cfg.nystrom_nodes < 8 || cfg.nystrom_nodes % 2 != 0 {
        return Err(config_error("nystrom_nodes: need an even count of at least 8"));
    }
    if let Some(n) = cfg.reference_nystrom_nodes {
        if n < 8 || n % 2 != 0 {
            return Err(config_error("reference_nystrom_nodes: need an even count of at least 8"));
        }
    }
    let reference_solver = cfg.reference_basis_size.map(|n| SolverOptions {
        basis_size: n,
        ..phys.solver
    });
    if let Some(o) = &reference_solver {
        o.validate()
            .map_err(|e| config_error(format!("reference_basis_size: {e}")))?;
    }
    let res = Resolution {
        nodes: cfg.nystrom_nodes,
        reference_solver,
        reference_nodes: cfg.reference_nystrom_nodes,
    };

    let run_seed = seed.unwrap_or(0);
    let mut designs: Vec<(String, Vec<EllipseParams>)> =
        cfg.variants.iter().map(|v| (v.name.clone(), v.particles.clone())).collect();
    let output = Output::new(out, Provenance::new("validate", loaded.sha256.clone(), run_seed));
    for (i, r) in cfg.random_variants.iter().enumerate() {
        r.bounds
            .validate()
            .map_err(|e| config_error(format!("random_variants[{i}].bounds: {e}")))?;
        let design = random_design(r.count, r.bounds, r.spacing, r.seed.unwrap_or(run_seed))
            .map_err(|e| config_error(format!("random_variants[{i}]: {e}")))?;
        for (a, b) in design.overlapping_pairs() {
            eprintln!("warning: variant {}: particles {a} and {b} may overlap", r.name);
        }
        output.json(&format!("design_{}.json", r.name), &design)?;
        designs.push((r.name.clone(), design.particles));
    }
    if designs.is_empty() {
        eprintln!("validate: no variants, nothing written");
        return Ok(());
    }

    for (name, particles) in &designs {
        let rows = table(phys, &res, particles)?;
        let mut w = output.csv(&format!("errors_{name}.csv"))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let worst = rows.iter().map(|r| r.qext_rel_err).fold(0.0, f64::max);
        eprintln!("validate: {name}: max Qe relative difference {worst:.3e}");
    }
    Ok(())
}
