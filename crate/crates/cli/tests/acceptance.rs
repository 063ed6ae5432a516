//! Acceptance checks. Prints one PASS/FAIL line per criterion, followed by the
//! measured quantities, and exits non-zero if any criterion fails that is not
//! listed in `KNOWN_FAILURES`.
//!
//! Pass substrings as arguments to run only the matching checks,
//! e.g. `cargo test -p ellipsorb-cli --test acceptance -- gradient`.

#[path = "../../core/tests/common/laplace.rs"]
#[allow(dead_code)]
mod laplace;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ellipsorb::adjoint::{adjoint_rhs, assemble_both, solve_adjoint};
use ellipsorb::design::{DesignCache, Scene, SolverOptions};
use ellipsorb::forward::{forward, solve_forward, DensitySolution};
use ellipsorb::geometry::{Bounds, DesignConfig, EllipseParams};
use ellipsorb::gradient::objective_gradient;
use ellipsorb::initializer::{
    build_dataset, initialize, AbsorptanceDataset, Axis, DatasetEntry, DatasetSpec,
};
use ellipsorb::materials::{ParticleMaterial, WavelengthGrid};
use ellipsorb::nystrom::{adjoint_rhs_nystrom, solve_adjoint_nystrom, solve_forward_nystrom, NystromGrid};
use ellipsorb::observables::{
    far_field_prefactor, finite_radius_flows, objective, resonance_peaks, spectrum, Band, Evaluator,
    ExteriorTrace, MeasurementArc, TargetSpectrum,
};
use ellipsorb::optimizer::{run, OptimizerOptions, Problem};
use ellipsorb::pso::PsoOptions;
use ellipsorb::spectral::{SeriesOptions, SpectralBasis};
use num_complex::Complex64;
use serde_json::json;

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_FAILURES: &[&str] = &["solver cross-validation"];

struct Check {
    pass: bool,
    detail: String,
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn relative(a: f64, reference: f64) -> f64 {
    (a - reference).abs() / reference.abs()
}

fn relative_l2(pairs: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, r) in pairs {
        num += (a - r).norm_sqr();
        den += r.norm_sqr();
    }
    (num / den).sqrt()
}

fn cache(particles: &[EllipseParams], opts: &SolverOptions) -> DesignCache {
    DesignCache::from_params(particles, opts).unwrap()
}

fn absorptance(particles: &[EllipseParams], grid: &WavelengthGrid) -> Vec<f64> {
    let c = cache(particles, &SolverOptions::default());
    spectrum(&c, &Scene::default(), &MeasurementArc::default(), grid)
        .unwrap()
        .absorptance()
}

fn q_ext(c: &DesignCache, scene: &Scene, lambda: f64) -> f64 {
    let sol = forward(c, scene, lambda).unwrap();
    Evaluator::new(c, scene, &MeasurementArc::default())
        .cross_sections(&ExteriorTrace::new(c, &sol))
        .0
}

/// Wavelengths of the two highest local maxima, in increasing order.
fn two_main_peaks(values: &[f64], nodes: &[f64]) -> Option<(f64, f64)> {
    let mut peaks = resonance_peaks(values, 0.0);
    peaks.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    match peaks[..] {
        [i, j, ..] => Some((nodes[i].min(nodes[j]), nodes[i].max(nodes[j]))),
        _ => None,
    }
}

fn zero_contrast() -> Check {
    let scene = Scene {
        material: ParticleMaterial::Constant { re: 1.0, im: 0.0 },
        ..Scene::default()
    };
    let arc = MeasurementArc::default();
    let c = cache(
        &[
            EllipseParams::new(10.0, 4.0, 0.4, -30.0, 0.0).unwrap(),
            EllipseParams::new(12.0, 2.0, 1.3, 30.0, 10.0).unwrap(),
        ],
        &SolverOptions::with_basis_size(16),
    );
    let eval = Evaluator::new(&c, &scene, &arc);
    let (mut far, mut abs) = (0.0f64, 0.0f64);
    for lambda in WavelengthGrid::new(150.0, 550.0, 10).unwrap().nodes() {
        let sol = forward(&c, &scene, lambda).unwrap();
        let tr = ExteriorTrace::new(&c, &sol);
        for i in 0..128 {
            let theta = 2.0 * PI * i as f64 / 128.0;
            far = far.max((far_field_prefactor(sol.optics.k_m) * tr.h(theta)).norm());
        }
        abs = abs.max(eval.absorptance(&tr).abs());
    }
    Check {
        pass: far <= 1e-9 && abs <= 1e-9,
        detail: format!("max |u_inf| {far:.2e}, max |A| {abs:.2e} (2 particles, N = 16, 10 wavelengths)"),
    }
}

fn spectral_identities() -> Check {
    const FINE: usize = 512;
    let (mut ds, mut dk) = (0.0f64, 0.0f64);
    for (a, b) in [(10.0, 6.0), (10.0, 4.0), (10.0, 2.0)] {
        let p = EllipseParams::new(a, b, 0.4, -3.0, 5.0).unwrap();
        let basis = SpectralBasis::new(&p, 10, SeriesOptions::default()).unwrap();
        for i in 0..basis.size() {
            let psi = |s: f64| basis.forward(i, s);
            for j in 0..24 {
                let t = 0.05 + 2.0 * PI * j as f64 / 24.0;
                ds = ds.max((laplace::single_layer(&p, &psi, t, FINE) - basis.single_layer(i, t)).abs());
                dk = dk.max((laplace::np_adjoint(&p, &psi, t, FINE) - basis.np_adjoint(i, t)).abs());
            }
        }
    }
    Check {
        pass: ds <= 1e-6 && dk <= 1e-6,
        detail: format!("max |S[psi] - closed form| {ds:.2e}, max |K*[psi] -+ alpha psi| {dk:.2e}"),
    }
}

fn cross_validation() -> Check {
    let scene = Scene::default();
    let arc = MeasurementArc::default();
    let coarse = WavelengthGrid::new(150.0, 550.0, 20).unwrap().nodes();
    let fine_grid = WavelengthGrid::new(150.0, 550.0, 401).unwrap();
    let fine = fine_grid.nodes();
    let rbm = SolverOptions::default();

    // Grid points kept after dropping the 3 nearest each main resonance.
    let kept = |p: EllipseParams| -> Vec<f64> {
        let a = absorptance(&[p], &fine_grid);
        let mut drop = BTreeSet::new();
        if let Some((l1, l2)) = two_main_peaks(&a, &fine) {
            for peak in [l1, l2] {
                let mut idx: Vec<usize> = (0..coarse.len()).collect();
                idx.sort_by(|&i, &j| (coarse[i] - peak).abs().total_cmp(&(coarse[j] - peak).abs()));
                drop.extend(idx.into_iter().take(3));
            }
        }
        (0..coarse.len()).filter(|i| !drop.contains(i)).map(|i| coarse[i]).collect()
    };

    let (mut q_err, mut pq_err) = (0.0f64, 0.0f64);
    let mut points = 0;
    for b in [4.0, 6.0, 8.0] {
        let p = EllipseParams::new(10.0, b, PI / 4.0, 0.0, 0.0).unwrap();
        let c = cache(&[p], &rbm);
        let eval = Evaluator::new(&c, &scene, &arc);
        let grid = NystromGrid::new(&[p], 200).unwrap();
        for lambda in kept(p) {
            points += 1;
            let (fwd, adj_sys) = assemble_both(&c, &scene, lambda).unwrap();
            let sol = solve_forward(&fwd).unwrap();
            let qr = eval.cross_sections(&ExteriorTrace::new(&c, &sol)).0;
            let ns = solve_forward_nystrom(&grid, &scene, lambda).unwrap();
            q_err = q_err.max(relative(qr, ns.q_ext(&grid, &scene)));
            let adj = solve_adjoint(&adj_sys, &adjoint_rhs(&c, &eval, &sol)).unwrap();
            let an =
                solve_adjoint_nystrom(&grid, &scene, lambda, &adjoint_rhs_nystrom(&grid, &eval, &ns)).unwrap();
            let rec: Vec<_> = grid.points[0].iter().map(|nd| adj.reconstruct(&c, 0, nd.t)).collect();
            let ep = relative_l2(rec.iter().zip(an.p.iter()).map(|(r, n)| (r.0, *n)));
            let eq = relative_l2(rec.iter().zip(an.q.iter()).map(|(r, n)| (r.1, *n)));
            pq_err = pq_err.max(ep).max(eq);
        }
    }

    let flat = EllipseParams::new(10.0, 1.0, PI / 4.0, 0.0, 0.0).unwrap();
    let (c10, c20) = (cache(&[flat], &rbm), cache(&[flat], &SolverOptions::with_basis_size(20)));
    let (g200, g400) = (NystromGrid::new(&[flat], 200).unwrap(), NystromGrid::new(&[flat], 400).unwrap());
    let (mut rbm_self, mut nys_self) = (0.0f64, 0.0f64);
    for lambda in kept(flat) {
        rbm_self = rbm_self.max(relative(q_ext(&c10, &scene, lambda), q_ext(&c20, &scene, lambda)));
        let n200 = solve_forward_nystrom(&g200, &scene, lambda).unwrap().q_ext(&g200, &scene);
        let n400 = solve_forward_nystrom(&g400, &scene, lambda).unwrap().q_ext(&g400, &scene);
        nys_self = nys_self.max(relative(n200, n400));
    }

    let regular = q_err <= 1e-4 && pq_err <= 1e-3;
    let flat_ok = rbm_self <= 1e-6;
    let degraded = nys_self >= 10.0 * rbm_self;
    Check {
        pass: regular && flat_ok && degraded,
        detail: format!(
            "b in {{4,6,8}} ({points} points): Qe rel {q_err:.2e}, adjoint L2 {pq_err:.2e}; \
             b = 1: RBM N10/N20 {rbm_self:.2e}, Nystrom n200/n400 {nys_self:.2e} \
             (needs >= 10x the RBM self-error{})",
            if degraded { "" } else { "; Nystrom does not degrade here" }
        ),
    }
}

/// Largest `|E′_R − E′|` over 25 geometric radii in `[r, 2r]`.
fn interference_envelope(c: &DesignCache, sol: &DensitySolution, scene: &Scene, r: f64) -> f64 {
    let tr = ExteriorTrace::new(c, sol);
    max_of((0..=24).map(|i| {
        let arc = MeasurementArc {
            radius: r * 2f64.powf(i as f64 / 24.0),
            ..MeasurementArc::default()
        };
        let asymptotic = Evaluator::new(c, scene, &arc).flows(&tr).interference;
        (finite_radius_flows(c, sol, scene, &arc, 2001).unwrap().1 - asymptotic).abs()
    }))
}

fn energy_asymptotics() -> Check {
    let scene = Scene::default();
    let p = EllipseParams::new(10.0, 6.0, PI / 4.0, 0.0, 0.0).unwrap();
    let c = cache(&[p], &SolverOptions::default());
    let fine = cache(
        &[p],
        &SolverOptions {
            theta_nodes: 2049,
            ..SolverOptions::default()
        },
    );
    let sol = forward(&c, &scene, 330.0).unwrap();
    let tr = ExteriorTrace::new(&c, &sol);
    let radii = [500.0, 1000.0, 2000.0, 4000.0];
    let mut es_err = 0.0f64;
    let mut pointwise = Vec::new();
    for radius in radii {
        let arc = MeasurementArc {
            radius,
            ..MeasurementArc::default()
        };
        let f = Evaluator::new(&fine, &scene, &arc).flows(&tr);
        let (es, ep) = finite_radius_flows(&c, &sol, &scene, &arc, 4001).unwrap();
        es_err = es_err.max(relative(es, f.scattered));
        pointwise.push((ep - f.interference).abs());
    }
    let env: Vec<f64> = radii.iter().map(|&r| interference_envelope(&c, &sol, &scene, r)).collect();
    let slope = (env[3] / env[0]).ln() / (radii[3] / radii[0]).ln();

    let single = EllipseParams::new(10.0, 4.0, PI / 4.0, 0.0, 0.0).unwrap();
    let s = spectrum(
        &cache(&[single], &SolverOptions::default()),
        &scene,
        &MeasurementArc::default(),
        &WavelengthGrid::new(150.0, 550.0, 50).unwrap(),
    )
    .unwrap();
    let worst = s
        .records
        .iter()
        .map(|r| r.q_abs / r.q_ext)
        .fold(f64::INFINITY, f64::min);
    Check {
        pass: (-1.0..=-0.25).contains(&slope) && es_err <= 1e-3 && worst >= -1e-8,
        detail: format!(
            "E' envelope {} slope {slope:.3}; pointwise |E'_R - E'| {}; E^s rel {es_err:.1e}; \
             min Qa/Qe {worst:.3e}",
            sci(&env),
            sci(&pointwise)
        ),
    }
}

fn phenomenology() -> Check {
    let grid = WavelengthGrid::new(150.0, 550.0, 401).unwrap();
    let nodes = grid.nodes();
    let step = grid.step();
    let mut seps = Vec::new();
    for b in [8.0, 6.0, 4.0, 2.0] {
        let a = absorptance(&[EllipseParams::new(10.0, b, PI / 4.0, 0.0, 0.0).unwrap()], &grid);
        seps.push(two_main_peaks(&a, &nodes).map_or(f64::NAN, |(l1, l2)| l2 - l1));
    }
    let separation_ok = seps.windows(2).all(|w| w[1] > w[0]);

    // Every peak above a fifth of its spectrum's maximum must sit within one
    // grid step of a peak of the θ = π/4 spectrum, which excites both modes.
    let peaks_at = |theta: f64| -> Vec<f64> {
        let a = absorptance(&[EllipseParams::new(10.0, 4.0, theta, 0.0, 0.0).unwrap()], &grid);
        resonance_peaks(&a, 0.2).into_iter().map(|i| nodes[i]).collect()
    };
    let reference = peaks_at(PI / 4.0);
    let mut shift = 0.0f64;
    for theta in [0.0, PI / 8.0, 3.0 * PI / 8.0, PI / 2.0] {
        for l in peaks_at(theta) {
            shift = shift.max(reference.iter().map(|r| (r - l).abs()).fold(f64::INFINITY, f64::min));
        }
    }

    let g = WavelengthGrid::new(150.0, 550.0, 81).unwrap();
    let p1 = EllipseParams::new(10.0, 3.0, 0.3, -200.0, 0.0).unwrap();
    let p2 = EllipseParams::new(14.0, 9.0, 1.4, 200.0, 0.0).unwrap();
    let (a1, a2, at) = (absorptance(&[p1], &g), absorptance(&[p2], &g), absorptance(&[p1, p2], &g));
    let sum_max = max_of(a1.iter().zip(&a2).map(|(x, y)| x + y));
    let dev = max_of(at.iter().zip(a1.iter().zip(&a2)).map(|(t, (x, y))| (t - x - y).abs()));
    Check {
        pass: separation_ok && shift <= step && dev <= 0.05 * sum_max,
        detail: format!(
            "peak separation (nm) for b = 8,6,4,2: {seps:?}; max peak shift across theta {shift} nm \
             (step {step} nm, reference {reference:?}); coupling {:.3} of max(A1+A2) at 400 nm spacing",
            dev / sum_max
        ),
    }
}

fn gradient() -> Check {
    let scene = Scene::default();
    let arc = MeasurementArc::default();
    let grid = WavelengthGrid::new(200.0, 500.0, 5).unwrap();
    let target = vec![0.3; 5];
    let opts = SolverOptions {
        quad_nodes: Some(256),
        ..SolverOptions::with_basis_size(16)
    };
    let config = DesignConfig::new(vec![
        EllipseParams::new(10.0, 4.0, 0.3, -30.0, 5.0).unwrap(),
        EllipseParams::new(13.0, 8.0, 1.9, 30.0, -5.0).unwrap(),
    ]);
    let j = |c: &DesignConfig| {
        let a = spectrum(&DesignCache::new(c, &opts).unwrap(), &scene, &arc, &grid)
            .unwrap()
            .absorptance();
        objective(&a, &target, &grid).unwrap()
    };
    let og = objective_gradient(&DesignCache::new(&config, &opts).unwrap(), &scene, &arc, &grid, &target).unwrap();
    let g_inf = max_of(og.gradient.iter().map(|g| g.abs()));
    let w = config.to_vector();
    let mut worst = 0.0f64;
    for slot in 0..w.len() {
        let h = if slot % 5 == 2 { 1e-5 } else { 1e-4 };
        let (mut plus, mut minus) = (w.clone(), w.clone());
        plus[slot] += h;
        minus[slot] -= h;
        let fd = (j(&config.with_vector(&plus)) - j(&config.with_vector(&minus))) / (2.0 * h);
        worst = worst.max((og.gradient[slot] - fd).abs() / fd.abs().max(1e-12 * g_inf));
    }
    Check {
        pass: worst <= 1e-4,
        detail: format!("max relative slot error {worst:.2e} over 10 slots (N = 16, 256 quadrature nodes)"),
    }
}

/// Five columns with a rank deficiency: the third is 0.4 times the sum of
/// the first two. The target `D (2, 1, 0, 3, 1)` is integer-achievable.
fn synthetic() -> (AbsorptanceDataset, Vec<f64>) {
    let grid = WavelengthGrid::new(150.0, 550.0, 41).unwrap();
    let bump = |center: f64, width: f64| -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|l| 0.1 * (-((l - center) / width).powi(2)).exp())
            .collect()
    };
    let (b1, b2, b3) = (bump(220.0, 30.0), bump(330.0, 40.0), bump(450.0, 25.0));
    let b5: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| 0.4 * (x + y)).collect();
    let columns = [b1, b2, b5, b3, vec![0.02; grid.count]];
    let entries = columns
        .iter()
        .enumerate()
        .map(|(i, s)| DatasetEntry {
            params: EllipseParams::new(10.0, 1.0 + i as f64, 0.0, 0.0, 0.0).unwrap(),
            spectrum: s.clone(),
        })
        .collect();
    let ds = AbsorptanceDataset {
        grid: grid.clone(),
        entries,
        dropped: vec![],
    };
    let target = ds.combine(&[2.0, 1.0, 0.0, 3.0, 1.0]);
    (ds, target)
}

fn initializer_chain() -> Check {
    let spec = DatasetSpec {
        a: 10.0,
        b: Axis {
            min: 1.0,
            max: 9.0,
            count: 10,
        },
        theta: Axis {
            min: 0.0,
            max: PI / 2.0,
            count: 5,
        },
    };
    let grid = WavelengthGrid::new(150.0, 550.0, 50).unwrap();
    let ds = build_dataset(&spec, &Scene::default(), &MeasurementArc::default(), &grid, &SolverOptions::default())
        .unwrap();
    let targets = [
        ("constant", TargetSpectrum::Constant { value: 0.3 }),
        (
            "notch",
            TargetSpectrum::Bands {
                bands: vec![Band {
                    lambda_min: 300.0,
                    lambda_max: 400.0,
                    value: 0.0,
                }],
                default: 0.3,
            },
        ),
    ];
    let mut ordered = true;
    let mut parts = Vec::new();
    for (name, t) in &targets {
        let target = t.evaluate(&grid).unwrap();
        let init = initialize(&ds, &target, &PsoOptions::default(), 0, [80.0, 80.0], Bounds::default()).unwrap();
        let [relaxed, rounded, refined] = init.residuals;
        ordered &= relaxed <= refined && refined <= rounded;
        parts.push(format!(
            "{name}: relaxed {relaxed:.4e} <= refined {refined:.4e} <= rounded {rounded:.4e} (M = {})",
            init.config.particles.len()
        ));
    }
    let (sd, st) = synthetic();
    let init = initialize(&sd, &st, &PsoOptions::default(), 0, [80.0, 80.0], Bounds::default()).unwrap();
    let exact = init.residuals[2] == 0.0;
    parts.push(format!(
        "synthetic: refined residual {:e}, counts {:?}",
        init.residuals[2], init.refined.counts
    ));
    Check {
        pass: ordered && exact && ds.dropped.is_empty(),
        detail: format!("{} dataset entries; {}", ds.len(), parts.join("; ")),
    }
}

fn optimization_loop() -> Check {
    let scene = Scene::default();
    let arc = MeasurementArc::default();
    let grid = WavelengthGrid::new(150.0, 550.0, 50).unwrap();
    let opts = SolverOptions::default();
    let positions = [(-40.0, -40.0), (40.0, -40.0), (-40.0, 40.0), (40.0, 40.0)];
    let place = |shapes: [(f64, f64, f64); 4]| {
        DesignConfig::new(
            shapes
                .iter()
                .zip(positions)
                .map(|(&(a, b, t), (x1, x2))| EllipseParams::new(a, b, t, x1, x2).unwrap())
                .collect(),
        )
    };
    // Target: the spectrum of a nearby design, so J = 0 is attainable.
    let truth = place([(12.0, 6.0, 0.3), (10.0, 3.0, 1.2), (14.0, 9.0, 2.0), (11.0, 4.0, 0.8)]);
    let initial = place([(12.5, 5.7, 0.45), (10.5, 2.7, 1.05), (14.5, 8.7, 2.15), (11.5, 3.7, 0.65)]);
    let target = spectrum(&DesignCache::new(&truth, &opts).unwrap(), &scene, &arc, &grid)
        .unwrap()
        .absorptance();
    let problem = Problem {
        scene: &scene,
        arc: &arc,
        grid: &grid,
        target: &target,
        opts: &opts,
    };
    let bounds = Bounds::default();
    let mut feasible = true;
    let last = run(
        &problem,
        &initial,
        &OptimizerOptions {
            step_size: 0.2,
            iterations: 100,
            ..OptimizerOptions::default()
        },
        |s| feasible &= s.config.particles.iter().all(|p| bounds.contains(p)),
    )
    .unwrap();
    let (j0, jn) = (last.history[0].objective, last.objective);
    Check {
        pass: jn <= 0.5 * j0 && feasible && last.history.len() == 101,
        detail: format!(
            "J0 {j0:.4e}, J100 {jn:.4e} ({:.1}% of J0), all iterates feasible: {feasible}",
            100.0 * jn / j0
        ),
    }
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_ellipsorb"))
        .args(args)
        .output()
        .unwrap();
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
}

fn write_json(path: &Path, value: serde_json::Value) {
    fs::write(path, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
}

/// Runs sweep, validate, dataset, init and optimize into `out`.
fn pipeline(cfg: &Path, out: &Path) {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    for cmd in ["sweep", "validate", "dataset", "init", "optimize"] {
        let dir = out.join(cmd);
        run_cli(&[cmd, "--config", &s(&cfg.join(format!("{cmd}.json"))), "--out", &s(&dir), "--seed", "7"]);
    }
}

fn determinism() -> Check {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("configs");
    fs::create_dir_all(&cfg).unwrap();
    let physics = json!({ "wavelengths": { "lambda_min": 200.0, "lambda_max": 500.0, "count": 6 } });
    let pair = json!([
        { "a": 10.0, "b": 4.0, "theta": 0.3, "x1": -40.0, "x2": 0.0 },
        { "a": 12.0, "b": 7.0, "theta": 1.2, "x1": 40.0, "x2": 0.0 }
    ]);
    write_json(
        &cfg.join("sweep.json"),
        json!({ "physics": physics, "variants": [{ "name": "pair", "particles": pair }] }),
    );
    write_json(
        &cfg.join("validate.json"),
        json!({
            "physics": physics,
            "nystrom_nodes": 64,
            "random_variants": [{ "name": "rand", "count": 2 }]
        }),
    );
    write_json(
        &cfg.join("dataset.json"),
        json!({
            "physics": physics,
            "dataset": { "a": 10.0, "b": { "min": 2.0, "max": 8.0, "count": 3 },
                         "theta": { "min": 0.0, "max": 1.5, "count": 2 } }
        }),
    );
    let dataset_dir = root.path().join("out_a").join("dataset");
    write_json(
        &cfg.join("init.json"),
        json!({
            "dataset": dataset_dir,
            "target": { "kind": "constant", "value": 0.05 },
            "pso": { "iterations": 20, "swarm_size": 8 }
        }),
    );
    write_json(
        &cfg.join("optimize.json"),
        json!({
            "physics": physics,
            "initial": { "particles": pair },
            "target": { "kind": "constant", "value": 0.3 },
            "optimizer": { "iterations": 2 }
        }),
    );
    let (a, b) = (root.path().join("out_a"), root.path().join("out_b"));
    pipeline(&cfg, &a);
    pipeline(&cfg, &b);

    let mut files = 0;
    let mut differing = Vec::new();
    for cmd in ["sweep", "validate", "dataset", "init", "optimize"] {
        let mut names: Vec<_> = fs::read_dir(a.join(cmd))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            files += 1;
            let x = fs::read(a.join(cmd).join(&name)).unwrap();
            let y = fs::read(b.join(cmd).join(&name)).unwrap_or_default();
            if x != y {
                differing.push(format!("{cmd}/{}", name.to_string_lossy()));
            }
        }
    }
    Check {
        pass: differing.is_empty() && files > 0,
        detail: format!("{files} output files compared across two runs, differing: {differing:?}"),
    }
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 9] = [
        ("zero-contrast null test", zero_contrast),
        ("spectral identities", spectral_identities),
        ("solver cross-validation", cross_validation),
        ("energy-flow asymptotics", energy_asymptotics),
        ("physics phenomenology", phenomenology),
        ("gradient correctness", gradient),
        ("initializer chain", initializer_chain),
        ("optimization loop", optimization_loop),
        ("determinism", determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let c = check();
        let known = KNOWN_FAILURES.contains(&name);
        let verdict = match (c.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{verdict}: {name} [{:.1} s]", start.elapsed().as_secs_f64());
        println!("    {}", c.detail);
        if !c.pass && !known {
            unexpected.push(name);
        }
        if c.pass && known {
            println!("    note: listed as a known failure but passed");
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
