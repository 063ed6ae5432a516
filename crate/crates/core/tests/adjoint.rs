use ellipsorb::adjoint::*;
use ellipsorb::design::*;
use ellipsorb::forward::*;
use ellipsorb::geometry::*;
use ellipsorb::nystrom::*;
use ellipsorb::observables::*;
use num_complex::Complex64;
use std::f64::consts::PI;

fn cache_for(particles: &[EllipseParams]) -> DesignCache {
    DesignCache::from_params(particles, &SolverOptions::default()).unwrap()
}

fn relative_l2(a: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    let (mut err, mut norm) = (0.0, 0.0);
    for (x, y) in a {
        err += (x - y).norm_sqr();
        norm += y.norm_sqr();
    }
    (err / norm).sqrt()
}

#[test]
fn absorptance_density_is_the_derivative_of_the_absorptance() {
    let scene = Scene {
        incident_angle: 0.1,
        ..Scene::default()
    };
    let arc = MeasurementArc::default();
    let cache = cache_for(&[
        EllipseParams::new(10.0, 4.0, 0.3, -20.0, 0.0).unwrap(),
        EllipseParams::new(12.0, 7.0, 1.0, 20.0, 0.0).unwrap(),
    ]);
    let eval = Evaluator::new(&cache, &scene, &arc);
    let sol = forward(&cache, &scene, 340.0).unwrap();
    let n = cache.basis_size();
    let w = cache.quad_weight();
    let trace = ExteriorTrace::new(&cache, &sol);
    let h_arc = eval.h_arc(&trace);

    // A perturbation of the exterior coefficients and its nodal values.
    let delta: Vec<Complex64> = (0..cache.block())
        .map(|i| Complex64::new((0.3 * i as f64).sin(), (0.7 * i as f64).cos()) * 1e-3)
        .collect();
    let mut predicted = 0.0;
    for (m, part) in cache.particles.iter().enumerate() {
        let values = part.trig_sum_quad(&delta[m * n..(m + 1) * n]);
        let pts: Vec<_> = part.quad.iter().map(|nd| (nd.x, nd.speed)).collect();
        let g = absorptance_density_at(&eval, trace.k, &h_arc, &pts);
        for ((v, gq), nd) in values.iter().zip(&g).zip(&part.quad) {
            predicted += (v / nd.speed * gq.conj() * w).re;
        }
    }

    let shifted = |sign: f64| {
        let mut s = sol.clone();
        for (c, d) in s.exterior.iter_mut().zip(&delta) {
            *c += d * sign;
        }
        eval.absorptance(&ExteriorTrace::new(&cache, &s))
    };
    // A is quadratic in the density, so the central difference is exact.
    let fd = (shifted(1.0) - shifted(-1.0)) / 2.0;
    assert!((fd - predicted).abs() <= 1e-10 * fd.abs(), "fd {fd:.6e} predicted {predicted:.6e}");
}

#[test]
fn adjoint_solution_satisfies_its_system() {
    let scene = Scene::default();
    let arc = MeasurementArc::default();
    let cache = cache_for(&[EllipseParams::new(10.0, 5.0, 0.9, 0.0, 0.0).unwrap()]);
    let eval = Evaluator::new(&cache, &scene, &arc);
    let (fwd, adj) = assemble_both(&cache, &scene, 300.0).unwrap();
    let sol = solve_forward(&fwd).unwrap();
    let rhs = adjoint_rhs(&cache, &eval, &sol);
    assert!(rhs.rows(0, cache.block()).iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    let a = solve_adjoint(&adj, &rhs).unwrap();
    assert!(a.residual <= 1e-10, "residual {:.2e}", a.residual);
    assert_eq!(adj.matrix().nrows(), 2 * cache.block());
}

#[test]
fn reduced_basis_agrees_with_nystrom_on_a_moderate_ellipse() {
    let scene = Scene::default();
    let arc = MeasurementArc::default();
    let p = EllipseParams::new(10.0, 6.0, PI / 4.0, 0.0, 0.0).unwrap();
    let cache = cache_for(&[p]);
    let eval = Evaluator::new(&cache, &scene, &arc);
    let grid = NystromGrid::new(&[p], 200).unwrap();
    for lambda in [180.0, 420.0] {
        let (fwd, adj_sys) = assemble_both(&cache, &scene, lambda).unwrap();
        let sol = solve_forward(&fwd).unwrap();
        let q_ext = eval.cross_sections(&ExteriorTrace::new(&cache, &sol)).0;
        let ns = solve_forward_nystrom(&grid, &scene, lambda).unwrap();
        let qn = ns.q_ext(&grid, &scene);
        assert!((q_ext - qn).abs() <= 1e-6 * qn.abs(), "Qe {q_ext} vs {qn}");

        let adj = solve_adjoint(&adj_sys, &adjoint_rhs(&cache, &eval, &sol)).unwrap();
        let an = solve_adjoint_nystrom(&grid, &scene, lambda, &adjoint_rhs_nystrom(&grid, &eval, &ns)).unwrap();
        let rec: Vec<_> = grid.flat().map(|nd| adj.reconstruct(&cache, 0, nd.t)).collect();
        let ep = relative_l2(rec.iter().zip(an.p.iter()).map(|(r, n)| (r.0, *n)));
        let eq = relative_l2(rec.iter().zip(an.q.iter()).map(|(r, n)| (r.1, *n)));
        assert!(ep <= 1e-3 && eq <= 1e-3, "p {ep:.2e} q {eq:.2e}");
    }
}

#[test]
fn nystrom_rejects_bad_grids() {
    let p = EllipseParams::new(10.0, 6.0, 0.0, 0.0, 0.0).unwrap();
    assert!(NystromGrid::new(&[p], 7).is_err());
    assert!(NystromGrid::new(&[], 64).is_err());
    let grid = NystromGrid::new(&[p], 64).unwrap();
    assert!(solve_adjoint_nystrom(&grid, &Scene::default(), 300.0, &[Complex64::new(0.0, 0.0); 3]).is_err());
}
