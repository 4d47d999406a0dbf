use spacelike_core::geometry::{gauss_map, SpacelikeGraph, DEFAULT_SLACK};
use spacelike_core::grid::GridDomain;
use spacelike_core::solver::{
    convergence_study, exact_hyperboloid, exact_plane, residual_sup, solve, DirichletProblem,
    ExactSolution, SolveStatus, SolverConfig,
};

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn affine_boundary_reproduces_plane() {
    let d = GridDomain::centered_cube(2, 1.0, 17).unwrap();
    let plane = exact_plane(vec![0.3, 0.0], 0.5).unwrap();
    let sol = solve(&plane.problem(d.clone()).unwrap(), &SolverConfig::default()).unwrap();
    assert!(sol.converged());
    assert!(sup_diff(&sol.u, &plane.sample(&d)) < 1e-10);
}

#[test]
fn hyperboloid_boundary_recovered() {
    let d = GridDomain::centered_cube(2, 1.0, 65).unwrap();
    let hyp = exact_hyperboloid(1.0, vec![0.0, 0.0], 0.0).unwrap();
    let sol = solve(&hyp.problem(d.clone()).unwrap(), &SolverConfig::default()).unwrap();
    assert!(sol.converged(), "{:?}", sol.report);
    let h = d.spacing();
    let err = sup_diff(&sol.u, &hyp.sample(&d));
    assert!(err <= 5.0 * h * h, "error {err}");
    assert!(sol.report.residual_sup <= 1e-9);
    assert!(sol.report.max_gradient <= 0.99);
    // accepted steps strictly decrease the residual
    assert!(sol.report.history.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn maximal_graph_with_hyperboloid_boundary() {
    let d = GridDomain::centered_cube(2, 1.0, 33).unwrap();
    let hyp = exact_hyperboloid(1.0, vec![0.0, 0.0], 0.0).unwrap();
    let problem = DirichletProblem::new(d.clone(), hyp.sample(&d), 0.0).unwrap();
    let sol = solve(&problem, &SolverConfig::default()).unwrap();
    assert!(sol.converged());
    assert!(residual_sup(&d, &sol.u, 0.0).unwrap() <= 1e-9);
    assert!(sup_diff(&sol.u, &hyp.sample(&d)) > 1e-2);
}

#[test]
fn deterministic_runs_are_bit_identical() {
    let d = GridDomain::centered_cube(2, 1.0, 25).unwrap();
    let problem = DirichletProblem::from_fn(d, |x| 0.2 * x[0] + 0.3 * (x[1] * 2.0).sin() * 0.3, 0.4).unwrap();
    let a = solve(&problem, &SolverConfig::default()).unwrap();
    let b = solve(&problem, &SolverConfig::default()).unwrap();
    assert!(a.converged());
    assert_eq!(a.u, b.u);
}

#[test]
fn steep_boundary_reports_cap_stall() {
    let d = GridDomain::centered_cube(2, 1.0, 17).unwrap();
    let problem = DirichletProblem::from_fn(d, |x| 1.2 * x[0], 0.0).unwrap();
    let sol = solve(&problem, &SolverConfig::default()).unwrap();
    assert_eq!(sol.report.status, SolveStatus::CapStall);
    assert!(!sol.converged());
}

#[test]
fn plane_gauss_map_is_constant() {
    let d = GridDomain::centered_cube(2, 1.0, 9).unwrap();
    let plane = exact_plane(vec![0.6, 0.0], 1.0).unwrap();
    let graph = SpacelikeGraph::new(d.clone(), plane.sample(&d), DEFAULT_SLACK).unwrap();
    let gauss = gauss_map(&graph).unwrap();
    for idx in 0..d.len() {
        let nu = gauss.nu_at(idx);
        assert!((nu[0] - 1.25).abs() < 1e-12 && (nu[1] - 0.75).abs() < 1e-12 && nu[2].abs() < 1e-12);
    }
    assert!(residual_sup(&d, &plane.sample(&d), 0.0).unwrap() < 1e-12);
}

#[test]
fn hyperboloid_residual_order_two() {
    let hyp = exact_hyperboloid(1.0, vec![0.0, 0.0], 0.0).unwrap();
    let mut sups = Vec::new();
    for n in [65, 129] {
        let d = GridDomain::centered_cube(2, 1.0, n).unwrap();
        sups.push(residual_sup(&d, &hyp.sample(&d), 1.0).unwrap());
    }
    assert!(sups[1] <= sups[0] / 3.0, "{sups:?}");
}

#[test]
fn convergence_study_orders() {
    let cfg = SolverConfig::default();
    let hyp = exact_hyperboloid(1.0, vec![0.0, 0.0], 0.0).unwrap();
    let report = convergence_study(&hyp, 2, 1.0, &[17, 33, 65], &cfg).unwrap();
    assert!(!report.failed && !report.exact);
    let order = report.solution_order.unwrap();
    assert!((order - 2.0).abs() <= 0.3, "{order}");

    let plane = exact_plane(vec![0.2, -0.4], 0.0).unwrap();
    let flat = convergence_study(&plane, 2, 1.0, &[9, 17, 33], &cfg).unwrap();
    assert!(flat.exact);
    assert!(flat.solution_order.is_none());

    assert!(convergence_study(&plane, 2, 1.0, &[9, 17, 30], &cfg).is_err());
}
