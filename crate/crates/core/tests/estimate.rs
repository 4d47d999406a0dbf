use spacelike_core::error::Error;
use spacelike_core::estimate::*;
use spacelike_core::geometry::{induced_metric, shape_and_mean_curvature, SpacelikeGraph, DEFAULT_SLACK};
use spacelike_core::grid::GridDomain;
use spacelike_core::solver::{solve, DirichletProblem, SolverConfig};

fn maximal_bump(n: usize) -> SpacelikeGraph {
    let d = GridDomain::centered_cube(2, 1.0, n).unwrap();
    let p = DirichletProblem::from_fn(
        d,
        |x| 0.25 * x[0] - 0.1 * x[1] + 0.3 * (-(x[0] - 1.0).powi(2) - x[1] * x[1]).exp(),
        0.0,
    )
    .unwrap();
    let s = solve(&p, &SolverConfig::default()).unwrap();
    assert!(s.converged());
    s.graph().unwrap()
}

#[test]
fn superharmonic_comparison_from_nonnegative_density() {
    let g = maximal_bump(33);
    let d = g.domain().clone();
    let metric = induced_metric(&g).unwrap();
    let rho = d.sample(|x| 1.0 + x[0] * x[0]);
    let cmp = ComparisonFn::from_superharmonic(&metric, &rho, &vec![2.0; d.len()]).unwrap();
    let rep = superharmonic_check(&cmp, &metric);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.max_certificate < 0.0);
    let c = superharmonic_check(&ComparisonFn::constant(&d, -1.0), &metric);
    assert!(c.pass && c.max_certificate == 0.0);
}

#[test]
fn key_inequality_and_vanishing_chain_on_maximal_graph() {
    let g = maximal_bump(65);
    let d = g.domain().clone();
    let samples = lattice_samples(&d, -0.5625, 0.125, 10).unwrap();
    let gc = ComparisonFn::constant(&d, 0.0);
    let key = key_inequality_check(&g, &gc, 0.25, &samples).unwrap();
    assert!(key.pass(), "{:e}", key.min_key_value);
    assert_eq!(key.epsilon, 0.125);
    let van = mean_curvature_vanishing_check(&g, &gc, 0.25, &samples).unwrap();
    assert!(van.pass());

    let metric = induced_metric(&g).unwrap();
    let field = ComparisonFn::from_superharmonic(&metric, &vec![0.5; d.len()], &vec![2.0; d.len()]).unwrap();
    let key = key_inequality_check(&g, &field, 0.25, &samples).unwrap();
    assert!(key.pass());
}

#[test]
fn samples_must_avoid_the_boundary() {
    let d = GridDomain::centered_cube(2, 1.0, 17).unwrap();
    let g = SpacelikeGraph::from_fn(d.clone(), |x| 0.1 * x[0], DEFAULT_SLACK).unwrap();
    let near = d.neighbor(0, 0, 1).unwrap();
    assert!(matches!(bochner_check(&g, &[near]), Err(Error::Domain(_))));
}

#[test]
fn bochner_inequalities_hold_on_cmc_graph() {
    let d = GridDomain::centered_cube(2, 1.0, 65).unwrap();
    let p = DirichletProblem::from_fn(d.clone(), |x| 0.2 * x[0] + 0.1 * (2.0 * x[1]).sin(), 0.5).unwrap();
    let s = solve(&p, &SolverConfig::default()).unwrap();
    let g = s.graph().unwrap();
    let rep = bochner_check(&g, &default_samples(&d, 100)).unwrap();
    assert!(rep.pass(), "max violation {:e}", rep.max_violation());
    assert!(rep.k > 0.0);
    assert_eq!(rep.samples.len(), 100);
}

#[test]
fn gradient_estimate_on_plane_and_horoball_failure() {
    let d = GridDomain::centered_cube(2, 2.0, 33).unwrap();
    let plane = SpacelikeGraph::from_fn(d.clone(), |x| 0.5 * x[0], DEFAULT_SLACK).unwrap();
    let g = ComparisonFn::constant(&d, 0.0);
    let r = gradient_estimate_report(&plane, d.center_node(), 1.5, &g, 0.25).unwrap();
    assert!(r.sup_phi < 1e-12 && r.k == 0.0);
    // The Gauss image of the tilted plane sits at height 1/(cosh s + sinh s) < 1.
    let e = gradient_estimate_report(&plane, d.center_node(), 1.5, &g, 1.0);
    assert!(matches!(e, Err(Error::HoroballViolation { .. })));
    let e = gradient_estimate_report(&plane, d.center_node(), 2.5, &g, 0.25);
    assert!(matches!(e, Err(Error::DomainTooSmall { .. })));
}

#[test]
fn scalar_liouville_linear_function() {
    let d = GridDomain::centered_cube(2, 1.0, 33).unwrap();
    let flat = SpacelikeGraph::from_fn(d.clone(), |_| 0.0, DEFAULT_SLACK).unwrap();
    let geo = shape_and_mean_curvature(&flat).unwrap();
    let boundary = d.sample(|x| x[0] + 10.0);
    let g = ComparisonFn::constant(&d, 0.0);
    let r = scalar_liouville_check(&geo, &boundary, &g, d.center_node(), 0.75).unwrap();
    assert_eq!(r.gap_shift, 0.0);
    for (i, &ratio) in r.ratio.iter().enumerate() {
        if ratio.is_nan() {
            continue;
        }
        let want = 1.0 / (d.coords(i)[0] + 10.0);
        assert!((ratio - want).abs() <= 0.01 * want);
    }
}

#[test]
fn rigidity_trend_decays() {
    let family = PlaneBump::default();
    let t = hyperplane_rigidity_trend(&family, &[2.0, 4.0], 0.0, 0.25, &SolverConfig::default()).unwrap();
    assert!(t.failure.is_none());
    assert_eq!(t.rows.len(), 2);
    assert!(t.decreasing && t.max_ratio < 0.7, "{t:?}");
    let flat = PlaneBump::plane(vec![0.2, 0.1]);
    let t = hyperplane_rigidity_trend(&flat, &[2.0, 4.0], 0.0, 0.25, &SolverConfig::default()).unwrap();
    assert!(t.rows.iter().all(|r| r.sup_h <= 1e-10));
}
