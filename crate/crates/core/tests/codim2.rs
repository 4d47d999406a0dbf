use spacelike_core::codim2::*;
use spacelike_core::error::Error;
use spacelike_core::grid::GridDomain;

fn grid() -> GridDomain {
    GridDomain::centered_cube(2, 1.0, 17).unwrap()
}

#[test]
fn equivalence_holds_on_random_fields() {
    for seed in 0..20 {
        let f = SecondFormField2D::random_smooth(grid(), seed).unwrap();
        let r = equivalence_check(&f, IDENTITY_TOL);
        assert!(r.holds, "seed {seed}: {r:?}");
        assert!(r.max_parallel_residual > 1e-3, "random fields should not be parallel");
        assert_eq!(r.determinant.abs(), 4.0);
    }
}

#[test]
fn harmonicity_matches_parallel_combinations() {
    let f = SecondFormField2D::random_smooth(grid(), 42).unwrap();
    let r = parallel_h_residual(&f);
    let g1 = gamma1_harmonic_residual(&f);
    let g2 = gamma2_harmonic_residual(&f);
    for i in 0..f.domain().len() {
        assert!((g1[0][i] - (r[0][i] + r[3][i])).abs() <= 1e-12);
        assert!((g1[1][i] - (r[2][i] - r[1][i])).abs() <= 1e-12);
        assert!((g2[0][i] - (r[0][i] - r[3][i])).abs() <= 1e-12);
        assert!((g2[1][i] - (r[2][i] + r[1][i])).abs() <= 1e-12);
    }
}

#[test]
fn stress_function_fields_are_parallel_and_harmonic() {
    let d = grid();
    let psi3 = d.sample(|x| (1.3 * x[0]).sin() * (0.7 * x[1]).cosh() + 0.2 * x[0].powi(3) * x[1]);
    let psi4 = d.sample(|x| (x[0] - 0.5 * x[1]).cos() + 0.1 * x[0] * x[1] * x[1]);
    let f = SecondFormField2D::from_potentials(d, &psi3, &psi4).unwrap();
    for r in parallel_h_residual(&f) {
        assert!(r.iter().all(|v| v.abs() <= 1e-12), "{:e}", r.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    let rep = equivalence_check(&f, IDENTITY_TOL);
    assert!(rep.max_gamma1_residual <= 1e-12 && rep.max_gamma2_residual <= 1e-12);
    assert!(rep.holds);
}

fn adapted_constant(l: f64, mu: f64, rho: f64) -> SecondFormField2D {
    // h4 = diag(rho, -rho) keeps H along e3.
    SecondFormField2D::from_fn(grid(), |_| [l, 0.0, mu, rho, 0.0, -rho]).unwrap()
}

#[test]
fn adapted_fields_are_left_alone() {
    let f = adapted_constant(1.5, 0.5, 0.3);
    let hv = MeanCurvatureVector2D::from_field(&f);
    let a = adapted_frame(&f, &hv).unwrap();
    assert!(a.normal_angle.iter().all(|&t| t == 0.0));
    assert!(a.tangent_angle.iter().all(|&t| t == 0.0));
    assert_eq!(a.report.residual, 0.0);
    assert_eq!(a.field, f);
}

#[test]
fn adapted_frame_undoes_normal_rotation() {
    let f = adapted_constant(1.5, 0.5, 0.3);
    let theta = 0.7f64;
    let (s, c) = theta.sin_cos();
    // e3 = c e3' - s e4', e4 = s e3' + c e4' in terms of the rotated frame.
    let rotated = SecondFormField2D::from_fn(grid(), |_| {
        [c * 1.5, 0.0, c * 0.5, s * 1.5, 0.0, s * 0.5]
    })
    .unwrap();
    let rotated = rotated
        .combine(1.0, &SecondFormField2D::from_fn(grid(), |_| [-s * 0.3, 0.0, s * 0.3, c * 0.3, 0.0, -c * 0.3]).unwrap(), 1.0)
        .unwrap();
    let hv = MeanCurvatureVector2D::from_field(&rotated);
    let a = adapted_frame(&rotated, &hv).unwrap();
    for (got, want) in a.field.channels().iter().zip(f.channels()) {
        assert!(got.iter().zip(want).all(|(x, y)| (x - y).abs() <= 1e-12));
    }
    assert!(a.normal_angle.iter().all(|&t| (t - theta).abs() <= 1e-12));
}

#[test]
fn adapted_frame_diagonalizes_tangent_rotation() {
    let (l, mu, rho) = (2.0, 0.5, 0.4);
    let phi = 0.3f64;
    let (s, c) = phi.sin_cos();
    // R diag(a, b) R^T with R the rotation by phi.
    let rot = |a: f64, b: f64| [c * c * a + s * s * b, s * c * (a - b), s * s * a + c * c * b];
    let p = rot(l, mu);
    let q = rot(rho, -rho);
    let f = SecondFormField2D::from_fn(grid(), |_| [p[0], p[1], p[2], q[0], q[1], q[2]]).unwrap();
    let a = adapted_frame(&f, &MeanCurvatureVector2D::from_field(&f)).unwrap();
    assert!(a.report.residual <= 1e-10);
    assert!(a.report.max_h4_trace <= 1e-12);
    let idx = f.domain().center_node();
    let h3 = a.field.form_at(3, idx);
    let h4 = a.field.form_at(4, idx);
    assert!((h3[0][0] - l).abs() < 1e-12 && (h3[1][1] - mu).abs() < 1e-12);
    assert!((h4[0][0] - rho).abs() < 1e-12 && (h4[1][1] + rho).abs() < 1e-12);
    let split = split_differential(&a.field);
    assert!((split.e1[idx] - split.e2[idx]).abs() < 1e-12);
}

#[test]
fn adapted_diagonal_energies_match() {
    let (l, mu, rho, sigma) = (0.9, -1.1, 0.25, 0.6);
    let f = SecondFormField2D::from_fn(grid(), |_| [l, 0.0, mu, rho, 0.0, sigma]).unwrap();
    let s = split_differential(&f);
    let e = 0.5 * (l * l + mu * mu + rho * rho + sigma * sigma);
    assert_eq!(s.e1, s.e2);
    assert!(s.e1.iter().all(|&v| (v - e).abs() <= 1e-15));
    assert!(s.total_energy().iter().zip(&s.e1).all(|(t, v)| *t == 2.0 * v));
    let idx = 0;
    assert_eq!(
        [s.a[0][idx], s.a[1][idx], s.a[2][idx], s.a[3][idx]],
        [l, sigma, rho, -mu]
    );
}

#[test]
fn zero_mean_curvature_is_degenerate() {
    let f = SecondFormField2D::from_fn(grid(), |_| [1.0, 0.2, -1.0, 0.5, 0.0, -0.5]).unwrap();
    let hv = MeanCurvatureVector2D::from_field(&f);
    assert!(matches!(adapted_frame(&f, &hv), Err(Error::DegenerateFrame { node: 0 })));
}

#[test]
fn codazzi_defect_reported() {
    let d = grid();
    let psi = d.sample(|x| (x[0] * x[1]).sin());
    let f = SecondFormField2D::from_potentials(d.clone(), &psi, &psi).unwrap();
    // A Hessian-type field is symmetric in all indices, the stress field is not.
    let hess = SecondFormField2D::from_fn(d, |x| {
        let (a, b) = (x[0], x[1]);
        [2.0 * b, 2.0 * a, 0.0, 0.0, 0.0, 0.0]
    })
    .unwrap();
    assert!(codazzi_defect(&hess).iter().all(|v| v.abs() < 1e-12));
    assert!(codazzi_defect(&f).iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn non_planar_grid_rejected() {
    let d = GridDomain::centered_cube(3, 1.0, 5).unwrap();
    let z = vec![0.0; d.len()];
    let r = SecondFormField2D::new(d, [z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z]);
    assert!(matches!(r, Err(Error::Dimension { expected: 2, got: 3 })));
}
