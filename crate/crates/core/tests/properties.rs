use proptest::prelude::*;
use spacelike_core::codim2::*;
use spacelike_core::geometry::{cmc_residual, gauss_map, SpacelikeGraph, DEFAULT_SLACK};
use spacelike_core::grid::GridDomain;
use spacelike_core::hyperbolic::*;

fn grid() -> GridDomain {
    GridDomain::centered_cube(2, 1.0, 9).unwrap()
}

/// Quadratic polynomial fields: six channels with six coefficients each.
fn poly_field(c: &[f64]) -> SecondFormField2D {
    SecondFormField2D::from_fn(grid(), |x| {
        std::array::from_fn(|k| {
            let a = &c[6 * k..6 * k + 6];
            a[0] + a[1] * x[0] + a[2] * x[1] + a[3] * x[0] * x[0] + a[4] * x[0] * x[1] + a[5] * x[1] * x[1]
        })
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_round_trip(x in -4.0f64..4.0, y in -4.0f64..4.0, z in -4.0f64..4.0) {
        let x0 = (1.0 + x * x + y * y + z * z).sqrt();
        let p = ModelPoint::hyperboloid(vec![x0, x, y, z]).unwrap();
        for model in [Model::UpperHalf, Model::Ball] {
            let back = convert(&convert(&p, model).unwrap(), Model::Hyperboloid).unwrap();
            for (a, b) in p.coords().iter().zip(back.coords()) {
                prop_assert!((a - b).abs() <= 1e-10 * x0);
            }
        }
    }

    #[test]
    fn busemann_limit_is_monotone(x in -3.0f64..3.0, h in 0.05f64..5.0, c in 0.1f64..3.0) {
        let z = ModelPoint::upper_half(vec![x, h]).unwrap();
        let ray = BusemannRay::new(c).unwrap();
        let exact = busemann_eval(&z, &ray).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = busemann_limit_approx(&z, &ray, t).unwrap();
            prop_assert!(v >= prev - 1e-12);
            prop_assert!(v <= exact + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn affine_graphs_are_exact(a in -0.63f64..0.63, b in -0.63f64..0.63, c in -5.0f64..5.0) {
        let d = grid();
        let g = SpacelikeGraph::from_fn(d.clone(), |x| a * x[0] + b * x[1] + c, DEFAULT_SLACK).unwrap();
        prop_assert!(cmc_residual(&g, 0.0).unwrap().iter().all(|v| v.abs() <= 1e-12));
        let gauss = gauss_map(&g).unwrap();
        let first = gauss.nu_at(0);
        for idx in 0..d.len() {
            for (p, q) in gauss.nu_at(idx).iter().zip(&first) {
                prop_assert!((p - q).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn equivalence_on_polynomial_fields(c in prop::collection::vec(-3.0f64..3.0, 36)) {
        let f = poly_field(&c);
        let r = equivalence_check(&f, IDENTITY_TOL);
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn split_is_linear(
        c in prop::collection::vec(-2.0f64..2.0, 36),
        d in prop::collection::vec(-2.0f64..2.0, 36),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let f = poly_field(&c);
        let g = poly_field(&d);
        let mix = split_differential(&f.combine(alpha, &g, beta).unwrap());
        let sf = split_differential(&f);
        let sg = split_differential(&g);
        for k in 0..4 {
            for i in 0..f.domain().len() {
                let want_a = alpha * sf.a[k][i] + beta * sg.a[k][i];
                let want_b = alpha * sf.b[k][i] + beta * sg.b[k][i];
                prop_assert!((mix.a[k][i] - want_a).abs() <= 1e-12 * (1.0 + want_a.abs()) * 10.0);
                prop_assert!((mix.b[k][i] - want_b).abs() <= 1e-12 * (1.0 + want_b.abs()) * 10.0);
            }
        }
        prop_assert!(mix.e1.iter().chain(&mix.e2).all(|&e| e >= 0.0));
    }

    #[test]
    fn adapted_frames_balance_energies(
        l in 0.1f64..3.0, mu in -3.0f64..3.0, rho in -2.0f64..2.0,
        theta in -3.0f64..3.0, phi in -1.5f64..1.5,
    ) {
        // Diagonal adapted data, rotated in the tangent and normal planes.
        let (s, c) = phi.sin_cos();
        let rot = |a: f64, b: f64| [c * c * a + s * s * b, s * c * (a - b), s * s * a + c * c * b];
        let p = rot(l, mu);
        let q = rot(rho, -rho);
        let (st, ct) = theta.sin_cos();
        let f = SecondFormField2D::from_fn(grid(), |_| {
            std::array::from_fn(|k| {
                if k < 3 { ct * p[k] - st * q[k] } else { st * p[k - 3] + ct * q[k - 3] }
            })
        })
        .unwrap();
        prop_assume!(l + mu > 0.05);
        let a = adapted_frame(&f, &MeanCurvatureVector2D::from_field(&f)).unwrap();
        prop_assert!(a.report.residual <= 1e-10);
        let split = split_differential(&a.field);
        for (e1, e2) in split.e1.iter().zip(&split.e2) {
            prop_assert!((e1 - e2).abs() <= 1e-10 * (1.0 + e1));
        }
    }
}
