use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spacelike_core::error::Error;
use spacelike_core::hyperbolic::*;

fn random_hyperboloid(rng: &mut ChaCha8Rng, m: usize) -> ModelPoint {
    let spatial: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let x0 = (1.0 + spatial.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let mut c = vec![x0];
    c.extend(spatial);
    ModelPoint::hyperboloid(c).unwrap()
}

fn upper_half_distance(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len();
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    (1.0 + d2 / (2.0 * p[m - 1] * q[m - 1])).acosh()
}

fn ball_distance(p: &[f64], q: &[f64]) -> f64 {
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    let np: f64 = p.iter().map(|v| v * v).sum();
    let nq: f64 = q.iter().map(|v| v * v).sum();
    (1.0 + 2.0 * d2 / ((1.0 - np) * (1.0 - nq))).acosh()
}

#[test]
fn round_trips_through_every_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [2, 3] {
        for _ in 0..100 {
            let p = random_hyperboloid(&mut rng, m);
            for via in [Model::UpperHalf, Model::Ball] {
                let back = convert(&convert(&p, via).unwrap(), Model::Hyperboloid).unwrap();
                let err = p.coords().iter().zip(back.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-10 * p.coords()[0], "{via}: {err:e}");
            }
        }
    }
}

#[test]
fn distance_agrees_with_model_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let p = random_hyperboloid(&mut rng, 2);
        let q = random_hyperboloid(&mut rng, 2);
        let d = hyp_distance(&p, &q).unwrap();
        let pu = convert(&p, Model::UpperHalf).unwrap();
        let qu = convert(&q, Model::UpperHalf).unwrap();
        let pb = convert(&p, Model::Ball).unwrap();
        let qb = convert(&q, Model::Ball).unwrap();
        assert!((upper_half_distance(pu.coords(), qu.coords()) - d).abs() <= 1e-9 * d.max(1.0));
        assert!((ball_distance(pb.coords(), qb.coords()) - d).abs() <= 1e-9 * d.max(1.0));
        assert!((hyp_distance(&pu, &qb).unwrap() - d).abs() <= 1e-9 * d.max(1.0));
    }
}

#[test]
fn vertical_segment_length() {
    let p = ModelPoint::upper_half(vec![0.0, 1.0]).unwrap();
    let q = ModelPoint::upper_half(vec![0.0, std::f64::consts::E]).unwrap();
    assert!((hyp_distance(&p, &q).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn busemann_values() {
    let e = std::f64::consts::E;
    let ray1 = BusemannRay::new(1.0).unwrap();
    let ray2 = BusemannRay::new(2.0).unwrap();
    let at = |x: f64, z: f64| ModelPoint::upper_half(vec![x, z]).unwrap();
    assert_eq!(busemann_eval(&at(0.4, 2.0), &ray2).unwrap(), 0.0);
    assert!((busemann_eval(&at(0.0, e), &ray1).unwrap() - 1.0).abs() < 1e-15);
    assert!((busemann_eval(&at(0.0, 2.0 * e * e), &ray2).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn limit_approximation_on_and_off_the_ray() {
    let ray = BusemannRay::new(1.0).unwrap();
    let s = 1.5f64;
    let on = ModelPoint::upper_half(vec![0.0, s.exp()]).unwrap();
    for t in [1.5, 3.0, 10.0] {
        assert!((busemann_limit_approx(&on, &ray, t).unwrap() - s).abs() < 1e-12);
    }
    let z = ModelPoint::upper_half(vec![1.0, 1.0]).unwrap();
    let exact = busemann_eval(&z, &ray).unwrap();
    let errs: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&t| (busemann_limit_approx(&z, &ray, t).unwrap() - exact).abs())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    assert!(errs[2] <= 1e-6);
    assert!(busemann_limit_approx(&z, &ray, 0.0).is_err());
}

#[test]
fn horoball_membership_is_strict() {
    let h = HoroballSpec::new(1.0).unwrap();
    assert!(horoball_contains(&ModelPoint::upper_half(vec![0.0, 2.0]).unwrap(), &h).unwrap());
    assert!(!horoball_contains(&ModelPoint::upper_half(vec![0.0, 1.0]).unwrap(), &h).unwrap());
    let half = HoroballSpec::new(0.5).unwrap();
    assert!(horoball_contains(&ModelPoint::basepoint(2), &half).unwrap());
    assert!(matches!(HoroballSpec::new(0.0), Err(Error::Domain(_))));
}

#[test]
fn busemann_hessian_identity() {
    let ray = BusemannRay::new(1.0).unwrap();
    let z = ModelPoint::upper_half(vec![0.0, 1.0]).unwrap();
    let check = busemann_hessian_check(&z, &ray).unwrap();
    assert!(check.residual <= 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let z = ModelPoint::upper_half(vec![
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.05..5.0),
        ])
        .unwrap();
        let check = busemann_hessian_check(&z, &ray).unwrap();
        assert!(check.residual <= 1e-9);
        assert!((check.gradient_norm - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn lorentz_inner_examples() {
    let c = 1f64.cosh();
    assert_eq!(lorentz_inner(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), -1.0);
    assert_eq!(lorentz_inner(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 0.0);
    assert!((lorentz_inner(&[c, 1f64.sinh(), 0.0], &[1.0, 0.0, 0.0]).unwrap() + c).abs() < 1e-15);
}
