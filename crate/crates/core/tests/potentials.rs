use parashoot_core::{Centre, Error, ProblemConfig, Vec2};
use proptest::prelude::*;

fn cfg(alpha: f64, centres: &[(f64, f64, f64)]) -> ProblemConfig {
    ProblemConfig::new(alpha, centres.iter().map(|&(x, y, m)| Centre::new(Vec2::new(x, y), m)).collect()).unwrap()
}

fn three() -> ProblemConfig {
    cfg(1.3, &[(-0.7, 0.1, 1.0), (0.6, 0.4, 0.5), (0.1, -0.8, 2.0)])
}

fn fd_gradient(c: &ProblemConfig, x: Vec2, h: f64) -> Vec2 {
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    Vec2::new(
        (c.potential(x + dx).unwrap() - c.potential(x - dx).unwrap()) / (2.0 * h),
        (c.potential(x + dy).unwrap() - c.potential(x - dy).unwrap()) / (2.0 * h),
    )
}

#[test]
fn hand_values() {
    assert!((cfg(1.5, &[(0.0, 0.0, 2.0)]).potential(Vec2::new(2.0, 0.0)).unwrap() - 0.471_404_520_791_031_7).abs() < 1e-12);
    let g = cfg(1.0, &[(-1.0, 0.0, 1.0), (1.0, 0.0, 1.0)]).gradient(Vec2::new(0.0, 1.0)).unwrap();
    assert!(g.x.abs() < 1e-15);
    assert!((g.y + 2.0 / 2f64.powf(1.5)).abs() < 1e-12);
}

#[test]
fn hessian_matches_gradient_differences() {
    let c = three();
    for x in [Vec2::new(1.2, 0.3), Vec2::new(-0.2, 0.9), Vec2::new(3.0, -4.0)] {
        let h = 1e-5;
        let hess = c.hessian(x).unwrap();
        let gx = (c.gradient(x + Vec2::new(h, 0.0)).unwrap() - c.gradient(x - Vec2::new(h, 0.0)).unwrap()) / (2.0 * h);
        let gy = (c.gradient(x + Vec2::new(0.0, h)).unwrap() - c.gradient(x - Vec2::new(0.0, h)).unwrap()) / (2.0 * h);
        let col0 = hess.mul_vec(Vec2::new(1.0, 0.0));
        let col1 = hess.mul_vec(Vec2::new(0.0, 1.0));
        let scale = col0.norm().max(col1.norm());
        assert!((col0 - gx).norm() / scale < 1e-5);
        assert!((col1 - gy).norm() / scale < 1e-5);
        assert_eq!(col0.y, col1.x);
    }
}

#[test]
fn far_field_decay_is_bounded_along_rays() {
    let c = cfg(1.0, &[(-1.0, 0.0, 1.0), (1.0, 0.0, 1.0)]);
    let k = c.ring_radius();
    let beta = c.decay_beta();
    let mut worst: f64 = 0.0;
    for ray in 0..16 {
        let dir = Vec2::from_angle(ray as f64 * std::f64::consts::TAU / 16.0);
        for j in 0..=40 {
            let r = k * 100f64.powf(j as f64 / 40.0);
            worst = worst.max(c.far_field_remainder(dir * r).unwrap().abs() * r.powf(beta));
        }
    }
    assert!(worst.is_finite() && worst <= c.far_field_constant() * (1.0 + 1e-9));
}

#[test]
fn far_field_inside_disc_is_a_domain_error() {
    let c = cfg(1.0, &[(-1.0, 0.0, 1.0), (1.0, 0.0, 1.0)]);
    assert!(matches!(c.far_field_remainder(Vec2::new(0.5, 0.0)), Err(Error::Domain { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_finite_differences(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let c = three();
        let p = Vec2::new(x, y);
        prop_assume!(c.min_centre_distance(p).0 >= 0.1);
        let g = c.gradient(p).unwrap();
        let fd = fd_gradient(&c, p, 1e-6 * (1.0 + p.norm()));
        prop_assert!((g - fd).norm() <= 1e-6 * g.norm().max(1e-3), "{g:?} vs {fd:?}");
    }

    #[test]
    fn potential_is_positive(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let c = three();
        let p = Vec2::new(x, y);
        prop_assume!(c.min_centre_distance(p).0 > 1e-6);
        prop_assert!(c.potential(p).unwrap() > 0.0);
    }

    #[test]
    fn single_centre_scaling(alpha in 1.0f64..1.99, lambda in 0.1f64..10.0, theta in 0.0f64..6.28, r in 0.1f64..5.0) {
        let c = cfg(alpha, &[(0.0, 0.0, 1.7)]);
        let x = Vec2::from_angle(theta) * r;
        let lhs = c.potential(x * lambda).unwrap();
        let rhs = lambda.powf(-alpha) * c.potential(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn symmetric_axis_gradient_stays_on_axis(y in 0.05f64..5.0) {
        let c = cfg(1.0, &[(-0.5, 0.0, 1.0), (0.5, 0.0, 1.0)]);
        let g = c.gradient(Vec2::new(0.0, y)).unwrap();
        prop_assert!(g.x.abs() <= 1e-15 * g.norm());
    }
}
