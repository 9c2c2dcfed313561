use parashoot_core::entire::self_intersection_check;
use parashoot_core::homotopy::{parity_class, ParityClass};
use parashoot_core::variational::*;
use parashoot_core::{Centre, Error, ProblemConfig, Vec2};
use proptest::prelude::*;

fn pair() -> ProblemConfig {
    ProblemConfig::new(1.0, vec![Centre::new(Vec2::new(-0.5, 0.0), 1.0), Centre::new(Vec2::new(0.5, 0.0), 1.0)]).unwrap()
}

fn pair_with_masses(m: f64) -> ProblemConfig {
    ProblemConfig::new(1.0, vec![Centre::new(Vec2::new(-0.5, 0.0), m), Centre::new(Vec2::new(0.5, 0.0), m)]).unwrap()
}

fn class(bits: &[u8]) -> ParityClass {
    ParityClass::new(bits.to_vec()).unwrap()
}

/// Wavy path from `(0,−5)` to `(0,5)` on a random nonuniform grid.
fn random_path(amps: &[f64], jitter: &[f64]) -> DiscretePath {
    let m = jitter.len() + 1;
    let mut times = vec![-1.0];
    for (k, j) in jitter.iter().enumerate() {
        times.push(-1.0 + 2.0 * (k as f64 + 1.0 + 0.4 * j) / m as f64);
    }
    times.push(1.0);
    let nodes = times
        .iter()
        .map(|&t| {
            let s = 0.5 * (t + 1.0);
            let bump: f64 = amps
                .iter()
                .enumerate()
                .map(|(i, a)| a * (std::f64::consts::PI * (i + 1) as f64 * s).sin())
                .sum();
            Vec2::new(0.2 + bump, -5.0 + 10.0 * s)
        })
        .collect();
    DiscretePath::with_times(nodes, times).unwrap()
}

fn fd_gradient(path: &DiscretePath, cfg: &ProblemConfig) -> Vec<Vec2> {
    let n = path.nodes().len();
    let mut out = vec![Vec2::ZERO; n];
    for k in 1..n - 1 {
        for axis in 0..2 {
            let h = 1e-6;
            let shift = |sign: f64| {
                let mut offs = vec![Vec2::ZERO; n - 2];
                offs[k - 1] = if axis == 0 { Vec2::new(sign * h, 0.0) } else { Vec2::new(0.0, sign * h) };
                maupertuis(&path.perturbed(&offs).unwrap(), cfg).unwrap()
            };
            let d = (shift(1.0) - shift(-1.0)) / (2.0 * h);
            if axis == 0 {
                out[k].x = d;
            } else {
                out[k].y = d;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_central_differences(
        amps in proptest::collection::vec(-0.3f64..0.3, 3),
        jitter in proptest::collection::vec(-1.0f64..1.0, 39),
    ) {
        let cfg = pair();
        let path = random_path(&amps, &jitter);
        prop_assume!(path.nodes().iter().all(|x| cfg.min_centre_distance(*x).0 > 0.05));
        let g = maupertuis_gradient(&path, &cfg).unwrap();
        let fd = fd_gradient(&path, &cfg);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((*a - *b).norm()));
        prop_assert!(err <= 1e-6 * scale, "err {err:e} scale {scale:e}");
        prop_assert_eq!(g[0], Vec2::ZERO);
        prop_assert_eq!(g[g.len() - 1], Vec2::ZERO);
    }

    #[test]
    fn cauchy_schwarz_lower_bound(
        amps in proptest::collection::vec(-1.5f64..1.5, 3),
        jitter in proptest::collection::vec(-1.0f64..1.0, 63),
    ) {
        let cfg = pair();
        let path = random_path(&amps, &jitter);
        prop_assume!(path.nodes().iter().all(|x| cfg.min_centre_distance(*x).0 > 0.05));
        let nodes = path.nodes();
        let a_cs = std::f64::consts::SQRT_2
            * nodes
                .windows(2)
                .map(|w| (w[1] - w[0]).norm() * cfg.potential(w[0].lerp(w[1], 0.5)).unwrap().sqrt())
                .sum::<f64>();
        prop_assert!(maupertuis(&path, &cfg).unwrap() >= 0.25 * a_cs * a_cs);
    }

    #[test]
    fn doubling_the_field_doubles_m(
        amps in proptest::collection::vec(-1.0f64..1.0, 3),
        jitter in proptest::collection::vec(-1.0f64..1.0, 31),
    ) {
        let path = random_path(&amps, &jitter);
        let (one, two) = (pair_with_masses(1.0), pair_with_masses(2.0));
        prop_assume!(path.nodes().iter().all(|x| one.min_centre_distance(*x).0 > 0.05));
        let a = maupertuis(&path, &one).unwrap();
        let b = maupertuis(&path, &two).unwrap();
        prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b);
        let wa = omega_of(&path, &one).unwrap();
        let wb = omega_of(&path, &pair_with_masses(4.0)).unwrap();
        prop_assert!((wb - 0.5 * wa).abs() <= 1e-12 * wa);
    }

    #[test]
    fn reversal_keeps_m(
        amps in proptest::collection::vec(-1.0f64..1.0, 3),
        jitter in proptest::collection::vec(-1.0f64..1.0, 31),
    ) {
        let cfg = pair();
        let path = random_path(&amps, &jitter);
        prop_assume!(path.nodes().iter().all(|x| cfg.min_centre_distance(*x).0 > 0.05));
        let a = maupertuis(&path, &cfg).unwrap();
        let b = maupertuis(&path.reversed(), &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn straight_kinetic_is_refinement_invariant() {
    let (a, b) = (Vec2::new(-2.0, 1.0), Vec2::new(1.0, -2.0));
    let l2 = (b - a).norm_sq();
    for m in [8, 16, 256] {
        let k = kinetic_integral(&DiscretePath::straight(a, b, m).unwrap());
        assert!((k - 0.5 * l2).abs() < 1e-12 * l2);
    }
}

#[test]
fn potential_quadrature_matches_oversampling() {
    let cfg = pair();
    let coarse = DiscretePath::straight(Vec2::new(-2.0, 0.3), Vec2::new(2.0, 0.3), 256).unwrap();
    let fine = DiscretePath::straight(Vec2::new(-2.0, 0.3), Vec2::new(2.0, 0.3), 2560).unwrap();
    let (p, q) = (potential_integral(&coarse, &cfg).unwrap(), potential_integral(&fine, &cfg).unwrap());
    assert!(p > 0.0);
    assert!((p - q).abs() < 1e-6 * q, "{p} vs {q}");
}

#[test]
fn kepler_parabola_is_the_class_minimizer() {
    // α = 1, m = 1: the parabola through R e^{±iπ/3} has pericentre q = 3R/4, Jacobi
    // length A = 4√(2mq)/√3 and so M = A²/2 = 16 m q / 3; its half-time is Barker's
    // √(2q³/m)(D + D³/3) with D = tan(π/6).
    let cfg = ProblemConfig::new(1.0, vec![Centre::new(Vec2::ZERO, 1.0)]).unwrap();
    let r = 10.0;
    let q = 0.75 * r;
    let (qm, qp) = (Vec2::from_angle(-std::f64::consts::FRAC_PI_3) * r, Vec2::from_angle(std::f64::consts::FRAC_PI_3) * r);
    let seed = DiscretePath::straight(qm, qp, 256).unwrap();
    let target = parity_class(seed.nodes(), &cfg).unwrap();
    assert_eq!(target.bits(), &[1]);
    let settings = SolveSettings::for_config(&cfg);
    let sol = solve_from(&seed, &target, &cfg, &settings).unwrap();
    let m_exact = 16.0 * q / 3.0;
    assert!((sol.value - m_exact).abs() < 1e-4 * m_exact, "M = {} vs {m_exact}", sol.value);
    let d = (std::f64::consts::PI / 6.0).tan();
    let omega = (2.0 * q.powi(3)).sqrt() * (d + d.powi(3) / 3.0);
    assert!((sol.omega - omega).abs() < 1e-3 * omega, "ω = {} vs {omega}", sol.omega);
    // pericentre on the positive axis at distance q
    let peri = sol.trajectory.samples().iter().map(|s| s.position.norm()).fold(f64::INFINITY, f64::min);
    assert!((peri - q).abs() < 1e-3 * q);
}

#[test]
fn three_seeds_agree_on_the_benchmark_class() {
    let cfg = pair();
    let (qm, qp) = (Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0));
    let target = class(&[1, 0]);
    let settings = SolveSettings::for_config(&cfg);
    let routes = seed_routes(qm, qp, &target, &cfg, seed_clearance(&cfg), 3).unwrap();
    assert_eq!(routes.len(), 3);
    let values: Vec<f64> = routes
        .iter()
        .map(|r| {
            let seed = DiscretePath::graded(r, settings.segments, &cfg).unwrap();
            let sol = solve_from(&seed, &target, &cfg, &settings).unwrap();
            assert_eq!(sol.parity, target);
            sol.value
        })
        .collect();
    assert!(multi_seed_spread(&values).unwrap() < 1e-4, "{values:?}");
}

#[test]
fn minimizer_contract_on_the_benchmark() {
    let cfg = pair();
    let (qm, qp) = (Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0));
    let target = class(&[1, 0]);
    let settings = SolveSettings::for_config(&cfg);
    let seed = seed_path(qm, qp, &target, &cfg, seed_clearance(&cfg), 256).unwrap();
    let m_seed = maupertuis(&seed, &cfg).unwrap();
    let rep = minimize_in_class(&seed, &target, &cfg, &settings.minimize).unwrap();
    assert!(rep.history.windows(2).all(|w| w[1] <= w[0] + 1e-13 * w[0].abs()));
    assert!(rep.value <= m_seed);
    assert!(rep.gradient_norm <= settings.minimize.gradient_tolerance * (1.0 + rep.value));
    assert_eq!(parity_class(rep.path.nodes(), &cfg).unwrap(), target);
    let clearance = rep.path.nodes().iter().map(|x| cfg.min_centre_distance(*x).0).fold(f64::INFINITY, f64::min);
    assert!(clearance >= settings.minimize.barrier_radius);

    let sol = to_trajectory(&rep.path, &cfg).unwrap();
    assert!(sol.action_identity_residual() < 1e-4);
    assert!(sol.relative_energy_residual(&cfg).unwrap() <= 1e-3);
    assert_eq!(sol.trajectory.first().position, qm);
    assert_eq!(sol.trajectory.last().position, qp);
    assert!(sol.omega > 0.0);
    assert!(self_intersection_check(&sol.trajectory).is_empty());
}

#[test]
fn symmetric_minimizer_is_time_reversal_symmetric() {
    // centres symmetric under y ↦ −y and endpoints swapped by it: x(−t) = reflect(x(t))
    let cfg = pair();
    let (qm, qp) = (Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0));
    let sol = solve_bolza(qm, qp, &class(&[1, 0]), &cfg, &SolveSettings::for_config(&cfg)).unwrap();
    let traj = &sol.trajectory;
    let mut worst: f64 = 0.0;
    for j in 0..=200 {
        let t = sol.omega * (-1.0 + j as f64 / 100.0);
        let a = traj.position_at(t);
        let b = traj.position_at(-t);
        worst = worst.max((a - Vec2::new(b.x, -b.y)).norm());
    }
    assert!(worst < 1e-6, "symmetry defect {worst:e}");
}

#[test]
fn gradient_is_reflection_equivariant() {
    let cfg = pair();
    let path = random_path(&[0.4, 0.0, 0.0], &[0.0; 31]);
    // mirror in x ↦ −x: a symmetric configuration, reflected path
    let mirrored = DiscretePath::with_times(
        path.nodes().iter().map(|p| Vec2::new(-p.x, p.y)).collect(),
        path.times().to_vec(),
    )
    .unwrap();
    let g = maupertuis_gradient(&path, &cfg).unwrap();
    let h = maupertuis_gradient(&mirrored, &cfg).unwrap();
    for (a, b) in g.iter().zip(&h) {
        assert!((a.x + b.x).abs() < 1e-12 * (1.0 + a.norm()));
        assert!((a.y - b.y).abs() < 1e-12 * (1.0 + a.norm()));
    }
}

#[test]
fn inadmissible_and_mismatched_targets() {
    let cfg = pair();
    let seed = DiscretePath::straight(Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0), 64).unwrap();
    let settings = MinimizeSettings::for_config(&cfg);
    assert!(matches!(
        minimize_in_class(&seed, &class(&[1, 1]), &cfg, &settings),
        Err(Error::InadmissibleClass)
    ));
    assert!(matches!(
        minimize_in_class(&seed, &class(&[0, 1]), &cfg, &settings),
        Err(Error::ClassMismatch)
    ));
}

#[test]
fn omega_for_a_circular_arc() {
    let cfg = ProblemConfig::new(1.0, vec![Centre::new(Vec2::ZERO, 2.0)]).unwrap();
    let r = 3.0;
    let nodes: Vec<Vec2> = (0..=512).map(|k| Vec2::from_angle(2.0 * k as f64 / 512.0) * r).collect();
    let path = DiscretePath::new(nodes).unwrap();
    let len = 2.0 * r;
    let expected = len / (2.0 * (2.0 * 2.0 / r as f64).sqrt());
    assert!((omega_of(&path, &cfg).unwrap() - expected).abs() < 1e-5 * expected);
}
