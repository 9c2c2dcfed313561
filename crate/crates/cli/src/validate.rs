//! `validate`: the invariant suites, run against the configured problem.

use parashoot_core::entire::{kepler_parabolic_angle, self_intersection_check, solve_bolza_at};
use parashoot_core::homotopy::{class_separates, close_path, parity_class, winding_number};
use parashoot_core::integrator::{integrate, levi_civita_lift, virial_residual, IntegrateSettings, State};
use parashoot_core::variational::{maupertuis, maupertuis_gradient, seed_clearance, seed_path, DiscretePath};
use parashoot_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{CliError, Exit, Loaded, Outcome};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String), parashoot_core::Error>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error {}: {e}", e.code()) },
    }
}

/// Largest relative mismatch between `∂M` and central differences over `paths`.
pub fn gradient_fd_error(paths: &[DiscretePath], cfg: &parashoot_core::ProblemConfig) -> parashoot_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for path in paths {
        let g = maupertuis_gradient(path, cfg)?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.x.abs()).max(v.y.abs()));
        let interior: Vec<Vec2> = path.nodes()[1..path.nodes().len() - 1].to_vec();
        for k in 0..interior.len() {
            for axis in 0..2 {
                let h = 1e-6 * (1.0 + interior[k].norm());
                let shift = |sign: f64| {
                    let mut moved = interior.clone();
                    if axis == 0 {
                        moved[k].x += sign * h;
                    } else {
                        moved[k].y += sign * h;
                    }
                    maupertuis(&path.with_interior(&moved)?, cfg)
                };
                let fd = (shift(1.0)? - shift(-1.0)?) / (2.0 * h);
                let exact = if axis == 0 { g[k + 1].x } else { g[k + 1].y };
                worst = worst.max((fd - exact).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// `n` random perturbations of the seed path in the configured class.
pub fn random_paths(l: &Loaded, n: usize, segments: usize, seed: u64) -> parashoot_core::Result<Vec<DiscretePath>> {
    let (qm, qp) = l.problem.endpoints(l.schedule[0]);
    let clearance = seed_clearance(&l.cfg);
    let base = seed_path(qm, qp, &l.problem.target_class(), &l.cfg, clearance, segments)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let offsets: Vec<Vec2> = base.nodes()[1..base.nodes().len() - 1]
            .iter()
            .map(|p| {
                let r = 0.3 * l.cfg.min_centre_distance(*p).0 * rng.gen::<f64>();
                Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * r
            })
            .collect();
        let p = base.perturbed(&offsets)?;
        if parity_class(p.nodes(), &l.cfg)? == l.problem.target_class() {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn checks(l: &Loaded) -> Vec<Check> {
    let cfg = &l.cfg;
    let seed = l.raw.output.seed;
    let mut out = Vec::new();

    out.push(check("potential gradient vs finite differences", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let k = cfg.ring_radius();
        let mut worst: f64 = 0.0;
        let mut n = 0;
        while n < 200 {
            let x = Vec2::new(rng.gen_range(-k..k), rng.gen_range(-k..k));
            if cfg.min_centre_distance(x).0 < 0.1 {
                continue;
            }
            n += 1;
            let g = cfg.gradient(x)?;
            let h = 1e-6 * (1.0 + x.norm());
            let fx = (cfg.potential(x + Vec2::new(h, 0.0))? - cfg.potential(x - Vec2::new(h, 0.0))?) / (2.0 * h);
            let fy = (cfg.potential(x + Vec2::new(0.0, h))? - cfg.potential(x - Vec2::new(0.0, h))?) / (2.0 * h);
            worst = worst.max((Vec2::new(fx, fy) - g).norm() / g.norm().max(1e-3));
        }
        Ok((worst <= 1e-6, format!("max relative error {worst:.3e} on 200 points")))
    })()));

    out.push(check("Maupertuis gradient vs finite differences", (|| {
        let paths = random_paths(l, 20, 32, seed)?;
        let worst = gradient_fd_error(&paths, cfg)?;
        Ok((worst <= 1e-6, format!("max relative error {worst:.3e} on 20 paths")))
    })()));

    out.push(check("winding parity is stable and reverses sign", (|| {
        let paths = random_paths(l, 8, 64, seed ^ 1)?;
        let mut ok = true;
        for p in &paths {
            let poly = close_path(p.nodes(), 128)?;
            let rev = poly.reversed();
            for c in cfg.centres() {
                ok &= winding_number(&rev, c.position)? == -winding_number(&poly, c.position)?;
            }
        }
        Ok((ok, "8 perturbed seeds".into()))
    })()));

    out.push(check("Levi-Civita lift round trip", (|| {
        if cfg.alpha() != 1.0 {
            return Ok((true, "skipped: alpha != 1".into()));
        }
        let c = cfg.centres()[0].position;
        let mut worst: f64 = 0.0;
        for j in 0..16 {
            let x = c + Vec2::from_angle(0.4 * j as f64) * 1e-3;
            let s = State::new(0.0, x, Vec2::from_angle(1.3 * j as f64) * 2.0);
            let back = levi_civita_lift(&s, 0, cfg)?.drop_to_cartesian(cfg)?;
            worst = worst.max((back.position - x).norm()).max((back.velocity - s.velocity).norm());
        }
        Ok((worst <= 1e-12, format!("max error {worst:.3e}")))
    })()));

    let bolza = solve_bolza_at(l.schedule[0], &l.problem, None, &l.settings);
    out.push(check("Bolza solution: zero energy, class, no self-intersection", match &bolza {
        Ok(sol) => (|| {
            let e = sol.relative_energy_residual(cfg)?;
            let sep = class_separates(&sol.parity, l.problem.partition());
            let crossings = self_intersection_check(&sol.trajectory).len();
            Ok((
                e <= 1e-3 && sep && crossings == 0,
                format!("energy {e:.3e}, separates {sep}, self-intersections {crossings}"),
            ))
        })(),
        Err(e) => Err(e.clone()),
    }));

    out.push(check("radial convexity outside the ring", match &bolza {
        Ok(sol) => (|| {
            let (_, b) = sol.ring_times().ok_or(parashoot_core::Error::TailTooShort)?;
            let leave = sol.trajectory.state_at(b).on_zero_energy(cfg)?;
            let (tail, _) = integrate(leave, b + 1e3, &IntegrateSettings::new(1e-10), cfg)?;
            let report = virial_residual(&tail, cfg)?;
            Ok((report.convexity_violations.is_empty(), format!("{} tail samples", tail.len())))
        })(),
        Err(e) => Err(e.clone()),
    }));

    out.push(check("Kepler angle", (|| {
        let alpha = cfg.alpha();
        let target = std::f64::consts::TAU / (2.0 - alpha);
        let a = kepler_parabolic_angle(alpha, cfg.far_mass())?;
        let rel = (a - target).abs() / target;
        Ok((rel <= 1e-2, format!("{a:.8} vs {target:.8} (relative {rel:.2e})")))
    })()));

    out
}

pub fn run_validate(l: &Loaded) -> Result<Outcome, CliError> {
    let checks = checks(l);
    let passed = checks.iter().all(|c| c.passed);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let table: Vec<String> = checks
        .iter()
        .map(|c| format!("{:<width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail))
        .collect();

    #[derive(Serialize)]
    struct Report<'a> {
        command: &'static str,
        checks: &'a [Check],
        passed: bool,
    }
    let w = crate::output::Writer::new(l.out_dir(), &l.hash)?;
    let artifacts = vec![w.json("validate.json", &Report { command: "validate", checks: &checks, passed })?];
    Ok(Outcome { exit: if passed { Exit::Success } else { Exit::HardError }, message: table.join("\n"), artifacts })
}
