use std::path::{Path, PathBuf};

use parashoot_core::entire::{
    action_coefficient, action_scaling, collapse_experiment, continue_in_radius, directions_of,
    entire_surrogate, fit_angular_decay, fit_radius_law, kepler_parabolic_angle_report, radius_law_coefficient,
    self_intersection_check, solve_bolza_at, ActionScaling, AsymptoticFit, ContinuationResult, EntireSolution,
    ScatteringProblem,
};
use parashoot_core::homotopy::class_separates;
use parashoot_core::variational::{multi_seed_spread, solve_from, BolzaSolution, SolveSettings};
use parashoot_core::{ProblemConfig, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{fmt17, read_orbit_csv, Writer};
use crate::{CliError, Exit, Loaded, Outcome};

#[derive(Debug, Clone, Serialize)]
pub struct BolzaSummary {
    pub radius: f64,
    pub omega: f64,
    pub action: f64,
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub parity_bits: Vec<u8>,
    pub partition: Vec<usize>,
    pub separates: bool,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub samples: usize,
    pub ring_times: Option<(f64, f64)>,
    pub relative_energy_residual: f64,
    pub action_identity_residual: f64,
    pub self_intersections: usize,
}

impl BolzaSummary {
    pub fn of(sol: &BolzaSolution, prob: &ScatteringProblem) -> Result<Self, CliError> {
        Ok(BolzaSummary {
            radius: sol.path.q_minus().norm(),
            omega: sol.omega,
            action: sol.action,
            value: sol.value,
            kinetic: sol.kinetic,
            potential: sol.potential,
            parity_bits: sol.parity.bits().to_vec(),
            partition: prob.partition().members().iter().copied().collect(),
            separates: class_separates(&sol.parity, prob.partition()),
            gradient_norm: sol.gradient_norm,
            iterations: sol.iterations,
            samples: sol.trajectory.len(),
            ring_times: sol.ring_times(),
            relative_energy_residual: sol.relative_energy_residual(prob.cfg()).map_err(CliError::hard_core)?,
            action_identity_residual: sol.action_identity_residual(),
            self_intersections: self_intersection_check(&sol.trajectory).len(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartReport {
    pub seed: u64,
    pub attempted: usize,
    /// `M` of every restart that converged in the requested class, in draw order.
    pub values: Vec<f64>,
    pub failures: Vec<String>,
    /// `(max − min) / min` over the first solve and the restarts.
    pub spread: Option<f64>,
}

/// Minimizes again from `restarts` random perturbations of `first`'s path and keeps the
/// lowest `M`. Node `k` moves by at most `amplitude · d_k`, with `d_k` its distance to
/// the nearest centre, so a perturbation rarely jumps over a centre; ones that do are
/// rejected by the class check inside the minimizer.
pub fn multi_seed(
    first: BolzaSolution,
    prob: &ScatteringProblem,
    settings: &SolveSettings,
    restarts: usize,
    amplitude: f64,
    seed: u64,
) -> (BolzaSolution, RestartReport) {
    let cfg = prob.cfg();
    let target = prob.target_class();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = first;
    let mut all = vec![best.value];
    let mut report = RestartReport { seed, attempted: restarts, values: Vec::new(), failures: Vec::new(), spread: None };
    let base = best.path.clone();
    for _ in 0..restarts {
        let offsets: Vec<Vec2> = base.nodes()[1..base.nodes().len() - 1]
            .iter()
            .map(|p| {
                let r = amplitude * cfg.min_centre_distance(*p).0 * rng.gen::<f64>().sqrt();
                Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * r
            })
            .collect();
        let attempt = base
            .perturbed(&offsets)
            .and_then(|p| solve_from(&p, &target, cfg, settings))
            .and_then(BolzaSolution::centred);
        match attempt {
            Ok(sol) => {
                report.values.push(sol.value);
                all.push(sol.value);
                if sol.value < best.value {
                    best = sol;
                }
            }
            Err(e) => report.failures.push(e.code().to_string()),
        }
    }
    report.spread = multi_seed_spread(&all);
    (best, report)
}

pub fn solve_bolza(l: &Loaded) -> Result<Outcome, CliError> {
    let radius = l.bolza_radius();
    let first = solve_bolza_at(radius, &l.problem, None, &l.settings).map_err(CliError::hard_core)?;
    let s = &l.raw.solver;
    let (sol, restarts) = multi_seed(first, &l.problem, &l.settings, s.restarts, s.perturbation, l.raw.output.seed);

    #[derive(Serialize)]
    struct Summary {
        command: &'static str,
        solution: BolzaSummary,
        restarts: RestartReport,
    }
    let summary = Summary { command: "solve-bolza", solution: BolzaSummary::of(&sol, &l.problem)?, restarts };
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let mut artifacts = vec![
        w.trajectory_csv("bolza.csv", &sol.trajectory, &l.cfg)?,
        w.json("bolza.json", &summary)?,
    ];
    if l.raw.output.svg {
        artifacts.push(w.svg("bolza.svg", &sol.trajectory.positions(), &l.cfg)?);
    }
    let exit = if summary.solution.separates { Exit::Success } else { Exit::NotConverged };
    Ok(Outcome {
        exit,
        message: format!(
            "R = {radius}: M = {:.10e}, omega = {:.10e}, A = {:.10e}, parity {:?}",
            sol.value,
            sol.omega,
            sol.action,
            sol.parity.bits()
        ),
        artifacts,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub coefficient: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
}

impl From<AsymptoticFit> for FitSummary {
    fn from(f: AsymptoticFit) -> Self {
        FitSummary { exponent: f.exponent, coefficient: f.coefficient, fit_window: f.fit_window, residual: f.residual }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingSummary {
    pub coefficient: f64,
    pub exponent: f64,
    pub offset: f64,
    pub residual: f64,
    pub expected_coefficient: f64,
}

impl ScalingSummary {
    fn of(s: ActionScaling, cfg: &ProblemConfig) -> Self {
        ScalingSummary {
            coefficient: s.coefficient,
            exponent: s.exponent,
            offset: s.offset,
            residual: s.residual,
            expected_coefficient: action_coefficient(cfg.alpha(), cfg.far_mass()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionRow {
    pub radius: f64,
    pub error_minus: f64,
    pub error_plus: f64,
    pub decay_minus: Option<FitSummary>,
    pub decay_plus: Option<FitSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailFits {
    pub radius_minus: FitSummary,
    pub radius_plus: FitSummary,
    pub expected_radius_exponent: f64,
    pub expected_radius_coefficient: f64,
    pub decay_minus: Option<FitSummary>,
    pub decay_plus: Option<FitSummary>,
    pub expected_decay_exponent: f64,
}

/// Radius-law and angular-decay fits on both tails of a surrogate.
pub fn tail_fits(entire: &EntireSolution, l: &Loaded) -> Result<TailFits, CliError> {
    let (a, b) = l.tails.fit_window();
    let traj = &entire.trajectory;
    let alpha = l.cfg.alpha();
    Ok(TailFits {
        radius_minus: fit_radius_law(traj, (-b, -a)).map_err(CliError::hard_core)?.into(),
        radius_plus: fit_radius_law(traj, (a, b)).map_err(CliError::hard_core)?.into(),
        expected_radius_exponent: 2.0 / (2.0 + alpha),
        expected_radius_coefficient: radius_law_coefficient(alpha, l.cfg.far_mass()),
        decay_minus: fit_angular_decay(traj, (-b, -a)).map_err(CliError::hard_core)?.map(Into::into),
        decay_plus: fit_angular_decay(traj, (a, b)).map_err(CliError::hard_core)?.map(Into::into),
        expected_decay_exponent: -4.0 / (2.0 + alpha),
    })
}

pub fn continuation(l: &Loaded) -> Result<ContinuationResult, CliError> {
    continue_in_radius(&l.problem, &l.schedule, &l.settings).map_err(CliError::hard_core)
}

pub fn solve_entire(l: &Loaded) -> Result<Outcome, CliError> {
    let res = continuation(l)?;
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let mut artifacts = Vec::new();
    let mut solutions = Vec::new();
    for (j, sol) in res.solutions.iter().enumerate() {
        artifacts.push(w.trajectory_csv(&format!("bolza_r{j}.csv"), &sol.trajectory, &l.cfg)?);
        solutions.push(BolzaSummary::of(sol, &l.problem)?);
    }

    #[derive(Serialize)]
    struct Report {
        command: &'static str,
        radii: Vec<f64>,
        solutions: Vec<BolzaSummary>,
        window: f64,
        sup_deviations: Vec<f64>,
        inside_actions: Vec<f64>,
        converged: bool,
        /// Present only with at least two radii.
        directions: Option<Vec<DirectionRow>>,
        /// Present only with at least four radii.
        action_scaling: Option<ScalingSummary>,
        tail_fits: Option<TailFits>,
    }
    let mut report = Report {
        command: "solve-entire",
        radii: res.radii.clone(),
        solutions,
        window: res.window,
        sup_deviations: res.sup_deviations.clone(),
        inside_actions: res.inside_actions.clone(),
        converged: res.converged,
        directions: None,
        action_scaling: None,
        tail_fits: None,
    };

    if res.radii.len() >= 2 {
        let entire = entire_surrogate(res.last(), &l.cfg, &l.tails).map_err(CliError::hard_core)?;
        let mut rows = Vec::new();
        for sol in &res.solutions {
            let e = if std::ptr::eq(sol, res.last()) {
                entire.clone()
            } else {
                entire_surrogate(sol, &l.cfg, &l.tails).map_err(CliError::hard_core)?
            };
            let d = directions_of(&e, &l.problem, &l.tails).map_err(CliError::hard_core)?;
            rows.push(DirectionRow {
                radius: sol.path.q_minus().norm(),
                error_minus: d.error_minus,
                error_plus: d.error_plus,
                decay_minus: d.decay_minus.map(Into::into),
                decay_plus: d.decay_plus.map(Into::into),
            });
        }
        report.directions = Some(rows);
        report.tail_fits = Some(tail_fits(&entire, l)?);
        if res.radii.len() >= 4 {
            report.action_scaling =
                Some(ScalingSummary::of(action_scaling(&res, &l.cfg).map_err(CliError::hard_core)?, &l.cfg));
        }
        artifacts.push(w.trajectory_csv("entire.csv", &entire.trajectory, &l.cfg)?);
        if l.raw.output.svg {
            artifacts.push(w.svg("entire.svg", &entire.trajectory.positions(), &l.cfg)?);
        }
    }
    artifacts.push(w.json("entire.json", &report)?);

    let exit = if res.converged { Exit::Success } else { Exit::NotConverged };
    Ok(Outcome {
        exit,
        message: format!(
            "{} radii, deviations {:?}, {}",
            res.radii.len(),
            res.sup_deviations,
            if res.converged { "converged" } else { "not converged" }
        ),
        artifacts,
    })
}

/// Probe times evenly spread over `[−1, 1]`.
pub fn probe_times(n: usize) -> Vec<f64> {
    (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect()
}

pub fn collapse(l: &Loaded) -> Result<Outcome, CliError> {
    let res = continuation(l)?;
    let entire = entire_surrogate(res.last(), &l.cfg, &l.tails).map_err(CliError::hard_core)?;
    let rows = collapse_experiment(&entire, &l.problem, &l.raw.collapse.eps, &probe_times(l.raw.collapse.probes))
        .map_err(CliError::hard_core)?;
    let decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);

    #[derive(Serialize)]
    struct Row {
        eps: f64,
        deviation: f64,
        energy_residual: f64,
    }
    #[derive(Serialize)]
    struct Report {
        command: &'static str,
        source_radius: f64,
        rows: Vec<Row>,
        strictly_decreasing: bool,
    }
    let report = Report {
        command: "collapse",
        source_radius: entire.source_radius,
        rows: rows.iter().map(|r| Row { eps: r.eps, deviation: r.deviation, energy_residual: r.energy_residual }).collect(),
        strictly_decreasing: decreasing,
    };
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![fmt17(r.eps), fmt17(r.deviation), fmt17(r.energy_residual)]).collect();
    let artifacts = vec![
        w.csv("collapse.csv", &["eps", "deviation", "energy_residual"], &table)?,
        w.json("collapse.json", &report)?,
    ];
    let text: Vec<String> = rows.iter().map(|r| format!("eps {}: {:.4e}", r.eps, r.deviation)).collect();
    Ok(Outcome {
        exit: if decreasing { Exit::Success } else { Exit::NotConverged },
        message: format!("collapse deviations {}", text.join(", ")),
        artifacts,
    })
}

pub fn kepler_angle(l: &Loaded) -> Result<Outcome, CliError> {
    let alphas = l.raw.kepler.alphas.clone().unwrap_or_else(|| vec![l.cfg.alpha()]);
    let m = l.cfg.far_mass();

    #[derive(Serialize)]
    struct Row {
        alpha: f64,
        mass: f64,
        angle: f64,
        target: f64,
        relative_error: f64,
        partial: [f64; 3],
    }
    let mut rows = Vec::new();
    for alpha in alphas {
        let k = kepler_parabolic_angle_report(alpha, m, l.raw.kepler.tol).map_err(CliError::hard_core)?;
        rows.push(Row {
            alpha,
            mass: m,
            angle: k.angle,
            target: k.target,
            relative_error: (k.angle - k.target).abs() / k.target,
            partial: k.partial,
        });
    }
    #[derive(Serialize)]
    struct Report<'a> {
        command: &'static str,
        rows: &'a [Row],
    }
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let artifacts = vec![w.json("kepler.json", &Report { command: "kepler-angle", rows: &rows })?];
    let text: Vec<String> =
        rows.iter().map(|r| format!("alpha {}: {:.8} (target {:.8})", r.alpha, r.angle, r.target)).collect();
    Ok(Outcome { exit: Exit::Success, message: text.join("; "), artifacts })
}

pub fn plot(l: &Loaded, input: &Path) -> Result<Outcome, CliError> {
    let orbit = read_orbit_csv(input)?;
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let name: PathBuf = input.with_extension("svg").file_name().map(PathBuf::from).unwrap_or_else(|| "plot.svg".into());
    let path = w.svg(&name.to_string_lossy(), &orbit, &l.cfg)?;
    Ok(Outcome { exit: Exit::Success, message: format!("plotted {} points", orbit.len()), artifacts: vec![path] })
}
