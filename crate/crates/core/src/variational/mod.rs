//! Discrete Maupertuis minimization within a parity class.
//!
//! A critical point `u` of `M(u) = ∫|u̇|² · ∫U(u)` over paths from `q⁻` to `q⁺` solves
//! `ü = ω² ∇U(u)` with `ω² = ∫|u̇|² / (2∫U)`, so `x(t) = u(t/ω)` is a zero-energy orbit on
//! `[−ω, ω]`. The discrete functional keeps this structure exactly: its stationarity
//! equations are a consistent discretization of the rescaled equation of motion.

mod functional;
mod minimize;
mod path;
mod seed;
mod solution;

use alloc::vec::Vec;

pub use functional::{
    evaluate, kinetic_integral, maupertuis, maupertuis_gradient, omega_of, potential_integral, Evaluation,
};
pub use minimize::{minimize_in_class, MinimizeReport, MinimizeSettings};
pub use path::{DiscretePath, MIN_SEGMENTS};
pub use seed::{seed_clearance, seed_path, seed_routes};
pub use solution::{relative_energy_residual, to_trajectory, BolzaSolution};

use crate::homotopy::{parity_class, ParityClass};
use crate::math::Vec2;
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

/// Default number of path segments.
pub const DEFAULT_SEGMENTS: usize = 256;

/// End-to-end settings of a Bolza solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub segments: usize,
    pub minimize: MinimizeSettings,
    /// Regrid-and-reminimize rounds after the first minimization.
    pub regrids: usize,
    /// Distinct seed routings tried by [`solve_bolza`]; the lowest `M` wins.
    pub seeds: usize,
    /// Segment doublings allowed when the rescaled minimizer misses the zero-energy bound.
    pub refinements: usize,
}

impl SolveSettings {
    pub fn for_config(cfg: &ProblemConfig) -> Self {
        SolveSettings {
            segments: DEFAULT_SEGMENTS,
            minimize: MinimizeSettings::for_config(cfg),
            regrids: 2,
            seeds: 1,
            refinements: 2,
        }
    }
}

/// Minimizes from `start`, then regrids on the minimizer and minimizes again.
///
/// Regridding moves the nodes to the equidistributing grid of the current geometry; a
/// round whose regridded path lands in another class is skipped. If the result misses
/// the zero-energy bound, the segment count is doubled (at most `settings.refinements`
/// times) and the minimizer regridded and re-minimized at the finer resolution.
pub fn solve_from(
    start: &DiscretePath,
    target: &ParityClass,
    cfg: &ProblemConfig,
    settings: &SolveSettings,
) -> Result<BolzaSolution> {
    let mut report = minimize_in_class(start, target, cfg, &settings.minimize)?;
    let mut iterations = report.iterations;
    for _ in 0..settings.regrids {
        let regridded = report.path.regraded(settings.segments, cfg)?;
        if parity_class(regridded.nodes(), cfg)? != *target {
            break;
        }
        report = minimize_in_class(&regridded, target, cfg, &settings.minimize)?;
        iterations += report.iterations;
    }
    let mut segments = settings.segments;
    let mut refinements = 0;
    let mut sol = loop {
        match to_trajectory(&report.path, cfg) {
            Err(Error::EnergyResidualTooLarge { .. }) if refinements < settings.refinements => {
                refinements += 1;
                segments *= 2;
                let finer = report.path.regraded(segments, cfg)?;
                if parity_class(finer.nodes(), cfg)? != *target {
                    return Err(Error::ClassMismatch);
                }
                report = minimize_in_class(&finer, target, cfg, &settings.minimize)?;
                iterations += report.iterations;
            }
            other => break other?,
        }
    };
    sol.iterations = iterations;
    sol.gradient_norm = report.gradient_norm;
    Ok(sol)
}

/// Solves the fixed-endpoint problem from constructed seeds in class `target`.
pub fn solve_bolza(
    q_minus: Vec2,
    q_plus: Vec2,
    target: &ParityClass,
    cfg: &ProblemConfig,
    settings: &SolveSettings,
) -> Result<BolzaSolution> {
    let routes = seed_routes(
        q_minus,
        q_plus,
        target,
        cfg,
        seed_clearance(cfg).max(settings.minimize.barrier_radius),
        settings.seeds.max(1),
    )?;
    let mut best: Option<BolzaSolution> = None;
    let mut first_err: Option<Error> = None;
    for route in routes {
        let attempt = DiscretePath::graded(&route, settings.segments, cfg)
            .and_then(|seed| solve_from(&seed, target, cfg, settings));
        match attempt {
            Ok(sol) => {
                if best.as_ref().map_or(true, |b| sol.value < b.value) {
                    best = Some(sol);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::NoRoutingFound))
}

/// Relative spread `(max − min) / min` of the values reached from several seeds.
pub fn multi_seed_spread(values: &[f64]) -> Option<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (values.len() > 1 && min > 0.0).then(|| (max - min) / min)
}

/// Positions of `path` with parameter-time spacing, as `(τ_k, u_k)` pairs.
pub fn path_samples(path: &DiscretePath) -> Vec<(f64, Vec2)> {
    path.times().iter().copied().zip(path.nodes().iter().copied()).collect()
}
