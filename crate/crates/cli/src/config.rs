//! The run configuration file.
//!
//! A TOML document with the sections `[problem]`, `[scattering]`, `[solver]`,
//! `[continuation]`, `[tails]`, `[collapse]`, `[kepler]`, `[scan]` and `[output]`. Only
//! `[problem]` and `[scattering]` are required; unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use parashoot_core::entire::{ScatteringProblem, TailSettings};
use parashoot_core::homotopy::Partition;
use parashoot_core::variational::{MinimizeSettings, SolveSettings};
use parashoot_core::{Centre, ProblemConfig, Vec2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub scattering: ScatteringSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(default)]
    pub tails: TailsSection,
    #[serde(default)]
    pub collapse: CollapseSection,
    #[serde(default)]
    pub kepler: KeplerSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub alpha: f64,
    pub centres: Vec<CentreEntry>,
    /// Defaults to the centre extent plus 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentreEntry {
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringSection {
    /// Angle of `ξ⁻` in radians.
    pub theta_minus: f64,
    /// Angle of `ξ⁺` in radians.
    pub theta_plus: f64,
    /// Centre indices on one side of the partition.
    pub partition: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub segments: usize,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub barrier_strength: f64,
    /// Defaults to `10⁻² · min(0.1, gap/4)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier_radius: Option<f64>,
    pub regrids: usize,
    /// Seed routings tried per solve.
    pub routes: usize,
    /// Segment doublings allowed when a minimizer misses the zero-energy bound.
    pub refinements: usize,
    /// Extra minimizations from randomly perturbed copies of the first minimizer.
    pub restarts: usize,
    /// Perturbation amplitude, relative to the distance of each node to the nearest centre.
    pub perturbation: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            segments: 256,
            gradient_tolerance: 1e-8,
            max_iterations: 20_000,
            barrier_strength: 1e6,
            barrier_radius: None,
            regrids: 2,
            routes: 1,
            refinements: 2,
            restarts: 0,
            perturbation: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSection {
    /// Endpoint radii; defaults to `K · [4, 8, 16, 32]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    /// Radius for `solve-bolza`; defaults to the first continuation radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailsSection {
    pub horizon: f64,
    pub tol: f64,
}

impl Default for TailsSection {
    fn default() -> Self {
        let t = TailSettings::default();
        TailsSection { horizon: t.horizon, tol: t.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseSection {
    pub eps: Vec<f64>,
    pub probes: usize,
}

impl Default for CollapseSection {
    fn default() -> Self {
        CollapseSection { eps: vec![0.2, 0.1, 0.05], probes: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeplerSection {
    /// Exponents to report; defaults to the problem's `alpha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    pub tol: f64,
}

impl Default for KeplerSection {
    fn default() -> Self {
        KeplerSection { alphas: None, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// Number of equally spaced direction angles; every unordered pair is a cell.
    pub directions: usize,
    /// Angle of the first grid direction.
    pub offset: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection { directions: 6, offset: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), seed: 0, svg: true }
    }
}

/// A parsed and validated configuration with the core objects built from it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub raw: RunConfig,
    pub cfg: ProblemConfig,
    pub problem: ScatteringProblem,
    pub settings: SolveSettings,
    pub tails: TailSettings,
    pub schedule: Vec<f64>,
    /// SHA-256 of the canonical JSON form of `raw` after command-line overrides, see [`config_hash`].
    pub hash: String,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub radius: Option<f64>,
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("config-unreadable", format!("{}: {e}", path.display())))?;
    parse(&text, ov)
}

pub fn parse(text: &str, ov: &Overrides) -> Result<Loaded, CliError> {
    let mut raw: RunConfig = toml::from_str(text).map_err(|e| CliError::config("config-parse", e.to_string()))?;
    if let Some(out) = &ov.out {
        raw.output.dir = out.clone();
    }
    if let Some(seed) = ov.seed {
        raw.output.seed = seed;
    }
    if let Some(tol) = ov.tol {
        raw.solver.gradient_tolerance = tol;
    }
    if let Some(r) = ov.radius {
        raw.continuation.radius = Some(r);
    }
    raw.build()
}

impl RunConfig {
    fn build(self) -> Result<Loaded, CliError> {
        let centres = self.problem.centres.iter().map(|c| Centre::new(Vec2::new(c.x, c.y), c.mass)).collect();
        let cfg = match self.problem.ring_radius {
            Some(k) => ProblemConfig::with_ring_radius(self.problem.alpha, centres, k),
            None => ProblemConfig::new(self.problem.alpha, centres),
        }
        .map_err(CliError::from_config)?;
        let partition =
            Partition::new(self.scattering.partition.iter().copied(), cfg.num_centres()).map_err(CliError::from_config)?;
        let problem =
            ScatteringProblem::from_angles(self.scattering.theta_minus, self.scattering.theta_plus, partition, cfg.clone())
                .map_err(CliError::from_config)?;

        let s = &self.solver;
        let mut minimize = MinimizeSettings::for_config(&cfg);
        minimize.gradient_tolerance = s.gradient_tolerance;
        minimize.max_iterations = s.max_iterations;
        minimize.barrier_strength = s.barrier_strength;
        if let Some(r) = s.barrier_radius {
            minimize.barrier_radius = r;
        }
        minimize.validate(&cfg).map_err(CliError::from_config)?;
        if s.segments < 8 || s.routes == 0 || !(s.perturbation >= 0.0 && s.perturbation < 1.0) {
            return Err(CliError::config(
                "invalid-input",
                "solver needs segments >= 8, routes >= 1 and perturbation in [0, 1)".into(),
            ));
        }
        let settings = SolveSettings {
            segments: s.segments,
            minimize,
            regrids: s.regrids,
            seeds: s.routes,
            refinements: s.refinements,
        };

        if !(self.tails.tol > 0.0 && self.tails.horizon > 0.0) {
            return Err(CliError::config("invalid-input", "tail horizon and tolerance must be positive".into()));
        }
        let tails = TailSettings { horizon: self.tails.horizon, tol: self.tails.tol };

        let schedule = self.continuation.radii.clone().unwrap_or_else(|| problem.default_schedule());
        let k = cfg.ring_radius();
        if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] > w[0])) || !(schedule[0] > 2.0 * k) {
            return Err(CliError::config(
                "invalid-schedule",
                format!("continuation radii must be increasing and start above 2K = {}", 2.0 * k),
            ));
        }
        if let Some(r) = self.continuation.radius {
            if !(r > k) {
                return Err(CliError::config("invalid-input", format!("radius {r} must exceed K = {k}")));
            }
        }
        if self.collapse.eps.iter().any(|e| !(*e > 0.0)) || self.collapse.probes < 2 {
            return Err(CliError::config("invalid-input", "collapse needs positive eps and at least 2 probes".into()));
        }
        if self.kepler.alphas.iter().flatten().any(|a| !(1.0..2.0).contains(a)) || !(self.kepler.tol > 0.0) {
            return Err(CliError::config("invalid-input", "kepler alphas must lie in [1, 2)".into()));
        }
        if self.scan.directions < 2 {
            return Err(CliError::config("invalid-input", "scan needs at least 2 directions".into()));
        }
        let hash = config_hash(&self);
        Ok(Loaded { raw: self, cfg, problem, settings, tails, schedule, hash })
    }
}

/// Hash of the effective configuration, independent of formatting, comments and the
/// output directory.
pub fn config_hash(raw: &RunConfig) -> String {
    let mut numeric = raw.clone();
    numeric.output.dir = PathBuf::new();
    let canonical = serde_json::to_vec(&numeric).expect("config serializes");
    hex::encode(Sha256::digest(canonical))
}

impl Loaded {
    /// Radius used by `solve-bolza`.
    pub fn bolza_radius(&self) -> f64 {
        self.raw.continuation.radius.unwrap_or(self.schedule[0])
    }

    pub fn out_dir(&self) -> &Path {
        &self.raw.output.dir
    }
}
