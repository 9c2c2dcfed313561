use std::f64::consts::TAU;

use parashoot_core::entire::{continue_in_radius, self_intersection_check, ScatteringProblem};
use parashoot_core::homotopy::{separates, unordered_partitions, Partition};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{fmt17, Writer};
use crate::{CliError, Exit, Loaded, Outcome};

/// Partition enumeration budget.
pub const MAX_SCAN_CENTRES: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct ScanCell {
    pub partition: Vec<usize>,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub scattering_angle: f64,
    pub converged: bool,
    /// Bolza action at the largest radius.
    pub action: Option<f64>,
    /// The largest-radius orbit separates the centres as requested.
    pub separates: Option<bool>,
    pub self_intersections: Option<usize>,
    pub relative_energy_residual: Option<f64>,
    /// Error code when the cell failed.
    pub error: Option<String>,
}

impl ScanCell {
    /// Converged cells must separate and be free of self-intersections.
    pub fn topology_ok(&self) -> bool {
        !self.converged || (self.separates == Some(true) && self.self_intersections == Some(0))
    }
}

/// Angles `offset + 2πj/n` and every unordered pair of distinct grid directions.
pub fn direction_pairs(n: usize, offset: f64) -> Vec<(f64, f64)> {
    let theta = |j: usize| offset + TAU * j as f64 / n as f64;
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (theta(i), theta(j)))).collect()
}

fn run_cell(l: &Loaded, partition: &Partition, (tm, tp): (f64, f64)) -> ScanCell {
    let mut cell = ScanCell {
        partition: partition.members().iter().copied().collect(),
        theta_minus: tm,
        theta_plus: tp,
        scattering_angle: f64::NAN,
        converged: false,
        action: None,
        separates: None,
        self_intersections: None,
        relative_energy_residual: None,
        error: None,
    };
    let attempt = ScatteringProblem::from_angles(tm, tp, partition.clone(), l.cfg.clone()).and_then(|prob| {
        cell.scattering_angle = prob.scattering_angle();
        let res = continue_in_radius(&prob, &l.schedule, &l.settings)?;
        let last = res.last();
        cell.converged = res.converged;
        cell.action = Some(last.action);
        cell.separates = Some(separates(&last.trajectory.positions(), partition, &l.cfg)?);
        cell.self_intersections =
            Some(res.solutions.iter().map(|s| self_intersection_check(&s.trajectory).len()).sum());
        cell.relative_energy_residual = Some(last.relative_energy_residual(&l.cfg)?);
        Ok(())
    });
    if let Err(e) = attempt {
        cell.converged = false;
        cell.error = Some(e.code().to_string());
    }
    cell
}

/// Runs every (partition, direction pair) cell on a pool of `jobs` threads.
pub fn scan_cells(l: &Loaded, jobs: Option<usize>) -> Result<Vec<ScanCell>, CliError> {
    let n = l.cfg.num_centres();
    if n > MAX_SCAN_CENTRES {
        return Err(CliError::config("invalid-input", format!("scan supports at most {MAX_SCAN_CENTRES} centres")));
    }
    let partitions = unordered_partitions(n);
    let pairs = direction_pairs(l.raw.scan.directions, l.raw.scan.offset);
    let cells: Vec<(&Partition, (f64, f64))> =
        partitions.iter().flat_map(|p| pairs.iter().map(move |d| (p, *d))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::hard("thread-pool", e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(|(p, d)| run_cell(l, p, *d)).collect()))
}

pub fn run_scan(l: &Loaded, jobs: Option<usize>) -> Result<Outcome, CliError> {
    let cells = scan_cells(l, jobs)?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.partition.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                fmt17(c.theta_minus),
                fmt17(c.theta_plus),
                fmt17(c.scattering_angle),
                c.converged.to_string(),
                opt(c.action),
                c.separates.map(|b| b.to_string()).unwrap_or_default(),
                c.self_intersections.map(|n| n.to_string()).unwrap_or_default(),
                opt(c.relative_energy_residual),
                c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let header = [
        "partition",
        "theta_minus",
        "theta_plus",
        "scattering_angle",
        "converged",
        "action",
        "separates",
        "self_intersections",
        "relative_energy_residual",
        "error",
    ];
    let converged = cells.iter().filter(|c| c.converged).count();
    let topology_ok = cells.iter().all(ScanCell::topology_ok);

    #[derive(Serialize)]
    struct Report<'a> {
        command: &'static str,
        partitions: usize,
        cells: &'a [ScanCell],
        converged: usize,
        topology_ok: bool,
    }
    let partitions = unordered_partitions(l.cfg.num_centres()).len();
    let w = Writer::new(l.out_dir(), &l.hash)?;
    let artifacts = vec![
        w.csv("scan.csv", &header, &rows)?,
        w.json("scan.json", &Report { command: "scan", partitions, cells: &cells, converged, topology_ok })?,
    ];
    let exit = if !topology_ok {
        Exit::HardError
    } else if converged < cells.len() {
        Exit::NotConverged
    } else {
        Exit::Success
    };
    Ok(Outcome {
        exit,
        message: format!(
            "{partitions} partitions, {} cells, {converged} converged, topology {}",
            cells.len(),
            if topology_ok { "ok" } else { "VIOLATED" }
        ),
        artifacts,
    })
}
