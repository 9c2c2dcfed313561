//! Artifact writers: trajectory CSV, JSON summaries and SVG plots.
//!
//! Every artifact carries the tool version and the config hash.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use parashoot_core::integrator::Trajectory;
use parashoot_core::{ProblemConfig, Vec2};
use serde::Serialize;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "x", "y", "vx", "vy", "energy_residual", "min_centre_dist"];

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Writer {
    dir: PathBuf,
    hash: String,
}

impl Writer {
    pub fn new(dir: &Path, hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Writer { dir: dir.to_path_buf(), hash: hash.to_string() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn comment(&self) -> String {
        format!("parashoot {VERSION} config-sha256 {}", self.hash)
    }

    /// Writes `{"version", "config_hash", ...payload}` as pretty JSON.
    pub fn json<T: Serialize>(&self, name: &str, payload: &T) -> Result<PathBuf, CliError> {
        let body = serde_json::to_string_pretty(&Stamped { version: VERSION, config_hash: &self.hash, payload })
            .map_err(|e| CliError::hard("serialize", e.to_string()))?;
        self.write(name, &(body + "\n"))
    }

    /// Generic CSV with a leading `#` provenance line and a header row.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut out = format!("# {}\n{}\n", self.comment(), header.join(","));
        for row in rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        self.write(name, &out)
    }

    pub fn trajectory_csv(&self, name: &str, traj: &Trajectory, cfg: &ProblemConfig) -> Result<PathBuf, CliError> {
        let rows = trajectory_rows(traj, cfg)?;
        self.csv(name, &TRAJECTORY_COLUMNS, &rows)
    }

    pub fn svg(&self, name: &str, orbit: &[Vec2], cfg: &ProblemConfig) -> Result<PathBuf, CliError> {
        self.write(name, &render_svg(orbit, cfg, &self.comment()))
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    version: &'a str,
    config_hash: &'a str,
    #[serde(flatten)]
    payload: &'a T,
}

fn trajectory_rows(traj: &Trajectory, cfg: &ProblemConfig) -> Result<Vec<Vec<String>>, CliError> {
    traj.samples()
        .iter()
        .map(|s| {
            let u = cfg.potential(s.position).map_err(CliError::hard_core)?;
            let h = 0.5 * s.velocity.norm_sq() - u;
            let d = cfg.min_centre_distance(s.position).0;
            Ok([s.time, s.position.x, s.position.y, s.velocity.x, s.velocity.y, h, d].iter().map(|v| fmt17(*v)).collect())
        })
        .collect()
}

/// Reads the `x`, `y` columns back from a trajectory CSV.
pub fn read_orbit_csv(path: &Path) -> Result<Vec<Vec2>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(ix), Some(iy)) = (col("x"), col("y")) else {
        return Err(CliError::config("invalid-input", format!("{}: no x,y columns", path.display())));
    };
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let num = |i: usize| f.get(i).and_then(|s| s.trim().parse::<f64>().ok());
            match (num(ix), num(iy)) {
                (Some(x), Some(y)) => Ok(Vec2::new(x, y)),
                _ => Err(CliError::config("invalid-input", format!("{}: bad row {l:?}", path.display()))),
            }
        })
        .collect()
}

/// The orbit inside a frame of `3K`, with the centres and the ring `|x| = K`.
pub fn render_svg(orbit: &[Vec2], cfg: &ProblemConfig, comment: &str) -> String {
    const SIZE: f64 = 600.0;
    let k = cfg.ring_radius();
    let half = 3.0 * k;
    let scale = SIZE / (2.0 * half);
    let map = |p: Vec2| (SIZE / 2.0 + p.x * scale, SIZE / 2.0 - p.y * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, "<!-- {comment} -->");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<circle cx="{c}" cy="{c}" r="{r:.3}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
        c = SIZE / 2.0,
        r = k * scale
    );
    // clip to a generous box so that far tails do not produce huge coordinates
    let limit = 10.0 * half;
    let mut d = String::new();
    let mut pen_down = false;
    for p in orbit {
        if p.x.abs() > limit || p.y.abs() > limit {
            pen_down = false;
            continue;
        }
        let (x, y) = map(*p);
        let _ = write!(d, "{}{x:.2} {y:.2} ", if pen_down { "L" } else { "M" });
        pen_down = true;
    }
    let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>"##, d.trim_end());
    for c in cfg.centres() {
        let (x, y) = map(c.position);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#c0392b"/>"##);
    }
    s.push_str("</svg>\n");
    s
}
