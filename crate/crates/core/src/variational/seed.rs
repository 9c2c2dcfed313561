//! Constructive representatives of a parity class.
//!
//! A seed runs radially in from `q⁻`, around a circle just outside the centres, then
//! across the centre disc along a direction `e` as a graph over `e`, passing each centre
//! on the side fixed by one bit, and back out to `q⁺` the same way. Moving the waypoint
//! of one centre to the other side changes the loop by a small circuit around that
//! centre alone, which flips exactly its parity bit.

use alloc::vec::Vec;

use crate::geometry::point_segment_distance;
use crate::homotopy::{parity_class, ParityClass};
use crate::math::{atan2, PI, Vec2};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

use super::DiscretePath;

/// Number of crossing directions tried, rotated from the chord in steps of `π/8`.
const DIRECTIONS: usize = 16;

/// Distance kept from every centre by constructed seeds: `min(0.1, gap/4)`, or `0.1`
/// for a single centre.
pub fn seed_clearance(cfg: &ProblemConfig) -> f64 {
    cfg.min_centre_gap().map_or(0.1, |g| (0.25 * g).min(0.1))
}

/// Seed path with `m` segments in class `target`, nodes graded towards the centres.
pub fn seed_path(
    q_minus: Vec2,
    q_plus: Vec2,
    target: &ParityClass,
    cfg: &ProblemConfig,
    clearance: f64,
    m: usize,
) -> Result<DiscretePath> {
    let routes = seed_routes(q_minus, q_plus, target, cfg, clearance, 1)?;
    let path = DiscretePath::graded(&routes[0], m, cfg)?;
    if parity_class(path.nodes(), cfg)? != *target {
        return Err(Error::NoRoutingFound);
    }
    Ok(path)
}

/// Up to `max` distinct polylines from `q⁻` to `q⁺` in class `target`, each keeping at
/// least `clearance` from every centre.
pub fn seed_routes(
    q_minus: Vec2,
    q_plus: Vec2,
    target: &ParityClass,
    cfg: &ProblemConfig,
    clearance: f64,
    max: usize,
) -> Result<Vec<Vec<Vec2>>> {
    crate::homotopy::check_endpoints(q_minus, q_plus)?;
    let n = cfg.num_centres();
    if target.len() != n {
        return Err(Error::InvalidInput("class length differs from the number of centres".into()));
    }
    if !target.is_admissible() {
        return Err(Error::InadmissibleClass);
    }
    let extent = cfg.extent();
    let radius = q_minus.norm();
    if radius <= extent + 2.0 * clearance {
        return Err(Error::InvalidInput("endpoints must lie outside the centre disc".into()));
    }
    let gap = cfg.min_centre_gap().unwrap_or(1.0);
    let delta = (0.4 * gap).max(2.0 * clearance);
    let circle = (extent + 1.0).min(0.5 * (extent + delta + radius));
    let chord = (q_plus - q_minus).normalized();

    let mut out = Vec::new();
    for j in 0..DIRECTIONS {
        // 0, +π/8, −π/8, +2π/8, …
        let k = j.div_ceil(2) as f64 * if j % 2 == 1 { 1.0 } else { -1.0 };
        let e = chord.rotated(k * PI / 8.0);
        let Some(route) = route_along(e, q_minus, q_plus, target, cfg, delta, circle, clearance)? else {
            continue;
        };
        out.push(route);
        if out.len() >= max {
            break;
        }
    }
    if out.is_empty() {
        Err(Error::NoRoutingFound)
    } else {
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn route_along(
    e: Vec2,
    q_minus: Vec2,
    q_plus: Vec2,
    target: &ParityClass,
    cfg: &ProblemConfig,
    delta: f64,
    circle: f64,
    clearance: f64,
) -> Result<Option<Vec<Vec2>>> {
    let centres = cfg.centres();
    let n = centres.len();
    let normal = e.perp();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| centres[a].position.dot(e).total_cmp(&centres[b].position.dot(e)));
    let abscissa: Vec<f64> = order.iter().map(|&i| centres[i].position.dot(e)).collect();
    // centres too aligned across e cannot be threaded by a graph over e
    let min_step = abscissa.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if n > 1 && min_step < 0.2 * delta {
        return Ok(None);
    }
    let reach = if n > 1 { (0.45 * min_step).min(delta) } else { delta };

    let build = |sides: &[bool]| -> Vec<Vec2> {
        let mut pts = Vec::new();
        pts.push(q_minus);
        let xi_minus = q_minus.normalized();
        push_arc(&mut pts, xi_minus * circle, -e * circle, circle);
        for &i in &order {
            let c = centres[i].position;
            let off = normal * if sides[i] { delta } else { -delta };
            pts.push(c - e * reach + off);
            pts.push(c + off);
            pts.push(c + e * reach + off);
        }
        let xi_plus = q_plus.normalized();
        push_arc(&mut pts, e * circle, xi_plus * circle, circle);
        pts.push(q_plus);
        pts.dedup();
        pts
    };
    let clear = |pts: &[Vec2]| {
        pts.windows(2).all(|w| {
            centres
                .iter()
                .all(|c| point_segment_distance(c.position, w[0], w[1]) >= 1.5 * clearance)
        })
    };
    let class_of = |pts: &[Vec2]| -> Option<ParityClass> { parity_class(pts, cfg).ok() };

    let mut sides = alloc::vec![true; n];
    let first = build(&sides);
    if !clear(&first) {
        return Ok(None);
    }
    if let Some(base) = class_of(&first) {
        for i in 0..n {
            if base.bits()[i] != target.bits()[i] {
                sides[i] = !sides[i];
            }
        }
        let pts = build(&sides);
        if clear(&pts) && class_of(&pts).as_ref() == Some(target) {
            return Ok(Some(pts));
        }
    }
    // fall back to every side pattern in Gray-code order
    let mut sides = alloc::vec![true; n];
    for step in 1u64..(1u64 << n) {
        let flip = step.trailing_zeros() as usize;
        sides[flip] = !sides[flip];
        let pts = build(&sides);
        if clear(&pts) && class_of(&pts).as_ref() == Some(target) {
            return Ok(Some(pts));
        }
    }
    Ok(None)
}

/// Appends the shorter arc of the circle `|x| = r` from `a` to `b` (both on it).
fn push_arc(pts: &mut Vec<Vec2>, a: Vec2, b: Vec2, r: f64) {
    let sweep = atan2(a.cross(b), a.dot(b));
    let start = a.angle();
    let steps = ((sweep.abs() / (PI / 32.0)) as usize).max(1);
    for j in 0..=steps {
        pts.push(Vec2::from_angle(start + sweep * j as f64 / steps as f64) * r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Centre;
    use alloc::vec;

    fn pair() -> ProblemConfig {
        ProblemConfig::new(
            1.0,
            vec![Centre::new(Vec2::new(-0.5, 0.0), 1.0), Centre::new(Vec2::new(0.5, 0.0), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn both_separating_classes_are_reachable() {
        let cfg = pair();
        let (qm, qp) = (Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0));
        for bits in [vec![1, 0], vec![0, 1]] {
            let target = ParityClass::new(bits).unwrap();
            let p = seed_path(qm, qp, &target, &cfg, 0.1, 64).unwrap();
            assert_eq!(parity_class(p.nodes(), &cfg).unwrap(), target);
            for x in p.nodes() {
                assert!(cfg.min_centre_distance(*x).0 >= 0.1);
            }
        }
    }

    #[test]
    fn inadmissible_target_rejected() {
        let cfg = pair();
        let target = ParityClass::new(vec![1, 1]).unwrap();
        let r = seed_path(Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0), &target, &cfg, 0.1, 64);
        assert!(matches!(r, Err(Error::InadmissibleClass)));
    }
}
