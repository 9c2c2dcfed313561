//! Winding-parity bookkeeping for open paths between two points of equal norm.
//!
//! An open path from `q⁻` to `q⁺` is closed by the counterclockwise arc of the circle
//! `|x| = |q⁻|` running from `q⁺` back to `q⁻`. The parity of the winding number of
//! that loop around each centre is the class invariant preserved by the minimizer.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::geometry::point_segment_distance;
use crate::math::{atan2, polar_angle, round, Vec2, TAU};
use crate::potentials::ProblemConfig;
use crate::{Error, Result};

/// Default number of vertices used to discretize the closing arc.
pub const DEFAULT_ARC_NODES: usize = 128;

/// Winding parities `l ∈ {0,1}^N`, one per centre.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityClass {
    bits: Vec<u8>,
}

impl ParityClass {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("parity bits must be 0 or 1".into()));
        }
        Ok(ParityClass { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// At least two bits differ, so the class can separate the centres.
    pub fn is_admissible(&self) -> bool {
        self.bits.windows(2).any(|w| w[0] != w[1])
    }

    pub fn complement(&self) -> ParityClass {
        ParityClass { bits: self.bits.iter().map(|b| 1 - b).collect() }
    }
}

/// A nonempty proper subset of the centre indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    members: BTreeSet<usize>,
}

impl Partition {
    pub fn new(members: impl IntoIterator<Item = usize>, num_centres: usize) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::InvalidPartition("partition is empty".into()));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= num_centres) {
            return Err(Error::InvalidPartition(alloc::format!(
                "index {bad} out of range for {num_centres} centres"
            )));
        }
        if members.len() == num_centres {
            return Err(Error::InvalidPartition("partition contains every centre".into()));
        }
        Ok(Partition { members })
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn complement(&self, num_centres: usize) -> Result<Partition> {
        Partition::new((0..num_centres).filter(|i| !self.members.contains(i)), num_centres)
    }
}

/// `l_i = 1` iff centre `i` belongs to the partition.
pub fn partition_to_class(partition: &Partition, num_centres: usize) -> Result<ParityClass> {
    // re-validate: the partition may have been built for a different centre count
    let p = Partition::new(partition.members.iter().copied(), num_centres)?;
    Ok(ParityClass {
        bits: (0..num_centres).map(|i| p.contains(i) as u8).collect(),
    })
}

/// All `2^(N−1) − 1` unordered partitions, each represented by the part containing centre 0.
pub fn unordered_partitions(num_centres: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if num_centres < 2 || num_centres > 30 {
        return out;
    }
    let half = 1usize << (num_centres - 1);
    for mask in 0..half {
        // centre 0 always in, the remaining N−1 bits from mask; skip the full set
        let members: Vec<usize> = core::iter::once(0)
            .chain((1..num_centres).filter(|i| mask & (1 << (i - 1)) != 0))
            .collect();
        if members.len() < num_centres {
            out.push(Partition::new(members, num_centres).expect("proper by construction"));
        }
    }
    out
}

/// A closed polygonal loop; the first vertex is repeated at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPolyline {
    vertices: Vec<Vec2>,
}

impl ClosedPolyline {
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("closed polyline needs at least 3 vertices".into()));
        }
        if vertices.first() != vertices.last() {
            let first = vertices[0];
            vertices.push(first);
        }
        vertices.dedup();
        Ok(ClosedPolyline { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(1.0, f64::max)
    }

    /// Concatenation of two loops sharing their base point.
    pub fn concat(&self, other: &ClosedPolyline) -> Result<ClosedPolyline> {
        if self.vertices[0] != other.vertices[0] {
            return Err(Error::InvalidInput("loops do not share a base point".into()));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        ClosedPolyline::new(v)
    }

    pub fn reversed(&self) -> ClosedPolyline {
        let mut v = self.vertices.clone();
        v.reverse();
        ClosedPolyline { vertices: v }
    }
}

fn path_endpoints(path: &[Vec2]) -> Result<(Vec2, Vec2)> {
    if path.len() < 2 {
        return Err(Error::InvalidInput("path needs at least two nodes".into()));
    }
    let (q_minus, q_plus) = (path[0], path[path.len() - 1]);
    check_endpoints(q_minus, q_plus)?;
    Ok((q_minus, q_plus))
}

/// Endpoints must share their norm (relative tolerance `1e−9`) and be distinct.
pub fn check_endpoints(q_minus: Vec2, q_plus: Vec2) -> Result<()> {
    let (rm, rp) = (q_minus.norm(), q_plus.norm());
    if (rm - rp).abs() > 1e-9 * rm.max(rp) {
        return Err(Error::EndpointRadiusMismatch { r_minus: rm, r_plus: rp });
    }
    if q_minus == q_plus || (q_minus - q_plus).norm() <= 1e-12 * rm {
        return Err(Error::CoincidentEndpoints);
    }
    Ok(())
}

/// Counterclockwise angular span of the closing arc from `q⁺` to `q⁻`, as `(θ⁺, Δθ)`.
pub fn closing_arc(q_minus: Vec2, q_plus: Vec2) -> (f64, f64) {
    let theta_minus = polar_angle(q_minus);
    let theta_plus = polar_angle(q_plus);
    let sweep = if theta_minus < theta_plus {
        theta_minus - theta_plus + TAU
    } else {
        theta_minus - theta_plus
    };
    (theta_plus, sweep)
}

/// Appends the counterclockwise arc on `|x| = |q⁻|` from `q⁺` to `q⁻`.
pub fn close_path(path: &[Vec2], arc_nodes: usize) -> Result<ClosedPolyline> {
    let (q_minus, q_plus) = path_endpoints(path)?;
    let radius = q_minus.norm();
    let (theta_plus, sweep) = closing_arc(q_minus, q_plus);
    let n = arc_nodes.max(2);
    let mut vertices = Vec::with_capacity(path.len() + n + 1);
    vertices.extend_from_slice(path);
    for j in 1..n {
        let theta = theta_plus + sweep * j as f64 / n as f64;
        vertices.push(Vec2::from_angle(theta) * radius);
    }
    vertices.push(q_minus);
    ClosedPolyline::new(vertices)
}

/// Signed angle sum over the edges, in turns, without rounding.
pub fn winding_sum(poly: &ClosedPolyline, point: Vec2) -> f64 {
    let mut total = 0.0;
    for w in poly.vertices.windows(2) {
        let a = w[0] - point;
        let b = w[1] - point;
        total += atan2(a.cross(b), a.dot(b));
    }
    total / TAU
}

/// Integer winding number of `poly` around `point`.
pub fn winding_number(poly: &ClosedPolyline, point: Vec2) -> Result<i64> {
    let tol = 1e-9 * poly.scale();
    let distance = poly
        .vertices
        .windows(2)
        .map(|w| point_segment_distance(point, w[0], w[1]))
        .fold(f64::INFINITY, f64::min);
    if distance <= tol {
        return Err(Error::PointOnPath { distance });
    }
    let s = winding_sum(poly, point);
    let n = round(s);
    let residual = (s - n).abs();
    if residual >= 0.25 {
        return Err(Error::IllConditionedWinding { residual });
    }
    Ok(n as i64)
}

/// Winding parities of the closed path around every centre.
pub fn parity_class(path: &[Vec2], cfg: &ProblemConfig) -> Result<ParityClass> {
    parity_class_with_arc(path, cfg, DEFAULT_ARC_NODES)
}

pub fn parity_class_with_arc(
    path: &[Vec2],
    cfg: &ProblemConfig,
    arc_nodes: usize,
) -> Result<ParityClass> {
    let poly = close_path(path, arc_nodes)?;
    let bits = cfg
        .centres()
        .iter()
        .map(|c| winding_number(&poly, c.position).map(|w| w.rem_euclid(2) as u8))
        .collect::<Result<Vec<u8>>>()?;
    Ok(ParityClass { bits })
}

/// Whether two centres share a parity exactly when they lie on the same side of `partition`.
pub fn separates(path: &[Vec2], partition: &Partition, cfg: &ProblemConfig) -> Result<bool> {
    let n = cfg.num_centres();
    // validates the partition against this configuration
    partition_to_class(partition, n)?;
    let class = parity_class(path, cfg)?;
    Ok(class_separates(&class, partition))
}

/// The parity-only part of [`separates`].
pub fn class_separates(class: &ParityClass, partition: &Partition) -> bool {
    let b = class.bits();
    (0..b.len()).all(|i| {
        (0..i).all(|j| (b[i] == b[j]) == (partition.contains(i) == partition.contains(j)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{FRAC_PI_2, PI};
    use crate::potentials::Centre;
    use alloc::vec;

    fn square() -> ClosedPolyline {
        ClosedPolyline::new(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ])
        .unwrap()
    }

    fn two_centres() -> ProblemConfig {
        ProblemConfig::new(
            1.0,
            vec![
                Centre::new(Vec2::new(-0.5, 0.0), 1.0),
                Centre::new(Vec2::new(0.5, 0.0), 1.0),
            ],
        )
        .unwrap()
    }

    fn segment(a: Vec2, b: Vec2, n: usize) -> Vec<Vec2> {
        (0..=n).map(|k| a.lerp(b, k as f64 / n as f64)).collect()
    }

    #[test]
    fn square_winding() {
        assert_eq!(winding_number(&square(), Vec2::ZERO).unwrap(), 1);
        assert_eq!(winding_number(&square(), Vec2::new(5.0, 5.0)).unwrap(), 0);
        assert_eq!(winding_number(&square().reversed(), Vec2::ZERO).unwrap(), -1);
        assert!(matches!(
            winding_number(&square(), Vec2::new(1.0, 0.0)),
            Err(Error::PointOnPath { .. })
        ));
    }

    #[test]
    fn closure_branches() {
        let r = 3.0;
        let path = segment(Vec2::new(-r, 0.0), Vec2::new(r, 0.0), 10);
        let poly = close_path(&path, 64).unwrap();
        // arc runs through the upper half plane
        let mid = poly.vertices()[path.len() + 31];
        assert!(mid.y > 0.0);
        assert_eq!(winding_number(&poly, Vec2::new(0.0, 1.0)).unwrap(), 1);
        assert_eq!(winding_number(&poly, Vec2::new(0.0, -1.0)).unwrap(), 0);

        let qm = Vec2::from_angle(FRAC_PI_2) * r;
        let qp = Vec2::from_angle(1.5 * PI) * r;
        let (start, sweep) = closing_arc(qm, qp);
        assert!((start - 1.5 * PI).abs() < 1e-12);
        assert!((start + sweep - (FRAC_PI_2 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn closure_rejects_bad_endpoints() {
        let path = segment(Vec2::new(-3.0, 0.0), Vec2::new(2.0, 0.0), 4);
        assert!(matches!(close_path(&path, 16), Err(Error::EndpointRadiusMismatch { .. })));
        let path = vec![Vec2::new(3.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(3.0, 0.0)];
        assert_eq!(close_path(&path, 16), Err(Error::CoincidentEndpoints));
    }

    #[test]
    fn parity_examples() {
        let cfg = two_centres();
        let r = 5.0;
        // semicircular detour of radius 2 below both centres; the closing arc runs above
        let mut path = vec![Vec2::new(-r, 0.0)];
        path.extend((0..=32).map(|k| Vec2::from_angle(PI + PI * k as f64 / 32.0) * 2.0));
        path.push(Vec2::new(r, 0.0));
        let class = parity_class(&path, &cfg).unwrap();
        assert_eq!(class.bits(), &[1, 1]);
        assert!(!class.is_admissible());
        // the same detour above the centres shares the side of the closing arc
        let mirrored: Vec<Vec2> = path.iter().map(|p| Vec2::new(p.x, -p.y)).collect();
        assert_eq!(parity_class(&mirrored, &cfg).unwrap().bits(), &[0, 0]);

        // vertical chord between the centres: the closing arc sweeps the left half plane
        let path = segment(Vec2::new(0.0, -r), Vec2::new(0.0, r), 20);
        let class = parity_class(&path, &cfg).unwrap();
        assert_eq!(class.bits(), &[1, 0]);
        let p_right = Partition::new([1], 2).unwrap();
        let p_left = Partition::new([0], 2).unwrap();
        assert!(separates(&path, &p_right, &cfg).unwrap());
        assert!(separates(&path, &p_left, &cfg).unwrap());

        // far away chord whose closure encloses nothing
        let path = segment(Vec2::new(-3.0, 4.0), Vec2::new(3.0, 4.0), 10);
        let class = parity_class(&path, &cfg).unwrap();
        assert_eq!(class.bits(), &[0, 0]);
        assert!(!separates(&path, &p_left, &cfg).unwrap());
    }

    #[test]
    fn partitions() {
        let p = Partition::new([0], 2).unwrap();
        assert_eq!(partition_to_class(&p, 2).unwrap().bits(), &[1, 0]);
        let p = Partition::new([0, 2], 3).unwrap();
        assert_eq!(partition_to_class(&p, 3).unwrap().bits(), &[1, 0, 1]);
        assert!(matches!(Partition::new([0, 1], 2), Err(Error::InvalidPartition(_))));
        assert!(matches!(Partition::new([], 2), Err(Error::InvalidPartition(_))));
        assert_eq!(unordered_partitions(2).len(), 1);
        assert_eq!(unordered_partitions(3).len(), 3);
        assert_eq!(unordered_partitions(5).len(), 15);
    }

    #[test]
    fn double_loop_winds_twice() {
        let mut v: Vec<Vec2> = (0..64).map(|k| Vec2::from_angle(TAU * k as f64 / 32.0)).collect();
        v.push(v[0]);
        let poly = ClosedPolyline::new(v).unwrap();
        assert_eq!(winding_number(&poly, Vec2::new(0.1, 0.2)).unwrap(), 2);
    }
}
