//! Polyline geometry: transversal self-intersections.

use alloc::vec::Vec;

use crate::math::Vec2;

/// Indices `(i, j)` of segments `p_i p_{i+1}` and `p_j p_{j+1}` that cross transversally.
///
/// Adjacent segments are skipped, as is the wrap-around pair of a closed polyline
/// (first vertex equal to the last). Touching without crossing is not reported.
pub fn self_intersections(points: &[Vec2]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    let segs = n - 1;
    let closed = points[0] == points[n - 1];
    // bounding boxes, sorted by min x for a sweep
    let mut order: Vec<usize> = (0..segs).collect();
    let bbox = |i: usize| {
        let (a, b) = (points[i], points[i + 1]);
        (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y))
    };
    order.sort_by(|&i, &j| bbox(i).0.total_cmp(&bbox(j).0));
    for (oi, &i) in order.iter().enumerate() {
        let bi = bbox(i);
        for &j in &order[oi + 1..] {
            let bj = bbox(j);
            if bj.0 > bi.1 {
                break;
            }
            if bj.3 < bi.2 || bj.2 > bi.3 {
                continue;
            }
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if hi == lo + 1 || (closed && lo == 0 && hi == segs - 1) {
                continue;
            }
            if segments_cross(points[lo], points[lo + 1], points[hi], points[hi + 1]) {
                out.push((lo, hi));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Proper crossing: each segment's endpoints lie strictly on opposite sides of the other.
pub fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Distance from `p` to the segment `ab`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    let s = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * s)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;
    use alloc::vec;

    #[test]
    fn figure_eight_crosses_once() {
        // offset so that no vertex sits on the crossing point
        let mut pts: Vec<Vec2> = (0..200)
            .map(|k| {
                let t = TAU * (k as f64 + 0.3) / 200.0;
                Vec2::new(crate::math::sin(t), crate::math::sin(t) * crate::math::cos(t))
            })
            .collect();
        pts.push(pts[0]);
        assert_eq!(self_intersections(&pts).len(), 1);
    }

    #[test]
    fn straight_segment_never_crosses() {
        let pts: Vec<Vec2> = (0..50).map(|k| Vec2::new(k as f64, 2.0 * k as f64)).collect();
        assert!(self_intersections(&pts).is_empty());
    }

    #[test]
    fn bowtie() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        ];
        assert_eq!(self_intersections(&pts), vec![(0, 2)]);
    }
}
