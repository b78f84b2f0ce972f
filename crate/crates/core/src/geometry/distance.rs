use super::{Capsule, DistanceResult, Segment, Vec3};

/// Closest point of `seg` to `p`, with its segment parameter in `[0, 1]`.
pub fn point_segment_closest(p: &Vec3, seg: &Segment) -> (Vec3, f64) {
    let d = seg.b - seg.a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (seg.a, 0.0);
    }
    let s = ((p - seg.a).dot(&d) / len2).clamp(0.0, 1.0);
    (seg.a + d * s, s)
}

/// Exact distance between two segments.
///
/// The squared distance is a convex quadratic on the unit parameter square,
/// so its minimum is either the interior stationary point or lies on one of
/// the four edges of the square, each of which is a point/segment query.
pub fn segment_segment_distance(s1: &Segment, s2: &Segment) -> DistanceResult {
    segment_segment_raw(s1, s2).snapped()
}

pub(crate) fn segment_segment_raw(s1: &Segment, s2: &Segment) -> DistanceResult {
    let mut best = {
        let (q, _) = point_segment_closest(&s1.a, s2);
        DistanceResult::between(s1.a, q)
    };
    let mut consider = |r: DistanceResult| {
        if r.distance < best.distance {
            best = r;
        }
    };
    let (q, _) = point_segment_closest(&s1.b, s2);
    consider(DistanceResult::between(s1.b, q));
    let (q, _) = point_segment_closest(&s2.a, s1);
    consider(DistanceResult::between(q, s2.a));
    let (q, _) = point_segment_closest(&s2.b, s1);
    consider(DistanceResult::between(q, s2.b));

    let d1 = s1.b - s1.a;
    let d2 = s2.b - s2.a;
    let r = s1.a - s2.a;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let b = d1.dot(&d2);
    let c = d1.dot(&r);
    let f = d2.dot(&r);
    let denom = a * e - b * b;
    // Parallel (or degenerate) axes always attain their minimum on an edge.
    if denom > 1e-14 * a * e && a > 0.0 && e > 0.0 {
        let s = (b * f - c * e) / denom;
        let t = (a * f - b * c) / denom;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            consider(DistanceResult::between(s1.point_at(s), s2.point_at(t)));
        }
    }
    best
}

/// Closest point of triangle `(a, b, c)` to `p` (Voronoi-region walk).
pub fn point_triangle_closest(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Exact distance between a segment and a solid (filled) triangle.
pub fn segment_triangle_distance(seg: &Segment, tri: &[Vec3; 3]) -> DistanceResult {
    segment_triangle_raw(seg, tri).snapped()
}

pub(crate) fn segment_triangle_raw(seg: &Segment, tri: &[Vec3; 3]) -> DistanceResult {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let da = n.dot(&(seg.a - a));
    let db = n.dot(&(seg.b - a));
    if da * db < 0.0 {
        let x = seg.point_at(da / (da - db));
        let q = point_triangle_closest(&x, a, b, c);
        let scale = 1.0 + x.amax();
        if (q - x).norm() <= 1e-12 * scale {
            return DistanceResult {
                distance: 0.0,
                witness_a: x,
                witness_b: q,
            };
        }
    }

    let q = point_triangle_closest(&seg.a, a, b, c);
    let mut best = DistanceResult::between(seg.a, q);
    let q = point_triangle_closest(&seg.b, a, b, c);
    let r = DistanceResult::between(seg.b, q);
    if r.distance < best.distance {
        best = r;
    }
    for (p, q) in [(a, b), (b, c), (c, a)] {
        let r = segment_segment_raw(seg, &Segment::new(*p, *q));
        if r.distance < best.distance {
            best = r;
        }
    }
    best
}

/// Exact distance between two solid triangles.
///
/// If the triangles touch, some edge of one meets the other; otherwise the
/// closest pair involves an edge of one of them. Both cases reduce to
/// segment/triangle queries.
pub fn triangle_triangle_distance(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> DistanceResult {
    triangle_triangle_raw(t1, t2).snapped()
}

pub(crate) fn triangle_triangle_raw(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> DistanceResult {
    let mut best: Option<DistanceResult> = None;
    for k in 0..3 {
        let edge = Segment::new(t1[k], t1[(k + 1) % 3]);
        let r = segment_triangle_raw(&edge, t2);
        if best.is_none_or(|b| r.distance < b.distance) {
            best = Some(r);
        }
        if r.distance == 0.0 {
            return r;
        }
    }
    for k in 0..3 {
        let edge = Segment::new(t2[k], t2[(k + 1) % 3]);
        let r = segment_triangle_raw(&edge, t1).swapped();
        if best.is_none_or(|b| r.distance < b.distance) {
            best = Some(r);
        }
        if r.distance == 0.0 {
            return r;
        }
    }
    best.expect("six edge queries")
}

/// Exact capsule separation: axis distance minus both radii, floored at zero.
pub fn capsule_capsule_distance(c1: &Capsule, c2: &Capsule) -> DistanceResult {
    let axis = segment_segment_raw(&c1.axis, &c2.axis);
    inflate(axis, c1.radius, c2.radius)
}

/// Turns an axis-to-shape result into a surface-to-shape result.
pub(crate) fn inflate(axis: DistanceResult, ra: f64, rb: f64) -> DistanceResult {
    let gap = axis.distance - ra - rb;
    if gap <= super::CONTACT_TOLERANCE {
        return DistanceResult {
            distance: 0.0,
            ..axis
        };
    }
    let dir = (axis.witness_b - axis.witness_a) / axis.distance;
    DistanceResult {
        distance: gap,
        witness_a: axis.witness_a + dir * ra,
        witness_b: axis.witness_b - dir * rb,
    }
}
