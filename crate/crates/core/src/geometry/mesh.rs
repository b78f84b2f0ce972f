use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use super::distance::{inflate, point_segment_closest, segment_triangle_raw, triangle_triangle_raw};
use super::{Capsule, DistanceResult, Pose, Segment, Vec3, CONTACT_TOLERANCE};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read mesh {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("triangle {triangle} references vertex {index} but the mesh has {vertices} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertices: usize,
    },
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
    #[error("mesh has no non-degenerate triangle ({dropped} degenerate dropped)")]
    Empty { dropped: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        Self { min, max }
    }

    /// Euclidean gap between two boxes (0 when they overlap).
    pub fn gap(&self, other: &Aabb) -> f64 {
        let lo = (other.min - self.max).sup(&Vec3::zeros());
        let hi = (self.min - other.max).sup(&Vec3::zeros());
        (lo + hi).norm()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// Indexed triangle soup describing a body surface in its own frame.
///
/// Construction drops zero-area triangles. A mesh in which every edge is
/// shared by exactly two triangles is treated as the boundary of a solid,
/// so bodies buried entirely inside it also count as contact.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    tri_boxes: Vec<Aabb>,
    bounds: Aabb,
    sphere: (Vec3, f64),
    closed: bool,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        let mut kept = Vec::with_capacity(triangles.len());
        let mut dropped = 0;
        for (t, tri) in triangles.into_iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertices: vertices.len(),
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let scale = (b - a).norm_squared().max((c - a).norm_squared());
            if (b - a).cross(&(c - a)).norm() <= 1e-12 * scale || scale == 0.0 {
                dropped += 1;
            } else {
                kept.push(tri);
            }
        }
        if kept.is_empty() {
            return Err(MeshError::Empty { dropped });
        }
        let tri_boxes = kept
            .iter()
            .map(|t| Aabb::from_points(t.iter().map(|&i| &vertices[i])))
            .collect();
        let bounds = Aabb::from_points(kept.iter().flatten().map(|&i| &vertices[i]));
        let closed = is_closed(&kept);
        let centre = (bounds.min + bounds.max) / 2.0;
        let radius = kept
            .iter()
            .flatten()
            .map(|&i| (vertices[i] - centre).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            vertices,
            triangles: kept,
            tri_boxes,
            bounds,
            sphere: (centre, radius),
            closed,
        })
    }

    /// Axis-aligned box centered at `center` with the given half extents.
    pub fn cuboid(center: Vec3, half_extents: Vec3) -> Self {
        let h = half_extents;
        let vertices = (0..8)
            .map(|k| {
                let sx = if k & 1 == 0 { -1.0 } else { 1.0 };
                let sy = if k & 2 == 0 { -1.0 } else { 1.0 };
                let sz = if k & 4 == 0 { -1.0 } else { 1.0 };
                center + Vec3::new(sx * h.x, sy * h.y, sz * h.z)
            })
            .collect();
        // Outward-facing winding.
        let triangles = vec![
            [0, 2, 1],
            [1, 2, 3],
            [4, 5, 6],
            [5, 7, 6],
            [0, 1, 4],
            [1, 5, 4],
            [2, 6, 3],
            [3, 6, 7],
            [0, 4, 2],
            [2, 4, 6],
            [1, 3, 5],
            [3, 7, 5],
        ];
        Self::new(vertices, triangles).expect("cuboid with positive extents")
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, k: usize) -> [Vec3; 3] {
        self.triangles[k].map(|i| self.vertices[i])
    }

    /// True when the mesh bounds a solid (every edge used exactly twice).
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Largest distance from the frame origin to a vertex; bounds every surface point.
    pub fn max_vertex_norm(&self) -> f64 {
        self.triangles
            .iter()
            .flatten()
            .map(|&i| self.vertices[i].norm())
            .fold(0.0, f64::max)
    }

    /// Whether `p` (mesh frame) lies inside the enclosed solid.
    ///
    /// Uses the generalized winding number, which is ±1 inside a closed
    /// surface and 0 outside regardless of orientation consistency.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        self.closed && self.bounds.contains(p) && winding_number(&self.vertices, &self.triangles, p).abs() > 0.5
    }
}

fn is_closed(triangles: &[[usize; 3]]) -> bool {
    let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    edges.values().all(|&n| n == 2)
}

fn winding_number(vertices: &[Vec3], triangles: &[[usize; 3]], p: &Vec3) -> f64 {
    let mut total = 0.0;
    for t in triangles {
        let a = vertices[t[0]] - p;
        let b = vertices[t[1]] - p;
        let c = vertices[t[2]] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * PI)
}

/// Exact distance between a capsule (world frame) and a mesh placed at `mesh_pose`.
///
/// The witness on the capsule comes first.
pub fn capsule_mesh_distance(capsule: &Capsule, mesh: &TriangleMesh, mesh_pose: &Pose) -> DistanceResult {
    capsule_mesh_distance_below(capsule, mesh, mesh_pose, f64::INFINITY)
        .expect("unbounded query always resolves")
}

/// Like [`capsule_mesh_distance`], but returns `None` as soon as the
/// distance is known to be at least `cutoff`. Results below the cutoff are exact.
pub(crate) fn capsule_mesh_distance_below(
    capsule: &Capsule,
    mesh: &TriangleMesh,
    mesh_pose: &Pose,
    cutoff: f64,
) -> Option<DistanceResult> {
    let r = capsule.radius;
    let (centre, radius) = mesh.sphere;
    let world_centre = mesh_pose.transform_point(&centre);
    if (point_segment_closest(&world_centre, &capsule.axis).0 - world_centre).norm() - radius - r >= cutoff {
        return None;
    }
    let axis = Segment::new(
        mesh_pose.inverse_transform_point(&capsule.axis.a),
        mesh_pose.inverse_transform_point(&capsule.axis.b),
    );
    let axis_box = Aabb::from_points([&axis.a, &axis.b]);
    if axis_box.gap(&mesh.bounds) - r >= cutoff {
        return None;
    }

    let mut limit = cutoff + r;
    let mut best: Option<DistanceResult> = None;
    for (k, tri_box) in mesh.tri_boxes.iter().enumerate() {
        if axis_box.gap(tri_box) >= limit {
            continue;
        }
        let res = segment_triangle_raw(&axis, &mesh.triangle(k));
        if res.distance < limit {
            limit = res.distance;
            best = Some(res);
            if res.distance <= r + CONTACT_TOLERANCE {
                break;
            }
        }
    }

    let local = match best {
        Some(res) if res.distance > r + CONTACT_TOLERANCE && mesh.contains_point(&axis.a) => {
            DistanceResult {
                distance: 0.0,
                witness_a: axis.a,
                witness_b: axis.a,
            }
        }
        Some(res) => inflate(res, r, 0.0),
        None if mesh.contains_point(&axis.a) => DistanceResult {
            distance: 0.0,
            witness_a: axis.a,
            witness_b: axis.a,
        },
        None => return None,
    };
    Some(DistanceResult {
        distance: local.distance,
        witness_a: mesh_pose.transform_point(&local.witness_a),
        witness_b: mesh_pose.transform_point(&local.witness_b),
    })
}

/// Exact distance between two placed meshes; witness on `m1` first.
pub fn mesh_mesh_distance(m1: &TriangleMesh, pose1: &Pose, m2: &TriangleMesh, pose2: &Pose) -> DistanceResult {
    mesh_mesh_distance_below(m1, pose1, m2, pose2, f64::INFINITY).expect("unbounded query always resolves")
}

pub(crate) fn mesh_mesh_distance_below(
    m1: &TriangleMesh,
    pose1: &Pose,
    m2: &TriangleMesh,
    pose2: &Pose,
    cutoff: f64,
) -> Option<DistanceResult> {
    let c1 = pose1.transform_point(&m1.sphere.0);
    let c2 = pose2.transform_point(&m2.sphere.0);
    if (c1 - c2).norm() - m1.sphere.1 - m2.sphere.1 >= cutoff {
        return None;
    }
    // Work in m1's frame.
    let rel = pose1.inverse().compose(pose2);
    let v2: Vec<Vec3> = m2.vertices.iter().map(|v| rel.transform_point(v)).collect();
    let bounds2 = Aabb::from_points(m2.triangles.iter().flatten().map(|&i| &v2[i]));
    if bounds2.gap(&m1.bounds) >= cutoff {
        return None;
    }

    let mut limit = cutoff;
    let mut best: Option<DistanceResult> = None;
    'outer: for t2 in &m2.triangles {
        let tri2 = t2.map(|i| v2[i]);
        let box2 = Aabb::from_points(&tri2);
        if box2.gap(&m1.bounds) >= limit {
            continue;
        }
        for (k, box1) in m1.tri_boxes.iter().enumerate() {
            if box1.gap(&box2) >= limit {
                continue;
            }
            let res = triangle_triangle_raw(&m1.triangle(k), &tri2);
            if res.distance < limit {
                limit = res.distance;
                best = Some(res);
                if res.distance <= CONTACT_TOLERANCE {
                    break 'outer;
                }
            }
        }
    }

    let touching = best.is_some_and(|b| b.distance <= CONTACT_TOLERANCE);
    let local = if touching {
        best.map(DistanceResult::snapped)
    } else if let Some(p) = buried_vertex(m1, m2, &v2, &bounds2) {
        Some(DistanceResult {
            distance: 0.0,
            witness_a: p,
            witness_b: p,
        })
    } else {
        best
    }?;
    Some(DistanceResult {
        distance: local.distance,
        witness_a: pose1.transform_point(&local.witness_a),
        witness_b: pose1.transform_point(&local.witness_b),
    })
}

/// A vertex of one mesh strictly inside the other (both in m1's frame).
fn buried_vertex(m1: &TriangleMesh, m2: &TriangleMesh, v2: &[Vec3], bounds2: &Aabb) -> Option<Vec3> {
    if m1.closed {
        if let Some(p) = v2.iter().find(|p| m1.contains_point(p)) {
            return Some(*p);
        }
    }
    if m2.closed {
        for p in &m1.vertices {
            if bounds2.contains(p) && winding_number(v2, &m2.triangles, p).abs() > 0.5 {
                return Some(*p);
            }
        }
    }
    None
}
