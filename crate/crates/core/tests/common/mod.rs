//! Reference computations shared by the integration and acceptance tests.
//!
//! Distances come from parameter searches and half-space tests rather than
//! the closed forms in the library; speeds come from finite differences of
//! point trajectories.

#![allow(dead_code)]

pub mod suites;

use cdpr_ccd::bounds::{moving_and_reference, pair_distance, Configuration};
use cdpr_ccd::ccd::Counters;
use cdpr_ccd::discretized::check_configuration;
use cdpr_ccd::fixture::synthetic_cdpr;
use cdpr_ccd::geometry::{exp_rotation, Capsule, Pose, Segment, TriangleMesh, Vec3};
use cdpr_ccd::model::{BodyId, JointKind, PairKind, Scene};
use cdpr_ccd::path::StraightPath;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, half: f64) -> Vec3 {
    Vec3::new(
        uniform(rng, -half, half),
        uniform(rng, -half, half),
        uniform(rng, -half, half),
    )
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = random_vec(rng, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_pose(rng: &mut ChaCha8Rng, half: f64) -> Pose {
    let axis = random_unit(rng);
    let angle = uniform(rng, 0.0, 3.0);
    Pose::new(exp_rotation(&axis, angle), random_vec(rng, half))
}

pub fn random_segment(rng: &mut ChaCha8Rng, half: f64) -> Segment {
    Segment::new(random_vec(rng, half), random_vec(rng, half))
}

// ---------------------------------------------------------------- geometry

/// Minimum of a convex function on `[lo, hi]` by ternary search.
pub fn ternary_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..64 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    f((a + b) / 2.0).min(f(lo)).min(f(hi))
}

fn lerp(a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
    a + (b - a) * s
}

/// Nested search over both segment parameters.
pub fn segment_segment_oracle(s1: &Segment, s2: &Segment) -> f64 {
    ternary_min(0.0, 1.0, |s| {
        let p = lerp(&s1.a, &s1.b, s);
        ternary_min(0.0, 1.0, |t| (p - lerp(&s2.a, &s2.b, t)).norm())
    })
}

fn point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let s = if d.norm_squared() > 0.0 { ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
    (p - lerp(a, b, s)).norm()
}

/// Plane projection when it lands inside the triangle, nearest edge otherwise.
pub fn point_triangle_oracle(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let area2 = n.norm_squared();
    let q = p - n * ((p - a).dot(&n) / area2);
    let wa = (b - q).cross(&(c - q)).dot(&n) / area2;
    let wb = (c - q).cross(&(a - q)).dot(&n) / area2;
    let wc = 1.0 - wa - wb;
    if wa >= 0.0 && wb >= 0.0 && wc >= 0.0 {
        return (p - q).norm();
    }
    point_segment(p, a, b).min(point_segment(p, b, c)).min(point_segment(p, c, a))
}

pub fn segment_triangle_oracle(seg: &Segment, tri: &[Vec3; 3]) -> f64 {
    ternary_min(0.0, 1.0, |s| point_triangle_oracle(&lerp(&seg.a, &seg.b, s), tri))
}

/// Two triangles meet only if an edge of one meets the other.
pub fn triangle_triangle_oracle(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for (x, y) in [(t1, t2), (t2, t1)] {
        for k in 0..3 {
            let edge = Segment::new(x[k], x[(k + 1) % 3]);
            best = best.min(segment_triangle_oracle(&edge, y));
        }
    }
    best
}

pub fn capsule_capsule_oracle(c1: &Capsule, c2: &Capsule) -> f64 {
    (segment_segment_oracle(&c1.axis, &c2.axis) - c1.radius - c2.radius).max(0.0)
}

/// World-frame triangles of a placed mesh.
pub fn placed_triangles(mesh: &TriangleMesh, pose: &Pose) -> Vec<[Vec3; 3]> {
    (0..mesh.triangles().len())
        .map(|k| mesh.triangle(k).map(|v| pose.transform_point(&v)))
        .collect()
}

/// Point-in-solid test for a convex mesh: behind every face plane, with
/// faces oriented away from the vertex centroid.
pub fn inside_convex(tris: &[[Vec3; 3]], p: &Vec3) -> bool {
    let centroid = tris.iter().flatten().fold(Vec3::zeros(), |acc, v| acc + v) / (3 * tris.len()) as f64;
    tris.iter().all(|[a, b, c]| {
        let mut n = (b - a).cross(&(c - a));
        if n.dot(&(centroid - a)) > 0.0 {
            n = -n;
        }
        n.dot(&(p - a)) <= 0.0
    })
}

pub fn capsule_convex_oracle(capsule: &Capsule, mesh: &TriangleMesh, pose: &Pose) -> f64 {
    let tris = placed_triangles(mesh, pose);
    if inside_convex(&tris, &capsule.axis.a) {
        return 0.0;
    }
    let d = tris
        .iter()
        .map(|t| segment_triangle_oracle(&capsule.axis, t))
        .fold(f64::INFINITY, f64::min);
    (d - capsule.radius).max(0.0)
}

pub fn convex_convex_oracle(m1: &TriangleMesh, p1: &Pose, m2: &TriangleMesh, p2: &Pose) -> f64 {
    let t1 = placed_triangles(m1, p1);
    let t2 = placed_triangles(m2, p2);
    let buried = |a: &[[Vec3; 3]], b: &[[Vec3; 3]]| a.iter().flatten().any(|v| inside_convex(b, v));
    if buried(&t1, &t2) || buried(&t2, &t1) {
        return 0.0;
    }
    let sphere = |t: &[Vec3; 3]| {
        let c = (t[0] + t[1] + t[2]) / 3.0;
        (c, t.iter().map(|v| (v - c).norm()).fold(0.0, f64::max))
    };
    let mut best = f64::INFINITY;
    for a in &t1 {
        let (ca, ra) = sphere(a);
        for b in &t2 {
            let (cb, rb) = sphere(b);
            // Skipped pairs are provably no closer than `best`.
            if (ca - cb).norm() - ra - rb >= best {
                continue;
            }
            best = best.min(triangle_triangle_oracle(a, b));
        }
    }
    best
}

/// A point of the capsule solid.
pub fn sample_capsule_point(rng: &mut ChaCha8Rng, c: &Capsule) -> Vec3 {
    let s = uniform(rng, 0.0, 1.0);
    lerp(&c.axis.a, &c.axis.b, s) + random_unit(rng) * c.radius
}

/// A point on the surface of a placed mesh.
pub fn sample_surface_point(rng: &mut ChaCha8Rng, tris: &[[Vec3; 3]]) -> Vec3 {
    let [a, b, c] = tris[rng.random_range(0..tris.len())];
    let (mut u, mut v) = (uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    a + (b - a) * u + (c - a) * v
}

pub fn random_cuboid(rng: &mut ChaCha8Rng) -> TriangleMesh {
    let half = Vec3::new(uniform(rng, 0.1, 0.8), uniform(rng, 0.1, 0.8), uniform(rng, 0.1, 0.8));
    TriangleMesh::cuboid(random_vec(rng, 0.2), half)
}

/// Random tetrahedron with a volume large enough to be well conditioned.
pub fn random_tetrahedron(rng: &mut ChaCha8Rng) -> TriangleMesh {
    loop {
        let v: Vec<Vec3> = (0..4).map(|_| random_vec(rng, 0.8)).collect();
        let volume = (v[1] - v[0]).cross(&(v[2] - v[0])).dot(&(v[3] - v[0])).abs() / 6.0;
        if volume > 0.02 {
            return TriangleMesh::new(v, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]).unwrap();
        }
    }
}

pub fn random_convex(rng: &mut ChaCha8Rng) -> TriangleMesh {
    if rng.random_bool(0.5) {
        random_cuboid(rng)
    } else {
        random_tetrahedron(rng)
    }
}

// -------------------------------------------------------------- kinematics

/// First colliding sample of `path` on `lo, lo + step, …` (and `hi`).
pub fn first_contact(scene: &Scene, kinds: &[PairKind], path: &StraightPath, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let n = ((hi - lo) / step).floor() as u64;
    (0..=n)
        .map(|k| lo + k as f64 * step)
        .filter(|&t| t <= hi)
        .chain(std::iter::once(hi))
        .find(|&t| contact_at(scene, kinds, path, t).is_some())
}

pub fn contact_at(scene: &Scene, kinds: &[PairKind], path: &StraightPath, t: f64) -> Option<PairKind> {
    let config = Configuration::at(scene, path, t).unwrap();
    check_configuration(scene, kinds, &config, t, &mut Counters::default())
        .unwrap()
        .map(|r| r.kind)
}

/// Every colliding sample of the path at the given step.
pub fn contact_samples(scene: &Scene, kinds: &[PairKind], path: &StraightPath, step: f64) -> Vec<f64> {
    let n = (path.duration() / step).floor() as u64;
    (0..=n)
        .map(|k| k as f64 * step)
        .filter(|&t| t <= path.duration())
        .filter(|&t| contact_at(scene, kinds, path, t).is_some())
        .collect()
}

/// Smallest element distance over samples of the path.
pub fn min_clearance(scene: &Scene, kinds: &[PairKind], path: &StraightPath, step: f64) -> f64 {
    let n = (path.duration() / step).ceil() as u64;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let t = (k as f64 * step).min(path.duration());
        let config = Configuration::at(scene, path, t).unwrap();
        for &kind in kinds {
            best = best.min(pair_distance(scene, &config, kind).unwrap().distance);
        }
    }
    best
}

/// The fixture robot with moved exit and attachment points, tilted joint
/// axes, shifted offsets and some joints turned prismatic.
pub fn perturbed_scene(rng: &mut ChaCha8Rng) -> Scene {
    let mut scene = synthetic_cdpr();
    for cable in &mut scene.cables {
        cable.exit += random_vec(rng, 0.5);
        cable.attach += random_vec(rng, 0.05);
    }
    for joint in &mut scene.arm {
        if rng.random_bool(0.5) {
            joint.axis = random_unit(rng);
        }
        joint.offset += random_vec(rng, 0.05);
        if rng.random_bool(0.25) {
            joint.kind = JointKind::Prismatic;
            joint.limits = (-0.2, 0.2);
        }
    }
    scene
}

/// A random straight path inside the fixture workspace whose bounds can be computed.
pub fn random_path(rng: &mut ChaCha8Rng, scene: &Scene, max_angle: f64) -> StraightPath {
    loop {
        let pose = |rng: &mut ChaCha8Rng| {
            let p = Vec3::new(uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, 2.0, 4.5));
            let axis = random_unit(rng);
            Pose::new(exp_rotation(&axis, uniform(rng, 0.0, max_angle)), p)
        };
        let joints = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            scene.arm.iter().map(|j| uniform(rng, j.limits.0, j.limits.1)).collect()
        };
        let (a, b) = (pose(rng), pose(rng));
        let (q0, q1) = (joints(rng), joints(rng));
        let duration = uniform(rng, 0.5, 3.0);
        let path = StraightPath::between(&a, &b, &q0, &q1, duration).unwrap();
        if cdpr_ccd::bounds::PathMotion::new(scene, &path).is_ok() {
            return path;
        }
    }
}

/// World position of the point at fraction `lambda` from exit to attachment.
pub fn cable_point(scene: &Scene, platform: &Pose, i: usize, lambda: f64) -> Vec3 {
    let cable = &scene.cables[i];
    lerp(&cable.exit, &platform.transform_point(&cable.attach), lambda)
}

/// Same, on the cable with its last `shorten_distance` metres removed.
pub fn shortened_cable_point(scene: &Scene, platform: &Pose, i: usize, lambda: f64) -> Vec3 {
    let cable = &scene.cables[i];
    let b = platform.transform_point(&cable.attach);
    let tip = b + (cable.exit - b) * (scene.shorten_distance / (cable.exit - b).norm());
    lerp(&cable.exit, &tip, lambda)
}

/// Pose of a rigid body at time `t`.
pub fn body_pose(scene: &Scene, path: &StraightPath, body: BodyId, t: f64) -> Pose {
    let config = Configuration::at(scene, path, t).unwrap();
    scene.body_placement(body, &config.platform, &config.frames).1
}

/// Central-difference speed of `x` at `t`.
pub fn fd_speed(x: impl Fn(f64) -> Vec3, t: f64, h: f64) -> f64 {
    (x(t + h) - x(t - h)).norm() / (2.0 * h)
}

/// A sampled relative trajectory for one element: the speed of a material
/// point of one body measured in the frame that the element's bound refers to.
pub fn relative_point<'a>(
    scene: &'a Scene,
    path: &'a StraightPath,
    kind: PairKind,
    rng: &mut ChaCha8Rng,
) -> Box<dyn Fn(f64) -> Vec3 + 'a> {
    let lambda = uniform(rng, 0.0, 1.0);
    let mu = uniform(rng, 0.0, 1.0);
    let config = |t: f64| Configuration::at(scene, path, t).unwrap();
    match kind {
        PairKind::CablePlatform(i) => Box::new(move |t| {
            let c = config(t);
            c.platform.inverse_transform_point(&shortened_cable_point(scene, &c.platform, i, lambda))
        }),
        PairKind::CableCable(i, j) => Box::new(move |t| {
            let c = config(t);
            cable_point(scene, &c.platform, i, lambda) - cable_point(scene, &c.platform, j, mu)
        }),
        PairKind::CableArmBody(i, k) => Box::new(move |t| {
            let c = config(t);
            c.frames[k].inverse_transform_point(&cable_point(scene, &c.platform, i, lambda))
        }),
        PairKind::CableEnvironment(i, _) => Box::new(move |t| cable_point(scene, &config(t).platform, i, lambda)),
        PairKind::BodyBody(a, b) => {
            let (moving, reference) = moving_and_reference(a, b);
            let (mesh, _) = scene.body_placement(moving, &Pose::identity(), &scene.arm_frames(&Pose::identity(), path.q_start()));
            let local_tris = placed_triangles(mesh, &Pose::identity());
            let y = sample_surface_point(rng, &local_tris);
            Box::new(move |t| {
                let m = body_pose(scene, path, moving, t);
                let r = body_pose(scene, path, reference, t);
                r.inverse_transform_point(&m.transform_point(&y))
            })
        }
    }
}
