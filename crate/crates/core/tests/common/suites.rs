//! Randomized comparison loops shared by the integration tests (small
//! counts) and the acceptance target (full counts).

use cdpr_ccd::bounds::{pair_bounds, PathMotion};
use cdpr_ccd::geometry::{
    capsule_capsule_distance, capsule_mesh_distance, mesh_mesh_distance, segment_segment_distance,
    segment_triangle_distance, Capsule, DistanceResult, Pose, Segment, Vec3,
};
use cdpr_ccd::model::{enumerate_collision_elements, PairKind};
use rand::RngExt;

use super::*;

#[derive(Debug, Default)]
pub struct Outcome {
    pub checked: usize,
    /// Largest `|library − oracle|`, or largest speed/bound ratio.
    pub worst: f64,
    pub failures: Vec<String>,
}

impl Outcome {
    fn fail(&mut self, message: String) {
        if self.failures.len() < 10 {
            self.failures.push(message);
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const AGREEMENT: f64 = 1e-3;
pub const LOWER_BOUND_SLACK: f64 = 1e-9;

fn compare(out: &mut Outcome, what: &str, lib: &DistanceResult, oracle: f64) {
    out.checked += 1;
    let gap = (lib.distance - oracle).abs();
    out.worst = out.worst.max(gap);
    if lib.distance > oracle + LOWER_BOUND_SLACK {
        out.fail(format!("{what}: library {} exceeds oracle {oracle}", lib.distance));
    } else if gap > AGREEMENT {
        out.fail(format!("{what}: library {} vs oracle {oracle}", lib.distance));
    }
    let witness = (lib.witness_a - lib.witness_b).norm();
    if lib.distance > 0.0 && (witness - lib.distance).abs() > 1e-9 {
        out.fail(format!("{what}: witness gap {witness} vs distance {}", lib.distance));
    }
}

fn symmetric(out: &mut Outcome, what: &str, ab: f64, ba: f64) {
    if (ab - ba).abs() > 1e-12 {
        out.fail(format!("{what}: asymmetric {ab} vs {ba}"));
    }
}

fn sampled_lower_bound(out: &mut Outcome, what: &str, lib: f64, sampled: f64) {
    if sampled < lib - LOWER_BOUND_SLACK {
        out.fail(format!("{what}: sampled pair at {sampled} below library {lib}"));
    }
}

pub fn segment_suite(n: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..n {
        let s1 = random_segment(&mut rng, 1.0);
        let s2 = random_segment(&mut rng, 1.0);
        let lib = segment_segment_distance(&s1, &s2);
        compare(&mut out, &format!("segment-segment #{k}"), &lib, segment_segment_oracle(&s1, &s2));
        symmetric(&mut out, "segment-segment", lib.distance, segment_segment_distance(&s2, &s1).distance);

        let tri = [random_vec(&mut rng, 1.0), random_vec(&mut rng, 1.0), random_vec(&mut rng, 1.0)];
        if (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm() < 1e-3 {
            continue;
        }
        let lib = segment_triangle_distance(&s1, &tri);
        compare(&mut out, &format!("segment-triangle #{k}"), &lib, segment_triangle_oracle(&s1, &tri));
    }
    out
}

pub fn capsule_capsule_suite(n: usize, samples: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..n {
        let c1 = Capsule::new(random_segment(&mut rng, 1.0), uniform(&mut rng, 0.0, 0.2));
        let c2 = Capsule::new(random_segment(&mut rng, 1.0), uniform(&mut rng, 0.0, 0.2));
        let lib = capsule_capsule_distance(&c1, &c2);
        let what = format!("capsule-capsule #{k}");
        compare(&mut out, &what, &lib, capsule_capsule_oracle(&c1, &c2));
        symmetric(&mut out, &what, lib.distance, capsule_capsule_distance(&c2, &c1).distance);
        let sampled = (0..samples)
            .map(|_| (sample_capsule_point(&mut rng, &c1) - sample_capsule_point(&mut rng, &c2)).norm())
            .fold(f64::INFINITY, f64::min);
        sampled_lower_bound(&mut out, &what, lib.distance, sampled);
    }
    out
}

pub fn capsule_mesh_suite(n: usize, samples: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..n {
        let mesh = random_convex(&mut rng);
        let pose = random_pose(&mut rng, 0.5);
        let capsule = Capsule::new(random_segment(&mut rng, 1.5), uniform(&mut rng, 0.0, 0.2));
        let lib = capsule_mesh_distance(&capsule, &mesh, &pose);
        let what = format!("capsule-mesh #{k}");
        compare(&mut out, &what, &lib, capsule_convex_oracle(&capsule, &mesh, &pose));
        let tris = placed_triangles(&mesh, &pose);
        let sampled = (0..samples)
            .map(|_| (sample_capsule_point(&mut rng, &capsule) - sample_surface_point(&mut rng, &tris)).norm())
            .fold(f64::INFINITY, f64::min);
        sampled_lower_bound(&mut out, &what, lib.distance, sampled);
    }
    out
}

pub fn mesh_mesh_suite(n: usize, samples: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..n {
        let m1 = random_convex(&mut rng);
        let m2 = random_convex(&mut rng);
        let p1 = random_pose(&mut rng, 0.8);
        let p2 = random_pose(&mut rng, 0.8);
        let lib = mesh_mesh_distance(&m1, &p1, &m2, &p2);
        let what = format!("mesh-mesh #{k}");
        compare(&mut out, &what, &lib, convex_convex_oracle(&m1, &p1, &m2, &p2));
        symmetric(&mut out, &what, lib.distance, mesh_mesh_distance(&m2, &p2, &m1, &p1).distance);
        let (t1, t2) = (placed_triangles(&m1, &p1), placed_triangles(&m2, &p2));
        let sampled = (0..samples)
            .map(|_| (sample_surface_point(&mut rng, &t1) - sample_surface_point(&mut rng, &t2)).norm())
            .fold(f64::INFINITY, f64::min);
        sampled_lower_bound(&mut out, &what, lib.distance, sampled);
    }
    out
}

/// The closed-form geometry cases, each checked at 1e-9.
pub fn closed_forms() -> Outcome {
    let v = Vec3::new;
    let seg = |a: Vec3, b: Vec3| Segment::new(a, b);
    let unit_box = cdpr_ccd::geometry::TriangleMesh::cuboid(Vec3::zeros(), Vec3::repeat(0.5));
    let h = 1.7;
    let cases: Vec<(&str, f64, f64)> = vec![
        (
            "parallel offset segments",
            segment_segment_distance(&seg(v(0., 0., 0.), v(1., 0., 0.)), &seg(v(0., 1., 1.), v(1., 1., 1.))).distance,
            2f64.sqrt(),
        ),
        (
            "crossing segments",
            segment_segment_distance(&seg(v(0., 0., 0.), v(1., 0., 0.)), &seg(v(0.5, -1., 0.), v(0.5, 1., 0.))).distance,
            0.0,
        ),
        (
            "segment above triangle",
            segment_triangle_distance(&seg(v(0., 0., 1.), v(1., 0., 1.)), &[v(0., 0., 0.), v(2., 0., 0.), v(0., 2., 0.)])
                .distance,
            1.0,
        ),
        (
            "segment piercing triangle",
            segment_triangle_distance(&seg(v(0.3, 0.3, -1.), v(0.3, 0.3, 1.)), &[v(0., 0., 0.), v(2., 0., 0.), v(0., 2., 0.)])
                .distance,
            0.0,
        ),
        (
            "capsules around parallel axes",
            capsule_capsule_distance(
                &Capsule::new(seg(v(0., 0., 0.), v(1., 0., 0.)), 0.01),
                &Capsule::new(seg(v(0., 1., 1.), v(1., 1., 1.)), 0.01),
            )
            .distance,
            2f64.sqrt() - 0.02,
        ),
        (
            "overlapping capsules",
            capsule_capsule_distance(
                &Capsule::new(seg(v(0., 0., 0.), v(1., 0., 0.)), 0.3),
                &Capsule::new(seg(v(0., 0.5, 0.), v(1., 0.5, 0.)), 0.3),
            )
            .distance,
            0.0,
        ),
        (
            "capsule above unit box",
            capsule_mesh_distance(&Capsule::new(seg(v(-1., 0., h), v(1., 0., h)), 0.05), &unit_box, &Pose::identity())
                .distance,
            h - 0.5 - 0.05,
        ),
        (
            "capsule end inside unit box",
            capsule_mesh_distance(&Capsule::new(seg(v(0., 0., 0.), v(0., 0., 3.)), 0.05), &unit_box, &Pose::identity())
                .distance,
            0.0,
        ),
        (
            "unit boxes with a 0.5 gap",
            mesh_mesh_distance(&unit_box, &Pose::identity(), &unit_box, &Pose::from_translation(v(1.5, 0., 0.))).distance,
            0.5,
        ),
        (
            "interpenetrating boxes",
            mesh_mesh_distance(&unit_box, &Pose::identity(), &unit_box, &Pose::from_translation(v(0.7, 0.2, 0.))).distance,
            0.0,
        ),
    ];
    let mut out = Outcome::default();
    for (name, got, want) in cases {
        out.checked += 1;
        out.worst = out.worst.max((got - want).abs());
        if (got - want).abs() > 1e-9 {
            out.fail(format!("{name}: {got} vs {want}"));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundFamily {
    CablePlatform,
    CableCable,
    CableArm,
    BodyBody,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 4] = [Self::CablePlatform, Self::CableCable, Self::CableArm, Self::BodyBody];

    fn matches(self, kind: &PairKind) -> bool {
        matches!(
            (self, kind),
            (Self::CablePlatform, PairKind::CablePlatform(_))
                | (Self::CableCable, PairKind::CableCable(..))
                | (Self::CableArm, PairKind::CableArmBody(..))
                | (Self::BodyBody, PairKind::BodyBody(..))
        )
    }
}

pub const FD_STEP: f64 = 1e-6;
/// Rounding noise of a central difference on metre-scale coordinates.
pub const FD_NOISE: f64 = 1e-8;

/// Finite-difference relative speeds of `family` elements against their `Vmax`.
pub fn velocity_suite(family: BoundFamily, instances: usize, samples: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    let mut done = 0;
    while done < instances {
        let scene = perturbed_scene(&mut rng);
        let kinds: Vec<PairKind> = enumerate_collision_elements(&scene)
            .into_iter()
            .filter(|k| family.matches(k))
            .collect();
        if kinds.is_empty() {
            continue;
        }
        let path = random_path(&mut rng, &scene, 1.0);
        let motion = PathMotion::new(&scene, &path).unwrap();
        let h = FD_STEP;
        for _ in 0..samples {
            let kind = kinds[rng.random_range(0..kinds.len())];
            let v_max = pair_bounds(&scene, &motion, kind).unwrap().v_max;
            let t = uniform(&mut rng, h, path.duration() - h);
            let x = relative_point(&scene, &path, kind, &mut rng);
            let speed = fd_speed(x, t, h);
            out.checked += 1;
            if v_max > 0.0 {
                out.worst = out.worst.max(speed / v_max);
            }
            if speed > v_max * (1.0 + 1e-6) + FD_NOISE {
                out.fail(format!("instance {done}, {kind} at t={t}: speed {speed} exceeds bound {v_max}"));
            }
        }
        done += 1;
    }
    out
}
