//! A synthetic eight-cable robot used by the tests, the benchmark and the
//! shipped `fixtures/` directory. Dimensions are plausible but invented; they
//! do not describe any real machine.
//!
//! Four posts at `(±5, ±5)` each carry one exit point at 6 m height shared by
//! two cables, attached to the top and bottom corners of a 1 × 1 × 0.5 m
//! platform. A four-joint arm hangs under the platform. The environment
//! holds a pillar, a table and a thin conduit bar.

use std::io;
use std::path::Path;

use serde_json::json;

use crate::geometry::stl::write_ascii_stl;
use crate::geometry::{exp_rotation, Pose, TriangleMesh, Vec3};
use crate::model::{CableSpec, EnvironmentBody, JointKind, JointSpec, PoseSpec, Scene};

const PLATFORM_HALF: [f64; 3] = [0.5, 0.5, 0.25];
const POST: f64 = 5.0;
const EXIT_HEIGHT: f64 = 6.0;
pub const CABLE_RADIUS: f64 = 0.01;
pub const SHORTEN_DISTANCE: f64 = 0.1;

struct LinkDef {
    kind: JointKind,
    axis: [f64; 3],
    offset: [f64; 3],
    limits: (f64, f64),
    center: [f64; 3],
    half: [f64; 3],
}

const LINKS: [LinkDef; 4] = [
    // Turret under the platform; touches it by design.
    LinkDef {
        kind: JointKind::Revolute,
        axis: [0.0, 0.0, 1.0],
        offset: [0.0, 0.0, -0.35],
        limits: (-3.0, 3.0),
        center: [0.0, 0.0, 0.05],
        half: [0.08, 0.08, 0.05],
    },
    LinkDef {
        kind: JointKind::Revolute,
        axis: [0.0, 1.0, 0.0],
        offset: [0.0, 0.0, -0.40],
        limits: (-1.5, 1.5),
        center: [0.0, 0.0, 0.2],
        half: [0.04, 0.04, 0.19],
    },
    LinkDef {
        kind: JointKind::Revolute,
        axis: [0.0, 1.0, 0.0],
        offset: [0.0, 0.0, -0.35],
        limits: (-2.0, 2.0),
        center: [0.0, 0.0, 0.175],
        half: [0.03, 0.03, 0.165],
    },
    LinkDef {
        kind: JointKind::Revolute,
        axis: [0.0, 0.0, 1.0],
        offset: [0.0, 0.0, -0.15],
        limits: (-3.0, 3.0),
        center: [0.0, 0.0, 0.075],
        half: [0.06, 0.02, 0.07],
    },
];

struct ObstacleDef {
    name: &'static str,
    half: [f64; 3],
    translation: [f64; 3],
    yaw: f64,
}

const OBSTACLES: [ObstacleDef; 3] = [
    ObstacleDef {
        name: "pillar",
        half: [0.15, 0.15, 2.0],
        translation: [2.6, 0.8, 2.0],
        yaw: 0.0,
    },
    ObstacleDef {
        name: "table",
        half: [0.6, 0.4, 0.4],
        translation: [-2.2, -1.6, 0.4],
        yaw: 0.3,
    },
    ObstacleDef {
        name: "conduit",
        half: [2.0, 0.015, 0.015],
        translation: [0.0, -3.0, 4.4],
        yaw: 0.0,
    },
];

fn obstacle_pose(o: &ObstacleDef) -> Pose {
    Pose::new(exp_rotation(&Vec3::z(), o.yaw), Vec3::from(o.translation))
}

fn corners() -> [(f64, f64); 4] {
    [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
}

fn cable_specs() -> Vec<CableSpec> {
    let [hx, hy, hz] = PLATFORM_HALF;
    let mut cables = Vec::new();
    for (sx, sy) in corners() {
        let exit = Vec3::new(sx * POST, sy * POST, EXIT_HEIGHT);
        for sz in [1.0, -1.0] {
            cables.push(CableSpec::new(
                exit,
                Vec3::new(sx * hx, sy * hy, sz * hz),
                CABLE_RADIUS,
            ));
        }
    }
    cables
}

fn platform_mesh() -> TriangleMesh {
    TriangleMesh::cuboid(Vec3::zeros(), Vec3::from(PLATFORM_HALF))
}

fn link_mesh(l: &LinkDef) -> TriangleMesh {
    TriangleMesh::cuboid(Vec3::from(l.center), Vec3::from(l.half))
}

/// The synthetic scene, built in code with exact coordinates.
pub fn synthetic_cdpr() -> Scene {
    let platform_mesh = platform_mesh();
    Scene {
        cables: cable_specs(),
        platform_radius: platform_mesh.max_vertex_norm(),
        platform_mesh,
        arm: LINKS
            .iter()
            .map(|l| JointSpec {
                kind: l.kind,
                axis: Vec3::from(l.axis),
                offset: Vec3::from(l.offset),
                limits: l.limits,
                body: Some(link_mesh(l)),
            })
            .collect(),
        environment: OBSTACLES
            .iter()
            .map(|o| EnvironmentBody {
                mesh: TriangleMesh::cuboid(Vec3::zeros(), Vec3::from(o.half)),
                pose: obstacle_pose(o),
            })
            .collect(),
        l_min: 1.0,
        l_max: 20.0,
        shorten_distance: SHORTEN_DISTANCE,
    }
}

/// Same robot with the environment removed.
pub fn synthetic_cdpr_without_environment() -> Scene {
    Scene {
        environment: Vec::new(),
        ..synthetic_cdpr()
    }
}

/// Writes `scene.json` and its STL meshes into `dir`.
pub fn write_fixture_files(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let stl = |name: &str, mesh: &TriangleMesh| -> io::Result<String> {
        let file = format!("{name}.stl");
        write_ascii_stl(mesh, name, std::fs::File::create(dir.join(&file))?)?;
        Ok(file)
    };
    let platform = stl("platform", &platform_mesh())?;
    let mut arm = Vec::new();
    for (k, l) in LINKS.iter().enumerate() {
        let file = stl(&format!("link{k}"), &link_mesh(l))?;
        arm.push(json!({
            "kind": match l.kind { JointKind::Revolute => "revolute", JointKind::Prismatic => "prismatic" },
            "axis": l.axis,
            "offset": l.offset,
            "limits": [l.limits.0, l.limits.1],
            "stl_path": file,
        }));
    }
    let mut environment = Vec::new();
    for o in &OBSTACLES {
        let file = stl(o.name, &TriangleMesh::cuboid(Vec3::zeros(), Vec3::from(o.half)))?;
        environment.push(json!({
            "stl_path": file,
            "pose": PoseSpec::from_pose(&obstacle_pose(o)),
        }));
    }
    let scene = synthetic_cdpr();
    let cables: Vec<_> = scene
        .cables
        .iter()
        .map(|c| {
            json!({
                "exit": [c.exit.x, c.exit.y, c.exit.z],
                "attach": [c.attach.x, c.attach.y, c.attach.z],
                "radius": c.radius,
            })
        })
        .collect();
    let doc = json!({
        "cables": cables,
        "platform": {"stl_path": platform, "radius": scene.platform_radius},
        "arm": arm,
        "environment": environment,
        "bounds": {"l_min": scene.l_min, "l_max": scene.l_max, "shorten_d": scene.shorten_distance},
    });
    let text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
    std::fs::write(dir.join("scene.json"), text + "\n")
}
