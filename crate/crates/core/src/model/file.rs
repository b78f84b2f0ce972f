//! JSON scene files.
//!
//! ```json
//! {
//!   "cables": [{"exit": [5, 5, 6], "attach": [0.5, 0.5, 0.25], "radius": 0.01}],
//!   "platform": {"stl_path": "platform.stl", "radius": 0.75},
//!   "arm": [{"kind": "revolute", "axis": [0, 0, 1], "offset": [0, 0, -0.35],
//!            "limits": [-3, 3], "stl_path": "link0.stl"}],
//!   "environment": [{"stl_path": "pillar.stl", "pose": {"translation": [2, 1, 0]}}],
//!   "bounds": {"l_min": 1.0, "l_max": 20.0, "shorten_d": 0.1}
//! }
//! ```
//!
//! Mesh paths are resolved relative to the scene file.

use std::path::{Path, PathBuf};

use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_scene, CableSpec, Diagnostic, EnvironmentBody, JointKind, JointSpec, Scene};
use crate::geometry::stl::load_stl;
use crate::geometry::{exp_rotation, MeshError, Pose, Rotation, TriangleMesh, Vec3};

#[derive(Debug, Error)]
pub enum SceneFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {source}")]
    Mesh {
        field: String,
        #[source]
        source: MeshError,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("invalid scene: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

impl From<serde_json::Error> for SceneFileError {
    fn from(e: serde_json::Error) -> Self {
        SceneFileError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Rigid pose as written in files: a translation plus at most one of an
/// axis-angle vector (radians) or a `[w, x, y, z]` quaternion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub translation: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_angle: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quaternion: Option<[f64; 4]>,
}

impl PoseSpec {
    pub fn from_pose(pose: &Pose) -> Self {
        let r = pose.rotation.scaled_axis();
        Self {
            translation: pose.translation.into(),
            axis_angle: Some(r.into()),
            quaternion: None,
        }
    }

    pub fn to_pose(&self, field: &str) -> Result<Pose, SceneFileError> {
        let rotation = match (self.axis_angle, self.quaternion) {
            (Some(_), Some(_)) => {
                return Err(SceneFileError::Field {
                    field: field.into(),
                    message: "give either axis_angle or quaternion, not both".into(),
                })
            }
            (Some(aa), None) => exp_rotation(&Vec3::from(aa), 1.0),
            (None, Some([w, x, y, z])) => {
                let q = Quaternion::new(w, x, y, z);
                if !(q.norm() > 1e-12) {
                    return Err(SceneFileError::Field {
                        field: field.into(),
                        message: "quaternion must be non-zero".into(),
                    });
                }
                UnitQuaternion::from_quaternion(q).to_rotation_matrix()
            }
            (None, None) => Rotation::identity(),
        };
        Ok(Pose::new(rotation, Vec3::from(self.translation)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    cables: Vec<CableEntry>,
    platform: PlatformEntry,
    #[serde(default)]
    arm: Vec<JointEntry>,
    #[serde(default)]
    environment: Vec<EnvironmentEntry>,
    bounds: BoundsEntry,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CableEntry {
    exit: [f64; 3],
    attach: [f64; 3],
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformEntry {
    stl_path: PathBuf,
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum JointKindEntry {
    Revolute,
    Prismatic,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    kind: JointKindEntry,
    axis: [f64; 3],
    offset: [f64; 3],
    limits: [f64; 2],
    #[serde(default)]
    stl_path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentEntry {
    stl_path: PathBuf,
    #[serde(default)]
    pose: PoseSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsEntry {
    l_min: f64,
    l_max: f64,
    shorten_d: f64,
}

/// Reads and validates a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SceneFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scene(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses scene JSON, resolving mesh paths against `base_dir`.
pub fn parse_scene(text: &str, base_dir: &Path) -> Result<Scene, SceneFileError> {
    let file: SceneFile = serde_json::from_str(text)?;
    let mesh = |field: String, rel: &Path| -> Result<TriangleMesh, SceneFileError> {
        load_stl(base_dir.join(rel)).map_err(|source| SceneFileError::Mesh { field, source })
    };

    let cables = file
        .cables
        .iter()
        .map(|c| CableSpec::new(c.exit.into(), c.attach.into(), c.radius))
        .collect();
    let platform_mesh = mesh("platform.stl_path".into(), &file.platform.stl_path)?;
    let mut arm = Vec::with_capacity(file.arm.len());
    for (k, j) in file.arm.iter().enumerate() {
        let body = match &j.stl_path {
            Some(p) => Some(mesh(format!("arm[{k}].stl_path"), p)?),
            None => None,
        };
        arm.push(JointSpec {
            kind: match j.kind {
                JointKindEntry::Revolute => JointKind::Revolute,
                JointKindEntry::Prismatic => JointKind::Prismatic,
            },
            axis: j.axis.into(),
            offset: j.offset.into(),
            limits: (j.limits[0], j.limits[1]),
            body,
        });
    }
    let mut environment = Vec::with_capacity(file.environment.len());
    for (e, entry) in file.environment.iter().enumerate() {
        environment.push(EnvironmentBody {
            mesh: mesh(format!("environment[{e}].stl_path"), &entry.stl_path)?,
            pose: entry.pose.to_pose(&format!("environment[{e}].pose"))?,
        });
    }
    let scene = Scene {
        cables,
        platform_mesh,
        platform_radius: file.platform.radius,
        arm,
        environment,
        l_min: file.bounds.l_min,
        l_max: file.bounds.l_max,
        shorten_distance: file.bounds.shorten_d,
    };
    let diagnostics = validate_scene(&scene);
    if diagnostics.is_empty() {
        Ok(scene)
    } else {
        Err(SceneFileError::Invalid(diagnostics))
    }
}
