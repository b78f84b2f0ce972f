//! JSON path files.
//!
//! Either a list of waypoints, compiled into straight paths between
//! consecutive entries (`duration` is the time to reach that waypoint and is
//! ignored on the first one):
//!
//! ```json
//! {"waypoints": [
//!   {"pose": {"translation": [0, 0, 3]}, "joints": [0, 0, 0, 0]},
//!   {"pose": {"translation": [1, 0, 3], "axis_angle": [0, 0, 0.2]}, "joints": [0, 0.5, 0, 0], "duration": 2.0}
//! ]}
//! ```
//!
//! or explicit constant-twist segments:
//!
//! ```json
//! {"segments": [{"start_pose": {"translation": [0, 0, 3]}, "v_p": [0.5, 0, 0], "w_p": [0, 0, 0.1],
//!                "q_start": [0, 0, 0, 0], "q_end": [0, 0.5, 0, 0], "duration": 2.0}]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PathError, PiecewisePath, StraightPath};
use crate::geometry::Vec3;
use crate::model::{PoseSpec, SceneFileError};

#[derive(Debug, Error)]
pub enum PathFileError {
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
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl From<serde_json::Error> for PathFileError {
    fn from(e: serde_json::Error) -> Self {
        PathFileError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn field_error(field: String, e: impl std::fmt::Display) -> PathFileError {
    PathFileError::Field {
        field,
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointEntry {
    pub pose: PoseSpec,
    #[serde(default)]
    pub joints: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub start_pose: PoseSpec,
    pub v_p: [f64; 3],
    pub w_p: [f64; 3],
    #[serde(default)]
    pub q_start: Vec<f64>,
    #[serde(default)]
    pub q_end: Vec<f64>,
    pub duration: f64,
}

/// On-disk path document; exactly one of the two lists is present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<WaypointEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentEntry>>,
}

impl PathFile {
    /// Explicit-segment form of a path.
    pub fn from_piecewise(path: &PiecewisePath) -> Self {
        let segments = path
            .segments()
            .iter()
            .map(|s| SegmentEntry {
                start_pose: PoseSpec::from_pose(s.start_pose()),
                v_p: (*s.linear_velocity()).into(),
                w_p: (*s.angular_velocity()).into(),
                q_start: s.q_start().to_vec(),
                q_end: s.q_end().to_vec(),
                duration: s.duration(),
            })
            .collect();
        Self {
            waypoints: None,
            segments: Some(segments),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("path documents always serialize")
    }

    /// Compiles the document, checking joint vectors against `joint_count`.
    pub fn compile(&self, joint_count: usize) -> Result<PiecewisePath, PathFileError> {
        let segments = match (&self.waypoints, &self.segments) {
            (Some(w), None) => compile_waypoints(w)?,
            (None, Some(s)) => s
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let field = format!("segments[{k}]");
                    let start = e
                        .start_pose
                        .to_pose(&format!("{field}.start_pose"))
                        .map_err(|e| scene_field(e))?;
                    StraightPath::new(
                        start,
                        Vec3::from(e.v_p),
                        Vec3::from(e.w_p),
                        e.q_start.clone(),
                        e.q_end.clone(),
                        e.duration,
                    )
                    .map_err(|err| field_error(field, err))
                })
                .collect::<Result<Vec<_>, _>>()?,
            _ => {
                return Err(PathFileError::Field {
                    field: "<root>".into(),
                    message: "expected exactly one of `waypoints` or `segments`".into(),
                })
            }
        };
        for (k, s) in segments.iter().enumerate() {
            s.check_joint_count(joint_count)
                .map_err(|e| field_error(format!("segment {k}"), e))?;
        }
        PiecewisePath::new(segments).map_err(|e| match e {
            PathError::Discontinuous(k) => field_error(format!("segments[{k}].start_pose"), e),
            other => field_error("<root>".into(), other),
        })
    }
}

fn scene_field(e: SceneFileError) -> PathFileError {
    match e {
        SceneFileError::Field { field, message } => PathFileError::Field { field, message },
        other => field_error("<pose>".into(), other),
    }
}

fn compile_waypoints(w: &[WaypointEntry]) -> Result<Vec<StraightPath>, PathFileError> {
    if w.len() < 2 {
        return Err(field_error("waypoints".into(), "at least two waypoints are required"));
    }
    let poses = w
        .iter()
        .enumerate()
        .map(|(k, e)| e.pose.to_pose(&format!("waypoints[{k}].pose")).map_err(scene_field))
        .collect::<Result<Vec<_>, _>>()?;
    (1..w.len())
        .map(|k| {
            let field = format!("waypoints[{k}]");
            let duration = w[k]
                .duration
                .ok_or_else(|| field_error(format!("{field}.duration"), "missing"))?;
            StraightPath::between(&poses[k - 1], &poses[k], &w[k - 1].joints, &w[k].joints, duration)
                .map_err(|e| field_error(field, e))
        })
        .collect()
}

/// Parses path JSON for a scene whose arm has `joint_count` joints.
pub fn parse_path(text: &str, joint_count: usize) -> Result<PiecewisePath, PathFileError> {
    let file: PathFile = serde_json::from_str(text)?;
    file.compile(joint_count)
}

pub fn load_path(path: impl AsRef<Path>, joint_count: usize) -> Result<PiecewisePath, PathFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PathFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_path(&text, joint_count)
}
