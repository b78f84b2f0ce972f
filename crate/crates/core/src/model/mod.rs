//! Scene description of a cable-driven parallel robot carrying an arm.
//!
//! The platform frame has its origin at the platform reference point `C`.
//! Arm joint `k` moves about (or along) its axis expressed in its parent
//! frame, at the parent frame's origin, and then applies its fixed
//! `offset`:
//!
//! ```text
//! frame_k = frame_{k-1} ∘ motion_k(q_k) ∘ translate(offset_k)
//! ```
//!
//! with `frame_{-1}` the platform frame. Joint `k` therefore rotates about a
//! point whose distance to `C` is bounded by the `k`-th cumulative length.

mod file;

pub use file::{load_scene, parse_scene, PoseSpec, SceneFileError};

use std::fmt;

use crate::geometry::{exp_rotation, Pose, TriangleMesh, Vec3};

/// Points closer than this are treated as coincident by the pair rules.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CableSpec {
    /// Exit point `A_i` on the fixed structure, world frame.
    pub exit: Vec3,
    /// Attachment point `B_i` on the platform, platform frame.
    pub attach: Vec3,
    /// Capsule radius, safety margin included.
    pub radius: f64,
}

impl CableSpec {
    pub fn new(exit: Vec3, attach: Vec3, radius: f64) -> Self {
        Self {
            exit,
            attach,
            radius,
        }
    }

    /// `b_i = |C B_i|`.
    pub fn attach_norm(&self) -> f64 {
        self.attach.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Clone, Debug)]
pub struct JointSpec {
    pub kind: JointKind,
    /// Unit axis in the parent frame.
    pub axis: Vec3,
    /// Fixed translation applied after the joint motion.
    pub offset: Vec3,
    pub limits: (f64, f64),
    /// Collision body rigidly attached to this joint's frame.
    pub body: Option<TriangleMesh>,
}

impl JointSpec {
    /// Transform from the parent frame to this joint's frame at position `q`.
    pub fn local_pose(&self, q: f64) -> Pose {
        match self.kind {
            JointKind::Revolute => {
                let r = exp_rotation(&self.axis, q);
                Pose::new(r, r * self.offset)
            }
            JointKind::Prismatic => Pose::from_translation(self.axis * q + self.offset),
        }
    }

    /// Largest displacement of a prismatic joint from its zero position.
    pub fn travel(&self) -> f64 {
        match self.kind {
            JointKind::Revolute => 0.0,
            JointKind::Prismatic => self.limits.0.abs().max(self.limits.1.abs()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnvironmentBody {
    pub mesh: TriangleMesh,
    pub pose: Pose,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub cables: Vec<CableSpec>,
    /// Platform collision model in the platform frame.
    pub platform_mesh: TriangleMesh,
    /// Upper bound on `|C x|` over the platform body.
    pub platform_radius: f64,
    pub arm: Vec<JointSpec>,
    pub environment: Vec<EnvironmentBody>,
    /// Workspace-wide cable length bounds.
    pub l_min: f64,
    pub l_max: f64,
    /// Length `d` cut from the platform end of each cable for cable/platform checks.
    pub shorten_distance: f64,
}

/// A rigid body of the scene other than a cable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyId {
    Platform,
    /// Body carried by arm joint `k`.
    Arm(usize),
    Environment(usize),
}

impl fmt::Display for BodyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyId::Platform => write!(f, "platform"),
            BodyId::Arm(k) => write!(f, "arm[{k}]"),
            BodyId::Environment(e) => write!(f, "environment[{e}]"),
        }
    }
}

/// One collision element: a pair of bodies checked against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairKind {
    CableCable(usize, usize),
    CablePlatform(usize),
    CableArmBody(usize, usize),
    CableEnvironment(usize, usize),
    BodyBody(BodyId, BodyId),
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairKind::CableCable(i, j) => write!(f, "cable[{i}]-cable[{j}]"),
            PairKind::CablePlatform(i) => write!(f, "cable[{i}]-platform"),
            PairKind::CableArmBody(i, k) => write!(f, "cable[{i}]-arm[{k}]"),
            PairKind::CableEnvironment(i, e) => write!(f, "cable[{i}]-environment[{e}]"),
            PairKind::BodyBody(a, b) => write!(f, "{a}-{b}"),
        }
    }
}

/// Cumulative offset lengths along the arm: `D[0] = 0`, `D[k] = Σ_{t<k} |offset_t|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeLengths(pub Vec<f64>);

impl CumulativeLengths {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A violated scene invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl Scene {
    /// World poses of every arm joint frame for a platform pose and joint vector.
    pub fn arm_frames(&self, platform: &Pose, q: &[f64]) -> Vec<Pose> {
        debug_assert_eq!(q.len(), self.arm.len());
        let mut frames = Vec::with_capacity(self.arm.len());
        let mut current = *platform;
        for (joint, &qk) in self.arm.iter().zip(q) {
            current = current.compose(&joint.local_pose(qk));
            frames.push(current);
        }
        frames
    }

    /// Mesh and world pose of a body, given the current platform pose and arm frames.
    pub fn body_placement<'a>(&'a self, body: BodyId, platform: &Pose, frames: &[Pose]) -> (&'a TriangleMesh, Pose) {
        match body {
            BodyId::Platform => (&self.platform_mesh, *platform),
            BodyId::Arm(k) => (
                self.arm[k].body.as_ref().expect("arm body without mesh"),
                frames[k],
            ),
            BodyId::Environment(e) => (&self.environment[e].mesh, self.environment[e].pose),
        }
    }

    /// Bodies that can take part in body/body pairs, in enumeration order.
    pub fn bodies(&self) -> Vec<BodyId> {
        let mut out = vec![BodyId::Platform];
        out.extend(
            self.arm
                .iter()
                .enumerate()
                .filter(|(_, j)| j.body.is_some())
                .map(|(k, _)| BodyId::Arm(k)),
        );
        out.extend((0..self.environment.len()).map(BodyId::Environment));
        out
    }
}

/// Checks every scene invariant; an empty list means the scene is usable.
pub fn validate_scene(scene: &Scene) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |field: String, message: String| out.push(Diagnostic { field, message });

    if scene.cables.is_empty() {
        push("cables".into(), "at least one cable is required".into());
    }
    for (i, c) in scene.cables.iter().enumerate() {
        if !(c.radius > 0.0) {
            push(format!("cables[{i}].radius"), format!("must be positive, got {}", c.radius));
        }
        if !c.exit.iter().all(|x| x.is_finite()) {
            push(format!("cables[{i}].exit"), "must be finite".into());
        }
        if !c.attach.iter().all(|x| x.is_finite()) {
            push(format!("cables[{i}].attach"), "must be finite".into());
        }
        if c.radius >= scene.shorten_distance {
            push(
                format!("cables[{i}].radius"),
                format!(
                    "must be smaller than the shorten distance {} or the shortened cable always touches the platform",
                    scene.shorten_distance
                ),
            );
        }
    }
    if !(scene.l_min > 0.0) {
        push("bounds.l_min".into(), format!("L_min must be positive, got {}", scene.l_min));
    }
    if !(scene.l_min <= scene.l_max) {
        push(
            "bounds.l_max".into(),
            format!("L_max ({}) must be at least L_min ({})", scene.l_max, scene.l_min),
        );
    }
    if !(scene.shorten_distance > 0.0) {
        push(
            "bounds.shorten_d".into(),
            format!("must be positive, got {}", scene.shorten_distance),
        );
    } else if scene.l_min > 0.0 && scene.shorten_distance >= scene.l_min {
        push(
            "bounds.shorten_d".into(),
            format!("must be below L_min ({})", scene.l_min),
        );
    }
    let vertex_norm = scene.platform_mesh.max_vertex_norm();
    if !(scene.platform_radius > 0.0) || scene.platform_radius + 1e-9 < vertex_norm {
        push(
            "platform.radius".into(),
            format!(
                "platform radius {} must be positive and cover every mesh vertex (max norm {vertex_norm})",
                scene.platform_radius
            ),
        );
    }
    for (k, j) in scene.arm.iter().enumerate() {
        if (j.axis.norm() - 1.0).abs() > 1e-9 {
            push(format!("arm[{k}].axis"), format!("must be a unit vector, norm is {}", j.axis.norm()));
        }
        if !(j.limits.0 <= j.limits.1) {
            push(
                format!("arm[{k}].limits"),
                format!("lower limit {} exceeds upper limit {}", j.limits.0, j.limits.1),
            );
        }
        if !j.offset.iter().all(|x| x.is_finite()) {
            push(format!("arm[{k}].offset"), "must be finite".into());
        }
    }
    out
}

fn coincident(a: &Vec3, b: &Vec3) -> bool {
    (a - b).norm() <= COINCIDENCE_TOLERANCE
}

/// True when a body/body pair is excluded as a designed contact
/// (arm base on the platform, or consecutive arm bodies).
pub fn is_parent_child(a: BodyId, b: BodyId) -> bool {
    matches!(
        (a.min(b), a.max(b)),
        (BodyId::Platform, BodyId::Arm(0))
    ) || matches!((a, b), (BodyId::Arm(x), BodyId::Arm(y)) if x.abs_diff(y) == 1)
}

/// Whether a cable pair is excluded because the cables share an exit or attachment point.
pub fn cables_share_anchor(scene: &Scene, i: usize, j: usize) -> bool {
    let (ci, cj) = (&scene.cables[i], &scene.cables[j]);
    coincident(&ci.exit, &cj.exit) || coincident(&ci.attach, &cj.attach)
}

/// Every pair that must be checked, in a fixed order: cable/cable, cable/platform,
/// cable/arm, cable/environment, then body/body.
pub fn enumerate_collision_elements(scene: &Scene) -> Vec<PairKind> {
    let n = scene.cables.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !cables_share_anchor(scene, i, j) {
                out.push(PairKind::CableCable(i, j));
            }
        }
    }
    out.extend((0..n).map(PairKind::CablePlatform));
    for i in 0..n {
        for (k, joint) in scene.arm.iter().enumerate() {
            if joint.body.is_some() {
                out.push(PairKind::CableArmBody(i, k));
            }
        }
    }
    for i in 0..n {
        for e in 0..scene.environment.len() {
            out.push(PairKind::CableEnvironment(i, e));
        }
    }
    let bodies = scene.bodies();
    for (x, &a) in bodies.iter().enumerate() {
        for &b in &bodies[x + 1..] {
            let both_static = matches!((a, b), (BodyId::Environment(_), BodyId::Environment(_)));
            if !both_static && !is_parent_child(a, b) {
                out.push(PairKind::BodyBody(a, b));
            }
        }
    }
    out
}

pub fn cumulative_lengths(scene: &Scene) -> CumulativeLengths {
    let mut d = Vec::with_capacity(scene.arm.len() + 1);
    d.push(0.0);
    let mut acc = 0.0;
    for j in &scene.arm {
        acc += j.offset.norm();
        d.push(acc);
    }
    CumulativeLengths(d)
}

/// Like [`cumulative_lengths`], but also counting the travel of prismatic
/// joints, so that `R[k]` bounds the distance from `C` to the point joint
/// `k` moves about.
pub fn reach_lengths(scene: &Scene) -> CumulativeLengths {
    let mut d = Vec::with_capacity(scene.arm.len() + 1);
    d.push(0.0);
    let mut acc = 0.0;
    for j in &scene.arm {
        acc += j.offset.norm() + j.travel();
        d.push(acc);
    }
    CumulativeLengths(d)
}
