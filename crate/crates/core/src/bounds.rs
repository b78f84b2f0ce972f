//! Velocity upper bounds (`Vmax`) and distance lower bounds (`Dmin`) for
//! every kind of collision element.
//!
//! Over a straight path, the platform moves with linear speed `v_P` and
//! angular speed `ω_P`, and the arm joints move at constant rates. Each
//! `vmax_*` bounds the speed of any point of the first body of a pair
//! relative to the second one, so the distance between the two can shrink
//! by at most `Vmax · |Δt|`.

use thiserror::Error;

use crate::geometry::{
    capsule_capsule_distance, capsule_mesh_distance_below, mesh_mesh_distance_below, Capsule, DistanceResult, Pose,
    Segment,
};
use crate::model::{BodyId, JointKind, PairKind, Scene};
use crate::path::{cable_segment, PathCableBounds, PathError, StraightPath};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid cable length bounds [{l_min}, {l_max}]")]
    InvalidLengths { l_min: f64, l_max: f64 },
    #[error("{rates} joint rates but {lengths} cumulative lengths")]
    RateMismatch { rates: usize, lengths: usize },
    #[error("cable {cable} is {length} m long, not longer than the shorten distance {shorten} m")]
    CableTooShort { cable: usize, length: f64, shorten: f64 },
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Per-pair constants for one straight path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBounds {
    pub v_max: f64,
    /// A static upper bound on any distance the pair can report, when one is known.
    pub d_min_cap: Option<f64>,
}

/// Constant joint rates over a straight path: `ω_k` for revolute joints,
/// `v_k` for prismatic ones, zero for the other kind.
#[derive(Clone, Debug, PartialEq)]
pub struct JointRates {
    pub angular: Vec<f64>,
    pub linear: Vec<f64>,
}

impl JointRates {
    pub fn zero(joints: usize) -> Self {
        Self {
            angular: vec![0.0; joints],
            linear: vec![0.0; joints],
        }
    }

    pub fn from_path(scene: &Scene, path: &StraightPath) -> Self {
        let mut rates = Self::zero(scene.arm.len());
        for (k, (joint, speed)) in scene.arm.iter().zip(path.joint_speeds()).enumerate() {
            match joint.kind {
                JointKind::Revolute => rates.angular[k] = speed,
                JointKind::Prismatic => rates.linear[k] = speed,
            }
        }
        rates
    }

    pub fn len(&self) -> usize {
        self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angular.is_empty()
    }
}

fn check_lengths(l_min: f64, l_max: f64) -> Result<(), BoundsError> {
    if l_min > 0.0 && l_min <= l_max {
        Ok(())
    } else {
        Err(BoundsError::InvalidLengths { l_min, l_max })
    }
}

/// Speed bound of the attachment point `B_i`.
pub fn attachment_speed_bound(v_p: f64, w_p: f64, b_i: f64) -> f64 {
    v_p + w_p * b_i
}

/// Bound on the angular speed of cable `i` in the world frame.
pub fn cable_world_rate_bound(v_p: f64, w_p: f64, b_i: f64, l_i_min: f64) -> Result<f64, BoundsError> {
    if !(l_i_min > 0.0) {
        return Err(BoundsError::InvalidLengths {
            l_min: l_i_min,
            l_max: f64::NAN,
        });
    }
    Ok(attachment_speed_bound(v_p, w_p, b_i) / l_i_min)
}

/// Speed of any point of cable `i` relative to the platform.
///
/// ```
/// use cdpr_ccd::bounds::vmax_cable_platform;
/// assert_eq!(vmax_cable_platform(1.0, 0.0, 0.3, 2.0, 4.0).unwrap(), 2.0);
/// ```
pub fn vmax_cable_platform(v_p: f64, w_p: f64, b_i: f64, l_i_min: f64, l_i_max: f64) -> Result<f64, BoundsError> {
    check_lengths(l_i_min, l_i_max)?;
    Ok(l_i_max * (cable_world_rate_bound(v_p, w_p, b_i, l_i_min)? + w_p))
}

/// Relative speed between points of cables `i` and `j`.
///
/// Only an upper bound when `l_i_max ≥ l_j_min`; callers put the cable with
/// the larger maximum length first.
#[allow(clippy::too_many_arguments)]
pub fn vmax_cable_cable(
    v_p: f64,
    w_p: f64,
    b_i: f64,
    b_j: f64,
    l_i_min: f64,
    l_j_min: f64,
    l_i_max: f64,
) -> Result<f64, BoundsError> {
    check_lengths(l_i_min, l_i_max)?;
    let wi = cable_world_rate_bound(v_p, w_p, b_i, l_i_min)?;
    let wj = cable_world_rate_bound(v_p, w_p, b_j, l_j_min)?;
    Ok(l_i_max * (wi + wj))
}

/// Speed of any point of cable `i` relative to the body of the last joint
/// of a chain of `m - 1` arm joints.
///
/// `reach[k]` bounds the distance from the platform reference point to the
/// point joint `k` moves about; `t_ip` is `|C B_i|`.
#[allow(clippy::too_many_arguments)]
pub fn vmax_cable_arm(
    v_p: f64,
    w_p: f64,
    b_i: f64,
    l_i_min: f64,
    l_i_max: f64,
    t_ip: f64,
    rates: &JointRates,
    reach: &[f64],
    m: usize,
) -> Result<f64, BoundsError> {
    if rates.len() != reach.len() || rates.linear.len() != reach.len() || m < 1 || m - 1 > reach.len() {
        return Err(BoundsError::RateMismatch {
            rates: rates.len(),
            lengths: reach.len(),
        });
    }
    let mut v = vmax_cable_platform(v_p, w_p, b_i, l_i_min, l_i_max)?;
    for k in 0..m - 1 {
        v += rates.angular[k] * (l_i_max + t_ip + reach[k]) + rates.linear[k];
    }
    Ok(v)
}

/// Everything about a straight path the bounds depend on.
#[derive(Clone, Debug)]
pub struct PathMotion {
    pub linear_speed: f64,
    pub angular_speed: f64,
    pub rates: JointRates,
    /// `reach[k]`: distance bound from `C` to the centre of joint `k`;
    /// `reach[n]` bounds the origin of the last arm frame.
    pub reach: Vec<f64>,
    pub cables: PathCableBounds,
}

impl PathMotion {
    pub fn new(scene: &Scene, path: &StraightPath) -> Result<Self, BoundsError> {
        let mut reach = Vec::with_capacity(scene.arm.len() + 1);
        reach.push(0.0);
        let mut acc = 0.0;
        for (k, joint) in scene.arm.iter().enumerate() {
            acc += joint.offset.norm();
            if joint.kind == JointKind::Prismatic {
                acc += joint
                    .travel()
                    .max(path.q_start()[k].abs())
                    .max(path.q_end()[k].abs());
            }
            reach.push(acc);
        }
        Ok(Self {
            linear_speed: path.linear_speed(),
            angular_speed: path.angular_speed(),
            rates: JointRates::from_path(scene, path),
            reach,
            cables: PathCableBounds::compute(scene, path)?,
        })
    }

    fn body_vmax_world(&self, scene: &Scene, body: BodyId) -> f64 {
        match body {
            BodyId::Platform => self.linear_speed + self.angular_speed * scene.platform_radius,
            BodyId::Arm(k) => {
                let norm = arm_body_norm(scene, k);
                self.linear_speed
                    + self.angular_speed * (self.reach[k + 1] + norm)
                    + self.chain_speed(scene, None, k)
            }
            BodyId::Environment(_) => 0.0,
        }
    }

    /// Speed of body `k` due to the joints after `above` (or all joints).
    fn chain_speed(&self, scene: &Scene, above: Option<usize>, k: usize) -> f64 {
        let first = above.map_or(0, |a| a + 1);
        let norm = arm_body_norm(scene, k);
        (first..=k)
            .map(|j| self.rates.angular[j] * (self.reach[k + 1] - self.reach[j] + norm) + self.rates.linear[j])
            .sum()
    }
}

fn arm_body_norm(scene: &Scene, k: usize) -> f64 {
    scene.arm[k].body.as_ref().map_or(0.0, |m| m.max_vertex_norm())
}

/// Splits a body pair into the body whose points are bounded and the body
/// whose frame they are measured in: environment bodies and bodies nearer
/// the platform serve as the reference.
pub fn moving_and_reference(a: BodyId, b: BodyId) -> (BodyId, BodyId) {
    match (a, b) {
        (BodyId::Environment(_), _) => (b, a),
        (_, BodyId::Environment(_)) => (a, b),
        _ => (a.max(b), a.min(b)),
    }
}

/// Relative speed bound between two rigid bodies, composed along the chain
/// that links them. It bounds the points of the first body returned by
/// [`moving_and_reference`]; either side bounds the rate at which the
/// distance can shrink.
pub fn vmax_body_body(scene: &Scene, motion: &PathMotion, a: BodyId, b: BodyId) -> f64 {
    use BodyId::*;
    match (a, b) {
        (Environment(_), Environment(_)) => 0.0,
        (x, Environment(_)) | (Environment(_), x) => motion.body_vmax_world(scene, x),
        (Platform, Arm(k)) | (Arm(k), Platform) => motion.chain_speed(scene, None, k),
        (Arm(k), Arm(l)) => {
            let (lo, hi) = (k.min(l), k.max(l));
            if lo == hi {
                0.0
            } else {
                motion.chain_speed(scene, Some(lo), hi)
            }
        }
        (Platform, Platform) => 0.0,
    }
}

/// `Vmax` of one collision element over the path described by `motion`.
pub fn pair_bounds(scene: &Scene, motion: &PathMotion, kind: PairKind) -> Result<PairBounds, BoundsError> {
    let (v, w) = (motion.linear_speed, motion.angular_speed);
    let cable = |i: usize| {
        (
            scene.cables[i].attach_norm(),
            motion.cables.l_min(i),
            motion.cables.l_max(i),
        )
    };
    Ok(match kind {
        PairKind::CableCable(i, j) => {
            let (i, j) = if motion.cables.l_max(i) >= motion.cables.l_max(j) {
                (i, j)
            } else {
                (j, i)
            };
            let (bi, li_min, li_max) = cable(i);
            let (bj, lj_min, _) = cable(j);
            PairBounds {
                v_max: vmax_cable_cable(v, w, bi, bj, li_min, lj_min, li_max)?,
                d_min_cap: Some((scene.cables[i].attach - scene.cables[j].attach).norm()),
            }
        }
        PairKind::CablePlatform(i) => {
            let (b, l_min, l_max) = cable(i);
            PairBounds {
                v_max: vmax_cable_platform(v, w, b, l_min, l_max)?,
                d_min_cap: Some(scene.shorten_distance),
            }
        }
        PairKind::CableArmBody(i, k) => {
            let (b, l_min, l_max) = cable(i);
            let n = scene.arm.len();
            PairBounds {
                v_max: vmax_cable_arm(v, w, b, l_min, l_max, b, &motion.rates, &motion.reach[..n], k + 2)?,
                d_min_cap: None,
            }
        }
        PairKind::CableEnvironment(i, _) => {
            let (b, l_min, l_max) = cable(i);
            check_lengths(l_min, l_max)?;
            PairBounds {
                v_max: l_max * cable_world_rate_bound(v, w, b, l_min)?,
                d_min_cap: None,
            }
        }
        PairKind::BodyBody(a, b) => PairBounds {
            v_max: vmax_body_body(scene, motion, a, b),
            d_min_cap: None,
        },
    })
}

/// Platform pose and arm frames at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub platform: Pose,
    pub frames: Vec<Pose>,
}

impl Configuration {
    pub fn new(scene: &Scene, platform: Pose, q: &[f64]) -> Self {
        Self {
            frames: scene.arm_frames(&platform, q),
            platform,
        }
    }

    pub fn at(scene: &Scene, path: &StraightPath, t: f64) -> Result<Self, PathError> {
        Ok(Self::new(scene, path.pose_at(t)?, &path.arm_config_at(t)?))
    }

    pub(crate) fn at_unchecked(scene: &Scene, path: &StraightPath, t: f64) -> Self {
        Self::new(scene, path.pose_at_unchecked(t), &path.arm_config_at_unchecked(t))
    }
}

fn cable_capsule(scene: &Scene, config: &Configuration, i: usize) -> Capsule {
    Capsule::new(cable_segment(scene, &config.platform, i), scene.cables[i].radius)
}

/// Cable `i` with its last `d` metres removed, so the designed contact at
/// the attachment point is not reported.
pub fn shortened_cable(scene: &Scene, config: &Configuration, i: usize) -> Result<Capsule, BoundsError> {
    let seg = cable_segment(scene, &config.platform, i);
    let length = seg.length();
    let d = scene.shorten_distance;
    if !(length > d) {
        return Err(BoundsError::CableTooShort {
            cable: i,
            length,
            shorten: d,
        });
    }
    let tip = seg.b + (seg.a - seg.b) * (d / length);
    Ok(Capsule::new(Segment::new(seg.a, tip), scene.cables[i].radius))
}

pub fn dmin_cable_platform(scene: &Scene, config: &Configuration, i: usize) -> Result<DistanceResult, BoundsError> {
    dmin_cable_platform_below(scene, config, i, f64::INFINITY).map(|r| r.expect("unbounded query"))
}

fn dmin_cable_platform_below(
    scene: &Scene,
    config: &Configuration,
    i: usize,
    cutoff: f64,
) -> Result<Option<DistanceResult>, BoundsError> {
    let capsule = shortened_cable(scene, config, i)?;
    Ok(
        capsule_mesh_distance_below(&capsule, &scene.platform_mesh, &config.platform, cutoff).map(|mut r| {
            r.distance = r.distance.min(scene.shorten_distance);
            r
        }),
    )
}

pub fn dmin_cable_cable(scene: &Scene, config: &Configuration, i: usize, j: usize) -> DistanceResult {
    capsule_capsule_distance(&cable_capsule(scene, config, i), &cable_capsule(scene, config, j))
}

/// # Panics
/// If arm joint `k` carries no mesh.
pub fn dmin_cable_arm(scene: &Scene, config: &Configuration, i: usize, k: usize) -> DistanceResult {
    body_query(scene, config, i, BodyId::Arm(k), f64::INFINITY).expect("unbounded query")
}

pub fn dmin_cable_environment(scene: &Scene, config: &Configuration, i: usize, e: usize) -> DistanceResult {
    body_query(scene, config, i, BodyId::Environment(e), f64::INFINITY).expect("unbounded query")
}

pub fn dmin_body_body(scene: &Scene, config: &Configuration, a: BodyId, b: BodyId) -> DistanceResult {
    body_body_below(scene, config, a, b, f64::INFINITY).expect("unbounded query")
}

fn body_query(scene: &Scene, config: &Configuration, i: usize, body: BodyId, cutoff: f64) -> Option<DistanceResult> {
    let (mesh, pose) = scene.body_placement(body, &config.platform, &config.frames);
    capsule_mesh_distance_below(&cable_capsule(scene, config, i), mesh, &pose, cutoff)
}

fn body_body_below(
    scene: &Scene,
    config: &Configuration,
    a: BodyId,
    b: BodyId,
    cutoff: f64,
) -> Option<DistanceResult> {
    let (ma, pa) = scene.body_placement(a, &config.platform, &config.frames);
    let (mb, pb) = scene.body_placement(b, &config.platform, &config.frames);
    mesh_mesh_distance_below(ma, &pa, mb, &pb, cutoff)
}

/// `Dmin` of one collision element.
pub fn pair_distance(scene: &Scene, config: &Configuration, kind: PairKind) -> Result<DistanceResult, BoundsError> {
    pair_distance_below(scene, config, kind, f64::INFINITY).map(|r| r.expect("unbounded query"))
}

/// Like [`pair_distance`], but may return `None` once the distance is known
/// to be at least `cutoff`.
pub(crate) fn pair_distance_below(
    scene: &Scene,
    config: &Configuration,
    kind: PairKind,
    cutoff: f64,
) -> Result<Option<DistanceResult>, BoundsError> {
    Ok(match kind {
        PairKind::CableCable(i, j) => Some(dmin_cable_cable(scene, config, i, j)),
        PairKind::CablePlatform(i) => return dmin_cable_platform_below(scene, config, i, cutoff),
        PairKind::CableArmBody(i, k) => body_query(scene, config, i, BodyId::Arm(k), cutoff),
        PairKind::CableEnvironment(i, e) => body_query(scene, config, i, BodyId::Environment(e), cutoff),
        PairKind::BodyBody(a, b) => body_body_below(scene, config, a, b, cutoff),
    })
}
