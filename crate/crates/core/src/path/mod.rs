//! Straight paths: constant platform twist in the world frame plus linear
//! joint interpolation, and their concatenation.

mod file;

pub use file::{load_path, parse_path, PathFile, PathFileError, SegmentEntry, WaypointEntry};

use thiserror::Error;

use crate::geometry::{exp_rotation, log_rotation, Pose, Segment, Vec3};
use crate::model::Scene;

/// Relative rotations closer to a half turn than this are rejected.
pub const HALF_TURN_MARGIN: f64 = 1e-6;

/// Slack allowed when evaluating a path slightly outside `[0, T]`.
pub const TIME_SLACK: f64 = 1e-9;

/// Continuity tolerance between consecutive segments of a [`PiecewisePath`].
pub const CONTINUITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("path duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("relative rotation of {angle} rad is too close to a half turn; split the path")]
    NearHalfTurn { angle: f64 },
    #[error("joint vectors have lengths {start} and {end}, expected {expected}")]
    JointCount {
        start: usize,
        end: usize,
        expected: usize,
    },
    #[error("velocities must be finite")]
    NonFinite,
    #[error("piecewise path has no segment")]
    Empty,
    #[error("segment {0} does not start where segment {prev} ends", prev = .0 - 1)]
    Discontinuous(usize),
    #[error("cable {cable} length {length} at a path end lies outside the workspace bounds [{l_min}, {l_max}]")]
    OutsideWorkspace {
        cable: usize,
        length: f64,
        l_min: f64,
        l_max: f64,
    },
    #[error("cable {cable} lower length bound {bound} is not positive")]
    NonPositiveLength { cable: usize, bound: f64 },
}

/// Platform moving with constant world-frame twist while the arm joints
/// interpolate linearly, over `[0, duration]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StraightPath {
    duration: f64,
    start_pose: Pose,
    linear_velocity: Vec3,
    angular_velocity: Vec3,
    q_start: Vec<f64>,
    q_end: Vec<f64>,
}

impl StraightPath {
    pub fn new(
        start_pose: Pose,
        linear_velocity: Vec3,
        angular_velocity: Vec3,
        q_start: Vec<f64>,
        q_end: Vec<f64>,
        duration: f64,
    ) -> Result<Self, PathError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PathError::BadDuration(duration));
        }
        if q_start.len() != q_end.len() {
            return Err(PathError::JointCount {
                start: q_start.len(),
                end: q_end.len(),
                expected: q_start.len(),
            });
        }
        let finite = linear_velocity.iter().chain(angular_velocity.iter()).all(|x| x.is_finite())
            && q_start.iter().chain(&q_end).all(|x| x.is_finite());
        if !finite {
            return Err(PathError::NonFinite);
        }
        Ok(Self {
            duration,
            start_pose,
            linear_velocity,
            angular_velocity,
            q_start,
            q_end,
        })
    }

    /// Constant-twist interpolant between two platform poses and joint vectors.
    pub fn between(p0: &Pose, p1: &Pose, q0: &[f64], q1: &[f64], duration: f64) -> Result<Self, PathError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PathError::BadDuration(duration));
        }
        let rel = log_rotation(&(p1.rotation * p0.rotation.inverse()));
        let angle = rel.norm();
        if angle > std::f64::consts::PI - HALF_TURN_MARGIN {
            return Err(PathError::NearHalfTurn { angle });
        }
        Self::new(
            *p0,
            (p1.translation - p0.translation) / duration,
            rel / duration,
            q0.to_vec(),
            q1.to_vec(),
            duration,
        )
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start_pose(&self) -> &Pose {
        &self.start_pose
    }

    /// `V_P`.
    pub fn linear_velocity(&self) -> &Vec3 {
        &self.linear_velocity
    }

    /// `W_P`, world frame.
    pub fn angular_velocity(&self) -> &Vec3 {
        &self.angular_velocity
    }

    pub fn q_start(&self) -> &[f64] {
        &self.q_start
    }

    pub fn q_end(&self) -> &[f64] {
        &self.q_end
    }

    /// `v_P = |V_P|`.
    pub fn linear_speed(&self) -> f64 {
        self.linear_velocity.norm()
    }

    /// `ω_P = |W_P|`.
    pub fn angular_speed(&self) -> f64 {
        self.angular_velocity.norm()
    }

    fn check_time(&self, t: f64) -> Result<f64, PathError> {
        if t >= -TIME_SLACK && t <= self.duration + TIME_SLACK {
            Ok(t.clamp(0.0, self.duration))
        } else {
            Err(PathError::TimeOutOfRange {
                t,
                duration: self.duration,
            })
        }
    }

    pub fn pose_at(&self, t: f64) -> Result<Pose, PathError> {
        self.check_time(t).map(|t| self.pose_at_unchecked(t))
    }

    /// Evaluates the twist at any `t`, including outside `[0, T]`.
    pub(crate) fn pose_at_unchecked(&self, t: f64) -> Pose {
        Pose::new(
            exp_rotation(&self.angular_velocity, t) * self.start_pose.rotation,
            self.start_pose.translation + self.linear_velocity * t,
        )
    }

    pub fn end_pose(&self) -> Pose {
        self.pose_at_unchecked(self.duration)
    }

    pub fn arm_config_at(&self, t: f64) -> Result<Vec<f64>, PathError> {
        self.check_time(t).map(|t| self.arm_config_at_unchecked(t))
    }

    pub(crate) fn arm_config_at_unchecked(&self, t: f64) -> Vec<f64> {
        let s = t / self.duration;
        self.q_start
            .iter()
            .zip(&self.q_end)
            .map(|(a, b)| a + s * (b - a))
            .collect()
    }

    /// Absolute joint rates `|Δq_k| / T`.
    pub fn joint_speeds(&self) -> Vec<f64> {
        self.q_start
            .iter()
            .zip(&self.q_end)
            .map(|(a, b)| (b - a).abs() / self.duration)
            .collect()
    }

    /// The same motion started `lead` seconds earlier (the twist is extrapolated backwards).
    pub fn with_lead_in(&self, lead: f64) -> Result<Self, PathError> {
        let q_start = self
            .q_start
            .iter()
            .zip(&self.q_end)
            .map(|(a, b)| a - (b - a) * lead / self.duration)
            .collect();
        Self::new(
            self.pose_at_unchecked(-lead),
            self.linear_velocity,
            self.angular_velocity,
            q_start,
            self.q_end.clone(),
            self.duration + lead,
        )
    }

    /// The part of the path between `t0` and `t1`, re-timed to start at zero.
    pub fn subpath(&self, t0: f64, t1: f64) -> Result<Self, PathError> {
        let (t0, t1) = (self.check_time(t0)?, self.check_time(t1)?);
        Self::new(
            self.pose_at_unchecked(t0),
            self.linear_velocity,
            self.angular_velocity,
            self.arm_config_at_unchecked(t0),
            self.arm_config_at_unchecked(t1),
            t1 - t0,
        )
    }

    /// The same geometric path traversed in `duration` seconds.
    pub fn retimed(&self, duration: f64) -> Result<Self, PathError> {
        let k = self.duration / duration;
        Self::new(
            self.start_pose,
            self.linear_velocity * k,
            self.angular_velocity * k,
            self.q_start.clone(),
            self.q_end.clone(),
            duration,
        )
    }

    pub(crate) fn check_joint_count(&self, expected: usize) -> Result<(), PathError> {
        if self.q_start.len() != expected {
            return Err(PathError::JointCount {
                start: self.q_start.len(),
                end: self.q_end.len(),
                expected,
            });
        }
        Ok(())
    }
}

/// World-frame cable axis `A_i → B_i(t)`.
pub fn cable_segment_at(scene: &Scene, path: &StraightPath, i: usize, t: f64) -> Result<Segment, PathError> {
    let pose = path.pose_at(t)?;
    Ok(cable_segment(scene, &pose, i))
}

pub(crate) fn cable_segment(scene: &Scene, platform: &Pose, i: usize) -> Segment {
    let c = &scene.cables[i];
    Segment::new(c.exit, platform.transform_point(&c.attach))
}

/// Cable length bounds `(L_i_min, L_i_max)` valid over the whole path.
///
/// The cable length is Lipschitz in time with constant `v_P + ω_P b_i`
/// (the speed bound of `B_i`), so the endpoint lengths widened by half the
/// duration times that constant enclose every intermediate length.
pub fn cable_length_bounds(scene: &Scene, path: &StraightPath, i: usize) -> Result<(f64, f64), PathError> {
    let cable = &scene.cables[i];
    let l0 = cable_segment(scene, path.start_pose(), i).length();
    let l1 = cable_segment(scene, &path.end_pose(), i).length();
    for length in [l0, l1] {
        if length < scene.l_min || length > scene.l_max {
            return Err(PathError::OutsideWorkspace {
                cable: i,
                length,
                l_min: scene.l_min,
                l_max: scene.l_max,
            });
        }
    }
    let speed = path.linear_speed() + path.angular_speed() * cable.attach_norm();
    let widen = speed * path.duration() / 2.0;
    let lo = (l0.min(l1) - widen).clamp(scene.l_min, scene.l_max);
    let hi = (l0.max(l1) + widen).clamp(scene.l_min, scene.l_max);
    if !(lo > 0.0) {
        return Err(PathError::NonPositiveLength { cable: i, bound: lo });
    }
    Ok((lo, hi))
}

/// Per-cable length bounds for one straight path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCableBounds {
    pub bounds: Vec<(f64, f64)>,
}

impl PathCableBounds {
    pub fn compute(scene: &Scene, path: &StraightPath) -> Result<Self, PathError> {
        let bounds = (0..scene.cables.len())
            .map(|i| cable_length_bounds(scene, path, i))
            .collect::<Result<_, _>>()?;
        Ok(Self { bounds })
    }

    pub fn l_min(&self, i: usize) -> f64 {
        self.bounds[i].0
    }

    pub fn l_max(&self, i: usize) -> f64 {
        self.bounds[i].1
    }
}

/// Consecutive straight paths, each starting where the previous one ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    segments: Vec<StraightPath>,
}

impl PiecewisePath {
    pub fn new(segments: Vec<StraightPath>) -> Result<Self, PathError> {
        if segments.is_empty() {
            return Err(PathError::Empty);
        }
        for k in 1..segments.len() {
            let prev = &segments[k - 1];
            let next = &segments[k];
            let end = prev.end_pose();
            let start = next.start_pose();
            let dr = log_rotation(&(start.rotation * end.rotation.inverse())).norm();
            let dt = (start.translation - end.translation).norm();
            let dq = prev
                .q_end
                .iter()
                .zip(&next.q_start)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dr > CONTINUITY_TOLERANCE
                || dt > CONTINUITY_TOLERANCE
                || dq > CONTINUITY_TOLERANCE
                || prev.q_end.len() != next.q_start.len()
            {
                return Err(PathError::Discontinuous(k));
            }
        }
        Ok(Self { segments })
    }

    pub fn single(path: StraightPath) -> Self {
        Self {
            segments: vec![path],
        }
    }

    pub fn segments(&self) -> &[StraightPath] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(StraightPath::duration).sum()
    }
}
