//! Rigid-body math and exact distance queries.
//!
//! Cables are capsules, every other body is a triangle mesh. All queries
//! return a [`DistanceResult`] whose distance is exact for the modeled
//! shapes, which makes it a valid lower bound for anything the shapes
//! enclose. Distances at or below [`CONTACT_TOLERANCE`] are reported as 0.

mod distance;
mod mesh;
pub mod stl;

pub use distance::{
    capsule_capsule_distance, point_segment_closest, point_triangle_closest,
    segment_segment_distance, segment_triangle_distance, triangle_triangle_distance,
};
pub use mesh::{capsule_mesh_distance, mesh_mesh_distance, MeshError, TriangleMesh};

pub(crate) use mesh::{capsule_mesh_distance_below, mesh_mesh_distance_below};

use nalgebra::{Rotation3, Vector3};

/// A position or free vector in 3-space (meters, or rad/s for angular velocities).
pub type Vec3 = Vector3<f64>;

/// A proper rotation of 3-space.
pub type Rotation = Rotation3<f64>;

/// Separations at or below this value (meters) count as contact.
pub const CONTACT_TOLERANCE: f64 = 1e-9;

/// Rigid placement of a frame: `x_world = rotation * x_local + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(Rotation::identity(), translation)
    }

    /// Maps a point expressed in this frame to the parent frame.
    #[inline]
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Maps a point expressed in the parent frame into this frame.
    #[inline]
    pub fn inverse_transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse() * (p - self.translation)
    }

    /// `self ∘ other`: the pose of `other`'s frame seen from `self`'s parent.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let r = self.rotation.inverse();
        Pose::new(r, -(r * self.translation))
    }
}

/// Rotation reached after spinning at constant angular velocity `omega` for `t` seconds.
///
/// Rodrigues' formula about `omega / |omega|` by the angle `|omega| t`.
pub fn exp_rotation(omega: &Vec3, t: f64) -> Rotation {
    let scaled = omega * t;
    if scaled.norm() == 0.0 {
        return Rotation::identity();
    }
    Rotation::new(scaled)
}

/// Principal logarithm: the rotation vector with angle in `[0, π]`.
pub fn log_rotation(r: &Rotation) -> Vec3 {
    r.scaled_axis()
}

/// Straight line piece between two points; `a == b` is allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec3,
    pub b: Vec3,
}

impl Segment {
    pub fn new(a: Vec3, b: Vec3) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point_at(&self, s: f64) -> Vec3 {
        self.a + (self.b - self.a) * s
    }

    pub fn transformed(&self, pose: &Pose) -> Segment {
        Segment::new(pose.transform_point(&self.a), pose.transform_point(&self.b))
    }
}

/// A segment swept by a ball: the conservative envelope of a cable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capsule {
    pub axis: Segment,
    pub radius: f64,
}

impl Capsule {
    /// Panics if `radius` is not strictly positive.
    pub fn new(axis: Segment, radius: f64) -> Self {
        assert!(radius > 0.0, "capsule radius must be positive, got {radius}");
        Self { axis, radius }
    }
}

/// Minimum separation between two shapes, with a closest point on each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceResult {
    pub distance: f64,
    pub witness_a: Vec3,
    pub witness_b: Vec3,
}

impl DistanceResult {
    pub(crate) fn between(witness_a: Vec3, witness_b: Vec3) -> Self {
        Self {
            distance: (witness_a - witness_b).norm(),
            witness_a,
            witness_b,
        }
    }

    pub fn is_contact(&self) -> bool {
        self.distance == 0.0
    }

    /// Same query with the argument order flipped.
    pub fn swapped(self) -> Self {
        Self {
            distance: self.distance,
            witness_a: self.witness_b,
            witness_b: self.witness_a,
        }
    }

    /// Applies the contact tolerance.
    pub(crate) fn snapped(mut self) -> Self {
        if self.distance <= CONTACT_TOLERANCE {
            self.distance = 0.0;
        }
        self
    }
}
