//! Rigid transforms, rotation distances, and constrained random pose sampling.

use nalgebra::{Matrix3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed drift of `R^T R` from the identity before a matrix is rejected
/// as a rotation.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// A rigid transform: position vector plus rotation.
///
/// The rotation is stored as a unit quaternion so composition chains stay
/// orthonormal; `rotation_matrix` exposes the 3x3 form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            rotation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, rotation: UnitQuaternion<f64>) -> Self {
        Self { position, rotation }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: Vector3::new(x, y, z),
            rotation: UnitQuaternion::identity(),
        }
    }

    pub fn from_rotation(rotation: UnitQuaternion<f64>) -> Self {
        Self {
            position: Vector3::zeros(),
            rotation,
        }
    }

    /// Build from a rotation matrix, rejecting matrices that are not
    /// orthonormal with determinant +1.
    pub fn from_matrix(position: Vector3<f64>, r: &Matrix3<f64>) -> Result<Self> {
        let drift = (r.transpose() * r - Matrix3::identity()).norm();
        if drift > ORTHONORMALITY_TOL || r.determinant() < 0.0 {
            return Err(Error::SceneInvalid(format!(
                "matrix is not a rotation (orthonormality drift {drift:.2e})"
            )));
        }
        let rotation = UnitQuaternion::from_matrix(r);
        Ok(Self { position, rotation })
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Map a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.position
    }

    /// Rotate a direction vector (no translation).
    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Frame chaining: `self` then `other`, i.e. `other` is expressed in
    /// `self`'s frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.rotation * other.position + self.position,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose {
            position: -(inv * self.position),
            rotation: inv,
        }
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// Geodesic angle of the relative rotation `R1^T R2`, in `[0, pi]`.
///
/// Extraction goes through the quaternion representation, which stays
/// stable near pi where the matrix-log form degrades.
pub fn rotation_distance(r1: &UnitQuaternion<f64>, r2: &UnitQuaternion<f64>) -> f64 {
    (r1.inverse() * r2).angle()
}

/// Draw a pose within `max_rot` radians and `max_trans` meters of `goal`.
///
/// Rotation: uniform random unit axis with angle uniform in `[0, max_rot)`.
/// Translation: uniform in the open ball of radius `max_trans`. Both bounds
/// are strict, and the draw is reproducible for a fixed seed.
pub fn sample_pose_near(goal: &Pose, max_rot: f64, max_trans: f64, rng_seed: u64) -> Pose {
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    sample_pose_near_with(goal, max_rot, max_trans, &mut rng)
}

/// Same as [`sample_pose_near`] but drawing from a caller-owned stream,
/// for rejection loops that need many draws per seed.
pub fn sample_pose_near_with<R: Rng>(
    goal: &Pose,
    max_rot: f64,
    max_trans: f64,
    rng: &mut R,
) -> Pose {
    let rotation = if max_rot > 0.0 {
        let axis = random_unit_vector(rng);
        let angle = rng.random_range(0.0..max_rot);
        goal.rotation * UnitQuaternion::from_axis_angle(&axis, angle)
    } else {
        goal.rotation
    };
    let position = if max_trans > 0.0 {
        let dir = random_unit_vector(rng);
        let u: f64 = rng.random_range(0.0..1.0);
        goal.position + dir.into_inner() * (max_trans * u.cbrt())
    } else {
        goal.position
    };
    Pose { position, rotation }
}

fn random_unit_vector<R: Rng>(rng: &mut R) -> Unit<Vector3<f64>> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Unit::new_normalize(Vector3::new(r * phi.cos(), r * phi.sin(), z))
}

/// On-disk form of a pose: position `[x, y, z]` in meters and rotation as a
/// unit quaternion `[w, x, y, z]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub p: [f64; 3],
    pub q: [f64; 4],
}

impl PoseRecord {
    pub fn from_pose(pose: &Pose) -> Self {
        let q = pose.rotation.quaternion();
        Self {
            p: [pose.position.x, pose.position.y, pose.position.z],
            q: [q.w, q.i, q.j, q.k],
        }
    }

    /// Normalize and convert, rejecting quaternions whose norm deviates
    /// from 1 by more than 1e-6. `field` names the offender in errors.
    pub fn to_pose(&self, field: &str) -> Result<Pose> {
        let q = nalgebra::Quaternion::new(self.q[0], self.q[1], self.q[2], self.q[3]);
        let norm = q.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::QuaternionNotNormalized {
                field: field.to_string(),
                norm,
            });
        }
        Ok(Pose {
            position: Vector3::new(self.p[0], self.p[1], self.p[2]),
            rotation: UnitQuaternion::from_quaternion(q),
        })
    }
}
