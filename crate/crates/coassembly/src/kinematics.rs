//! Serial-chain forward kinematics, geometric Jacobians, damped-least-squares
//! inverse kinematics, and singular-value extraction.

use nalgebra::{DMatrix, DVector, Matrix6, Unit, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se3::Pose;

/// Damping factor for the least-squares step.
const IK_DAMPING: f64 = 0.01;
/// Per-iteration clamp on the joint step, infinity norm, radians.
const IK_STEP_CLAMP: f64 = 0.2;
/// Iteration budget before giving up.
const IK_MAX_ITERS: usize = 300;
/// Position convergence tolerance, meters.
pub const IK_POS_TOL: f64 = 1e-4;
/// Orientation convergence tolerance, radians.
pub const IK_ROT_TOL: f64 = 1e-3;

/// One revolute joint: a fixed transform from the previous frame to the
/// joint anchor, then rotation about `axis`.
#[derive(Clone, Debug)]
pub struct Joint {
    pub name: String,
    pub origin: Pose,
    pub axis: Unit<Vector3<f64>>,
    pub limits: (f64, f64),
}

/// Joint angles for one chain, radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig(pub Vec<f64>);

impl JointConfig {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Non-increasing singular values of a Jacobian. Linear rows carry m/rad,
/// angular rows rad/rad, so the values mix units; they are used only in
/// ratios.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobianDecomposition {
    pub singular_values: Vec<f64>,
}

/// A fixed-base revolute chain with a tool transform.
#[derive(Clone, Debug)]
pub struct SerialChain {
    pub name: String,
    pub base: Pose,
    pub joints: Vec<Joint>,
    pub flange_to_tcp: Pose,
    /// Nominal mid-range configuration used to seed iterative solves.
    pub ready: JointConfig,
    /// TCP pose of the zero configuration, fixed at construction.
    pub home_pose: Pose,
    /// Upper bound on the TCP distance from the base, meters.
    pub reach_bound: f64,
}

impl SerialChain {
    pub fn new(
        name: impl Into<String>,
        base: Pose,
        joints: Vec<Joint>,
        flange_to_tcp: Pose,
        ready: JointConfig,
    ) -> Result<Self> {
        let name = name.into();
        if joints.is_empty() || joints.len() > 10 {
            return Err(Error::SceneInvalid(format!(
                "chain '{name}' has {} joints, expected 1..=10",
                joints.len()
            )));
        }
        for j in &joints {
            if j.limits.0 >= j.limits.1 {
                return Err(Error::SceneInvalid(format!(
                    "chain '{name}' joint '{}' has limits [{}, {}] with min >= max",
                    j.name, j.limits.0, j.limits.1
                )));
            }
        }
        if ready.len() != joints.len() {
            return Err(Error::DimensionMismatch {
                chain: name,
                got: ready.len(),
                expected: joints.len(),
            });
        }
        let reach_bound = joints
            .iter()
            .map(|j| j.origin.position.norm())
            .sum::<f64>()
            + flange_to_tcp.position.norm();
        let mut chain = Self {
            name,
            base,
            joints,
            flange_to_tcp,
            ready,
            home_pose: Pose::identity(),
            reach_bound,
        };
        let zero = JointConfig(vec![0.0; chain.joints.len()]);
        chain.home_pose = chain.forward_kinematics(&zero)?;
        Ok(chain)
    }

    /// Re-root the chain at a new base pose.
    pub fn with_base(mut self, base: Pose) -> Self {
        self.base = base;
        let zero = JointConfig(vec![0.0; self.joints.len()]);
        self.home_pose = self.forward_kinematics(&zero).expect("valid chain");
        self
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    fn check_dim(&self, q: &JointConfig) -> Result<()> {
        if q.len() != self.joints.len() {
            return Err(Error::DimensionMismatch {
                chain: self.name.clone(),
                got: q.len(),
                expected: self.joints.len(),
            });
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.0.iter()
            .zip(&self.joints)
            .all(|(&v, j)| v >= j.limits.0 && v <= j.limits.1)
    }

    pub fn clamp_to_limits(&self, q: &JointConfig) -> JointConfig {
        JointConfig(
            q.0.iter()
                .zip(&self.joints)
                .map(|(&v, j)| v.clamp(j.limits.0, j.limits.1))
                .collect(),
        )
    }

    /// TCP pose in the world frame.
    pub fn forward_kinematics(&self, q: &JointConfig) -> Result<Pose> {
        self.check_dim(q)?;
        let mut t = self.base;
        for (joint, &qi) in self.joints.iter().zip(&q.0) {
            t = t.compose(&joint.origin);
            t = t.compose(&Pose::from_rotation(UnitQuaternion::from_axis_angle(
                &joint.axis,
                qi,
            )));
        }
        Ok(t.compose(&self.flange_to_tcp))
    }

    /// TCP pose plus the world-frame anchor point and axis of every joint,
    /// in chain order. The anchors also serve as link-proxy endpoints.
    pub fn fk_frames(&self, q: &JointConfig) -> Result<(Pose, Vec<(Vector3<f64>, Vector3<f64>)>)> {
        self.check_dim(q)?;
        let mut t = self.base;
        let mut frames = Vec::with_capacity(self.joints.len());
        for (joint, &qi) in self.joints.iter().zip(&q.0) {
            t = t.compose(&joint.origin);
            let axis_world = t.rotation * joint.axis.into_inner();
            frames.push((t.position, axis_world));
            t = t.compose(&Pose::from_rotation(UnitQuaternion::from_axis_angle(
                &joint.axis,
                qi,
            )));
        }
        Ok((t.compose(&self.flange_to_tcp), frames))
    }

    /// Geometric Jacobian at the TCP: rows 0..3 linear (m/rad), rows 3..6
    /// angular (rad/rad).
    pub fn jacobian(&self, q: &JointConfig) -> Result<DMatrix<f64>> {
        let (tcp, frames) = self.fk_frames(q)?;
        let k = frames.len();
        let mut j = DMatrix::zeros(6, k);
        for (i, (anchor, axis)) in frames.iter().enumerate() {
            let linear = axis.cross(&(tcp.position - anchor));
            j[(0, i)] = linear.x;
            j[(1, i)] = linear.y;
            j[(2, i)] = linear.z;
            j[(3, i)] = axis.x;
            j[(4, i)] = axis.y;
            j[(5, i)] = axis.z;
        }
        Ok(j)
    }

    /// Damped-least-squares inverse kinematics.
    ///
    /// Returns `Unreachable` when the iteration budget runs out and
    /// `OutOfLimits` when the converged solution violates a joint limit.
    pub fn inverse_kinematics(&self, target: &Pose, seed: &JointConfig) -> Result<JointConfig> {
        self.check_dim(seed)?;
        if (target.position - self.base.position).norm() > self.reach_bound {
            return Err(Error::Unreachable);
        }
        // The flange position is fixed by the target pose; gate it against
        // the joint-transform reach before iterating.
        let flange = target.compose(&self.flange_to_tcp.inverse());
        let flange_bound = self.reach_bound - self.flange_to_tcp.position.norm();
        if (flange.position - self.base.position).norm() > flange_bound {
            return Err(Error::Unreachable);
        }
        let mut q = seed.clone();
        let mut best_err = f64::INFINITY;
        let mut stalled = 0u32;
        for _ in 0..=IK_MAX_ITERS {
            let tcp = self.forward_kinematics(&q)?;
            let e_p = target.position - tcp.position;
            let e_r = (target.rotation * tcp.rotation.inverse()).scaled_axis();
            if e_p.norm() < IK_POS_TOL && e_r.norm() < IK_ROT_TOL {
                if let Some((joint, value)) = q
                    .0
                    .iter()
                    .zip(&self.joints)
                    .enumerate()
                    .find(|(_, (&v, j))| v < j.limits.0 || v > j.limits.1)
                    .map(|(i, (&v, _))| (i, v))
                {
                    return Err(Error::OutOfLimits { joint, value });
                }
                return Ok(q);
            }

            // Bail once the error stops shrinking; unreachable targets
            // asymptote long before the iteration budget runs out.
            let err = e_p.norm() + 0.2 * e_r.norm();
            if err < best_err * (1.0 - 1e-3) {
                best_err = err;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 25 {
                    return Err(Error::Unreachable);
                }
            }

            let j = self.jacobian(&q)?;
            let jjt = &j * j.transpose();
            let damped = Matrix6::from_iterator(jjt.iter().copied())
                + Matrix6::identity() * (IK_DAMPING * IK_DAMPING);
            let err = Vector6::new(e_p.x, e_p.y, e_p.z, e_r.x, e_r.y, e_r.z);
            let y = match damped.cholesky() {
                Some(ch) => ch.solve(&err),
                None => return Err(Error::Unreachable),
            };
            let y_dyn = DVector::from_iterator(6, y.iter().copied());
            let mut dq = j.transpose() * y_dyn;
            let max_step = dq.amax();
            if max_step > IK_STEP_CLAMP {
                dq *= IK_STEP_CLAMP / max_step;
            }
            for (qi, d) in q.0.iter_mut().zip(dq.iter()) {
                *qi += d;
            }
        }
        Err(Error::Unreachable)
    }
}

/// Singular values of a Jacobian, sorted non-increasing.
pub fn singular_values(j: &DMatrix<f64>) -> JacobianDecomposition {
    let svd = j.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    JacobianDecomposition { singular_values: s }
}

/// Chain-description file schema: named joints, axis vectors, link
/// transforms, and limits. Angles are radians unless the `_deg` variant of
/// a field is used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainDescription {
    pub name: String,
    pub ready: Vec<f64>,
    pub joints: Vec<JointRecord>,
    pub tcp: TcpRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointRecord {
    pub name: String,
    pub origin: FilePose,
    pub axis: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits_deg: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TcpRecord {
    pub origin: FilePose,
}

/// Pose in configuration files: position plus either a unit quaternion
/// `q = [w, x, y, z]`, roll-pitch-yaw radians, or roll-pitch-yaw degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilePose {
    #[serde(default)]
    pub p: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy_deg: Option<[f64; 3]>,
}

impl FilePose {
    pub fn to_pose(&self, field: &str) -> Result<Pose> {
        let position = Vector3::new(self.p[0], self.p[1], self.p[2]);
        let rotation = if let Some(q) = self.q {
            crate::se3::PoseRecord { p: self.p, q }.to_pose(field)?.rotation
        } else if let Some(rpy) = self.rpy {
            UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2])
        } else if let Some(deg) = self.rpy_deg {
            UnitQuaternion::from_euler_angles(
                deg[0].to_radians(),
                deg[1].to_radians(),
                deg[2].to_radians(),
            )
        } else {
            UnitQuaternion::identity()
        };
        Ok(Pose { position, rotation })
    }

    pub fn from_pose(pose: &Pose) -> Self {
        let q = pose.rotation.quaternion();
        Self {
            p: [pose.position.x, pose.position.y, pose.position.z],
            q: Some([q.w, q.i, q.j, q.k]),
            rpy: None,
            rpy_deg: None,
        }
    }
}

impl ChainDescription {
    pub fn from_toml_str(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: source.to_string(),
            message: e.to_string(),
        })
    }

    /// Build the runtime chain rooted at `base`.
    pub fn build(&self, base: Pose) -> Result<SerialChain> {
        let mut joints = Vec::with_capacity(self.joints.len());
        for (i, rec) in self.joints.iter().enumerate() {
            let origin = rec.origin.to_pose(&format!("{}.joints[{i}].origin", self.name))?;
            let axis = Vector3::new(rec.axis[0], rec.axis[1], rec.axis[2]);
            if axis.norm() < 1e-9 {
                return Err(Error::SceneInvalid(format!(
                    "chain '{}' joint '{}' has a zero axis",
                    self.name, rec.name
                )));
            }
            let limits = match (rec.limits, rec.limits_deg) {
                (Some(l), _) => (l[0], l[1]),
                (None, Some(d)) => (d[0].to_radians(), d[1].to_radians()),
                (None, None) => {
                    return Err(Error::SceneInvalid(format!(
                        "chain '{}' joint '{}' is missing limits",
                        self.name, rec.name
                    )))
                }
            };
            joints.push(Joint {
                name: rec.name.clone(),
                origin,
                axis: Unit::new_normalize(axis),
                limits,
            });
        }
        let tcp = self.tcp.origin.to_pose(&format!("{}.tcp.origin", self.name))?;
        SerialChain::new(
            self.name.clone(),
            base,
            joints,
            tcp,
            JointConfig(self.ready.clone()),
        )
    }
}
