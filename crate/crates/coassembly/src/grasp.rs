//! Antipodal pinch-grasp candidate generation on cuboid boards, feasibility
//! filtering against kinematics and collision, shared-grasp computation
//! across object poses, and human grasp stability.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::collision::{Obb, ObstacleSet, TriMesh};
use crate::contact::{soft_finger_satisfied, ContactState, SoftFingerParams};
use crate::error::{Error, Result};
use crate::kinematics::{JointConfig, SerialChain};
use crate::se3::Pose;
use crate::slip::{GraspGeometry, GRAVITY};

/// Which hand or gripper a grasp belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Owner {
    RobotLeft,
    RobotRight,
    HumanLeft,
    HumanRight,
}

/// Board axis the grasp approaches along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisTag {
    Longitudinal,
    Transverse,
}

/// A rectangular board with its center of mass at the local origin,
/// thickness along local z and length along local x.
#[derive(Clone, Debug)]
pub struct BoardSpec {
    pub id: String,
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub mass: f64,
    pub mesh: TriMesh,
}

impl BoardSpec {
    pub fn new(id: impl Into<String>, length: f64, width: f64, thickness: f64, mass: f64) -> Result<Self> {
        let id = id.into();
        if !(length >= width && width >= thickness && thickness > 0.0) {
            return Err(Error::SceneInvalid(format!(
                "board '{id}' dimensions must satisfy length >= width >= thickness > 0, got {length} x {width} x {thickness}"
            )));
        }
        if !(mass > 0.0) {
            return Err(Error::SceneInvalid(format!(
                "board '{id}' mass must be positive, got {mass}"
            )));
        }
        let mesh = TriMesh::cuboid(length, width, thickness);
        debug_assert!(mesh.is_watertight());
        Ok(Self {
            id,
            length,
            width,
            thickness,
            mass,
            mesh,
        })
    }

    pub fn half_extents(&self) -> Vector3<f64> {
        Vector3::new(self.length / 2.0, self.width / 2.0, self.thickness / 2.0)
    }

    pub fn obb_at(&self, pose: &Pose) -> Obb {
        Obb::from_pose(pose, self.half_extents())
    }
}

/// A parallel-pinch grasp in the board's local frame: fingers close along
/// `opening_dir` (the thickness axis), the gripper slides in along
/// `approach` within the face plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub owner: Owner,
    pub contact_center: Vector3<f64>,
    pub approach: Vector3<f64>,
    pub opening_dir: Vector3<f64>,
    pub width: f64,
    pub axis_tag: AxisTag,
}

impl GraspCandidate {
    /// Slip geometry for this grasp: lever from contact to the center of
    /// mass, plus a thin-plate moment of inertia about the contact via the
    /// parallel-axis theorem.
    pub fn geometry(&self, board: &BoardSpec, ee_length: f64) -> GraspGeometry {
        let com_offset = self.contact_center.norm();
        let plate = board.mass * (board.length.powi(2) + board.width.powi(2)) / 12.0;
        GraspGeometry {
            ee_length,
            com_offset,
            mass: board.mass,
            inertia_about_contact: plate + board.mass * com_offset * com_offset,
        }
    }
}

/// Candidate generation result; `width_exceeded` flags a board thicker
/// than the owner's stroke.
#[derive(Clone, Debug, Default)]
pub struct CandidateBatch {
    pub candidates: Vec<GraspCandidate>,
    pub width_exceeded: bool,
}

/// Pinch candidates across the board thickness on a grid of pitch
/// `spacing` over the face overlap region, four in-plane approach
/// directions per grid point, deterministic order.
pub fn generate_candidates(
    board: &BoardSpec,
    owner: Owner,
    spacing: f64,
    max_opening: f64,
) -> CandidateBatch {
    assert!(spacing > 0.0, "grid spacing must be positive");
    if board.thickness > max_opening {
        return CandidateBatch {
            candidates: Vec::new(),
            width_exceeded: true,
        };
    }
    let n_x = ((board.length / spacing).floor() as usize).max(1);
    let n_y = ((board.width / spacing).floor() as usize).max(1);
    let approaches = [
        (Vector3::x(), AxisTag::Longitudinal),
        (-Vector3::x(), AxisTag::Longitudinal),
        (Vector3::y(), AxisTag::Transverse),
        (-Vector3::y(), AxisTag::Transverse),
    ];
    let mut candidates = Vec::with_capacity(n_x * n_y * 4);
    for ix in 0..n_x {
        let x = (ix as f64 - (n_x as f64 - 1.0) / 2.0) * spacing;
        for iy in 0..n_y {
            let y = (iy as f64 - (n_y as f64 - 1.0) / 2.0) * spacing;
            for (approach, axis_tag) in &approaches {
                candidates.push(GraspCandidate {
                    owner,
                    contact_center: Vector3::new(x, y, 0.0),
                    approach: *approach,
                    opening_dir: Vector3::z(),
                    width: board.thickness,
                    axis_tag: *axis_tag,
                });
            }
        }
    }
    CandidateBatch {
        candidates,
        width_exceeded: false,
    }
}

/// The rim grasp at the far end of one board axis: the representative
/// grasp for per-axis slip analysis, with the contact-to-CoM lever equal
/// to the half extent of that axis.
pub fn canonical_rim_grasp(board: &BoardSpec, owner: Owner, axis: AxisTag) -> GraspCandidate {
    let (contact, approach) = match axis {
        AxisTag::Longitudinal => (Vector3::new(-board.length / 2.0, 0.0, 0.0), Vector3::x()),
        AxisTag::Transverse => (Vector3::new(0.0, -board.width / 2.0, 0.0), Vector3::y()),
    };
    GraspCandidate {
        owner,
        contact_center: contact,
        approach,
        opening_dir: Vector3::z(),
        width: board.thickness,
        axis_tag: axis,
    }
}

/// World TCP pose realizing a grasp on a board at `object_pose`: TCP origin
/// at the contact center, local z along the approach, local y along the
/// opening direction.
pub fn grasp_tcp_pose(object_pose: &Pose, grasp: &GraspCandidate) -> Pose {
    let approach_w = (object_pose.rotation * grasp.approach).normalize();
    let opening_w = (object_pose.rotation * grasp.opening_dir).normalize();
    let x_w = opening_w.cross(&approach_w);
    let r = nalgebra::Matrix3::from_columns(&[x_w, opening_w, approach_w]);
    Pose {
        position: object_pose.transform_point(&grasp.contact_center),
        rotation: UnitQuaternion::from_matrix(&r),
    }
}

/// Parallel-gripper geometry mounted on a chain: stroke, wrist-to-contact
/// length, and a palm proxy box for collision checks. The fingertip pads
/// themselves are exempt from collision.
#[derive(Clone, Debug)]
pub struct GripperModel {
    pub max_opening: f64,
    pub ee_length: f64,
    pub palm_half_extents: Vector3<f64>,
    /// Distance from the TCP back along the approach axis to the palm
    /// box center.
    pub palm_offset: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            max_opening: 0.085,
            ee_length: 0.24,
            palm_half_extents: Vector3::new(0.045, 0.05, 0.045),
            palm_offset: 0.115,
        }
    }
}

/// One arm: kinematic chain plus its gripper and collision proxy radius.
#[derive(Clone, Debug)]
pub struct ArmRig {
    pub id: String,
    pub chain: SerialChain,
    pub gripper: GripperModel,
    pub link_radius: f64,
}

impl ArmRig {
    pub fn new(id: impl Into<String>, chain: SerialChain, gripper: GripperModel) -> Self {
        Self {
            id: id.into(),
            chain,
            gripper,
            link_radius: 0.04,
        }
    }

    /// Proxy boxes around the links at configuration `q`.
    pub fn link_obbs(&self, q: &JointConfig) -> Result<Vec<Obb>> {
        let (tcp, frames) = self.chain.fk_frames(q)?;
        Ok(self.link_obbs_from_frames(&frames, &tcp))
    }

    /// Same, from an existing forward-kinematics pass.
    pub fn link_obbs_from_frames(
        &self,
        frames: &[(Vector3<f64>, Vector3<f64>)],
        tcp: &Pose,
    ) -> Vec<Obb> {
        let mut obbs = Vec::new();
        let mut anchors: Vec<Vector3<f64>> = frames.iter().map(|(p, _)| *p).collect();
        // Stop the forearm proxy at the palm, leaving the fingertips free.
        let approach_w = tcp.rotation * Vector3::z();
        anchors.push(tcp.position - approach_w * self.gripper.palm_offset);
        for pair in anchors.windows(2) {
            if (pair[1] - pair[0]).norm() > 0.02 {
                obbs.push(Obb::around_segment(&pair[0], &pair[1], self.link_radius));
            }
        }
        obbs
    }

    pub fn palm_obb(&self, tcp: &Pose) -> Obb {
        let approach_w = tcp.rotation * Vector3::z();
        Obb {
            center: tcp.position - approach_w * self.gripper.palm_offset,
            rotation: tcp.rotation,
            half_extents: self.gripper.palm_half_extents,
        }
    }

    /// Deterministic multi-seed inverse kinematics: the ready pose plus two
    /// fixed perturbations of the proximal joints.
    pub fn solve_ik(&self, target: &Pose) -> Result<JointConfig> {
        let ready = self.chain.ready.clone();
        let mut seeds = vec![ready.clone()];
        for sign in [1.0, -1.0] {
            let mut s = ready.clone();
            for (i, v) in s.0.iter_mut().enumerate().take(3) {
                *v += sign * 0.4 / (i as f64 + 1.0);
            }
            seeds.push(self.chain.clamp_to_limits(&s));
        }
        let mut last = Error::Unreachable;
        for seed in seeds {
            match self.chain.inverse_kinematics(target, &seed) {
                Ok(q) => return Ok(q),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}

/// One feasible grasp at a specific object pose.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraspEntry {
    /// Index into the candidate list the set was built from; object-frame
    /// identity for shared-grasp matching.
    pub candidate_index: usize,
    pub candidate: GraspCandidate,
    pub config: JointConfig,
}

/// All IK-feasible, collision-free grasps of one owner on one board pose.
#[derive(Clone, Debug)]
pub struct GraspSet {
    pub board_id: String,
    pub owner: Owner,
    pub object_pose: Pose,
    pub entries: Vec<GraspEntry>,
}

/// Filter candidates down to those with a converged IK solution whose arm,
/// palm, and swept proxies clear the obstacles and the board itself.
pub fn feasible_grasps(
    board: &BoardSpec,
    pose: &Pose,
    candidates: &[GraspCandidate],
    arm: &ArmRig,
    obstacles: &ObstacleSet,
) -> GraspSet {
    let board_obb = board.obb_at(pose);
    let mut entries = Vec::new();
    for (candidate_index, candidate) in candidates.iter().enumerate() {
        if candidate.width > arm.gripper.max_opening {
            continue;
        }
        let tcp = grasp_tcp_pose(pose, candidate);
        let Ok(config) = arm.solve_ik(&tcp) else {
            continue;
        };
        let palm = arm.palm_obb(&tcp);
        if palm.intersects(&board_obb) || obstacles.hits_any(&palm) {
            continue;
        }
        let Ok(links) = arm.link_obbs(&config) else {
            continue;
        };
        if links
            .iter()
            .any(|l| l.intersects(&board_obb) || obstacles.hits_any(l))
        {
            continue;
        }
        entries.push(GraspEntry {
            candidate_index,
            candidate: candidate.clone(),
            config,
        });
    }
    GraspSet {
        board_id: board.id.clone(),
        owner: candidates.first().map(|c| c.owner).unwrap_or(Owner::RobotLeft),
        object_pose: *pose,
        entries,
    }
}

/// Object-frame grasps feasible at both poses. The candidate is identical;
/// only the joint solutions differ.
pub fn shared_grasps(a: &GraspSet, b: &GraspSet) -> Result<Vec<GraspCandidate>> {
    Ok(shared_pairs(a, b)?
        .into_iter()
        .map(|(ea, _)| ea.candidate.clone())
        .collect())
}

/// Shared grasps with both per-pose entries, for binding transfers.
pub fn shared_pairs<'a>(
    a: &'a GraspSet,
    b: &'a GraspSet,
) -> Result<Vec<(&'a GraspEntry, &'a GraspEntry)>> {
    if a.board_id != b.board_id {
        return Err(Error::GraspSetMismatch {
            reason: format!("boards '{}' vs '{}'", a.board_id, b.board_id),
        });
    }
    if a.owner != b.owner {
        return Err(Error::GraspSetMismatch {
            reason: format!("owners {:?} vs {:?}", a.owner, b.owner),
        });
    }
    let mut out = Vec::new();
    for ea in &a.entries {
        if let Some(eb) = b
            .entries
            .iter()
            .find(|e| e.candidate_index == ea.candidate_index)
        {
            out.push((ea, eb));
        }
    }
    Ok(out)
}

/// Soft-finger stability of a human pinch holding the board at `pose`:
/// the board's gravity wrench about the contact is split evenly over the
/// two finger pads and each pad is tested against the limit surface.
pub fn check_human_grasp_stability(
    grasp: &GraspCandidate,
    board: &BoardSpec,
    pose: &Pose,
    params: &SoftFingerParams,
    grip_force: f64,
) -> Result<bool> {
    let state = human_pad_load(grasp, board, pose, grip_force);
    Ok(soft_finger_satisfied(&state, params)?.satisfied)
}

/// Per-pad load of the board's weight about the grasp contact.
pub fn human_pad_load(
    grasp: &GraspCandidate,
    board: &BoardSpec,
    pose: &Pose,
    grip_force: f64,
) -> ContactState {
    let normal = (pose.rotation * grasp.opening_dir).normalize();
    let weight = Vector3::new(0.0, 0.0, -board.mass * GRAVITY);
    let contact_w = pose.transform_point(&grasp.contact_center);
    let com_w = pose.transform_point(&Vector3::zeros());
    let lever = com_w - contact_w;
    let torque = lever.cross(&weight);
    let tangential = weight - normal * weight.dot(&normal);
    ContactState {
        f_t: tangential.norm() / 2.0,
        tau_n: torque.dot(&normal).abs() / 2.0,
        p: grip_force,
    }
}
