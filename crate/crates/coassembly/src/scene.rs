//! Scene and configuration ingestion: the structured-text scene file, the
//! bundled chain and body descriptions, validation, and the runtime scene
//! model shared by the planning pipeline.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::collision::{Obb, ObstacleSet, PlacedMesh};
use crate::contact::SoftFingerParams;
use crate::error::{Error, Result};
use crate::grasp::{ArmRig, BoardSpec, GripperModel, Owner};
use crate::kinematics::{ChainDescription, FilePose, JointConfig, SerialChain};
use crate::planner::PlanParams;
use crate::se3::Pose;

/// Grip force per finger, newtons, calibrated so the bundled medium
/// board's transverse-rim relaxation limit lands on 62 degrees with the
/// default pad parameters. A pure calibration scalar; override per scene.
pub const CALIBRATED_GRIP_FORCE: f64 = 4478.85;

const UR3_TOML: &str = include_str!("../data/ur3.toml");
const HUMAN_TOML: &str = include_str!("../data/human.toml");
const CABINET_TOML: &str = include_str!("../data/cabinet.toml");

/// Bundled chain descriptions by name; anything else is treated as a file
/// path by the scene loader.
pub fn chain_by_name(name: &str) -> Result<ChainDescription> {
    match name {
        "ur3" => ChainDescription::from_toml_str(UR3_TOML, "bundled:ur3"),
        other => Err(Error::SceneInvalid(format!(
            "unknown bundled chain '{other}'"
        ))),
    }
}

/// Bundled human body descriptions by name.
pub fn human_by_name(name: &str) -> Result<HumanDescription> {
    match name {
        "average-adult" => HumanDescription::from_toml_str(HUMAN_TOML, "bundled:average-adult"),
        other => Err(Error::SceneInvalid(format!(
            "unknown bundled human body '{other}'"
        ))),
    }
}

/// Upper-body description file: two arm chains and a torso proxy box, all
/// in a chest-centered frame facing +x.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HumanDescription {
    pub name: String,
    pub torso: TorsoRecord,
    pub right: ChainDescription,
    pub left: ChainDescription,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorsoRecord {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
}

/// Built body: both arm chains rooted at the stance pose plus the torso
/// obstacle box in world frame.
#[derive(Clone, Debug)]
pub struct HumanBody {
    pub right: SerialChain,
    pub left: SerialChain,
    pub torso: Obb,
}

impl HumanDescription {
    pub fn from_toml_str(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: source.to_string(),
            message: e.to_string(),
        })
    }

    pub fn build(&self, stance: Pose) -> Result<HumanBody> {
        let right = self.right.build(stance)?;
        let left = self.left.build(stance)?;
        let torso_center = Vector3::new(self.torso.center[0], self.torso.center[1], self.torso.center[2]);
        let torso = Obb {
            center: stance.transform_point(&torso_center),
            rotation: stance.rotation,
            half_extents: Vector3::new(
                self.torso.half_extents[0],
                self.torso.half_extents[1],
                self.torso.half_extents[2],
            ),
        };
        Ok(HumanBody { right, left, torso })
    }
}

/// The human collaborator at their stance: arm rigs (hand as a 1-DoF
/// gripper), pad parameters, and the torso obstacle.
#[derive(Clone, Debug)]
pub struct HumanModel {
    pub right: ArmRig,
    pub left: ArmRig,
    pub torso: Obb,
    pub pad: SoftFingerParams,
    pub grip_force: f64,
    pub grasp_spacing: f64,
}

impl HumanModel {
    pub fn arms(&self) -> [(&ArmRig, Owner); 2] {
        [
            (&self.right, Owner::HumanRight),
            (&self.left, Owner::HumanLeft),
        ]
    }
}

/// One robot arm with its role in the pipeline.
#[derive(Clone, Debug)]
pub struct RobotArmModel {
    pub rig: ArmRig,
    pub owner: Owner,
    pub park: JointConfig,
    pub grip_force: f64,
    pub pad: SoftFingerParams,
}

/// A board with its initial (stacked) pose and assembly target pose.
#[derive(Clone, Debug)]
pub struct BoardInstance {
    pub spec: BoardSpec,
    pub initial: Pose,
    pub assembly: Pose,
}

impl BoardInstance {
    pub fn placed_at_assembly(&self) -> PlacedMesh {
        PlacedMesh {
            id: self.spec.id.clone(),
            mesh: self.spec.mesh.clone(),
            half_extents: self.spec.half_extents(),
            pose: self.assembly,
        }
    }
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub planning: PlanningConfig,
    #[serde(default)]
    pub obstacles: Vec<ObstacleRecord>,
    pub robot: RobotSection,
    #[serde(default)]
    pub tool: ToolRecord,
    pub human: HumanRecord,
    pub assembly_sequence: Vec<String>,
    pub boards: Vec<BoardRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSection {
    pub right: ArmRecord,
    pub left: ArmRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmRecord {
    #[serde(default = "default_chain")]
    pub chain: String,
    pub base: FilePose,
    pub role: ArmRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ready: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub park: Option<Vec<f64>>,
    #[serde(default)]
    pub gripper: GripperRecord,
}

fn default_chain() -> String {
    "ur3".to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmRole {
    Suction,
    Receiver,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperRecord {
    pub max_opening: f64,
    pub ee_length: f64,
    pub grip_force: f64,
    pub pad: PadRecord,
}

impl Default for GripperRecord {
    fn default() -> Self {
        Self {
            max_opening: 0.085,
            ee_length: 0.24,
            grip_force: 40.0,
            pad: PadRecord::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PadRecord {
    pub mu: f64,
    pub h: f64,
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Default for PadRecord {
    fn default() -> Self {
        let p = SoftFingerParams::default();
        Self {
            mu: p.mu,
            h: p.h,
            k: p.k,
            r1: p.r1,
            r2: p.r2,
        }
    }
}

impl From<PadRecord> for SoftFingerParams {
    fn from(r: PadRecord) -> Self {
        SoftFingerParams {
            mu: r.mu,
            h: r.h,
            k: r.k,
            r1: r.r1,
            r2: r.r2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolRecord {
    pub length: f64,
    pub initial: FilePose,
}

impl Default for ToolRecord {
    fn default() -> Self {
        Self {
            length: 0.15,
            initial: FilePose {
                p: [0.45, -0.35, 0.02],
                q: None,
                rpy: None,
                rpy_deg: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanRecord {
    #[serde(default = "default_body")]
    pub body: String,
    pub stance: FilePose,
    #[serde(default = "default_human_grip")]
    pub grip_force: f64,
    #[serde(default = "default_human_spacing")]
    pub grasp_spacing: f64,
    #[serde(default = "default_human_opening")]
    pub max_opening: f64,
    #[serde(default)]
    pub pad: PadRecord,
}

fn default_body() -> String {
    "average-adult".to_string()
}
fn default_human_grip() -> f64 {
    25.0
}
fn default_human_spacing() -> f64 {
    0.08
}
fn default_human_opening() -> f64 {
    0.12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRecord {
    pub id: String,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoardRecord {
    pub id: String,
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub mass: f64,
    pub initial: FilePose,
    pub assembly: FilePose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanningConfig {
    /// Candidate handover poses sampled around the assembly target.
    pub rh_samples: usize,
    /// Comfort threshold on the best human grasp for set membership.
    pub comfort_threshold: f64,
    /// Rotation weight in the distance-to-assembly metric, meters per
    /// radian.
    pub w_rot: f64,
    /// Grid pitch for robot grasp candidate generation, meters.
    pub robot_grasp_spacing: f64,
    /// Time budget per constrained planning query, seconds.
    pub plan_budget_s: f64,
    pub max_rrt_samples: usize,
    pub shortcut_attempts: usize,
    pub edge_resolution: f64,
    pub waypoint_spacing: f64,
    /// Constant joint speed used to timestamp trace waypoints, rad/s.
    pub joint_speed: f64,
    pub rr_grid: RrGrid,
}

impl Default for PlanningConfig {
    fn default() -> Self {
        Self {
            rh_samples: 120,
            comfort_threshold: 0.15,
            w_rot: 0.1,
            robot_grasp_spacing: 0.05,
            plan_budget_s: 30.0,
            max_rrt_samples: 30_000,
            shortcut_attempts: 200,
            edge_resolution: 0.02,
            waypoint_spacing: 0.05,
            joint_speed: 0.5,
            rr_grid: RrGrid::default(),
        }
    }
}

impl PlanningConfig {
    pub fn plan_params(&self) -> PlanParams {
        PlanParams {
            budget_s: self.plan_budget_s,
            max_samples: self.max_rrt_samples,
            shortcut_attempts: self.shortcut_attempts,
            edge_resolution: self.edge_resolution,
            waypoint_spacing: self.waypoint_spacing,
        }
    }
}

/// Search grid for the robot-robot handover pose: positions around
/// `center` within `extents` at `step` pitch, crossed with flat-board yaw
/// headings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RrGrid {
    pub center: [f64; 3],
    pub extents: [f64; 3],
    pub step: f64,
    pub yaws_deg: Vec<f64>,
}

impl Default for RrGrid {
    fn default() -> Self {
        Self {
            center: [0.30, 0.0, 0.24],
            extents: [0.06, 0.08, 0.04],
            step: 0.04,
            yaws_deg: vec![0.0, 90.0, 180.0, 270.0],
        }
    }
}

// ---------------------------------------------------------------------------
// Runtime model

#[derive(Clone, Debug)]
pub struct SceneModel {
    pub name: String,
    pub file: SceneFile,
    pub suction: RobotArmModel,
    pub receiver: RobotArmModel,
    pub human: HumanModel,
    pub tool_length: f64,
    pub tool_initial: Pose,
    pub boards: Vec<BoardInstance>,
    /// Indices into `boards`, in assembly order.
    pub sequence: Vec<usize>,
    pub obstacles: Vec<(String, Obb)>,
    pub planning: PlanningConfig,
}

impl SceneModel {
    pub fn from_toml_str(text: &str, source: &str, base_dir: Option<&Path>) -> Result<Self> {
        let file: SceneFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: source.to_string(),
            message: e.to_string(),
        })?;
        Self::build(file, base_dir)
    }

    /// The bundled seven-board cabinet scene.
    pub fn bundled_cabinet() -> Self {
        Self::from_toml_str(CABINET_TOML, "bundled:cabinet", None)
            .expect("bundled cabinet scene is valid")
    }

    pub fn build(file: SceneFile, base_dir: Option<&Path>) -> Result<Self> {
        let resolve_chain = |name: &str| -> Result<ChainDescription> {
            if let Ok(c) = chain_by_name(name) {
                return Ok(c);
            }
            let path = match base_dir {
                Some(dir) => dir.join(name),
                None => Path::new(name).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path)?;
            ChainDescription::from_toml_str(&text, &path.display().to_string())
        };

        let build_arm = |rec: &ArmRecord, side: &str, owner: Owner| -> Result<RobotArmModel> {
            let desc = resolve_chain(&rec.chain)?;
            let base = rec.base.to_pose(&format!("robot.{side}.base"))?;
            let mut chain = desc.build(base)?;
            if let Some(ready) = &rec.ready {
                if ready.len() != chain.dof() {
                    return Err(Error::DimensionMismatch {
                        chain: chain.name.clone(),
                        got: ready.len(),
                        expected: chain.dof(),
                    });
                }
                chain.ready = JointConfig(ready.clone());
            }
            let park = match &rec.park {
                Some(p) => {
                    let park = JointConfig(p.clone());
                    if park.len() != chain.dof() {
                        return Err(Error::DimensionMismatch {
                            chain: chain.name.clone(),
                            got: park.len(),
                            expected: chain.dof(),
                        });
                    }
                    park
                }
                None => chain.ready.clone(),
            };
            let gripper = GripperModel {
                max_opening: rec.gripper.max_opening,
                ee_length: rec.gripper.ee_length,
                ..GripperModel::default()
            };
            let pad: SoftFingerParams = rec.gripper.pad.into();
            pad.validate()?;
            Ok(RobotArmModel {
                rig: ArmRig::new(format!("robot-{side}"), chain, gripper),
                owner,
                park,
                grip_force: rec.gripper.grip_force,
                pad,
            })
        };

        let right = build_arm(&file.robot.right, "right", Owner::RobotRight)?;
        let left = build_arm(&file.robot.left, "left", Owner::RobotLeft)?;
        let (suction, receiver) = match (file.robot.right.role, file.robot.left.role) {
            (ArmRole::Suction, ArmRole::Receiver) => (right, left),
            (ArmRole::Receiver, ArmRole::Suction) => (left, right),
            (a, b) => {
                return Err(Error::SceneInvalid(format!(
                    "robot roles must be one suction and one receiver, got {a:?}/{b:?}"
                )))
            }
        };

        let stance = file.human.stance.to_pose("human.stance")?;
        let body = if file.human.body.ends_with(".toml") {
            let path = match base_dir {
                Some(dir) => dir.join(&file.human.body),
                None => Path::new(&file.human.body).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path)?;
            HumanDescription::from_toml_str(&text, &path.display().to_string())?
        } else {
            human_by_name(&file.human.body)?
        }
        .build(stance)?;
        let human_pad: SoftFingerParams = file.human.pad.into();
        human_pad.validate()?;
        let hand = GripperModel {
            max_opening: file.human.max_opening,
            ee_length: 0.08,
            palm_half_extents: Vector3::new(0.04, 0.05, 0.03),
            palm_offset: 0.06,
        };
        let human = HumanModel {
            right: ArmRig {
                link_radius: 0.05,
                ..ArmRig::new("human-right", body.right, hand.clone())
            },
            left: ArmRig {
                link_radius: 0.05,
                ..ArmRig::new("human-left", body.left, hand)
            },
            torso: body.torso,
            pad: human_pad,
            grip_force: file.human.grip_force,
            grasp_spacing: file.human.grasp_spacing,
        };

        let mut boards = Vec::new();
        for (i, rec) in file.boards.iter().enumerate() {
            let spec = BoardSpec::new(rec.id.clone(), rec.length, rec.width, rec.thickness, rec.mass)?;
            let initial = rec.initial.to_pose(&format!("boards[{i}].initial"))?;
            let assembly = rec.assembly.to_pose(&format!("boards[{i}].assembly"))?;
            boards.push(BoardInstance {
                spec,
                initial,
                assembly,
            });
        }

        // Assembly sequence must be a permutation of the boards.
        if file.assembly_sequence.len() != boards.len() {
            return Err(Error::SceneInvalid(format!(
                "assembly_sequence has {} entries for {} boards",
                file.assembly_sequence.len(),
                boards.len()
            )));
        }
        let mut sequence = Vec::with_capacity(boards.len());
        for id in &file.assembly_sequence {
            let idx = boards
                .iter()
                .position(|b| &b.spec.id == id)
                .ok_or_else(|| {
                    Error::SceneInvalid(format!("assembly_sequence names unknown board '{id}'"))
                })?;
            if sequence.contains(&idx) {
                return Err(Error::SceneInvalid(format!(
                    "assembly_sequence repeats board '{id}'"
                )));
            }
            sequence.push(idx);
        }

        // Initial poses must not interpenetrate.
        for i in 0..boards.len() {
            for j in i + 1..boards.len() {
                let a = boards[i].spec.obb_at(&boards[i].initial);
                let b = boards[j].spec.obb_at(&boards[j].initial);
                if a.intersects(&b) {
                    return Err(Error::SceneInvalid(format!(
                        "initial poses of boards '{}' and '{}' interpenetrate",
                        boards[i].spec.id, boards[j].spec.id
                    )));
                }
            }
        }

        let mut obstacles = Vec::new();
        for rec in &file.obstacles {
            let rotation = match rec.rpy {
                Some(rpy) => UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
                None => UnitQuaternion::identity(),
            };
            obstacles.push((
                rec.id.clone(),
                Obb {
                    center: Vector3::new(rec.center[0], rec.center[1], rec.center[2]),
                    rotation,
                    half_extents: Vector3::new(
                        rec.half_extents[0],
                        rec.half_extents[1],
                        rec.half_extents[2],
                    ),
                },
            ));
        }

        let tool_initial = file.tool.initial.to_pose("tool.initial")?;
        Ok(SceneModel {
            name: file.name.clone(),
            tool_length: file.tool.length,
            tool_initial,
            suction,
            receiver,
            human,
            boards,
            sequence,
            obstacles,
            planning: file.planning.clone(),
            file,
        })
    }

    /// Canonical serialization of the scene file (full-precision reals that
    /// reparse bit-exactly).
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string_pretty(&self.file).expect("scene file serializes")
    }

    /// Static obstacles plus the human torso.
    pub fn static_obstacle_set(&self) -> ObstacleSet {
        let mut set = ObstacleSet::new();
        for (id, obb) in &self.obstacles {
            set.push(id.clone(), obb.clone());
        }
        set.push("human-torso", self.human.torso.clone());
        set
    }

    /// Obstacle environment while planning the board at `seq_pos`:
    /// statics, the torso, every finished board, and the boards still
    /// waiting on the stack. Thin boards are padded to a minimum half
    /// thickness so discrete edge checks cannot hop through them; trace
    /// validation uses the same environment.
    pub fn obstacles_for(&self, seq_pos: usize, finished: &[PlacedMesh]) -> ObstacleSet {
        let pad = |mut obb: crate::collision::Obb| {
            obb.half_extents = obb.half_extents.map(|h| h.max(0.010));
            obb
        };
        let mut set = self.static_obstacle_set();
        for m in finished {
            set.push(format!("finished-{}", m.id), pad(m.obb()));
        }
        for &later in &self.sequence[seq_pos + 1..] {
            let b = &self.boards[later];
            set.push(
                format!("stacked-{}", b.spec.id),
                pad(b.spec.obb_at(&b.initial)),
            );
        }
        set
    }

    pub fn board_by_id(&self, id: &str) -> Option<&BoardInstance> {
        self.boards.iter().find(|b| b.spec.id == id)
    }
}

/// Load and validate a scene file from disk.
pub fn load_scene(path: &Path) -> Result<SceneModel> {
    let text = std::fs::read_to_string(path)?;
    SceneModel::from_toml_str(&text, &path.display().to_string(), path.parent())
}

/// A single-board test scene with the standard dual-arm bench layout:
/// table top at z = 0, arm bases frame-mounted at z = 0.40 and
/// y = -/+0.24, the human across the table.
pub fn bench_scene(boards: Vec<(BoardSpec, Pose, Pose)>) -> SceneModel {
    let records: Vec<BoardRecord> = boards
        .iter()
        .map(|(spec, initial, assembly)| BoardRecord {
            id: spec.id.clone(),
            length: spec.length,
            width: spec.width,
            thickness: spec.thickness,
            mass: spec.mass,
            initial: FilePose::from_pose(initial),
            assembly: FilePose::from_pose(assembly),
        })
        .collect();
    let sequence = records.iter().map(|r| r.id.clone()).collect();
    let file = SceneFile {
        name: "bench".to_string(),
        description: String::new(),
        planning: PlanningConfig {
            rh_samples: 60,
            plan_budget_s: 10.0,
            comfort_threshold: 0.04,
            rr_grid: RrGrid {
                center: [0.30, 0.0, 0.20],
                ..RrGrid::default()
            },
            ..PlanningConfig::default()
        },
        obstacles: vec![ObstacleRecord {
            id: "table".to_string(),
            center: [0.32, 0.0, -0.031],
            half_extents: [0.85, 0.75, 0.03],
            rpy: None,
        }],
        robot: RobotSection {
            right: ArmRecord {
                chain: "ur3".to_string(),
                base: FilePose {
                    p: [0.0, -0.24, 0.40],
                    q: None,
                    rpy: None,
                    rpy_deg: None,
                },
                role: ArmRole::Suction,
                ready: None,
                park: Some(vec![-1.9, -2.2, 2.2, -1.57, -1.57, 0.0]),
                gripper: GripperRecord {
                    grip_force: CALIBRATED_GRIP_FORCE,
                    ..GripperRecord::default()
                },
            },
            left: ArmRecord {
                chain: "ur3".to_string(),
                base: FilePose {
                    p: [0.0, 0.24, 0.40],
                    q: None,
                    rpy: None,
                    rpy_deg: None,
                },
                role: ArmRole::Receiver,
                ready: Some(vec![-2.4, -0.9, 1.2, -1.8, -1.57, 0.0]),
                park: Some(vec![1.9, -0.94, -2.2, -1.57, 1.57, 0.0]),
                gripper: GripperRecord {
                    grip_force: CALIBRATED_GRIP_FORCE,
                    ..GripperRecord::default()
                },
            },
        },
        tool: ToolRecord::default(),
        human: HumanRecord {
            body: "average-adult".to_string(),
            stance: FilePose {
                p: [0.86, 0.12, 0.42],
                rpy: Some([0.0, 0.0, std::f64::consts::PI]),
                q: None,
                rpy_deg: None,
            },
            grip_force: 2500.0,
            grasp_spacing: 0.08,
            max_opening: 0.12,
            pad: PadRecord::default(),
        },
        assembly_sequence: sequence,
        boards: records,
    };
    SceneModel::build(file, None).expect("bench scene is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_chain_parses_and_builds() {
        let chain = chain_by_name("ur3").unwrap().build(Pose::identity()).unwrap();
        assert_eq!(chain.dof(), 6);
        assert!(chain.home_pose.position.norm() > 0.1);
    }

    #[test]
    fn bundled_human_parses_and_builds() {
        let body = human_by_name("average-adult")
            .unwrap()
            .build(Pose::identity())
            .unwrap();
        assert_eq!(body.right.dof(), 7);
        assert_eq!(body.left.dof(), 7);
        // Shoelaces: zero config of both arms hangs the hand 0.615 m under
        // the shoulder.
        let fk = body.right.forward_kinematics(&JointConfig(vec![0.0; 7])).unwrap();
        assert!((fk.position - Vector3::new(0.0, -0.185, -0.615)).norm() < 1e-9);
    }

    #[test]
    fn bundled_cabinet_matches_published_board_table() {
        let scene = SceneModel::bundled_cabinet();
        assert_eq!(scene.boards.len(), 7);
        assert_eq!(scene.sequence.len(), 7);
        let count = |pred: &dyn Fn(&BoardInstance) -> bool| {
            scene.boards.iter().filter(|b| pred(b)).count()
        };
        // Three medium boards at the published dimensions and mass.
        assert_eq!(
            count(&|b| (b.spec.length - 0.587).abs() < 1e-9
                && (b.spec.width - 0.295).abs() < 1e-9
                && (b.spec.thickness - 0.010).abs() < 1e-9
                && (b.spec.mass - 1.8).abs() < 1e-9),
            3
        );
        // Two small boards at the published dimensions and mass.
        assert_eq!(
            count(&|b| (b.spec.length - 0.397).abs() < 1e-9
                && (b.spec.width - 0.280).abs() < 1e-9
                && (b.spec.thickness - 0.003).abs() < 1e-9
                && (b.spec.mass - 0.22).abs() < 1e-9),
            2
        );
        // Two large lateral boards, heavier and longer than the mediums.
        assert_eq!(count(&|b| b.spec.mass > 1.8 && b.spec.length > 0.587), 2);
    }

    #[test]
    fn non_unit_quaternion_is_rejected_by_field_name() {
        let mut scene = SceneModel::bundled_cabinet().file;
        scene.boards[0].initial = FilePose {
            p: [0.0, 0.0, 0.0],
            q: Some([1.01, 0.0, 0.0, 0.0]),
            rpy: None,
            rpy_deg: None,
        };
        match SceneModel::build(scene, None) {
            Err(Error::QuaternionNotNormalized { field, .. }) => {
                assert_eq!(field, "boards[0].initial");
            }
            other => panic!("expected quaternion rejection, got {other:?}"),
        }
    }

    #[test]
    fn omitted_sections_fill_documented_defaults() {
        let text = r#"
name = "minimal"
assembly_sequence = ["b"]

[robot.right]
role = "suction"
base = { p = [0.0, -0.24, 0.0] }

[robot.left]
role = "receiver"
base = { p = [0.0, 0.24, 0.0] }

[human]
stance = { p = [0.86, 0.12, 0.42], rpy = [0.0, 0.0, 3.141592653589793] }

[[boards]]
id = "b"
length = 0.397
width = 0.280
thickness = 0.003
mass = 0.22
initial = { p = [0.30, -0.18, 0.012] }
assembly = { p = [0.42, 0.25, 0.25] }
"#;
        let scene = SceneModel::from_toml_str(text, "inline", None).unwrap();
        assert_eq!(scene.receiver.pad.mu, 0.8);
        assert_eq!(scene.human.grip_force, 25.0);
        assert_eq!(scene.planning.comfort_threshold, 0.15);
        assert_eq!(scene.tool_length, 0.15);
    }

    #[test]
    fn interpenetrating_initial_poses_are_rejected() {
        let mut file = SceneModel::bundled_cabinet().file;
        file.boards[1].initial = file.boards[0].initial.clone();
        match SceneModel::build(file, None) {
            Err(Error::SceneInvalid(msg)) => assert!(msg.contains("interpenetrate")),
            other => panic!("expected interpenetration error, got {other:?}"),
        }
    }

    #[test]
    fn sequence_must_be_permutation() {
        let mut file = SceneModel::bundled_cabinet().file;
        let first = file.assembly_sequence[0].clone();
        file.assembly_sequence[1] = first;
        assert!(SceneModel::build(file, None).is_err());
    }

    #[test]
    fn scene_roundtrips_through_canonical_serialization() {
        let scene = SceneModel::bundled_cabinet();
        let text = scene.to_canonical_toml();
        let back = SceneModel::from_toml_str(&text, "roundtrip", None).unwrap();
        assert_eq!(scene.file, back.file, "field-wise identical after reload");
    }
}
