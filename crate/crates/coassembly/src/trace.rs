//! Plan traces: the multi-board assembly driver, trace serialization, and
//! trace re-validation against a scene.

use serde::{Deserialize, Serialize};

use crate::collision::PlacedMesh;
use crate::error::Result;
use crate::grasp::GraspCandidate;
use crate::handover::{
    build_handover_plan, suction_attachments, HandoverDiagnostics, HandoverPlanStep, StepKind,
    SuctionAttach,
};
use crate::kinematics::JointConfig;
use crate::planner::{
    validate_plan, InclinationConstraint, MotionPlan, ObjectAttachment, PlanContext,
};
use crate::scene::SceneModel;
use crate::se3::PoseRecord;

/// Serialized joint path with timestamps under a constant joint-speed
/// model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MotionRecord {
    pub arm: String,
    /// Inclination limit the path was planned under, radians.
    pub limit: f64,
    pub waypoints: Vec<Vec<f64>>,
    pub timestamps: Vec<f64>,
}

impl MotionRecord {
    pub fn from_plan(plan: &MotionPlan, joint_speed: f64) -> Self {
        let mut timestamps = Vec::with_capacity(plan.waypoints.len());
        let mut t = 0.0;
        timestamps.push(0.0);
        for pair in plan.waypoints.windows(2) {
            let step = pair[0]
                .0
                .iter()
                .zip(&pair[1].0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            t += step / joint_speed;
            timestamps.push(t);
        }
        Self {
            arm: plan.arm.clone(),
            limit: plan.constraint.limit,
            waypoints: plan.waypoints.iter().map(|w| w.0.clone()).collect(),
            timestamps,
        }
    }

    pub fn to_plan(&self) -> MotionPlan {
        MotionPlan {
            arm: self.arm.clone(),
            waypoints: self.waypoints.iter().map(|w| JointConfig(w.clone())).collect(),
            constraint: InclinationConstraint { limit: self.limit },
            object_binding: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: StepKind,
    pub actor: String,
    pub board: String,
    pub start: PoseRecord,
    pub end: PoseRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grasp: Option<GraspCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suction: Option<SuctionAttach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionRecord>,
}

impl StepRecord {
    pub fn from_handover_step(step: &HandoverPlanStep, joint_speed: f64) -> Self {
        Self {
            kind: step.kind,
            actor: step.actor.clone(),
            board: step.board.clone(),
            start: PoseRecord::from_pose(&step.start),
            end: PoseRecord::from_pose(&step.end),
            grasp: step.grasp.clone(),
            suction: step.suction.clone(),
            motion: step
                .motion
                .as_ref()
                .map(|m| MotionRecord::from_plan(m, joint_speed)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoardTraceRecord {
    pub board: String,
    pub steps: Vec<StepRecord>,
    pub diagnostics: HandoverDiagnostics,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub board: String,
    pub message: String,
}

/// Full output of one assembly run. `failure`, when set, names the board
/// the run stopped at; boards after it are absent (fail-fast).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanTrace {
    pub scene: String,
    pub seed: u64,
    pub boards: Vec<BoardTraceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureRecord>,
}

impl PlanTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse {
            path: "trace".to_string(),
            message: e.to_string(),
        })
    }
}

/// Run the assembly sequence: plan each board's handover pipeline, then
/// append the board at its assembly pose to the finished set before moving
/// on. Stops at the first board that fails.
pub fn run_assembly(scene: &SceneModel, seed: u64) -> PlanTrace {
    let mut trace = PlanTrace {
        scene: scene.name.clone(),
        seed,
        boards: Vec::new(),
        failure: None,
    };
    let mut finished: Vec<PlacedMesh> = Vec::new();
    for (pos, &board_idx) in scene.sequence.iter().enumerate() {
        let board = &scene.boards[board_idx];
        let obstacles = scene.obstacles_for(pos, &finished);
        let sub_seed = seed.wrapping_add(pos as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        match build_handover_plan(
            scene,
            &board.spec,
            &board.initial,
            &board.assembly,
            &obstacles,
            &finished,
            sub_seed,
        ) {
            Ok((steps, diagnostics)) => {
                trace.boards.push(BoardTraceRecord {
                    board: board.spec.id.clone(),
                    steps: steps
                        .iter()
                        .map(|s| StepRecord::from_handover_step(s, scene.planning.joint_speed))
                        .collect(),
                    diagnostics,
                });
                finished.push(board.placed_at_assembly());
            }
            Err(e) => {
                trace.failure = Some(FailureRecord {
                    board: board.spec.id.clone(),
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    trace
}

/// One finding from trace validation.
#[derive(Clone, Debug, Serialize)]
pub struct TraceFinding {
    pub board: String,
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceValidation {
    pub pass: bool,
    pub findings: Vec<TraceFinding>,
}

/// Re-validate an emitted trace against its scene: step chaining, the
/// expected step sequence, and a dense kinematic/constraint/collision
/// re-check of every bound motion under the same obstacle environment the
/// planner saw.
pub fn validate_trace(trace: &PlanTrace, scene: &SceneModel, resolution: f64) -> TraceValidation {
    let mut findings = Vec::new();
    let mut finished: Vec<PlacedMesh> = Vec::new();

    for (pos, record) in trace.boards.iter().enumerate() {
        let mut push = |check: &str, pass: bool, detail: Option<String>| {
            findings.push(TraceFinding {
                board: record.board.clone(),
                check: check.to_string(),
                pass,
                detail,
            });
        };

        let Some(board) = scene.board_by_id(&record.board) else {
            push("board-known", false, Some("board not in scene".into()));
            continue;
        };
        let seq_ok = scene
            .sequence
            .get(pos)
            .map(|&i| scene.boards[i].spec.id == record.board)
            .unwrap_or(false);
        push("sequence-order", seq_ok, None);

        let kinds: Vec<StepKind> = record.steps.iter().map(|s| s.kind).collect();
        let expected = [
            StepKind::SuctionPick,
            StepKind::RobotRobotTransfer,
            StepKind::ConstrainedMove,
            StepKind::HumanRelease,
        ];
        push("step-sequence", kinds == expected, Some(format!("{kinds:?}")));

        let mut chained = true;
        for pair in record.steps.windows(2) {
            let end = pair[0].end.clone();
            let start = pair[1].start.clone();
            if end != start {
                chained = false;
            }
        }
        push("step-chaining", chained, None);

        let obstacles = scene.obstacles_for(pos, &finished);
        for step in &record.steps {
            let Some(motion) = &step.motion else { continue };
            let plan = motion.to_plan();
            let (arm_model, parked) = if motion.arm == scene.suction.rig.id {
                (&scene.suction, &scene.receiver)
            } else {
                (&scene.receiver, &scene.suction)
            };
            let mut env = obstacles.clone();
            if let Ok(links) = parked.rig.link_obbs(&parked.park) {
                for (i, l) in links.into_iter().enumerate() {
                    env.push(format!("parked-{i}"), l);
                }
            }
            let attachments: Vec<ObjectAttachment> = match step.kind {
                StepKind::SuctionPick => suction_attachments(&board.spec, scene.tool_length),
                StepKind::ConstrainedMove => step
                    .grasp
                    .as_ref()
                    .map(|g| vec![ObjectAttachment::for_grasp(&board.spec, g)])
                    .unwrap_or_default(),
                _ => Vec::new(),
            };
            let ctx = PlanContext {
                arm: &arm_model.rig,
                constraint: InclinationConstraint { limit: motion.limit },
                obstacles: &env,
                attachments: &attachments,
            };
            let report = validate_plan(&plan, &ctx, resolution);
            push(
                &format!("{:?}-motion", step.kind),
                report.pass,
                report.first_violation_at.map(|at| format!("violation at {at:.3}")),
            );

            // The bound grasp matches the path endpoints kinematically.
            if step.kind == StepKind::ConstrainedMove {
                if let (Some(grasp), Some(first), Some(last)) = (
                    step.grasp.as_ref(),
                    plan.waypoints.first(),
                    plan.waypoints.last(),
                ) {
                    let ok = grasp_matches(arm_model, &step.start, grasp, first)
                        && grasp_matches(arm_model, &step.end, grasp, last);
                    push("grasp-binding", ok, None);
                }
            }
        }

        finished.push(board.placed_at_assembly());
    }

    TraceValidation {
        pass: findings.iter().all(|f| f.pass),
        findings,
    }
}

fn grasp_matches(
    arm: &crate::scene::RobotArmModel,
    board_pose: &PoseRecord,
    grasp: &GraspCandidate,
    q: &JointConfig,
) -> bool {
    let Ok(pose) = board_pose.to_pose("step pose") else {
        return false;
    };
    let tcp = crate::grasp::grasp_tcp_pose(&pose, grasp);
    let Ok(fk) = arm.rig.chain.forward_kinematics(q) else {
        return false;
    };
    (fk.position - tcp.position).norm() < 10.0 * crate::kinematics::IK_POS_TOL
        && crate::se3::rotation_distance(&fk.rotation, &tcp.rotation)
            < 10.0 * crate::kinematics::IK_ROT_TOL
}
