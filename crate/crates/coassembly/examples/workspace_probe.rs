//! Development probe: reachability and comfort statistics over the bench
//! layout, used to tune base placement, grids, and thresholds.

use coassembly::comfort::{score_human_grasps, GOAL_ROT_BOUND};
use coassembly::grasp::{feasible_grasps, generate_candidates, BoardSpec};
use coassembly::handover::suction_tcp_target;
use coassembly::scene::bench_scene;
use coassembly::se3::{sample_pose_near, Pose};
use nalgebra::{UnitQuaternion, Vector3};

fn main() {
    let board = BoardSpec::new("medium", 0.587, 0.295, 0.010, 1.8).unwrap();
    let scene = bench_scene(vec![(
        board.clone(),
        Pose::from_translation(0.30, -0.14, 0.007),
        Pose::from_translation(0.42, 0.28, 0.25),
    )]);
    let obstacles = scene.static_obstacle_set();

    println!("== ready-pose TCPs ==");
    for (label, arm) in [("suction", &scene.suction), ("receiver", &scene.receiver)] {
        let fk = arm.rig.chain.forward_kinematics(&arm.rig.chain.ready).unwrap();
        let park = arm.rig.chain.forward_kinematics(&arm.park).unwrap();
        println!(
            "{label}: ready tcp [{:.3} {:.3} {:.3}], park tcp [{:.3} {:.3} {:.3}]",
            fk.position.x, fk.position.y, fk.position.z, park.position.x, park.position.y, park.position.z
        );
        let links = arm.rig.link_obbs(&arm.park).unwrap();
        let hits = links.iter().filter(|l| obstacles.hits_any(l)).count();
        println!("{label}: park link obstacle hits = {hits}");
    }

    println!("== suction reach at stack ==");
    for z in [0.007, 0.03, 0.06, 0.075] {
        let pose = Pose::from_translation(0.30, -0.14, z);
        let ok = scene
            .suction
            .rig
            .solve_ik(&suction_tcp_target(&board, &pose, scene.tool_length))
            .is_ok();
        println!("stack z={z:.3}: suction ik ok = {ok}");
    }

    println!("== receiving grasp counts over rr grid ==");
    let batch = generate_candidates(
        &board,
        scene.receiver.owner,
        scene.planning.robot_grasp_spacing,
        scene.receiver.rig.gripper.max_opening,
    );
    for z in [0.12, 0.16, 0.20, 0.24, 0.28] {
        for x in [0.22, 0.30, 0.38] {
            for yaw_deg in [0.0f64, 90.0] {
                let pose = Pose::new(
                    Vector3::new(x, 0.0, z),
                    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw_deg.to_radians()),
                );
                let suction_ok = scene
                    .suction
                    .rig
                    .solve_ik(&suction_tcp_target(&board, &pose, scene.tool_length))
                    .is_ok();
                let set = feasible_grasps(&board, &pose, &batch.candidates, &scene.receiver.rig, &obstacles);
                println!(
                    "rr x={x:.2} z={z:.2} yaw={yaw_deg:3.0}: suction={} grasps={}",
                    suction_ok as u8,
                    set.entries.len()
                );
            }
        }
    }

    println!("== robot receiving grasps near assembly ball ==");
    let assembly = Pose::from_translation(0.42, 0.28, 0.25);
    let mut reachable = 0;
    for seed in 0..40u64 {
        let pose = sample_pose_near(&assembly, GOAL_ROT_BOUND, 0.5, seed);
        let set = feasible_grasps(&board, &pose, &batch.candidates, &scene.receiver.rig, &obstacles);
        if !set.entries.is_empty() {
            reachable += 1;
        }
    }
    println!("robot-feasible sampled poses: {reachable}/40");

    println!("== human comfort around assembly ==");
    let mut best_scores = Vec::new();
    for seed in 0..40u64 {
        let pose = sample_pose_near(&assembly, GOAL_ROT_BOUND, 0.5, seed);
        let scores = score_human_grasps(&board, &pose, &scene.human);
        if let Some(best) = scores.iter().map(|s| s.value).reduce(f64::max) {
            best_scores.push(best);
        }
    }
    best_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "human-feasible poses: {}/40, best-score quartiles: {:?}",
        best_scores.len(),
        if best_scores.is_empty() {
            vec![]
        } else {
            vec![
                best_scores[0],
                best_scores[best_scores.len() / 4],
                best_scores[best_scores.len() / 2],
                best_scores[3 * best_scores.len() / 4],
                *best_scores.last().unwrap(),
            ]
        }
    );
}
